//! `cacut` command-line front end.
//!
//! Exit codes: 0 success, 2 usage errors, 1 data or runtime errors. Results
//! go to files (written atomically) or standard output; progress and
//! diagnostics go to standard error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{augment_image, resize_bilinear, AugmentRecord, ImageBuffer};
use crate::config::AugmentConfig;
use crate::dataset::{load_manifest, scale_keypoints, split_by_sequence, write_manifest, KeypointAnnotation, Keypoints};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_run, format_table, load_predictions, mean_of_runs, EvalSummary, RunsAggregate, TableColumn,
    DEFAULT_OUTLIER_THRESHOLD,
};
use crate::fsutil::write_atomic;
use crate::geometry::ImageDims;
use crate::grid::Grid;
use crate::presets::get_preset;
use crate::sampler::{image_seed, image_stream, plan_masks, sampling_diagnostics};
use crate::viz::{render_error_plot, render_overlay, OverlaySpec, PlotOptions};

#[derive(Debug, Parser)]
#[command(name = "cacut", version, about = "Crop-aligned cutout augmentation and keypoint evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment every frame of a manifest into PNG images with JSON sidecars
    Augment(AugmentArgs),
    /// Split a manifest per sequence into train.jsonl and val.jsonl
    Split(SplitArgs),
    /// Score predictions against ground truth at native resolution
    Eval(EvalArgs),
    /// Print mask sampling diagnostics as JSON
    Stats(StatsArgs),
    /// Render heatmap overlays or error plots
    #[command(subcommand)]
    Viz(VizCommand),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Named configuration to start from
    #[arg(long, default_value = "ca-cut-k5")]
    preset: String,
    /// TOML file of key = value overrides, applied after the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one field, e.g. `--set sigma=50` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed (defaults to the preset's seed)
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Directory image paths are relative to (defaults to the manifest's directory)
    #[arg(long)]
    images_root: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Ground-truth manifest (typically val.jsonl)
    #[arg(long)]
    manifest: PathBuf,
    /// Predictions JSONL; repeat once per run to also get the mean over runs
    #[arg(long, required = true)]
    predictions: Vec<PathBuf>,
    #[arg(long, default_value_t = 320)]
    net_width: u32,
    #[arg(long, default_value_t = 240)]
    net_height: u32,
    #[arg(long, default_value_t = DEFAULT_OUTLIER_THRESHOLD)]
    threshold: f64,
    /// Also write the full report as JSON to this path
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Plans drawn per frame
    #[arg(long, default_value_t = 100)]
    repeat: u64,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Subcommand)]
enum VizCommand {
    /// Overlay three channel heatmaps (16-bit PGM) on an image
    Overlay {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, num_args = 3, value_names = ["VANISHING", "RIGHT", "LEFT"])]
        heatmaps: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        kernel: usize,
        #[arg(long, default_value_t = 2)]
        passes: usize,
        #[arg(long, default_value_t = 0.6)]
        alpha: f32,
    },
    /// Plot per-frame errors from an `eval --json` report as SVG
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Which run of the report to plot
        #[arg(long, default_value_t = 0)]
        run: usize,
        /// Omit points above this error
        #[arg(long)]
        y_clip: Option<f64>,
    },
}

/// JSON report written by `eval --json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub runs: Vec<EvalSummary>,
    pub aggregate: Option<RunsAggregate>,
}

/// Per-image JSON sidecar written next to each augmented PNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub source: String,
    pub index: u64,
    /// Keypoints at network resolution after any flip.
    pub keypoints: Keypoints,
    pub record: AugmentRecord,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Parses `argv` (including the program name) and runs one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Augment(a) => cmd_augment(a),
        Command::Split(a) => cmd_split(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Viz(v) => cmd_viz(v),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn build_config(args: &ConfigArgs) -> Result<AugmentConfig, Failure> {
    let usage = |e: Error| Failure::Usage(e.to_string());
    let mut cfg = get_preset(&args.preset).map_err(usage)?;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_toml(&text).map_err(usage)?;
    }
    for o in &args.overrides {
        cfg.apply_override(o).map_err(usage)?;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn resolve(root: &Path, image: &str) -> PathBuf {
    let p = Path::new(image);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn augment_one(index: u64, ann: &KeypointAnnotation, root: &Path, out: &Path, cfg: &AugmentConfig) -> Result<()> {
    let img = ImageBuffer::load(&resolve(root, &ann.image))?;
    let seed = image_seed(cfg.master_seed, index);
    let result = augment_image(&img, ann, cfg, seed)?;
    let stem = format!("{index:06}");
    result.image.save_png(&out.join(format!("{stem}.png")))?;
    let sidecar = Sidecar {
        source: ann.image.clone(),
        index,
        keypoints: result.keypoints,
        record: result.record,
    };
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    write_atomic(&out.join(format!("{stem}.json")), &json)
}

fn cmd_augment(args: AugmentArgs) -> Result<(), Failure> {
    let cfg = build_config(&args.config)?;
    if args.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let anns = load_manifest(&args.manifest)?;
    let root = args.images_root.clone().unwrap_or_else(|| manifest_dir(&args.manifest));
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut cfg_json = serde_json::to_vec_pretty(&cfg)?;
    cfg_json.push(b'\n');
    write_atomic(&args.out.join("config.json"), &cfg_json)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {} workers: {e}", args.workers)))?;
    let results: Vec<Result<()>> = pool.install(|| {
        anns.par_iter()
            .enumerate()
            .map(|(i, ann)| augment_one(i as u64, ann, &root, &args.out, &cfg))
            .collect()
    });
    // report the first failure in manifest order
    results.into_iter().collect::<Result<Vec<()>>>()?;
    eprintln!("augmented {} image(s) into {}", anns.len(), args.out.display());
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<(), Failure> {
    if !(args.train_frac > 0.0 && args.train_frac < 1.0) {
        return Err(Failure::Usage(format!("--train-frac must be in (0, 1), got {}", args.train_frac)));
    }
    let anns = load_manifest(&args.manifest)?;
    let split = split_by_sequence(&anns, args.train_frac)?;
    write_manifest(&args.out.join("train.jsonl"), &split.train)?;
    write_manifest(&args.out.join("val.jsonl"), &split.val)?;
    eprintln!("train: {} frame(s), val: {} frame(s)", split.train.len(), split.val.len());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let net = ImageDims::new(args.net_width, args.net_height).map_err(|e| Failure::Usage(e.to_string()))?;
    let gts = load_manifest(&args.manifest)?;
    let mut runs = Vec::with_capacity(args.predictions.len());
    for p in &args.predictions {
        let preds = load_predictions(p)?;
        runs.push(evaluate_run(&gts, &preds, net, args.threshold)?);
    }
    let aggregate = if runs.len() > 1 { Some(mean_of_runs(&runs)?) } else { None };
    let report = EvalReport { runs, aggregate };
    if let Some(path) = &args.json {
        let mut bytes = serde_json::to_vec_pretty(&report)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)?;
    }
    match args.format {
        Format::Json => println!("{}", serde_json::to_string(&report)?),
        Format::Table => {
            let mut cols: Vec<TableColumn> = report
                .runs
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let header = if report.runs.len() == 1 { "Error".to_string() } else { format!("run{}", i + 1) };
                    (header.as_str(), s).into()
                })
                .collect();
            if let Some(a) = &report.aggregate {
                cols.push(("mean", a).into());
            }
            print!("{}", format_table(&cols, args.threshold));
        }
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let cfg = build_config(&args.config)?;
    let anns = load_manifest(&args.manifest)?;
    let mut samples = Vec::new();
    let mut masks = Vec::new();
    for (i, ann) in anns.iter().enumerate() {
        let net = scale_keypoints(ann, ann.dims, cfg.net_dims)?;
        for r in 0..args.repeat {
            let index = i as u64 * args.repeat + r;
            let mut rng = image_stream(image_seed(cfg.master_seed, index));
            let plan = plan_masks(&net.keypoints, cfg.net_dims, &cfg, &mut rng)?;
            samples.extend(plan.samples);
            masks.extend(plan.masks);
        }
    }
    let report = sampling_diagnostics(&samples, &masks)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_viz(cmd: VizCommand) -> Result<(), Failure> {
    match cmd {
        VizCommand::Overlay {
            image,
            heatmaps,
            out,
            kernel,
            passes,
            alpha,
        } => {
            let grids = [
                Grid::load_pgm(&heatmaps[0])?,
                Grid::load_pgm(&heatmaps[1])?,
                Grid::load_pgm(&heatmaps[2])?,
            ];
            let img = ImageBuffer::load(&image)?;
            let img = resize_bilinear(&img, grids[0].dims());
            let spec = OverlaySpec {
                kernel,
                passes,
                alpha,
                ..OverlaySpec::default()
            };
            render_overlay(&img, &grids, &spec)?.save_png(&out)?;
        }
        VizCommand::Plot {
            report,
            out,
            run,
            y_clip,
        } => {
            let text = std::fs::read_to_string(&report).map_err(|e| Error::io(&report, e))?;
            let parsed: EvalReport = serde_json::from_str(&text)?;
            let summary = parsed
                .runs
                .get(run)
                .ok_or_else(|| Failure::Usage(format!("report has {} run(s), asked for {run}", parsed.runs.len())))?;
            let opts = PlotOptions {
                y_clip,
                ..PlotOptions::default()
            };
            let plot = render_error_plot(summary, &opts)?;
            write_atomic(&out, plot.svg.as_bytes())?;
            if plot.omitted > 0 {
                eprintln!("{} point(s) above the clip were omitted", plot.omitted);
            }
        }
    }
    Ok(())
}
