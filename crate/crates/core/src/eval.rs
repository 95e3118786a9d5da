//! Keypoint error evaluation against ground truth.
//!
//! Predictions are given at network resolution, either as keypoints or as one
//! heatmap per channel. Errors are Euclidean distances measured after mapping
//! both points to the frame's native resolution without rounding.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{KeypointAnnotation, KeypointKind, Keypoints};
use crate::error::{Error, Result};
use crate::geometry::{ImageDims, Point};
use crate::grid::Grid;

pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 80.0;

/// Location of the maximum; ties go to the smallest row-major index.
pub fn heatmap_to_keypoint(grid: &Grid) -> Result<Point> {
    let mut best = 0usize;
    let mut best_v = f32::NEG_INFINITY;
    for (i, &v) in grid.as_slice().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteHeatmap);
        }
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    Ok(Point::new((best % grid.width()) as i32, (best / grid.width()) as i32))
}

/// Euclidean distance at native resolution between two net-resolution points.
pub fn keypoint_error(pred: Point, gt: Point, net: ImageDims, native: ImageDims) -> Result<f64> {
    ImageDims::new(net.width, net.height)?;
    ImageDims::new(native.width, native.height)?;
    let sx = f64::from(native.width) / f64::from(net.width);
    let sy = f64::from(native.height) / f64::from(net.height);
    let dx = f64::from(pred.x - gt.x) * sx;
    let dy = f64::from(pred.y - gt.y) * sy;
    Ok(dx.hypot(dy))
}

/// Error between a net-resolution prediction and a native-resolution ground
/// truth point.
fn error_to_native(pred: Point, gt_native: Point, net: ImageDims, native: ImageDims) -> f64 {
    let sx = f64::from(native.width) / f64::from(net.width);
    let sy = f64::from(native.height) / f64::from(net.height);
    let dx = f64::from(pred.x) * sx - f64::from(gt_native.x);
    let dy = f64::from(pred.y) * sy - f64::from(gt_native.y);
    dx.hypot(dy)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictionSource {
    Keypoints(Keypoints),
    /// One heatmap per channel, in channel order.
    Heatmaps([PathBuf; 3]),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub image: String,
    pub source: PredictionSource,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrediction {
    image: String,
    keypoints: Option<Keypoints>,
    heatmaps: Option<[PathBuf; 3]>,
}

/// Resolved prediction: three keypoints at network resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub image: String,
    pub keypoints: Keypoints,
}

impl PredictionRecord {
    /// Reads heatmaps (relative paths resolve against `base`) and extracts keypoints.
    pub fn resolve(&self, base: &Path) -> Result<Prediction> {
        let keypoints = match &self.source {
            PredictionSource::Keypoints(k) => *k,
            PredictionSource::Heatmaps(paths) => {
                let mut pts = [Point::new(0, 0); 3];
                for (pt, p) in pts.iter_mut().zip(paths) {
                    *pt = heatmap_to_keypoint(&Grid::load_pgm(&base.join(p))?)?;
                }
                Keypoints {
                    vanishing: pts[KeypointKind::Vanishing.channel()],
                    right: pts[KeypointKind::Right.channel()],
                    left: pts[KeypointKind::Left.channel()],
                }
            }
        };
        Ok(Prediction {
            image: self.image.clone(),
            keypoints,
        })
    }
}

pub fn parse_predictions(text: &str, origin: &str) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: origin.to_string(),
            line: idx + 1,
            msg,
        };
        let raw: RawPrediction = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let source = match (raw.keypoints, raw.heatmaps) {
            (Some(k), None) => PredictionSource::Keypoints(k),
            (None, Some(h)) => PredictionSource::Heatmaps(h),
            _ => return Err(err("expected exactly one of `keypoints` or `heatmaps`".into())),
        };
        out.push(PredictionRecord { image: raw.image, source });
    }
    Ok(out)
}

/// Loads a predictions file and resolves every record to keypoints.
pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_predictions(&text, &path.display().to_string())?
        .iter()
        .map(|r| r.resolve(base))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameErrors {
    pub image: String,
    pub sequence: String,
    pub frame: u64,
    pub vanishing: f64,
    pub left: f64,
    pub right: f64,
    pub mean: f64,
}

impl FrameErrors {
    pub fn per_keypoint(&self) -> [f64; 3] {
        [self.vanishing, self.left, self.right]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMean {
    pub sequence: String,
    pub frames: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub overall: f64,
    pub vanishing: f64,
    pub left: f64,
    pub right: f64,
    pub sequences: Vec<SequenceMean>,
    pub outlier_threshold: f64,
    /// Per-keypoint errors strictly above the threshold.
    pub outlier_count: usize,
    pub frames: Vec<FrameErrors>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Scores predictions against ground-truth frames. Ground-truth keypoints are
/// at each frame's native resolution; predictions are at `net` resolution.
pub fn evaluate_run(
    gts: &[KeypointAnnotation],
    preds: &[Prediction],
    net: ImageDims,
    outlier_threshold: f64,
) -> Result<EvalSummary> {
    ImageDims::new(net.width, net.height)?;
    let mut by_image: HashMap<&str, &Prediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        if by_image.insert(p.image.as_str(), p).is_some() {
            return Err(Error::DuplicatePrediction(p.image.clone()));
        }
    }
    let missing: Vec<String> = gts
        .iter()
        .filter(|g| !by_image.contains_key(g.image.as_str()))
        .map(|g| g.image.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPrediction(missing));
    }

    let mut frames = Vec::with_capacity(gts.len());
    for gt in gts {
        let pred = by_image[gt.image.as_str()];
        pred.keypoints.check_within(net)?;
        let e = |kind| error_to_native(pred.keypoints.get(kind), gt.keypoints.get(kind), net, gt.dims);
        let vanishing = e(KeypointKind::Vanishing);
        let left = e(KeypointKind::Left);
        let right = e(KeypointKind::Right);
        frames.push(FrameErrors {
            image: gt.image.clone(),
            sequence: gt.sequence.clone(),
            frame: gt.frame,
            vanishing,
            left,
            right,
            mean: (vanishing + left + right) / 3.0,
        });
    }

    let mut sequences: Vec<SequenceMean> = Vec::new();
    let mut seq_index: HashMap<&str, usize> = HashMap::new();
    let mut seq_sums: Vec<f64> = Vec::new();
    for f in &frames {
        let i = *seq_index.entry(f.sequence.as_str()).or_insert_with(|| {
            sequences.push(SequenceMean {
                sequence: f.sequence.clone(),
                frames: 0,
                mean: 0.0,
            });
            seq_sums.push(0.0);
            sequences.len() - 1
        });
        sequences[i].frames += 1;
        seq_sums[i] += f.mean;
    }
    for (s, sum) in sequences.iter_mut().zip(&seq_sums) {
        s.mean = sum / s.frames as f64;
    }

    let outlier_count = count_outliers(&frames, outlier_threshold);

    Ok(EvalSummary {
        overall: mean(frames.iter().map(|f| f.mean)),
        vanishing: mean(frames.iter().map(|f| f.vanishing)),
        left: mean(frames.iter().map(|f| f.left)),
        right: mean(frames.iter().map(|f| f.right)),
        sequences,
        outlier_threshold,
        outlier_count,
        frames,
    })
}

/// Number of per-keypoint errors strictly greater than `threshold`.
pub fn count_outliers(frames: &[FrameErrors], threshold: f64) -> usize {
    frames
        .iter()
        .flat_map(|f| f.per_keypoint())
        .filter(|&e| e > threshold)
        .count()
}

/// Averages of per-run summaries, for reporting over repeated training runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunsAggregate {
    pub runs: usize,
    pub overall: f64,
    pub vanishing: f64,
    pub left: f64,
    pub right: f64,
    pub outlier_count: f64,
}

pub fn mean_of_runs(runs: &[EvalSummary]) -> Result<RunsAggregate> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("no runs to aggregate"));
    }
    Ok(RunsAggregate {
        runs: runs.len(),
        overall: mean(runs.iter().map(|r| r.overall)),
        vanishing: mean(runs.iter().map(|r| r.vanishing)),
        left: mean(runs.iter().map(|r| r.left)),
        right: mean(runs.iter().map(|r| r.right)),
        outlier_count: mean(runs.iter().map(|r| r.outlier_count as f64)),
    })
}

/// One table column: header plus (average, vanishing, left, right, outliers).
pub struct TableColumn {
    pub header: String,
    pub values: [f64; 4],
    pub outliers: f64,
}

impl From<(&str, &EvalSummary)> for TableColumn {
    fn from((header, s): (&str, &EvalSummary)) -> Self {
        Self {
            header: header.to_string(),
            values: [s.overall, s.vanishing, s.left, s.right],
            outliers: s.outlier_count as f64,
        }
    }
}

impl From<(&str, &RunsAggregate)> for TableColumn {
    fn from((header, a): (&str, &RunsAggregate)) -> Self {
        Self {
            header: header.to_string(),
            values: [a.overall, a.vanishing, a.left, a.right],
            outliers: a.outlier_count,
        }
    }
}

/// Plain-text table with rows Average / Vanishing / Left / Right / Outliers.
pub fn format_table(columns: &[TableColumn], outlier_threshold: f64) -> String {
    let outlier_label = format!("Outliers (>{outlier_threshold})");
    let labels = ["Average", "Vanishing", "Left", "Right", outlier_label.as_str()];
    let label_w = labels.iter().map(|l| l.len()).max().unwrap_or(0);
    let cells: Vec<Vec<String>> = columns
        .iter()
        .map(|c| {
            let mut v: Vec<String> = c.values.iter().map(|x| format!("{x:.1}")).collect();
            v.push(if c.outliers.fract() == 0.0 {
                format!("{}", c.outliers as u64)
            } else {
                format!("{:.1}", c.outliers)
            });
            v
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .zip(&cells)
        .map(|(c, v)| v.iter().map(String::len).chain([c.header.len()]).max().unwrap_or(0))
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:label_w$}", "");
    for (c, w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {:>w$}", c.header);
    }
    out.push('\n');
    for (row, label) in labels.iter().enumerate() {
        let _ = write!(out, "{label:label_w$}");
        for (col, w) in cells.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", col[row]);
        }
        out.push('\n');
    }
    out
}
