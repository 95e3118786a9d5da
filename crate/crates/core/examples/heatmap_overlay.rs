//! Renders dilated heatmaps over a frame and a per-frame error plot.
//!
//! Run with `cargo run --example heatmap_overlay [out_dir]`.

use std::path::PathBuf;

use cacut::eval::DEFAULT_OUTLIER_THRESHOLD;
use cacut::fsutil::write_atomic;
use cacut::viz::{dilate, render_error_plot, render_overlay, OverlaySpec, PlotOptions};
use cacut::{evaluate_run, Grid, ImageBuffer, ImageDims, KeypointAnnotation, KeypointKind, Keypoints, Point, Prediction};

pub fn run_example() -> cacut::Result<()> {
    let net = ImageDims::new(320, 240)?;
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);

    let frame = ImageBuffer::filled(net, 0.35);
    let kp = Keypoints {
        vanishing: Point::new(160, 50),
        left: Point::new(30, 239),
        right: Point::new(290, 239),
    };
    let mut maps = [Grid::zeros(320, 240), Grid::zeros(320, 240), Grid::zeros(320, 240)];
    for kind in KeypointKind::ALL {
        let p = kp.get(kind);
        maps[kind.channel()].set(p.x as usize, p.y as usize, 0.7);
    }
    let spec = OverlaySpec::default();
    let blob = dilate(&maps[0], spec.kernel, spec.passes)?;
    let lit = blob.as_slice().iter().filter(|v| **v > 0.0).count();
    println!("one peak dilated twice with a {0}x{0} kernel covers {lit} pixels", spec.kernel);

    let overlay = render_overlay(&frame, &maps, &spec)?;
    let overlay_path = out_dir.join("cacut_overlay.png");
    overlay.save_png(&overlay_path)?;
    println!("wrote {}", overlay_path.display());

    // error plot for a short two-sequence run
    let native = ImageDims::new(1280, 720)?;
    let mut gts = Vec::new();
    let mut preds = Vec::new();
    for i in 0..8u64 {
        let seq = if i < 5 { "east" } else { "west" };
        let gt = KeypointAnnotation {
            image: format!("{seq}/{i}.png"),
            sequence: seq.into(),
            dims: native,
            frame: i,
            keypoints: Keypoints {
                vanishing: Point::new(640, 200),
                left: Point::new(120, 719),
                right: Point::new(1160, 719),
            },
        };
        let drift = (i as i32 * 7) % 30;
        preds.push(Prediction {
            image: gt.image.clone(),
            keypoints: Keypoints {
                vanishing: Point::new(160 + drift, 50),
                left: Point::new(30, 239),
                right: Point::new(290 - drift / 2, 239),
            },
        });
        gts.push(gt);
    }
    let summary = evaluate_run(&gts, &preds, net, DEFAULT_OUTLIER_THRESHOLD)?;
    let plot = render_error_plot(&summary, &PlotOptions { y_clip: Some(60.0), ..PlotOptions::default() })?;
    let plot_path = out_dir.join("cacut_errors.svg");
    write_atomic(&plot_path, plot.svg.as_bytes())?;
    println!("wrote {} ({} separator, {} omitted)", plot_path.display(), plot.separators, plot.omitted);
    assert_eq!(plot.separators, 1);
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
