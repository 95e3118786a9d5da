//! Scores two prediction runs against ground truth: one decoded from
//! heatmaps, one given as keypoints directly. Prints the comparison table.
//!
//! Run with `cargo run --example evaluate_predictions`.

use cacut::dataset::scale_keypoints;
use cacut::eval::{format_table, heatmap_to_keypoint, mean_of_runs, TableColumn, DEFAULT_OUTLIER_THRESHOLD};
use cacut::{evaluate_run, Grid, ImageDims, KeypointAnnotation, KeypointKind, Keypoints, Point, Prediction};

fn ground_truth(native: ImageDims) -> Vec<KeypointAnnotation> {
    (0..6)
        .map(|i| {
            let seq = if i < 3 { "a" } else { "b" };
            KeypointAnnotation {
                image: format!("{seq}/{i}.png"),
                sequence: seq.into(),
                dims: native,
                frame: i,
                keypoints: Keypoints {
                    vanishing: Point::new(600 + 10 * i as i32, 180),
                    left: Point::new(80, 719),
                    right: Point::new(1200, 719),
                },
            }
        })
        .collect()
}

/// Synthetic network output: a single peak per channel near the target.
fn heatmaps_for(kp: &Keypoints, net: ImageDims, shift: i32) -> [Grid; 3] {
    let (w, h) = (net.width as usize, net.height as usize);
    let mut grids = [Grid::zeros(w, h), Grid::zeros(w, h), Grid::zeros(w, h)];
    for kind in KeypointKind::ALL {
        let p = kp.get(kind);
        let x = (p.x + shift).clamp(0, w as i32 - 1) as usize;
        grids[kind.channel()].set(x, p.y as usize, 0.9);
    }
    grids
}

pub fn run_example() -> cacut::Result<()> {
    let native = ImageDims::new(1280, 720)?;
    let net = ImageDims::new(320, 240)?;
    let gts = ground_truth(native);

    let mut decoded = Vec::new();
    let mut direct = Vec::new();
    for (i, gt) in gts.iter().enumerate() {
        let at_net = scale_keypoints(gt, native, net)?.keypoints;
        let maps = heatmaps_for(&at_net, net, i as i32 % 3);
        let kp = Keypoints {
            vanishing: heatmap_to_keypoint(&maps[KeypointKind::Vanishing.channel()])?,
            right: heatmap_to_keypoint(&maps[KeypointKind::Right.channel()])?,
            left: heatmap_to_keypoint(&maps[KeypointKind::Left.channel()])?,
        };
        decoded.push(Prediction { image: gt.image.clone(), keypoints: kp });
        // the last frame of the direct run is badly off
        let off = if i == 5 { 40 } else { 1 };
        direct.push(Prediction {
            image: gt.image.clone(),
            keypoints: at_net.map(|p| Point::new((p.x - off).max(0), p.y)),
        });
    }

    let runs = [
        evaluate_run(&gts, &decoded, net, DEFAULT_OUTLIER_THRESHOLD)?,
        evaluate_run(&gts, &direct, net, DEFAULT_OUTLIER_THRESHOLD)?,
    ];
    let agg = mean_of_runs(&runs)?;
    let columns = vec![
        TableColumn::from(("heatmaps", &runs[0])),
        TableColumn::from(("direct", &runs[1])),
        TableColumn::from(("mean", &agg)),
    ];
    print!("{}", format_table(&columns, DEFAULT_OUTLIER_THRESHOLD));
    for s in &runs[1].sequences {
        println!("sequence {}: {} frames, mean {:.2}", s.sequence, s.frames, s.mean);
    }
    assert_eq!(runs[1].outlier_count, 3);
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
