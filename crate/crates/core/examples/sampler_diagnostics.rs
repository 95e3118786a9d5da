//! Draws many crop-aligned masks and checks the empirical offset spread
//! against the configured sigma.
//!
//! Run with `cargo run --example sampler_diagnostics`.

use cacut::sampler::{plan_masks, sampling_diagnostics};
use cacut::{get_preset, image_seed, image_stream, Keypoints, Point};

pub fn run_example() -> cacut::Result<()> {
    let mut cfg = get_preset("ca-cut-sigma50")?;
    // a large frame so clamping rarely kicks in
    cfg.net_dims = cacut::ImageDims::new(1280, 720)?;
    let kp = Keypoints {
        vanishing: Point::new(640, 260),
        left: Point::new(300, 719),
        right: Point::new(980, 719),
    };

    let mut samples = Vec::new();
    let mut masks = Vec::new();
    for i in 0..2000 {
        let mut rng = image_stream(image_seed(cfg.master_seed, i));
        let plan = plan_masks(&kp, cfg.net_dims, &cfg, &mut rng)?;
        samples.extend(plan.samples);
        masks.extend(plan.masks);
    }
    let report = sampling_diagnostics(&samples, &masks)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    assert!((report.empirical_sigma_x - cfg.sigma).abs() < 0.05 * cfg.sigma);
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
