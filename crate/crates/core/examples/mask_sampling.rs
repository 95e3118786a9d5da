//! Draws one k-of-n mask plan for a frame and prints where each mask landed.
//!
//! Run with `cargo run --example mask_sampling`.

use cacut::geometry::{line_point, RowLine};
use cacut::sampler::plan_masks;
use cacut::{get_preset, image_seed, image_stream, Keypoints, MaskOrigin, Point, Side};

pub fn run_example() -> cacut::Result<()> {
    let cfg = get_preset("ca-cut-k5")?;
    // keypoints at network resolution (320x240)
    let kp = Keypoints {
        vanishing: Point::new(158, 40),
        left: Point::new(12, 239),
        right: Point::new(300, 239),
    };

    let left = RowLine::new(kp.vanishing, kp.left, Side::Left)?;
    println!("left row midpoint: {:?}", line_point(&left, 0.5));

    let mut rng = image_stream(image_seed(cfg.master_seed, 0));
    let plan = plan_masks(&kp, cfg.net_dims, &cfg, &mut rng)?;
    for (i, m) in plan.masks.iter().enumerate() {
        let tag = match m.origin {
            MaskOrigin::CropAligned => {
                let s = &plan.samples[i];
                format!("{:?} row, alpha {:.2}, on-line {:?}", s.side, s.alpha, s.on_line)
            }
            MaskOrigin::Uniform => "uniform".to_string(),
        };
        println!("mask {i}: center ({}, {}) {}x{}  {tag}", m.center.x, m.center.y, m.width, m.height);
    }
    assert_eq!(plan.samples.len(), cfg.k as usize);
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
