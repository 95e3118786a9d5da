//! Runs the full augmentation pipeline on a synthetic frame, saves the
//! result, then replays the recorded choices to reproduce it bit for bit.
//!
//! Run with `cargo run --example augment_frame [out.png]`.

use std::path::PathBuf;

use cacut::augment::{replay, resize_with_labels};
use cacut::{augment_image, get_preset, image_seed, ImageBuffer, ImageDims, KeypointAnnotation, Keypoints, Point};

fn synthetic_frame(dims: ImageDims) -> cacut::Result<ImageBuffer> {
    let rgb = image::RgbImage::from_fn(dims.width, dims.height, |x, y| {
        // soil with darker stripes converging toward the top center
        let dx = x as f32 - dims.width as f32 / 2.0;
        let t = dx / (y as f32 + 40.0);
        let stripe = ((t * 8.0).fract().abs() < 0.35) as u8;
        image::Rgb([120 - 60 * stripe, 90 + 70 * stripe, 60])
    });
    ImageBuffer::from_rgb8(&rgb)
}

pub fn run_example() -> cacut::Result<()> {
    let native = ImageDims::new(1280, 720)?;
    let ann = KeypointAnnotation {
        image: "field/000000.png".into(),
        sequence: "field".into(),
        dims: native,
        frame: 0,
        keypoints: Keypoints {
            vanishing: Point::new(640, 150),
            left: Point::new(60, 719),
            right: Point::new(1220, 719),
        },
    };
    let img = synthetic_frame(native)?;
    let cfg = get_preset("ca-cut-k5")?;
    let seed = image_seed(cfg.master_seed, 0);

    let out = augment_image(&img, &ann, &cfg, seed)?;
    println!("flipped: {}", out.record.flipped);
    println!("photometric: {:?}", out.record.photometric);
    println!("keypoints after flip: {:?}", out.keypoints);
    println!("label channel sums: {:?}", out.labels.channel_sums());

    let (net_img, net_ann) = resize_with_labels(&img, &ann, cfg.net_dims)?;
    let again = replay(&net_img, &net_ann.keypoints, &out.record)?;
    assert_eq!(again.image, out.image);

    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cacut_augment_frame.png"));
    out.image.save_png(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
