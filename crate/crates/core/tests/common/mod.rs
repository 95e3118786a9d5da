#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cacut::dataset::{write_manifest, KeypointAnnotation, Keypoints};
use cacut::{ImageBuffer, ImageDims, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn dims(w: u32, h: u32) -> ImageDims {
    ImageDims::new(w, h).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plausible crop-row keypoints: vanishing point in the upper middle, left
/// and right intercepts on the lower left and right borders.
pub fn random_keypoints(r: &mut impl Rng, d: ImageDims) -> Keypoints {
    let (w, h) = (d.width as i32, d.height as i32);
    let vanishing = Point::new(r.random_range(w / 4..3 * w / 4), r.random_range(h / 8..h / 2));
    let left = if r.random_bool(0.5) {
        Point::new(r.random_range(0..w / 3), h - 1)
    } else {
        Point::new(0, r.random_range(h / 2..h))
    };
    let right = if r.random_bool(0.5) {
        Point::new(r.random_range(2 * w / 3..w), h - 1)
    } else {
        Point::new(w - 1, r.random_range(h / 2..h))
    };
    Keypoints { vanishing, left, right }
}

pub fn random_annotation(r: &mut impl Rng, d: ImageDims, seq: &str, frame: u64) -> KeypointAnnotation {
    KeypointAnnotation {
        image: format!("{seq}/{frame:05}.png"),
        sequence: seq.to_string(),
        dims: d,
        frame,
        keypoints: random_keypoints(r, d),
    }
}

/// Image with no zero-valued pixel, so masked pixels are recognisable.
pub fn random_image(r: &mut impl Rng, d: ImageDims) -> ImageBuffer {
    let data = (0..d.pixel_count() * 3)
        .map(|_| f32::from(r.random_range(1u8..=255)) / 255.0)
        .collect();
    ImageBuffer::new(d, data).unwrap()
}

/// Smooth synthetic field scene, quantized to 8 bits.
pub fn scene_image(d: ImageDims, phase: u32) -> image::RgbImage {
    image::RgbImage::from_fn(d.width, d.height, |x, y| {
        let g = ((x * 3 + y * 5 + phase * 17) % 200) as u8 + 30;
        image::Rgb([(x % 97) as u8 + 40, g, ((y + phase) % 113) as u8 + 20])
    })
}

/// Writes `frames` PNG images and a manifest referencing them; returns the
/// manifest path.
pub fn write_dataset(dir: &Path, d: ImageDims, sequences: &[(&str, u64)], seed: u64) -> PathBuf {
    let mut r = rng(seed);
    let mut anns = Vec::new();
    let mut phase = 0;
    for (seq, n) in sequences {
        std::fs::create_dir_all(dir.join(seq)).unwrap();
        for f in 0..*n {
            let a = random_annotation(&mut r, d, seq, f);
            scene_image(d, phase).save(dir.join(&a.image)).unwrap();
            phase += 1;
            anns.push(a);
        }
    }
    let manifest = dir.join("manifest.jsonl");
    write_manifest(&manifest, &anns).unwrap();
    manifest
}

/// Relative path -> file bytes for every file under `root`.
pub fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
