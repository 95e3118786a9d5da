//! Training-time transform: resize to network resolution, flip, photometric
//! jitter, zero masks, and one-hot label tensors.
//!
//! Random choices are drawn once into an [`AugmentRecord`] and then applied by
//! [`replay`], so a stored record reproduces its output exactly.

use std::io::Cursor;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{AugmentConfig, PhotometricConfig};
use crate::dataset::{scale_point, KeypointAnnotation, KeypointKind, Keypoints};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::geometry::ImageDims;
use crate::sampler::{image_stream, plan_masks, MaskSpec};

pub const CHANNELS: usize = 3;

/// RGB image with values in `[0, 1]`, stored row-major as `(y, x, channel)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    dims: ImageDims,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(dims: ImageDims, data: Vec<f32>) -> Result<Self> {
        if data.len() != dims.pixel_count() * CHANNELS {
            return Err(Error::DimMismatch {
                expected: format!("{} values for {dims}x3", dims.pixel_count() * CHANNELS),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: ImageDims, value: f32) -> Self {
        Self {
            dims,
            data: vec![value; dims.pixel_count() * CHANNELS],
        }
    }

    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.dims.width as usize + x) * CHANNELS
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f32; 3] {
        let o = self.offset(x as usize, y as usize);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [f32; 3]) {
        let o = self.offset(x as usize, y as usize);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    /// Normalizes 8-bit values by 255.
    pub fn from_rgb8(img: &image::RgbImage) -> Result<Self> {
        let dims = ImageDims::new(img.width(), img.height())?;
        let data = img.as_raw().iter().map(|&v| f32::from(v) / 255.0).collect();
        Ok(Self { dims, data })
    }

    /// Re-quantizes to 8 bits, rounding to nearest.
    pub fn to_rgb8(&self) -> image::RgbImage {
        let raw = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        image::RgbImage::from_raw(self.dims.width, self.dims.height, raw).expect("buffer length matches dims")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_rgb8(&img.to_rgb8())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut bytes = Vec::new();
        self.to_rgb8()
            .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: "<png>".into(),
                source,
            })?;
        Ok(bytes)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode_png()?)
    }
}

/// Bilinear resample with pixel-center alignment and edge clamping.
pub fn resize_bilinear(img: &ImageBuffer, target: ImageDims) -> ImageBuffer {
    if img.dims == target {
        return img.clone();
    }
    let (sw, sh) = (img.dims.width as usize, img.dims.height as usize);
    let (tw, th) = (target.width as usize, target.height as usize);
    let sx = sw as f64 / tw as f64;
    let sy = sh as f64 / th as f64;
    let taps = |dst: usize, scale: f64, len: usize| -> (usize, usize, f32) {
        let src = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
        let i0 = (src.floor() as usize).min(len - 1);
        let i1 = (i0 + 1).min(len - 1);
        (i0, i1, (src - i0 as f64) as f32)
    };
    let xs: Vec<_> = (0..tw).map(|x| taps(x, sx, sw)).collect();
    let mut out = ImageBuffer::filled(target, 0.0);
    for y in 0..th {
        let (y0, y1, fy) = taps(y, sy, sh);
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            let a = img.offset(x0, y0);
            let b = img.offset(x1, y0);
            let c = img.offset(x0, y1);
            let d = img.offset(x1, y1);
            let o = out.offset(x, y);
            for ch in 0..CHANNELS {
                let top = img.data[a + ch] * (1.0 - fx) + img.data[b + ch] * fx;
                let bottom = img.data[c + ch] * (1.0 - fx) + img.data[d + ch] * fx;
                out.data[o + ch] = top * (1.0 - fy) + bottom * fy;
            }
        }
    }
    out
}

/// Resizes the image and rescales its keypoints (rounded, clamped) to `target`.
pub fn resize_with_labels(
    img: &ImageBuffer,
    ann: &KeypointAnnotation,
    target: ImageDims,
) -> Result<(ImageBuffer, KeypointAnnotation)> {
    ImageDims::new(target.width, target.height)?;
    if img.dims != ann.dims {
        return Err(Error::DimMismatch {
            expected: format!("image of {} for `{}`", ann.dims, ann.image),
            actual: img.dims.to_string(),
        });
    }
    let from = ann.dims;
    let scaled = KeypointAnnotation {
        dims: target,
        keypoints: ann.keypoints.map(|p| scale_point(p, from, target)),
        ..ann.clone()
    };
    Ok((resize_bilinear(img, target), scaled))
}

/// Mirrors keypoints about the vertical axis and swaps the row roles.
pub fn flip_keypoints(kp: &Keypoints, dims: ImageDims) -> Keypoints {
    let w = dims.width as i32;
    let m = kp.map(|p| crate::geometry::Point::new(w - 1 - p.x, p.y));
    Keypoints {
        vanishing: m.vanishing,
        left: m.right,
        right: m.left,
    }
}

pub fn flip_image(img: &ImageBuffer) -> ImageBuffer {
    let w = img.dims.width as usize;
    let mut out = img.clone();
    for (src, dst) in img.data.chunks_exact(w * CHANNELS).zip(out.data.chunks_exact_mut(w * CHANNELS)) {
        for x in 0..w {
            let s = (w - 1 - x) * CHANNELS;
            dst[x * CHANNELS..(x + 1) * CHANNELS].copy_from_slice(&src[s..s + CHANNELS]);
        }
    }
    out
}

pub fn horizontal_flip(img: &ImageBuffer, ann: &KeypointAnnotation) -> Result<(ImageBuffer, KeypointAnnotation)> {
    if img.dims != ann.dims {
        return Err(Error::DimMismatch {
            expected: ann.dims.to_string(),
            actual: img.dims.to_string(),
        });
    }
    let flipped = KeypointAnnotation {
        keypoints: flip_keypoints(&ann.keypoints, ann.dims),
        ..ann.clone()
    };
    Ok((flip_image(img), flipped))
}

/// Concrete photometric factors for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotometricParams {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub blur_sigma: f64,
}

impl PhotometricParams {
    pub const IDENTITY: Self = Self {
        brightness: 1.0,
        contrast: 1.0,
        saturation: 1.0,
        blur_sigma: 0.0,
    };

    pub fn sample<R: Rng + ?Sized>(cfg: &PhotometricConfig, rng: &mut R) -> Self {
        let factor = |range: [f64; 2], prob: f64, off: f64, rng: &mut R| {
            if rng.random_bool(prob) {
                rng.random_range(range[0]..=range[1])
            } else {
                off
            }
        };
        let brightness = factor(cfg.brightness, cfg.jitter_prob, 1.0, rng);
        let contrast = factor(cfg.contrast, cfg.jitter_prob, 1.0, rng);
        let saturation = factor(cfg.saturation, cfg.jitter_prob, 1.0, rng);
        let blur_sigma = factor(cfg.blur_sigma, cfg.blur_prob, 0.0, rng);
        Self {
            brightness,
            contrast,
            saturation,
            blur_sigma,
        }
    }
}

#[inline]
fn luma(p: &[f32]) -> f32 {
    0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]
}

/// Brightness, contrast and saturation scaling followed by Gaussian blur.
/// Factors of exactly 1 (and a blur sigma of 0) leave the image untouched.
pub fn photometric_augment(img: &ImageBuffer, params: &PhotometricParams) -> ImageBuffer {
    let mut out = img.clone();
    if params.brightness != 1.0 {
        let b = params.brightness as f32;
        out.data.iter_mut().for_each(|v| *v = (*v * b).clamp(0.0, 1.0));
    }
    if params.contrast != 1.0 {
        let c = params.contrast as f32;
        let mean = (out.data.chunks_exact(CHANNELS).map(|p| f64::from(luma(p))).sum::<f64>()
            / out.dims.pixel_count() as f64) as f32;
        out.data.iter_mut().for_each(|v| *v = ((*v - mean) * c + mean).clamp(0.0, 1.0));
    }
    if params.saturation != 1.0 {
        let s = params.saturation as f32;
        for p in out.data.chunks_exact_mut(CHANNELS) {
            let g = luma(p);
            p.iter_mut().for_each(|v| *v = ((*v - g) * s + g).clamp(0.0, 1.0));
        }
    }
    if params.blur_sigma > 0.0 {
        out = gaussian_blur(&out, params.blur_sigma);
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil().max(1.0) as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| (w / total) as f32).collect()
}

/// Separable Gaussian blur with edge replication.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> ImageBuffer {
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (img.dims.width as i64, img.dims.height as i64);
    let pass = |src: &ImageBuffer, horizontal: bool| {
        let mut dst = ImageBuffer::filled(src.dims, 0.0);
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0f32; CHANNELS];
                for (k, &wk) in kernel.iter().enumerate() {
                    let d = k as i64 - r;
                    let (sx, sy) = if horizontal {
                        ((x + d).clamp(0, w - 1), y)
                    } else {
                        (x, (y + d).clamp(0, h - 1))
                    };
                    let o = src.offset(sx as usize, sy as usize);
                    for (c, a) in acc.iter_mut().enumerate() {
                        *a += wk * src.data[o + c];
                    }
                }
                let o = dst.offset(x as usize, y as usize);
                for (c, a) in acc.iter().enumerate() {
                    dst.data[o + c] = a.clamp(0.0, 1.0);
                }
            }
        }
        dst
    };
    pass(&pass(img, true), false)
}

/// Inclusive pixel extent `(x0, x1, y0, y1)` covered by a mask.
pub fn mask_extent(m: &MaskSpec) -> (i64, i64, i64, i64) {
    let (cx, cy) = (i64::from(m.center.x), i64::from(m.center.y));
    let (w, h) = (i64::from(m.width), i64::from(m.height));
    (cx - w / 2, cx + (w + 1) / 2 - 1, cy - h / 2, cy + (h + 1) / 2 - 1)
}

pub fn apply_masks_in_place(img: &mut ImageBuffer, masks: &[MaskSpec]) -> Result<()> {
    let (w, h) = (i64::from(img.dims.width), i64::from(img.dims.height));
    for m in masks {
        let (x0, x1, y0, y1) = mask_extent(m);
        if m.width == 0 || m.height == 0 || x0 < 0 || y0 < 0 || x1 >= w || y1 >= h {
            return Err(Error::MaskOutOfBounds {
                x: m.center.x,
                y: m.center.y,
                w: m.width,
                h: m.height,
            });
        }
    }
    for m in masks {
        let (x0, x1, y0, y1) = mask_extent(m);
        for y in y0..=y1 {
            let start = img.offset(x0 as usize, y as usize);
            let end = img.offset(x1 as usize, y as usize) + CHANNELS;
            img.data[start..end].fill(0.0);
        }
    }
    Ok(())
}

/// Zeroes every pixel covered by a mask, in all channels.
pub fn apply_masks(img: &ImageBuffer, masks: &[MaskSpec]) -> Result<ImageBuffer> {
    let mut out = img.clone();
    apply_masks_in_place(&mut out, masks)?;
    Ok(out)
}

/// One-hot keypoint targets stored channel-major as `(channel, y, x)`.
/// Channel order follows [`KeypointKind::channel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTensor {
    dims: ImageDims,
    data: Vec<u8>,
}

impl LabelTensor {
    pub fn dims(&self) -> ImageDims {
        self.dims
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn channel(&self, c: usize) -> &[u8] {
        let n = self.dims.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, x: u32, y: u32) -> u8 {
        self.channel(c)[y as usize * self.dims.width as usize + x as usize]
    }

    pub fn channel_sums(&self) -> [u64; CHANNELS] {
        let mut sums = [0u64; CHANNELS];
        for (c, s) in sums.iter_mut().enumerate() {
            *s = self.channel(c).iter().map(|&v| u64::from(v)).sum();
        }
        sums
    }
}

pub fn make_label_tensor(kp: &Keypoints, dims: ImageDims) -> Result<LabelTensor> {
    kp.check_within(dims)?;
    let n = dims.pixel_count();
    let mut data = vec![0u8; n * CHANNELS];
    for kind in KeypointKind::ALL {
        let p = kp.get(kind);
        data[kind.channel() * n + p.y as usize * dims.width as usize + p.x as usize] = 1;
    }
    Ok(LabelTensor { dims, data })
}

/// Every random choice made for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    pub seed: u64,
    pub flipped: bool,
    pub photometric: PhotometricParams,
    pub masks: Vec<MaskSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub image: ImageBuffer,
    pub labels: LabelTensor,
    /// Keypoints at network resolution after flipping.
    pub keypoints: Keypoints,
    pub record: AugmentRecord,
}

/// Applies a record to an image already at network resolution.
pub fn replay(img: &ImageBuffer, kp: &Keypoints, record: &AugmentRecord) -> Result<Augmented> {
    let dims = img.dims;
    let (mut out, keypoints) = if record.flipped {
        (flip_image(img), flip_keypoints(kp, dims))
    } else {
        (img.clone(), *kp)
    };
    out = photometric_augment(&out, &record.photometric);
    apply_masks_in_place(&mut out, &record.masks)?;
    let labels = make_label_tensor(&keypoints, dims)?;
    Ok(Augmented {
        image: out,
        labels,
        keypoints,
        record: record.clone(),
    })
}

/// Full per-image pipeline driven by a per-image `seed`:
/// resize, flip, photometric, masks sampled on the flipped keypoints, labels.
pub fn augment_image(
    img: &ImageBuffer,
    ann: &KeypointAnnotation,
    cfg: &AugmentConfig,
    seed: u64,
) -> Result<Augmented> {
    cfg.validate()?;
    let (resized, scaled) = resize_with_labels(img, ann, cfg.net_dims)?;
    let mut rng = image_stream(seed);
    let flipped = rng.random_bool(cfg.flip_prob);
    let photometric = PhotometricParams::sample(&cfg.photometric, &mut rng);
    let keypoints = if flipped {
        flip_keypoints(&scaled.keypoints, cfg.net_dims)
    } else {
        scaled.keypoints
    };
    let plan = plan_masks(&keypoints, cfg.net_dims, cfg, &mut rng)?;
    let record = AugmentRecord {
        seed,
        flipped,
        photometric,
        masks: plan.masks,
    };
    replay(&resized, &scaled.keypoints, &record)
}
