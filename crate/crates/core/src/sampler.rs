//! Per-image mask plans: `k` crop-aligned masks followed by `n - k` uniform
//! ones, all drawn from a per-image random stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{AugmentConfig, SideMode};
use crate::dataset::Keypoints;
use crate::error::{Error, Result};
use crate::geometry::{crop_aligned_center, uniform_center, CropAlignedSample, ImageDims, Point, RowLine, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskOrigin {
    CropAligned,
    Uniform,
}

/// A zero-valued rectangle. Covers columns `[x - floor(w/2), x + ceil(w/2) - 1]`
/// and likewise for rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskSpec {
    pub center: Point,
    pub width: u32,
    pub height: u32,
    pub origin: MaskOrigin,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaskPlan {
    pub masks: Vec<MaskSpec>,
    /// One entry per crop-aligned mask, in mask order.
    pub samples: Vec<CropAlignedSample>,
}

/// Derives the seed of image `index` from the run's master seed.
pub fn image_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn image_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn row_line(kp: &Keypoints, side: Side) -> Result<RowLine> {
    let intercept = match side {
        Side::Left => kp.left,
        Side::Right => kp.right,
    };
    RowLine::new(kp.vanishing, intercept, side)
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> Side {
    if rng.random_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    }
}

/// Draws a full mask plan for keypoints expressed at `dims` resolution.
///
/// Per crop-aligned mask the stream is consumed as: side (unless shared per
/// image), alpha, z_x, z_y. Each uniform mask consumes two draws.
pub fn plan_masks<R: Rng + ?Sized>(
    keypoints: &Keypoints,
    dims: ImageDims,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<MaskPlan> {
    if cfg.k > cfg.n {
        return Err(Error::InvalidConfig(format!("k = {} exceeds n = {}", cfg.k, cfg.n)));
    }
    let mut plan = MaskPlan {
        masks: Vec::with_capacity(cfg.n as usize),
        samples: Vec::with_capacity(cfg.k as usize),
    };
    let shared_side = match cfg.side_mode {
        SideMode::PerImage if cfg.k > 0 => Some(coin(rng)),
        _ => None,
    };
    for _ in 0..cfg.k {
        let side = match shared_side {
            Some(s) => s,
            None => coin(rng),
        };
        let alpha: f64 = rng.random();
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let line = row_line(keypoints, side)?;
        let sample = crop_aligned_center(&line, alpha, (cfg.sigma * zx, cfg.sigma * zy), dims, cfg.mask)?;
        plan.masks.push(MaskSpec {
            center: sample.center,
            width: cfg.mask.width,
            height: cfg.mask.height,
            origin: MaskOrigin::CropAligned,
        });
        plan.samples.push(sample);
    }
    for _ in cfg.k..cfg.n {
        let draws = (rng.random::<f64>(), rng.random::<f64>());
        plan.masks.push(MaskSpec {
            center: uniform_center(draws, dims, cfg.mask)?,
            width: cfg.mask.width,
            height: cfg.mask.height,
            origin: MaskOrigin::Uniform,
        });
    }
    Ok(plan)
}

/// Mask list for one image whose keypoints are already at network
/// resolution (`cfg.net_dims`).
pub fn sample_masks_for_image<R: Rng + ?Sized>(
    keypoints: &Keypoints,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<Vec<MaskSpec>> {
    keypoints.check_within(cfg.net_dims)?;
    Ok(plan_masks(keypoints, cfg.net_dims, cfg, rng)?.masks)
}

/// Empirical statistics of a batch of crop-aligned draws and mask plans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    pub samples: usize,
    pub count_crop_aligned: usize,
    pub count_uniform: usize,
    /// Sample std-dev of `raw_center - on_line` per axis.
    pub empirical_sigma_x: f64,
    pub empirical_sigma_y: f64,
    pub mean_offset_x: f64,
    pub mean_offset_y: f64,
    pub alpha_mean: f64,
    /// Fraction of samples that chose the left row.
    pub side_ratio: f64,
}

fn mean_and_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sampling_diagnostics(samples: &[CropAlignedSample], masks: &[MaskSpec]) -> Result<SamplerReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no crop-aligned samples"));
    }
    let dx = samples.iter().map(|s| f64::from(s.raw_center.x - s.on_line.x));
    let dy = samples.iter().map(|s| f64::from(s.raw_center.y - s.on_line.y));
    let (mean_offset_x, empirical_sigma_x) = mean_and_std(dx);
    let (mean_offset_y, empirical_sigma_y) = mean_and_std(dy);
    let n = samples.len() as f64;
    let count_crop_aligned = masks.iter().filter(|m| m.origin == MaskOrigin::CropAligned).count();
    Ok(SamplerReport {
        samples: samples.len(),
        count_crop_aligned,
        count_uniform: masks.len() - count_crop_aligned,
        empirical_sigma_x,
        empirical_sigma_y,
        mean_offset_x,
        mean_offset_y,
        alpha_mean: samples.iter().map(|s| s.alpha).sum::<f64>() / n,
        side_ratio: samples.iter().filter(|s| s.side == Side::Left).count() as f64 / n,
    })
}
