//! Named configurations for the baseline, Cutout, CA-Cut and the ablation arms.

use crate::config::{AugmentConfig, PhotometricConfig, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::geometry::{ImageDims, MaskSize};

const NET: ImageDims = ImageDims {
    width: 320,
    height: 240,
};

const fn base(n: u32, k: u32, sigma: f64, mask: u32) -> AugmentConfig {
    AugmentConfig {
        n,
        k,
        sigma,
        mask: MaskSize::square(mask),
        flip_prob: 0.5,
        photometric: PHOTOMETRIC,
        net_dims: NET,
        master_seed: DEFAULT_SEED,
        side_mode: crate::config::SideMode::PerMask,
    }
}

const PHOTOMETRIC: PhotometricConfig = PhotometricConfig {
    brightness: [0.8, 1.2],
    contrast: [0.8, 1.2],
    saturation: [0.8, 1.2],
    jitter_prob: 0.5,
    blur_sigma: [0.0, 1.5],
    blur_prob: 0.5,
};

/// Every preset, in catalog order.
pub const PRESETS: &[(&str, AugmentConfig)] = &[
    ("cf++", base(0, 0, 100.0, 60)),
    ("cutout", base(10, 0, 100.0, 60)),
    ("ca-cut-k2", base(10, 2, 100.0, 60)),
    ("ca-cut-k5", base(10, 5, 100.0, 60)),
    ("ca-cut-k8", base(10, 8, 100.0, 60)),
    ("ca-cut-k10", base(10, 10, 100.0, 60)),
    ("cutout-size30", base(10, 0, 100.0, 30)),
    ("cutout-size60", base(10, 0, 100.0, 60)),
    ("cutout-size120", base(10, 0, 100.0, 120)),
    ("cutout-n5", base(5, 0, 100.0, 60)),
    ("cutout-n10", base(10, 0, 100.0, 60)),
    ("cutout-n20", base(20, 0, 100.0, 60)),
    ("ca-cut-sigma50", base(10, 5, 50.0, 60)),
    ("ca-cut-sigma100", base(10, 5, 100.0, 60)),
    ("ca-cut-sigma200", base(10, 5, 200.0, 60)),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn get_preset(name: &str) -> Result<AugmentConfig> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: preset_names().into_iter().map(String::from).collect(),
        })
}
