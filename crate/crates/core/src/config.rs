//! Augmentation configuration and key/value overrides.
//!
//! Overrides address fields by dotted path (`sigma=50`, `mask.width=30`,
//! `photometric.brightness=[0.9,1.1]`). Values are parsed as JSON and fall
//! back to a bare string. `mask_size=N` sets both mask sides.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{center_range, ImageDims, MaskSize};

pub const DEFAULT_SEED: u64 = 42;

/// Whether crop-aligned masks pick their row independently or share one
/// row per image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideMode {
    #[default]
    PerMask,
    PerImage,
}

/// Ranges for color jitter and blur. Each jitter factor is drawn from its
/// range with probability `jitter_prob` (otherwise 1.0); the blur sigma is
/// drawn with probability `blur_prob` (otherwise 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotometricConfig {
    pub brightness: [f64; 2],
    pub contrast: [f64; 2],
    pub saturation: [f64; 2],
    pub jitter_prob: f64,
    pub blur_sigma: [f64; 2],
    pub blur_prob: f64,
}

impl PhotometricConfig {
    pub const fn identity() -> Self {
        Self {
            brightness: [1.0, 1.0],
            contrast: [1.0, 1.0],
            saturation: [1.0, 1.0],
            jitter_prob: 0.0,
            blur_sigma: [0.0, 0.0],
            blur_prob: 0.0,
        }
    }
}

impl Default for PhotometricConfig {
    fn default() -> Self {
        Self {
            brightness: [0.8, 1.2],
            contrast: [0.8, 1.2],
            saturation: [0.8, 1.2],
            jitter_prob: 0.5,
            blur_sigma: [0.0, 1.5],
            blur_prob: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    /// Total masks per image.
    pub n: u32,
    /// Crop-aligned masks among the `n`.
    pub k: u32,
    /// Std-dev of the Gaussian offset in pixels.
    pub sigma: f64,
    pub mask: MaskSize,
    pub flip_prob: f64,
    pub photometric: PhotometricConfig,
    pub net_dims: ImageDims,
    pub master_seed: u64,
    #[serde(default)]
    pub side_mode: SideMode,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            n: 10,
            k: 5,
            sigma: 100.0,
            mask: MaskSize::square(60),
            flip_prob: 0.5,
            photometric: PhotometricConfig::default(),
            net_dims: ImageDims {
                width: 320,
                height: 240,
            },
            master_seed: DEFAULT_SEED,
            side_mode: SideMode::PerMask,
        }
    }
}

fn check_range(name: &str, r: [f64; 2], min: f64) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] >= min && r[0] <= r[1]) {
        return Err(Error::InvalidConfig(format!(
            "{name} range [{}, {}] must be finite, ordered and >= {min}",
            r[0], r[1]
        )));
    }
    Ok(())
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("{name} must be in [0, 1], got {p}")));
    }
    Ok(())
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k > self.n {
            return Err(Error::InvalidConfig(format!("k = {} exceeds n = {}", self.k, self.n)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        check_prob("flip_prob", self.flip_prob)?;
        ImageDims::new(self.net_dims.width, self.net_dims.height)?;
        center_range(self.net_dims, self.mask).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let p = &self.photometric;
        check_range("brightness", p.brightness, 0.0)?;
        check_range("contrast", p.contrast, 0.0)?;
        check_range("saturation", p.saturation, 0.0)?;
        check_range("blur_sigma", p.blur_sigma, 0.0)?;
        check_prob("jitter_prob", p.jitter_prob)?;
        check_prob("blur_prob", p.blur_prob)?;
        Ok(())
    }

    /// Applies one `key=value` override and re-validates.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("override `{assignment}` is not key=value")))?;
        self.set(key.trim(), parse_value(raw.trim()))
    }

    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        if key == "mask_size" {
            self.set("mask.width", value.clone())?;
            return self.set("mask.height", value);
        }
        let mut doc = serde_json::to_value(*self)?;
        let mut slot = &mut doc;
        for part in key.split('.') {
            slot = slot
                .get_mut(part)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown config key `{key}`")))?;
        }
        *slot = value;
        let updated: AugmentConfig = serde_json::from_value(doc)
            .map_err(|e| Error::InvalidConfig(format!("bad value for `{key}`: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Applies every key of a TOML document. Nested tables map to dotted keys.
    pub fn apply_toml(&mut self, text: &str) -> Result<()> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config file: {e}")))?;
        let mut flat = Vec::new();
        flatten_toml("", &toml::Value::Table(table), &mut flat);
        for (key, value) in flat {
            self.set(&key, serde_json::to_value(value)?)?;
        }
        Ok(())
    }
}

fn flatten_toml(prefix: &str, value: &toml::Value, out: &mut Vec<(String, toml::Value)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_toml(&key, v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}
