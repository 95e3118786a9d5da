//! Crop-aligned cutout (CA-Cut) augmentation for crop-row keypoint datasets,
//! with the dataset plumbing and evaluation harness around it.
//!
//! - [`geometry`]: mask-center math (points on row lines, clamping, uniform placement)
//! - [`sampler`]: per-image k-of-n mask plans and sampling diagnostics
//! - [`augment`]: resize, flip, photometric jitter, masking, label tensors
//! - [`dataset`]: JSONL manifests and per-sequence train/validation splits
//! - [`eval`]: heatmap decoding, native-resolution errors, summaries
//! - [`viz`]: dilated heatmap overlays and SVG error plots
//! - [`presets`]: named experiment configurations
//! - [`cli`]: the `cacut` batch front end

pub mod augment;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod geometry;
pub mod grid;
pub mod presets;
pub mod sampler;
pub mod viz;

pub use augment::{augment_image, AugmentRecord, Augmented, ImageBuffer, LabelTensor};
pub use config::{AugmentConfig, PhotometricConfig, SideMode};
pub use dataset::{KeypointAnnotation, KeypointKind, Keypoints, SplitManifest};
pub use error::{Error, Result};
pub use eval::{evaluate_run, EvalSummary, Prediction};
pub use geometry::{ImageDims, MaskSize, Point, Side};
pub use grid::Grid;
pub use presets::get_preset;
pub use sampler::{image_seed, image_stream, sample_masks_for_image, MaskOrigin, MaskSpec, SamplerReport};
