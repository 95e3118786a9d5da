use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the augmentation engine and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mask {mask_w}x{mask_h} does not fit in a {width}x{height} image")]
    MaskTooLarge {
        mask_w: u32,
        mask_h: u32,
        width: u32,
        height: u32,
    },

    #[error("mask centered at ({x}, {y}) with size {w}x{h} extends outside the image")]
    MaskOutOfBounds { x: i32, y: i32, w: u32, h: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid image dimensions {width}x{height}")]
    InvalidDims { width: u32, height: u32 },

    #[error("degenerate row line: vanishing point equals intercept at ({x}, {y})")]
    DegenerateLine { x: i32, y: i32 },

    #[error("{name} keypoint ({x}, {y}) is outside a {width}x{height} image")]
    KeypointOutOfBounds {
        name: &'static str,
        x: i32,
        y: i32,
        width: u32,
        height: u32,
    },

    #[error("{path}:{line}: parse error: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: validation error: {msg}")]
    Validation {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("nothing to split: {0}")]
    EmptySequence(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("heatmap contains non-finite values")]
    NonFiniteHeatmap,

    #[error("missing predictions for {} frame(s): {}", .0.len(), .0.join(", "))]
    MissingPrediction(Vec<String>),

    #[error("duplicate prediction for {0}")]
    DuplicatePrediction(String),

    #[error("dilation kernel must be odd and >= 1, got {0}")]
    InvalidKernel(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: String, actual: String },

    #[error("summary has no frames")]
    EmptySummary,

    #[error("unknown preset `{name}`; available: {}", .available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<String>,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
