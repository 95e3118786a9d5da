use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::ImageDims;

/// Dense single-channel real grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::DimMismatch {
                expected: format!("{width}x{height} grid"),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> ImageDims {
        ImageDims {
            width: self.width as u32,
            height: self.height as u32,
        }
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    /// Reads a PGM (8- or 16-bit) and scales samples to `[0, 1]`.
    pub fn load_pgm(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })?
            .to_luma16();
        let (w, h) = img.dimensions();
        let data = img.as_raw().iter().map(|&v| f32::from(v) / 65535.0).collect();
        Grid::new(w as usize, h as usize, data)
    }

    /// Writes a 16-bit binary PGM, mapping `[0, 1]` onto `[0, 65535]`.
    pub fn to_pgm16(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for &v in &self.data {
            let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
        out
    }
}
