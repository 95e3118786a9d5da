//! Coordinate math for mask-center placement.
//!
//! Crop-aligned centers are drawn on the segment between the vanishing point
//! and one row intercept, then shifted by a Gaussian offset:
//!
//! ```text
//! x = x_v + ceil(alpha * (x_i - x_v)) + ceil(z_x)
//! y = y_v + ceil(alpha * (y_i - y_v)) + ceil(z_y)
//! ```
//!
//! Uniform centers are drawn from `[ceil(w/2), W - ceil(w/2)]` on each axis,
//! which is also the range crop-aligned centers are saturated into.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pixel position, origin top-left, x to the right, y downward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

impl From<[i32; 2]> for Point {
    fn from([x, y]: [i32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [i32; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Width and height of an image in pixels. Both are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

#[derive(Deserialize)]
struct RawDims {
    width: u32,
    height: u32,
}

impl TryFrom<RawDims> for ImageDims {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        ImageDims::new(raw.width, raw.height)
    }
}

impl ImageDims {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDims { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as i64) < self.width as i64 && (p.y as i64) < self.height as i64
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

impl std::fmt::Display for ImageDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Size of a rectangular mask in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaskSize {
    pub width: u32,
    pub height: u32,
}

impl MaskSize {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub const fn square(side: u32) -> Self {
        Self::new(side, side)
    }
}

/// Which crop row a line belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn mirrored(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Segment from the vanishing point to one row intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLine {
    vanishing: Point,
    intercept: Point,
    side: Side,
}

impl RowLine {
    pub fn new(vanishing: Point, intercept: Point, side: Side) -> Result<Self> {
        if vanishing == intercept {
            return Err(Error::DegenerateLine {
                x: vanishing.x,
                y: vanishing.y,
            });
        }
        Ok(Self {
            vanishing,
            intercept,
            side,
        })
    }

    pub fn vanishing(&self) -> Point {
        self.vanishing
    }

    pub fn intercept(&self) -> Point {
        self.intercept
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

/// One crop-aligned draw with everything needed to audit it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropAlignedSample {
    pub alpha: f64,
    pub z: (f64, f64),
    pub side: Side,
    /// Discretized point on the segment, before the Gaussian offset.
    pub on_line: Point,
    /// Center before saturation into the legal range.
    pub raw_center: Point,
    pub center: Point,
}

/// Mathematical ceiling to an integer pixel offset (`ceil(-60.0) = -60`, `ceil(79.5) = 80`).
#[inline]
pub fn ceil_px(v: f64) -> i32 {
    v.ceil() as i32
}

/// Discretized point at parameter `alpha` along `line`.
pub fn line_point(line: &RowLine, alpha: f64) -> Point {
    let v = line.vanishing;
    let i = line.intercept;
    Point::new(
        v.x + ceil_px(alpha * f64::from(i.x - v.x)),
        v.y + ceil_px(alpha * f64::from(i.y - v.y)),
    )
}

/// Legal center coordinates for a mask so that it lies fully inside the image.
pub fn center_range(dims: ImageDims, mask: MaskSize) -> Result<(RangeInclusive<i32>, RangeInclusive<i32>)> {
    if mask.width == 0 || mask.height == 0 || mask.width > dims.width || mask.height > dims.height {
        return Err(Error::MaskTooLarge {
            mask_w: mask.width,
            mask_h: mask.height,
            width: dims.width,
            height: dims.height,
        });
    }
    Ok((axis_range(dims.width, mask.width), axis_range(dims.height, mask.height)))
}

// [ceil(m/2), n - ceil(m/2)], except that an odd mask spanning the whole
// axis would leave it empty; its single legal center is n - ceil(m/2).
fn axis_range(n: u32, m: u32) -> RangeInclusive<i32> {
    let half = m.div_ceil(2) as i32;
    let hi = n as i32 - half;
    half.min(hi)..=hi
}

/// Saturates each coordinate of `raw` into the legal center range.
pub fn clamp_center(raw: Point, dims: ImageDims, mask: MaskSize) -> Result<Point> {
    let (xs, ys) = center_range(dims, mask)?;
    Ok(Point::new(
        raw.x.clamp(*xs.start(), *xs.end()),
        raw.y.clamp(*ys.start(), *ys.end()),
    ))
}

/// Maps two uniform draws in `[0, 1)` onto an integer center chosen uniformly
/// from the legal range.
pub fn uniform_center(draws: (f64, f64), dims: ImageDims, mask: MaskSize) -> Result<Point> {
    let (xs, ys) = center_range(dims, mask)?;
    Ok(Point::new(pick(&xs, draws.0), pick(&ys, draws.1)))
}

fn pick(range: &RangeInclusive<i32>, u: f64) -> i32 {
    let span = i64::from(*range.end()) - i64::from(*range.start()) + 1;
    let offset = ((u * span as f64).floor() as i64).clamp(0, span - 1);
    (i64::from(*range.start()) + offset) as i32
}

/// Crop-aligned center for a given line parameter and Gaussian offset.
pub fn crop_aligned_center(
    line: &RowLine,
    alpha: f64,
    z: (f64, f64),
    dims: ImageDims,
    mask: MaskSize,
) -> Result<CropAlignedSample> {
    let on_line = line_point(line, alpha);
    let raw_center = Point::new(on_line.x + ceil_px(z.0), on_line.y + ceil_px(z.1));
    let center = clamp_center(raw_center, dims, mask)?;
    Ok(CropAlignedSample {
        alpha,
        z,
        side: line.side,
        on_line,
        raw_center,
        center,
    })
}
