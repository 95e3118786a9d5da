//! Heatmap overlays and per-frame error plots.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::augment::{ImageBuffer, CHANNELS};
use crate::dataset::KeypointKind;
use crate::error::{Error, Result};
use crate::eval::EvalSummary;
use crate::grid::Grid;

/// Morphological dilation with a square all-ones structuring element,
/// repeated `passes` times. Neighborhoods shrink at the borders.
pub fn dilate(grid: &Grid, kernel: usize, passes: usize) -> Result<Grid> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::InvalidKernel(kernel));
    }
    let r = kernel / 2;
    let mut cur = grid.clone();
    for _ in 0..passes {
        // square element is separable: row max then column max
        let (w, h) = (cur.width(), cur.height());
        let mut rows = Grid::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let lo = x.saturating_sub(r);
                let hi = (x + r).min(w - 1);
                let m = (lo..=hi).map(|i| cur.get(i, y)).fold(f32::NEG_INFINITY, f32::max);
                rows.set(x, y, m);
            }
        }
        let mut out = Grid::zeros(w, h);
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r).min(h - 1);
            for x in 0..w {
                let m = (lo..=hi).map(|j| rows.get(x, j)).fold(f32::NEG_INFINITY, f32::max);
                out.set(x, y, m);
            }
        }
        cur = out;
    }
    Ok(cur)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlaySpec {
    /// Tint per keypoint channel, in channel order.
    pub colors: [[f32; 3]; 3],
    pub kernel: usize,
    pub passes: usize,
    pub alpha: f32,
}

impl Default for OverlaySpec {
    fn default() -> Self {
        let mut colors = [[0.0; 3]; 3];
        colors[KeypointKind::Vanishing.channel()] = [1.0, 0.0, 0.0];
        colors[KeypointKind::Right.channel()] = [0.0, 1.0, 0.0];
        colors[KeypointKind::Left.channel()] = [0.0, 0.0, 1.0];
        Self {
            colors,
            kernel: 5,
            passes: 2,
            alpha: 0.6,
        }
    }
}

/// Blends each dilated heatmap onto the image in its channel color. Heatmaps
/// are normalized by their own maximum; the per-pixel blend weight is
/// `alpha * value`.
pub fn render_overlay(img: &ImageBuffer, heatmaps: &[Grid; 3], spec: &OverlaySpec) -> Result<ImageBuffer> {
    if !(0.0..=1.0).contains(&spec.alpha) {
        return Err(Error::InvalidConfig(format!("blend alpha must be in [0, 1], got {}", spec.alpha)));
    }
    let dims = img.dims();
    let mut out = img.clone();
    for (heatmap, color) in heatmaps.iter().zip(&spec.colors) {
        if heatmap.dims() != dims {
            return Err(Error::DimMismatch {
                expected: dims.to_string(),
                actual: heatmap.dims().to_string(),
            });
        }
        let dilated = dilate(heatmap, spec.kernel, spec.passes)?;
        let peak = dilated.max();
        if !(peak.is_finite() && peak > 0.0) {
            continue;
        }
        for y in 0..dims.height {
            for x in 0..dims.width {
                let v = dilated.get(x as usize, y as usize) / peak;
                let w = (spec.alpha * v).clamp(0.0, 1.0);
                if w == 0.0 {
                    continue;
                }
                let p = out.pixel(x, y);
                let mut blended = [0.0; CHANNELS];
                for c in 0..CHANNELS {
                    blended[c] = ((1.0 - w) * p[c] + w * color[c]).clamp(0.0, 1.0);
                }
                out.set_pixel(x, y, blended);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    pub width: f64,
    pub height: f64,
    /// Points above this value are left out and counted in the caption.
    pub y_clip: Option<f64>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            width: 960.0,
            height: 360.0,
            y_clip: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPlot {
    pub svg: String,
    pub separators: usize,
    pub omitted: usize,
}

/// Scatter of per-frame mean error in frame order with dashed separators
/// between sequences and a solid line at each sequence's mean.
pub fn render_error_plot(summary: &EvalSummary, opts: &PlotOptions) -> Result<ErrorPlot> {
    let frames = &summary.frames;
    if frames.is_empty() {
        return Err(Error::EmptySummary);
    }
    let (ml, mr, mt, mb) = (60.0, 20.0, 20.0, 60.0);
    let pw = opts.width - ml - mr;
    let ph = opts.height - mt - mb;
    let data_max = frames.iter().map(|f| f.mean).fold(0.0, f64::max);
    let y_max = match opts.y_clip {
        Some(c) => c,
        None => (data_max * 1.05).max(1.0),
    };
    let n = frames.len() as f64;
    let px = |i: f64| ml + pw * (i + 0.5) / n;
    let py = |v: f64| mt + ph * (1.0 - (v / y_max).clamp(0.0, 1.0));

    // contiguous runs of one sequence
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        match runs.last_mut() {
            Some((_, end)) if frames[*end - 1].sequence == f.sequence => *end = i + 1,
            _ => runs.push((i, i + 1)),
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{ml}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}" stroke="black"/>"#,
        b = mt + ph,
        r = ml + pw
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{ml}" y1="{mt}" x2="{ml}" y2="{b:.2}" stroke="black"/>"#,
        b = mt + ph
    );
    for t in 0..=4 {
        let v = y_max * t as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text class="tick" x="{x:.2}" y="{y:.2}" font-size="10" text-anchor="end">{v:.0}</text>"#,
            x = ml - 4.0,
            y = py(v) + 3.0
        );
    }

    for &(start, _) in runs.iter().skip(1) {
        let x = ml + pw * start as f64 / n;
        let _ = writeln!(
            svg,
            r#"<line class="separator" x1="{x:.2}" y1="{mt}" x2="{x:.2}" y2="{b:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            b = mt + ph
        );
    }

    let mut omitted = 0;
    for (i, f) in frames.iter().enumerate() {
        if opts.y_clip.is_some_and(|c| f.mean > c) {
            omitted += 1;
            continue;
        }
        let _ = writeln!(
            svg,
            r#"<circle class="frame" cx="{:.2}" cy="{:.2}" r="2" fill="steelblue"/>"#,
            px(i as f64),
            py(f.mean)
        );
    }

    for &(start, end) in &runs {
        let m = frames[start..end].iter().map(|f| f.mean).sum::<f64>() / (end - start) as f64;
        let _ = writeln!(
            svg,
            r#"<line class="seq-mean" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="crimson" stroke-width="2"/>"#,
            ml + pw * start as f64 / n,
            ml + pw * end as f64 / n,
            y = py(m)
        );
    }

    let _ = writeln!(
        svg,
        r#"<text class="xlabel" x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">Frame</text>"#,
        ml + pw / 2.0,
        opts.height - 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text class="ylabel" x="14" y="{y:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {y:.2})">Mean keypoint error (px)</text>"#,
        y = mt + ph / 2.0
    );
    if omitted > 0 {
        let _ = writeln!(
            svg,
            r#"<text class="caption" x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{omitted} outlier(s) above {} omitted</text>"#,
            ml + pw / 2.0,
            opts.height - 10.0,
            y_max
        );
    }
    svg.push_str("</svg>\n");

    Ok(ErrorPlot {
        svg,
        separators: runs.len() - 1,
        omitted,
    })
}
