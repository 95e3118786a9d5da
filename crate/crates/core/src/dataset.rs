//! Annotated-frame manifests and the per-sequence train/validation split.
//!
//! A manifest is UTF-8 JSON Lines, one labeled frame per line:
//!
//! ```json
//! {"image":"seq1/000123.png","sequence":"seq1","width":1280,"height":720,"frame":123,
//!  "vanishing":[640,300],"left":[80,719],"right":[1210,719]}
//! ```
//!
//! Keypoints are integer pixels, `0 <= x < width`, `0 <= y < height`. Blank
//! lines are skipped; unknown fields are ignored.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::geometry::{ImageDims, Point};

/// The three labeled keypoints. Channel order in label tensors and heatmap
/// lists is `Vanishing, Right, Left`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeypointKind {
    Vanishing,
    Right,
    Left,
}

impl KeypointKind {
    pub const ALL: [KeypointKind; 3] = [KeypointKind::Vanishing, KeypointKind::Right, KeypointKind::Left];

    pub fn channel(self) -> usize {
        match self {
            KeypointKind::Vanishing => 0,
            KeypointKind::Right => 1,
            KeypointKind::Left => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KeypointKind::Vanishing => "vanishing",
            KeypointKind::Right => "right",
            KeypointKind::Left => "left",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Keypoints {
    pub vanishing: Point,
    pub left: Point,
    pub right: Point,
}

impl Keypoints {
    pub fn get(&self, kind: KeypointKind) -> Point {
        match kind {
            KeypointKind::Vanishing => self.vanishing,
            KeypointKind::Right => self.right,
            KeypointKind::Left => self.left,
        }
    }

    pub fn map(&self, mut f: impl FnMut(Point) -> Point) -> Self {
        Self {
            vanishing: f(self.vanishing),
            left: f(self.left),
            right: f(self.right),
        }
    }

    /// Checks that every keypoint lies inside `dims`.
    pub fn check_within(&self, dims: ImageDims) -> Result<()> {
        for kind in KeypointKind::ALL {
            let p = self.get(kind);
            if !dims.contains(p) {
                return Err(Error::KeypointOutOfBounds {
                    name: kind.name(),
                    x: p.x,
                    y: p.y,
                    width: dims.width,
                    height: dims.height,
                });
            }
        }
        Ok(())
    }
}

/// Ground truth for one labeled frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ManifestRecord", into = "ManifestRecord")]
pub struct KeypointAnnotation {
    pub image: String,
    pub sequence: String,
    /// Resolution the keypoints are expressed in.
    pub dims: ImageDims,
    pub frame: u64,
    pub keypoints: Keypoints,
}

#[derive(Serialize, Deserialize)]
struct ManifestRecord {
    image: String,
    sequence: String,
    width: u32,
    height: u32,
    frame: u64,
    vanishing: Point,
    left: Point,
    right: Point,
}

impl TryFrom<ManifestRecord> for KeypointAnnotation {
    type Error = Error;

    fn try_from(r: ManifestRecord) -> Result<Self> {
        let dims = ImageDims::new(r.width, r.height)?;
        let keypoints = Keypoints {
            vanishing: r.vanishing,
            left: r.left,
            right: r.right,
        };
        keypoints.check_within(dims)?;
        Ok(Self {
            image: r.image,
            sequence: r.sequence,
            dims,
            frame: r.frame,
            keypoints,
        })
    }
}

impl From<KeypointAnnotation> for ManifestRecord {
    fn from(a: KeypointAnnotation) -> Self {
        Self {
            image: a.image,
            sequence: a.sequence,
            width: a.dims.width,
            height: a.dims.height,
            frame: a.frame,
            vanishing: a.keypoints.vanishing,
            left: a.keypoints.left,
            right: a.keypoints.right,
        }
    }
}

/// Frames partitioned into training and validation sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitManifest {
    pub train: Vec<KeypointAnnotation>,
    pub val: Vec<KeypointAnnotation>,
}

/// Parses manifest text. `origin` is only used in error messages.
pub fn parse_manifest(text: &str, origin: &str) -> Result<Vec<KeypointAnnotation>> {
    let mut out = Vec::new();
    let mut seen: HashSet<(String, u64)> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: origin.to_string(),
            line: lineno,
            msg: e.to_string(),
        })?;
        let ann: KeypointAnnotation = serde_json::from_value(value).map_err(|e| Error::Validation {
            path: origin.to_string(),
            line: lineno,
            msg: e.to_string(),
        })?;
        if !seen.insert((ann.sequence.clone(), ann.frame)) {
            return Err(Error::Validation {
                path: origin.to_string(),
                line: lineno,
                msg: format!("duplicate frame {} in sequence `{}`", ann.frame, ann.sequence),
            });
        }
        out.push(ann);
    }
    Ok(out)
}

/// Reads and validates a manifest file, preserving file order.
pub fn load_manifest(path: &Path) -> Result<Vec<KeypointAnnotation>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, &path.display().to_string())
}

pub fn manifest_to_string(anns: &[KeypointAnnotation]) -> Result<String> {
    let mut out = String::new();
    for a in anns {
        out.push_str(&serde_json::to_string(a)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_manifest(path: &Path, anns: &[KeypointAnnotation]) -> Result<()> {
    write_atomic(path, manifest_to_string(anns)?.as_bytes())
}

/// Number of training frames for a sequence of `len` frames.
pub fn train_count(len: usize, train_frac: f64) -> usize {
    // the epsilon absorbs representation error, e.g. 0.29 * 100 = 28.999...
    (((train_frac * len as f64) + 1e-9).floor() as usize).min(len)
}

/// Splits each sequence independently: frames sorted by index, the first
/// `floor(train_frac * len)` go to training and the rest to validation.
/// Sequences appear in order of first occurrence.
pub fn split_by_sequence(anns: &[KeypointAnnotation], train_frac: f64) -> Result<SplitManifest> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must be in (0, 1), got {train_frac}"
        )));
    }
    if anns.is_empty() {
        return Err(Error::EmptySequence("manifest has no frames".into()));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&KeypointAnnotation>> = HashMap::new();
    for a in anns {
        if a.sequence.is_empty() {
            return Err(Error::EmptySequence(format!("frame `{}` has an empty sequence id", a.image)));
        }
        groups
            .entry(a.sequence.as_str())
            .or_insert_with(|| {
                order.push(a.sequence.as_str());
                Vec::new()
            })
            .push(a);
    }
    let mut split = SplitManifest::default();
    for seq in order {
        let mut frames = groups.remove(seq).unwrap_or_default();
        frames.sort_by_key(|a| a.frame);
        let n_train = train_count(frames.len(), train_frac);
        let (train, val) = frames.split_at(n_train);
        split.train.extend(train.iter().map(|a| (*a).clone()));
        split.val.extend(val.iter().map(|a| (*a).clone()));
    }
    Ok(split)
}

/// Rescales one point from `from` to `to`, rounding to nearest and clamping
/// into the target image.
pub fn scale_point(p: Point, from: ImageDims, to: ImageDims) -> Point {
    let sx = f64::from(to.width) / f64::from(from.width);
    let sy = f64::from(to.height) / f64::from(from.height);
    let x = (f64::from(p.x) * sx).round() as i64;
    let y = (f64::from(p.y) * sy).round() as i64;
    Point::new(
        x.clamp(0, i64::from(to.width) - 1) as i32,
        y.clamp(0, i64::from(to.height) - 1) as i32,
    )
}

/// Expresses an annotation in another resolution.
pub fn scale_keypoints(ann: &KeypointAnnotation, from: ImageDims, to: ImageDims) -> Result<KeypointAnnotation> {
    // ImageDims cannot be constructed with a zero side, but deserialized or
    // hand-built values are re-checked here.
    ImageDims::new(from.width, from.height)?;
    ImageDims::new(to.width, to.height)?;
    Ok(KeypointAnnotation {
        dims: to,
        keypoints: ann.keypoints.map(|p| scale_point(p, from, to)),
        ..ann.clone()
    })
}
