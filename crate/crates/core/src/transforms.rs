//! Deterministic sample transformations: rotations, pixel permutations,
//! and compositions of them.
//!
//! Rotations by exact multiples of 90° are pure index remaps (lossless and
//! bit-exact); any other angle uses inverse-mapped bilinear interpolation
//! about the pixel-grid center with zero padding outside the source image.
//! Positive degrees rotate counter-clockwise. Angles are reduced mod 360
//! before the 90°-multiple check.

use crate::rng::{fisher_yates, SplitMix64};

#[derive(Debug, Clone, PartialEq)]
pub struct Permutation {
    /// Seed the mapping was generated from, when it came from
    /// [`make_permutation`]. Inverse permutations carry no seed.
    pub seed: Option<u64>,
    /// Bijection on `{0..n-1}`; output[i] = input[mapping[i]].
    pub mapping: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    Rotation {
        degrees: f64,
        height: usize,
        width: usize,
    },
    Permutation(Permutation),
    Composition(Vec<Transform>),
}

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error("DimensionMismatch: transform expects length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NotInvertible: {0}")]
    NotInvertible(String),
    #[error("ParseError: bad transform descriptor `{0}`")]
    Parse(String),
    #[error("MissingImageShape: rotation descriptor needs an image shape")]
    MissingImageShape,
}

/// Seeded Fisher-Yates bijection on `{0..n-1}`.
pub fn make_permutation(seed: u64, n: usize) -> Transform {
    let mut mapping: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    fisher_yates(&mut mapping, &mut rng);
    Transform::Permutation(Permutation {
        seed: Some(seed),
        mapping,
    })
}

/// Reduced angle in `[0, 360)` and, when it is an exact multiple of 90°,
/// the quarter-turn count.
fn quarter_turns(degrees: f64) -> (f64, Option<u8>) {
    let reduced = degrees.rem_euclid(360.0);
    let k = if reduced == 0.0 {
        Some(0)
    } else if reduced == 90.0 {
        Some(1)
    } else if reduced == 180.0 {
        Some(2)
    } else if reduced == 270.0 {
        Some(3)
    } else {
        None
    };
    (reduced, k)
}

/// Exact counter-clockwise quarter-turn index map. Returns the flat
/// destination index for source pixel `(r, c)` of an `h x w` grid.
fn quarter_turn_dest(k: u8, h: usize, w: usize, r: usize, c: usize) -> usize {
    match k {
        0 => r * w + c,
        // output shape (w, h)
        1 => (w - 1 - c) * h + r,
        // output shape (h, w)
        2 => (h - 1 - r) * w + (w - 1 - c),
        // output shape (w, h)
        3 => c * h + (h - 1 - r),
        _ => unreachable!(),
    }
}

fn rotate_exact(x: &[f64], k: u8, h: usize, w: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for r in 0..h {
        for c in 0..w {
            out[quarter_turn_dest(k, h, w, r, c)] = x[r * w + c];
        }
    }
    out
}

fn rotate_bilinear(x: &[f64], degrees: f64, h: usize, w: usize) -> Vec<f64> {
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let ch = (h as f64 - 1.0) / 2.0;
    let cw = (w as f64 - 1.0) / 2.0;
    let mut out = vec![0.0; x.len()];
    let tap = |r: i64, c: i64| -> f64 {
        if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
            0.0
        } else {
            x[r as usize * w + c as usize]
        }
    };
    for r in 0..h {
        for c in 0..w {
            let xd = c as f64 - cw;
            let yd = r as f64 - ch;
            // inverse rotation of the destination coordinate
            let sx = xd * cos - yd * sin + cw;
            let sy = xd * sin + yd * cos + ch;
            let c0 = sx.floor();
            let r0 = sy.floor();
            let fx = sx - c0;
            let fy = sy - r0;
            let (r0, c0) = (r0 as i64, c0 as i64);
            let v = tap(r0, c0) * (1.0 - fy) * (1.0 - fx)
                + tap(r0, c0 + 1) * (1.0 - fy) * fx
                + tap(r0 + 1, c0) * fy * (1.0 - fx)
                + tap(r0 + 1, c0 + 1) * fy * fx;
            out[r * w + c] = v;
        }
    }
    out
}

impl Transform {
    /// Vector length this transform expects, when it constrains one.
    pub fn expected_len(&self) -> Option<usize> {
        match self {
            Transform::Identity => None,
            Transform::Rotation { height, width, .. } => Some(height * width),
            Transform::Permutation(p) => Some(p.mapping.len()),
            Transform::Composition(ts) => ts.iter().find_map(|t| t.expected_len()),
        }
    }

    /// Whether the transform requires an image shape (any rotation,
    /// including inside compositions).
    pub fn needs_image_shape(&self) -> bool {
        match self {
            Transform::Rotation { .. } => true,
            Transform::Composition(ts) => ts.iter().any(|t| t.needs_image_shape()),
            _ => false,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, TransformError> {
        if let Some(n) = self.expected_len() {
            if x.len() != n {
                return Err(TransformError::DimensionMismatch {
                    expected: n,
                    got: x.len(),
                });
            }
        }
        Ok(match self {
            Transform::Identity => x.to_vec(),
            Transform::Rotation {
                degrees,
                height,
                width,
            } => {
                let (reduced, k) = quarter_turns(*degrees);
                match k {
                    Some(k) => rotate_exact(x, k, *height, *width),
                    None => rotate_bilinear(x, reduced, *height, *width),
                }
            }
            Transform::Permutation(p) => p.mapping.iter().map(|&i| x[i]).collect(),
            Transform::Composition(ts) => {
                let mut cur = x.to_vec();
                for t in ts {
                    cur = t.apply(&cur)?;
                }
                cur
            }
        })
    }

    /// Inverse transform. Defined for identity, permutations, exact
    /// quarter-turn rotations, and compositions of those.
    pub fn invert(&self) -> Result<Transform, TransformError> {
        match self {
            Transform::Identity => Ok(Transform::Identity),
            Transform::Rotation {
                degrees,
                height,
                width,
            } => {
                let (reduced, k) = quarter_turns(*degrees);
                let k = k.ok_or_else(|| {
                    TransformError::NotInvertible(format!(
                        "interpolating rotation by {reduced} degrees"
                    ))
                })?;
                let (h, w) = if k % 2 == 1 {
                    (*width, *height)
                } else {
                    (*height, *width)
                };
                Ok(Transform::Rotation {
                    degrees: ((4 - k) % 4) as f64 * 90.0,
                    height: h,
                    width: w,
                })
            }
            Transform::Permutation(p) => {
                let mut inverse = vec![0usize; p.mapping.len()];
                for (i, &j) in p.mapping.iter().enumerate() {
                    inverse[j] = i;
                }
                Ok(Transform::Permutation(Permutation {
                    seed: None,
                    mapping: inverse,
                }))
            }
            Transform::Composition(ts) => {
                let inv: Result<Vec<_>, _> = ts.iter().rev().map(|t| t.invert()).collect();
                Ok(Transform::Composition(inv?))
            }
        }
    }

    /// Image shape after the transform, given the shape before it.
    /// Odd quarter-turns transpose; everything else preserves the shape.
    pub fn output_shape(&self, input: Option<(usize, usize)>) -> Option<(usize, usize)> {
        match self {
            Transform::Rotation { degrees, .. } => {
                let (_, k) = quarter_turns(*degrees);
                match (k, input) {
                    (Some(k), Some((h, w))) if k % 2 == 1 => Some((w, h)),
                    _ => input,
                }
            }
            Transform::Composition(ts) => ts.iter().fold(input, |s, t| t.output_shape(s)),
            _ => input,
        }
    }

    // Descriptor grammar: `identity`, `rot:<degrees>`, `perm:<seed>:<n>`,
    // `compose:[d1;d2;...]`. Seedless (inverse) permutations serialize as
    // `permx:<i0>;<i1>;...`.
    pub fn descriptor(&self) -> String {
        match self {
            Transform::Identity => "identity".to_string(),
            Transform::Rotation { degrees, .. } => format!("rot:{degrees}"),
            Transform::Permutation(p) => match p.seed {
                Some(seed) => format!("perm:{seed}:{}", p.mapping.len()),
                None => format!(
                    "permx:{}",
                    p.mapping
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(";")
                ),
            },
            Transform::Composition(ts) => format!(
                "compose:[{}]",
                ts.iter().map(|t| t.descriptor()).collect::<Vec<_>>().join(";")
            ),
        }
    }

    /// Parse a descriptor. Rotations need the dataset's image shape.
    pub fn parse_descriptor(
        desc: &str,
        image_shape: Option<(usize, usize)>,
    ) -> Result<Transform, TransformError> {
        let err = || TransformError::Parse(desc.to_string());
        if desc == "identity" {
            return Ok(Transform::Identity);
        }
        if let Some(rest) = desc.strip_prefix("rot:") {
            let degrees: f64 = rest.parse().map_err(|_| err())?;
            let (height, width) = image_shape.ok_or(TransformError::MissingImageShape)?;
            return Ok(Transform::Rotation {
                degrees,
                height,
                width,
            });
        }
        if let Some(rest) = desc.strip_prefix("perm:") {
            let (seed, n) = rest.split_once(':').ok_or_else(err)?;
            let seed: u64 = seed.parse().map_err(|_| err())?;
            let n: usize = n.parse().map_err(|_| err())?;
            return Ok(make_permutation(seed, n));
        }
        if let Some(rest) = desc.strip_prefix("permx:") {
            let mapping: Result<Vec<usize>, _> = rest.split(';').map(|s| s.parse()).collect();
            let mapping = mapping.map_err(|_| err())?;
            let mut check: Vec<usize> = mapping.clone();
            check.sort_unstable();
            if check != (0..mapping.len()).collect::<Vec<_>>() {
                return Err(err());
            }
            return Ok(Transform::Permutation(Permutation {
                seed: None,
                mapping,
            }));
        }
        if let Some(rest) = desc.strip_prefix("compose:[") {
            let inner = rest.strip_suffix(']').ok_or_else(err)?;
            if inner.is_empty() {
                return Ok(Transform::Composition(vec![]));
            }
            // split on `;` at bracket depth 0 so nested compositions survive
            let mut parts = Vec::new();
            let mut depth = 0usize;
            let mut start = 0usize;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '[' => depth += 1,
                    ']' => depth = depth.saturating_sub(1),
                    ';' if depth == 0 => {
                        parts.push(&inner[start..i]);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(&inner[start..]);
            let ts: Result<Vec<_>, _> = parts
                .iter()
                .map(|p| Transform::parse_descriptor(p, image_shape))
                .collect();
            return Ok(Transform::Composition(ts?));
        }
        Err(err())
    }
}
