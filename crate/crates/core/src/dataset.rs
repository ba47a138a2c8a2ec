//! Dataset manifests: loading, synthesis, validation and concatenation.
//!
//! A manifest is the raw-data level of the engine: an immutable, validated
//! list of labeled samples with a declared class set. Everything downstream
//! (scenarios, tasksets) works on index views into a manifest.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use crate::rng::SplitMix64;

/// Which split a manifest belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
        }
    }
}

impl std::str::FromStr for Split {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, DatasetError> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(DatasetError::Parse {
                line: 0,
                msg: format!("unknown split tag `{other}`"),
            }),
        }
    }
}

/// How a sample's payload is stored. All samples in one manifest use the
/// same variant.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleRef {
    /// Dense feature vector, finite values, fixed dimension per manifest.
    Inline(Vec<f64>),
    /// External file path, opaque to this module.
    Path(String),
    /// Synthetic generator coordinate: (class index, draw index).
    Synthetic { class: u32, draw: u32 },
}

impl SampleRef {
    pub fn kind(&self) -> RefKind {
        match self {
            SampleRef::Inline(_) => RefKind::Inline,
            SampleRef::Path(_) => RefKind::Path,
            SampleRef::Synthetic { .. } => RefKind::Synth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Inline,
    Path,
    Synth,
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefKind::Inline => write!(f, "inline"),
            RefKind::Path => write!(f, "path"),
            RefKind::Synth => write!(f, "synth"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub r#ref: SampleRef,
    pub label: u32,
    /// Session / instance identifier, used by metadata-driven scenarios.
    pub meta_id: Option<u32>,
}

/// Immutable, validated collection of samples with a declared class set.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    name: String,
    split: Split,
    samples: Vec<Sample>,
    class_set: BTreeSet<u32>,
    feature_dim: usize,
    image_shape: Option<(usize, usize)>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("ParseError: line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("DuplicateId: sample id {0} appears more than once")]
    DuplicateId(u64),
    #[error("EmptyDataset: manifest contains no samples")]
    EmptyDataset,
    #[error("MixedRefKinds: manifest mixes {0} and {1} sample refs")]
    MixedRefKinds(RefKind, RefKind),
    #[error("DimensionMismatch: expected feature dim {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NonFiniteValue: sample id {0} contains a non-finite feature")]
    NonFiniteValue(u64),
    #[error("EmptyList: no manifests to concatenate")]
    EmptyList,
    #[error("SplitMismatch: cannot concatenate {0} and {1} manifests")]
    SplitMismatch(Split, Split),
    #[error("UnknownClass: class {0} is not in the manifest class set")]
    UnknownClass(u32),
    #[error("InvalidSynthSpec: {0}")]
    InvalidSynthSpec(String),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

impl DatasetManifest {
    /// Build a manifest from raw parts, checking every invariant.
    /// The class set is derived from the labels actually present.
    pub fn new(
        name: impl Into<String>,
        split: Split,
        samples: Vec<Sample>,
        feature_dim: usize,
        image_shape: Option<(usize, usize)>,
    ) -> Result<Self, DatasetError> {
        if samples.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        if let Some((h, w)) = image_shape {
            if h * w != feature_dim {
                return Err(DatasetError::DimensionMismatch {
                    expected: feature_dim,
                    got: h * w,
                });
            }
        }
        let kind = samples[0].r#ref.kind();
        let mut seen = HashSet::with_capacity(samples.len());
        let mut class_set = BTreeSet::new();
        for s in &samples {
            if !seen.insert(s.id) {
                return Err(DatasetError::DuplicateId(s.id));
            }
            if s.r#ref.kind() != kind {
                return Err(DatasetError::MixedRefKinds(kind, s.r#ref.kind()));
            }
            if let SampleRef::Inline(v) = &s.r#ref {
                if v.len() != feature_dim {
                    return Err(DatasetError::DimensionMismatch {
                        expected: feature_dim,
                        got: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(DatasetError::NonFiniteValue(s.id));
                }
            }
            class_set.insert(s.label);
        }
        Ok(Self {
            name: name.into(),
            split,
            samples,
            class_set,
            feature_dim,
            image_shape,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_set(&self) -> &BTreeSet<u32> {
        &self.class_set
    }

    pub fn nb_classes(&self) -> usize {
        self.class_set.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn image_shape(&self) -> Option<(usize, usize)> {
        self.image_shape
    }

    pub fn ref_kind(&self) -> RefKind {
        self.samples[0].r#ref.kind()
    }

    /// Ascending positions of all samples whose label is in `classes`.
    pub fn class_indices(&self, classes: &BTreeSet<u32>) -> Result<Vec<usize>, DatasetError> {
        if let Some(&c) = classes.iter().find(|c| !self.class_set.contains(c)) {
            return Err(DatasetError::UnknownClass(c));
        }
        Ok(self
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| classes.contains(&s.label))
            .map(|(i, _)| i)
            .collect())
    }
}

/// Parameters for the deterministic synthetic dataset generator.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub nb_classes: u32,
    pub per_class: u32,
    pub feature_dim: usize,
    pub seed: u64,
    /// Minimum distance between class means.
    pub class_separation: f64,
}

impl SynthSpec {
    fn validate(&self) -> Result<(), DatasetError> {
        if self.nb_classes == 0 {
            return Err(DatasetError::InvalidSynthSpec("nb_classes must be >= 1".into()));
        }
        if self.per_class == 0 {
            return Err(DatasetError::InvalidSynthSpec("per_class must be >= 1".into()));
        }
        if self.feature_dim == 0 {
            return Err(DatasetError::InvalidSynthSpec("feature_dim must be >= 1".into()));
        }
        if self.class_separation.is_nan() || self.class_separation <= 0.0 {
            return Err(DatasetError::InvalidSynthSpec(
                "class_separation must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Deterministic synthetic manifest: class `c` is an isotropic Gaussian
/// around a seeded mean placed `class_separation * (c + 1)` along axis
/// `c % feature_dim`, which keeps all means pairwise at least
/// `class_separation` apart.
pub fn synth_dataset(spec: &SynthSpec, split: Split) -> Result<DatasetManifest, DatasetError> {
    spec.validate()?;
    let split_code: u64 = match split {
        Split::Train => 0,
        Split::Test => 1,
    };
    let mut samples = Vec::with_capacity(spec.nb_classes as usize * spec.per_class as usize);
    let mut next_id = 0u64;
    for class in 0..spec.nb_classes {
        let axis = class as usize % spec.feature_dim;
        let mean = spec.class_separation * (class as f64 + 1.0);
        let mut rng = SplitMix64::derived(spec.seed, (split_code << 32) | class as u64);
        for _ in 0..spec.per_class {
            let mut v = vec![0.0f64; spec.feature_dim];
            for x in v.iter_mut() {
                *x = rng.next_gaussian();
            }
            v[axis] += mean;
            samples.push(Sample {
                id: next_id,
                r#ref: SampleRef::Inline(v),
                label: class,
                meta_id: None,
            });
            next_id += 1;
        }
    }
    DatasetManifest::new(
        format!("synth-{}x{}-d{}-s{}", spec.nb_classes, spec.per_class, spec.feature_dim, spec.seed),
        split,
        samples,
        spec.feature_dim,
        None,
    )
}

/// Class-id handling when concatenating manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relabel {
    /// Union class sets unchanged.
    Keep,
    /// Offset each manifest's class ids by the running count of prior classes.
    Shift,
}

/// Concatenate manifests into one (the "fellowship" operation). Sample ids
/// are reassigned sequentially; order is concatenation order.
pub fn concat_datasets(
    manifests: &[DatasetManifest],
    relabel: Relabel,
) -> Result<DatasetManifest, DatasetError> {
    let first = manifests.first().ok_or(DatasetError::EmptyList)?;
    for m in &manifests[1..] {
        if m.feature_dim != first.feature_dim {
            return Err(DatasetError::DimensionMismatch {
                expected: first.feature_dim,
                got: m.feature_dim,
            });
        }
        if m.split != first.split {
            return Err(DatasetError::SplitMismatch(first.split, m.split));
        }
    }
    let mut samples = Vec::new();
    let mut next_id = 0u64;
    let mut class_offset = 0u32;
    for m in manifests {
        let offset = match relabel {
            Relabel::Keep => 0,
            Relabel::Shift => class_offset,
        };
        for s in &m.samples {
            samples.push(Sample {
                id: next_id,
                r#ref: s.r#ref.clone(),
                label: s.label + offset,
                meta_id: s.meta_id,
            });
            next_id += 1;
        }
        class_offset += m.class_set.len() as u32;
    }
    let name = manifests
        .iter()
        .map(|m| m.name.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let image_shape = if manifests.iter().all(|m| m.image_shape == first.image_shape) {
        first.image_shape
    } else {
        None
    };
    DatasetManifest::new(name, first.split, samples, first.feature_dim, image_shape)
}

// ---------------------------------------------------------------------------
// Manifest file format.
//
// Line-delimited, UTF-8, LF endings. One header line:
//   name,split,feature_dim,image_shape,ref_kind
// where image_shape is `HxW` or empty. Then one record per sample:
//   id,label,meta_id,payload
// meta_id may be empty. The payload is the remainder of the line: a
// comma-separated decimal vector (inline), a path string (path), or
// `class;draw` (synth).
// ---------------------------------------------------------------------------

pub fn write_manifest_string(m: &DatasetManifest) -> String {
    let shape = m
        .image_shape
        .map(|(h, w)| format!("{h}x{w}"))
        .unwrap_or_default();
    let mut out = format!(
        "{},{},{},{},{}\n",
        m.name, m.split, m.feature_dim, shape, m.ref_kind()
    );
    for s in &m.samples {
        let meta = s.meta_id.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},", s.id, s.label, meta));
        match &s.r#ref {
            SampleRef::Inline(v) => {
                let mut first = true;
                for x in v {
                    if !first {
                        out.push(',');
                    }
                    out.push_str(&format!("{x}"));
                    first = false;
                }
            }
            SampleRef::Path(p) => out.push_str(p),
            SampleRef::Synthetic { class, draw } => out.push_str(&format!("{class};{draw}")),
        }
        out.push('\n');
    }
    out
}

pub fn write_manifest(m: &DatasetManifest, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    std::fs::write(path, write_manifest_string(m))?;
    Ok(())
}

pub fn parse_manifest(text: &str) -> Result<DatasetManifest, DatasetError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DatasetError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() != 5 {
        return Err(DatasetError::Parse {
            line: 1,
            msg: format!("header has {} fields, expected 5", fields.len()),
        });
    }
    let name = fields[0].to_string();
    let split: Split = fields[1].parse().map_err(|_| DatasetError::Parse {
        line: 1,
        msg: format!("bad split tag `{}`", fields[1]),
    })?;
    let feature_dim: usize = fields[2].parse().map_err(|_| DatasetError::Parse {
        line: 1,
        msg: format!("bad feature_dim `{}`", fields[2]),
    })?;
    let image_shape = if fields[3].is_empty() {
        None
    } else {
        let (h, w) = fields[3].split_once('x').ok_or_else(|| DatasetError::Parse {
            line: 1,
            msg: format!("bad image_shape `{}`", fields[3]),
        })?;
        let h: usize = h.parse().map_err(|_| DatasetError::Parse {
            line: 1,
            msg: "bad image_shape height".into(),
        })?;
        let w: usize = w.parse().map_err(|_| DatasetError::Parse {
            line: 1,
            msg: "bad image_shape width".into(),
        })?;
        Some((h, w))
    };
    let ref_kind = match fields[4] {
        "inline" => RefKind::Inline,
        "path" => RefKind::Path,
        "synth" => RefKind::Synth,
        other => {
            return Err(DatasetError::Parse {
                line: 1,
                msg: format!("unknown ref kind `{other}`"),
            })
        }
    };

    let mut samples = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| DatasetError::Parse { line: lineno, msg };
        let mut parts = line.splitn(4, ',');
        let id: u64 = parts
            .next()
            .ok_or_else(|| parse_err("missing id".into()))?
            .parse()
            .map_err(|_| parse_err("bad id".into()))?;
        let label: u32 = parts
            .next()
            .ok_or_else(|| parse_err("missing label".into()))?
            .parse()
            .map_err(|_| parse_err("bad label".into()))?;
        let meta_field = parts.next().ok_or_else(|| parse_err("missing meta_id".into()))?;
        let meta_id = if meta_field.is_empty() {
            None
        } else {
            Some(meta_field.parse().map_err(|_| parse_err("bad meta_id".into()))?)
        };
        let payload = parts.next().ok_or_else(|| parse_err("missing payload".into()))?;
        let r#ref = match ref_kind {
            RefKind::Inline => {
                let v: Result<Vec<f64>, _> = payload.split(',').map(|x| x.parse::<f64>()).collect();
                SampleRef::Inline(v.map_err(|_| parse_err("bad feature value".into()))?)
            }
            RefKind::Path => SampleRef::Path(payload.to_string()),
            RefKind::Synth => {
                let (c, d) = payload
                    .split_once(';')
                    .ok_or_else(|| parse_err("bad synth coordinate".into()))?;
                SampleRef::Synthetic {
                    class: c.parse().map_err(|_| parse_err("bad synth class".into()))?,
                    draw: d.parse().map_err(|_| parse_err("bad synth draw".into()))?,
                }
            }
        };
        samples.push(Sample {
            id,
            r#ref,
            label,
            meta_id,
        });
    }
    DatasetManifest::new(name, split, samples, feature_dim, image_shape)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text)
}
