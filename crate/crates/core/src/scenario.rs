//! Scenario materialization: turn a declarative spec over a dataset
//! manifest into an ordered sequence of task descriptors.
//!
//! Five scenario kinds are supported: class-incremental (new tasks bring
//! new classes), instance-incremental (same classes, new samples), NIC
//! (both at once, driven by sample metadata), transformation (each task is
//! the whole dataset under a different transform), and label drift (each
//! task relabels the same samples).

use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::{DatasetManifest, Split};
use crate::rng::{fisher_yates, SplitMix64};
use crate::transforms::{Transform, TransformError};

/// Task id exposed in triples when the label policy hides it.
pub const HIDDEN_TASK_ID: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
pub struct LabelPolicy {
    pub train_task_labels: bool,
    pub test_task_labels: bool,
}

impl Default for LabelPolicy {
    fn default() -> Self {
        Self {
            train_task_labels: true,
            test_task_labels: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ClassIncremental,
    InstanceIncremental,
    Nic,
    Transformation,
    LabelDrift,
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioKind::ClassIncremental => "class_incremental",
            ScenarioKind::InstanceIncremental => "instance_incremental",
            ScenarioKind::Nic => "nic",
            ScenarioKind::Transformation => "transformation",
            ScenarioKind::LabelDrift => "label_drift",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, ScenarioError> {
        Ok(match s {
            "class_incremental" => ScenarioKind::ClassIncremental,
            "instance_incremental" => ScenarioKind::InstanceIncremental,
            "nic" => ScenarioKind::Nic,
            "transformation" => ScenarioKind::Transformation,
            "label_drift" => ScenarioKind::LabelDrift,
            other => return Err(ScenarioError::Parse(format!("unknown scenario kind `{other}`"))),
        })
    }
}

/// Declarative scenario recipe. Which fields are required depends on the
/// kind; each builder checks its own preconditions.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub increments: Option<Vec<u32>>,
    pub initial_increment: Option<u32>,
    pub nb_tasks: Option<usize>,
    pub class_order: Option<Vec<u32>>,
    pub seed: u64,
    pub transforms: Option<Vec<Transform>>,
    pub relabel_maps: Option<Vec<BTreeMap<u32, u32>>>,
    /// Partition by sample meta_id instead of a random split.
    pub metadata_key: bool,
    pub label_policy: LabelPolicy,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            increments: None,
            initial_increment: None,
            nb_tasks: None,
            class_order: None,
            seed: 0,
            transforms: None,
            relabel_maps: None,
            metadata_key: false,
            label_policy: LabelPolicy::default(),
        }
    }
}

/// One materialized task: which dataset positions it covers and how their
/// samples are presented.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub task_id: usize,
    pub indices: Vec<usize>,
    pub classes: BTreeSet<u32>,
    pub transform: Transform,
    pub relabel: Option<BTreeMap<u32, u32>>,
}

/// Materialized ordered sequence of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub label_policy: LabelPolicy,
    pub tasks: Vec<TaskSpec>,
    pub nb_classes: usize,
    pub nb_tasks: usize,
    /// Per task, the classes never seen in any earlier task.
    pub new_classes: Vec<BTreeSet<u32>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("UnevenIncrement: increment {increment} does not divide the {remaining} remaining classes")]
    UnevenIncrement { increment: u32, remaining: usize },
    #[error("IncrementSumMismatch: increments sum to {sum}, dataset has {classes} classes")]
    IncrementSumMismatch { sum: u32, classes: usize },
    #[error("NonPositiveIncrement: increments must be >= 1")]
    NonPositiveIncrement,
    #[error("InitialIncrementWithExplicitList: initial_increment only applies to a uniform increment")]
    InitialIncrementWithExplicitList,
    #[error("UnknownClass: class {0} in class_order is not in the dataset")]
    UnknownClass(u32),
    #[error("InvalidClassOrder: class_order is not a permutation of the class set")]
    InvalidClassOrder,
    #[error("TooManyTasks: class {class} has {samples} samples, fewer than {tasks} tasks")]
    TooManyTasks {
        class: u32,
        samples: usize,
        tasks: usize,
    },
    #[error("MissingMetadata: sample id {0} has no meta_id")]
    MissingMetadata(u64),
    #[error("EmptyTransformList: transformation scenario needs at least one transform")]
    EmptyTransformList,
    #[error("MissingImageShape: rotation transforms need a dataset image shape")]
    MissingImageShape,
    #[error("RefKindUnsupported: transformation scenarios need inline feature vectors")]
    RefKindUnsupported,
    #[error("PartialRelabelMap: map {map} does not cover class {class}")]
    PartialRelabelMap { map: usize, class: u32 },
    #[error("EmptyMapList: label-drift scenario needs at least one relabel map")]
    EmptyMapList,
    #[error("TaskIndexOutOfRange: task {index} of {tasks}")]
    TaskIndexOutOfRange { index: usize, tasks: usize },
    #[error("MissingField: `{0}` is required for this scenario kind")]
    MissingField(&'static str),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("TransformError: {0}")]
    Transform(#[from] TransformError),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

fn class_order(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Vec<u32>, ScenarioError> {
    match &spec.class_order {
        None => Ok(dataset.class_set().iter().copied().collect()),
        Some(order) => {
            for &c in order {
                if !dataset.class_set().contains(&c) {
                    return Err(ScenarioError::UnknownClass(c));
                }
            }
            let as_set: BTreeSet<u32> = order.iter().copied().collect();
            if as_set.len() != order.len() || as_set != *dataset.class_set() {
                return Err(ScenarioError::InvalidClassOrder);
            }
            Ok(order.clone())
        }
    }
}

fn finish(
    kind: ScenarioKind,
    spec: &ScenarioSpec,
    tasks: Vec<TaskSpec>,
) -> Scenario {
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut new_classes = Vec::with_capacity(tasks.len());
    let mut all: BTreeSet<u32> = BTreeSet::new();
    for t in &tasks {
        new_classes.push(t.classes.difference(&seen).copied().collect());
        seen.extend(t.classes.iter().copied());
        all.extend(t.classes.iter().copied());
    }
    Scenario {
        kind,
        seed: spec.seed,
        label_policy: spec.label_policy,
        nb_classes: all.len(),
        nb_tasks: tasks.len(),
        tasks,
        new_classes,
    }
}

/// Per-task class counts for a class-incremental spec over `nb_classes`
/// classes.
fn increment_plan(spec: &ScenarioSpec, nb_classes: usize) -> Result<Vec<usize>, ScenarioError> {
    let increments = spec
        .increments
        .as_ref()
        .ok_or(ScenarioError::MissingField("increments"))?;
    if increments.is_empty() {
        return Err(ScenarioError::MissingField("increments"));
    }
    if increments.contains(&0) || spec.initial_increment == Some(0) {
        return Err(ScenarioError::NonPositiveIncrement);
    }
    if increments.len() == 1 {
        // uniform mode, with an optional larger first task
        let k = increments[0];
        let mut plan = Vec::new();
        let mut remaining = nb_classes;
        if let Some(initial) = spec.initial_increment {
            if initial as usize > nb_classes {
                return Err(ScenarioError::IncrementSumMismatch {
                    sum: initial,
                    classes: nb_classes,
                });
            }
            plan.push(initial as usize);
            remaining -= initial as usize;
        }
        if !remaining.is_multiple_of(k as usize) {
            return Err(ScenarioError::UnevenIncrement {
                increment: k,
                remaining,
            });
        }
        plan.extend(std::iter::repeat_n(k as usize, remaining / k as usize));
        Ok(plan)
    } else {
        if spec.initial_increment.is_some() {
            return Err(ScenarioError::InitialIncrementWithExplicitList);
        }
        let sum: u32 = increments.iter().sum();
        if sum as usize != nb_classes {
            return Err(ScenarioError::IncrementSumMismatch {
                sum,
                classes: nb_classes,
            });
        }
        Ok(increments.iter().map(|&k| k as usize).collect())
    }
}

/// Each task brings previously unseen classes, consumed from the class
/// order left to right.
pub fn build_class_incremental(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    let order = class_order(dataset, spec)?;
    let plan = increment_plan(spec, order.len())?;
    let mut tasks = Vec::with_capacity(plan.len());
    let mut cursor = 0usize;
    for (task_id, count) in plan.into_iter().enumerate() {
        let classes: BTreeSet<u32> = order[cursor..cursor + count].iter().copied().collect();
        cursor += count;
        let indices = dataset
            .class_indices(&classes)
            .map_err(|_| ScenarioError::InvalidClassOrder)?;
        tasks.push(TaskSpec {
            task_id,
            indices,
            classes,
            transform: Transform::Identity,
            relabel: None,
        });
    }
    Ok(finish(ScenarioKind::ClassIncremental, spec, tasks))
}

fn meta_groups(dataset: &DatasetManifest) -> Result<BTreeMap<u32, Vec<usize>>, ScenarioError> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.samples().iter().enumerate() {
        let meta = s.meta_id.ok_or(ScenarioError::MissingMetadata(s.id))?;
        groups.entry(meta).or_default().push(i);
    }
    Ok(groups)
}

fn tasks_from_groups(dataset: &DatasetManifest, groups: BTreeMap<u32, Vec<usize>>) -> Vec<TaskSpec> {
    groups
        .into_values()
        .enumerate()
        .map(|(task_id, indices)| {
            let classes = indices
                .iter()
                .map(|&i| dataset.samples()[i].label)
                .collect();
            TaskSpec {
                task_id,
                indices,
                classes,
                transform: Transform::Identity,
                relabel: None,
            }
        })
        .collect()
}

/// Every task carries the full class set but disjoint samples: either a
/// seeded per-class stratified split into `nb_tasks` chunks, or one task
/// per distinct meta_id.
pub fn build_instance_incremental(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    let tasks = if spec.metadata_key {
        tasks_from_groups(dataset, meta_groups(dataset)?)
    } else {
        let nb_tasks = spec.nb_tasks.ok_or(ScenarioError::MissingField("nb_tasks"))?;
        if nb_tasks == 0 {
            return Err(ScenarioError::MissingField("nb_tasks"));
        }
        let mut per_task: Vec<Vec<usize>> = vec![Vec::new(); nb_tasks];
        for &class in dataset.class_set() {
            let classes: BTreeSet<u32> = std::iter::once(class).collect();
            let mut positions = dataset.class_indices(&classes).expect("class from class_set");
            if positions.len() < nb_tasks {
                return Err(ScenarioError::TooManyTasks {
                    class,
                    samples: positions.len(),
                    tasks: nb_tasks,
                });
            }
            let mut rng = SplitMix64::derived(spec.seed, class as u64);
            fisher_yates(&mut positions, &mut rng);
            let base = positions.len() / nb_tasks;
            let rem = positions.len() % nb_tasks;
            let mut cursor = 0usize;
            for (t, bucket) in per_task.iter_mut().enumerate() {
                let size = base + usize::from(t < rem);
                bucket.extend_from_slice(&positions[cursor..cursor + size]);
                cursor += size;
            }
        }
        per_task
            .into_iter()
            .enumerate()
            .map(|(task_id, mut indices)| {
                indices.sort_unstable();
                let classes = indices
                    .iter()
                    .map(|&i| dataset.samples()[i].label)
                    .collect();
                TaskSpec {
                    task_id,
                    indices,
                    classes,
                    transform: Transform::Identity,
                    relabel: None,
                }
            })
            .collect()
    };
    Ok(finish(ScenarioKind::InstanceIncremental, spec, tasks))
}

/// New-instances-and-classes: one task per distinct meta_id, in ascending
/// meta_id order. A task may introduce new classes, new samples of known
/// classes, or both; `Scenario::new_classes` records which.
pub fn build_nic(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    let tasks = tasks_from_groups(dataset, meta_groups(dataset)?);
    Ok(finish(ScenarioKind::Nic, spec, tasks))
}

/// One task per transform, each over the whole dataset.
pub fn build_transformation(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    let transforms = spec
        .transforms
        .as_ref()
        .ok_or(ScenarioError::EmptyTransformList)?;
    if transforms.is_empty() {
        return Err(ScenarioError::EmptyTransformList);
    }
    if dataset.ref_kind() != crate::dataset::RefKind::Inline {
        return Err(ScenarioError::RefKindUnsupported);
    }
    if transforms.iter().any(|t| t.needs_image_shape()) && dataset.image_shape().is_none() {
        return Err(ScenarioError::MissingImageShape);
    }
    let all_indices: Vec<usize> = (0..dataset.len()).collect();
    let tasks = transforms
        .iter()
        .enumerate()
        .map(|(task_id, transform)| TaskSpec {
            task_id,
            indices: all_indices.clone(),
            classes: dataset.class_set().clone(),
            transform: transform.clone(),
            relabel: None,
        })
        .collect();
    Ok(finish(ScenarioKind::Transformation, spec, tasks))
}

/// One task per relabel map; the same sample may carry different labels in
/// different tasks (real concept drift).
pub fn build_label_drift(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    let maps = spec
        .relabel_maps
        .as_ref()
        .ok_or(ScenarioError::EmptyMapList)?;
    if maps.is_empty() {
        return Err(ScenarioError::EmptyMapList);
    }
    for (i, map) in maps.iter().enumerate() {
        for &c in dataset.class_set() {
            if !map.contains_key(&c) {
                return Err(ScenarioError::PartialRelabelMap { map: i, class: c });
            }
        }
    }
    let all_indices: Vec<usize> = (0..dataset.len()).collect();
    let tasks = maps
        .iter()
        .enumerate()
        .map(|(task_id, map)| {
            let classes = dataset
                .samples()
                .iter()
                .map(|s| map[&s.label])
                .collect();
            TaskSpec {
                task_id,
                indices: all_indices.clone(),
                classes,
                transform: Transform::Identity,
                relabel: Some(map.clone()),
            }
        })
        .collect();
    Ok(finish(ScenarioKind::LabelDrift, spec, tasks))
}

/// Dispatch on the spec's kind.
pub fn build_scenario(
    dataset: &DatasetManifest,
    spec: &ScenarioSpec,
) -> Result<Scenario, ScenarioError> {
    match spec.kind {
        ScenarioKind::ClassIncremental => build_class_incremental(dataset, spec),
        ScenarioKind::InstanceIncremental => build_instance_incremental(dataset, spec),
        ScenarioKind::Nic => build_nic(dataset, spec),
        ScenarioKind::Transformation => build_transformation(dataset, spec),
        ScenarioKind::LabelDrift => build_label_drift(dataset, spec),
    }
}

impl Scenario {
    pub fn task(&self, t: usize) -> Result<&TaskSpec, ScenarioError> {
        self.tasks.get(t).ok_or(ScenarioError::TaskIndexOutOfRange {
            index: t,
            tasks: self.nb_tasks,
        })
    }

    /// Task id exposed to the learner for split `split`: the real id when
    /// the matching label-policy flag is set, the hidden sentinel
    /// otherwise.
    pub fn exposed_task_id(&self, t: usize, split: Split) -> i64 {
        let visible = match split {
            Split::Train => self.label_policy.train_task_labels,
            Split::Test => self.label_policy.test_task_labels,
        };
        if visible {
            t as i64
        } else {
            HIDDEN_TASK_ID
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario config file (TOML) consumed by the CLI.
// ---------------------------------------------------------------------------

/// Serializable form of [`ScenarioSpec`]: transforms are descriptor
/// strings, relabel maps use string keys (a TOML restriction).
#[derive(Debug, Clone, serde::Deserialize)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub increments: Option<Vec<u32>>,
    #[serde(default)]
    pub initial_increment: Option<u32>,
    #[serde(default)]
    pub nb_tasks: Option<usize>,
    #[serde(default)]
    pub class_order: Option<Vec<u32>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transforms: Option<Vec<String>>,
    #[serde(default)]
    pub relabel_maps: Option<Vec<BTreeMap<String, u32>>>,
    #[serde(default)]
    pub metadata_key: bool,
    #[serde(default)]
    pub label_policy: LabelPolicy,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    /// Resolve descriptors against the target dataset's image shape.
    pub fn into_spec(
        self,
        image_shape: Option<(usize, usize)>,
    ) -> Result<ScenarioSpec, ScenarioError> {
        let transforms = match self.transforms {
            None => None,
            Some(descs) => {
                let ts: Result<Vec<_>, _> = descs
                    .iter()
                    .map(|d| Transform::parse_descriptor(d, image_shape))
                    .collect();
                Some(ts?)
            }
        };
        let relabel_maps = match self.relabel_maps {
            None => None,
            Some(maps) => {
                let mut out = Vec::with_capacity(maps.len());
                for map in maps {
                    let mut m = BTreeMap::new();
                    for (k, v) in map {
                        let key: u32 = k
                            .parse()
                            .map_err(|_| ScenarioError::Parse(format!("bad relabel key `{k}`")))?;
                        m.insert(key, v);
                    }
                    out.push(m);
                }
                Some(out)
            }
        };
        Ok(ScenarioSpec {
            kind: self.kind,
            increments: self.increments,
            initial_increment: self.initial_increment,
            nb_tasks: self.nb_tasks,
            class_order: self.class_order,
            seed: self.seed,
            transforms,
            relabel_maps,
            metadata_key: self.metadata_key,
            label_policy: self.label_policy,
        })
    }
}

// ---------------------------------------------------------------------------
// Scenario manifest file format.
//
// Line-delimited, UTF-8, LF. Header:
//   scenario,<kind>,<nb_tasks>,<nb_classes>,<seed>,<train_labels>,<test_labels>,<image_shape>,<dataset_path>
// then one line per task:
//   <task_id>,<classes ;-sep>,<transform descriptor>,<relabel from>to ;-sep or empty>,<new_classes ;-sep>,<indices ;-sep>
// ---------------------------------------------------------------------------

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_scenario_string(
    scenario: &Scenario,
    image_shape: Option<(usize, usize)>,
    dataset_path: &str,
) -> String {
    let shape = image_shape
        .map(|(h, w)| format!("{h}x{w}"))
        .unwrap_or_default();
    let mut out = format!(
        "scenario,{},{},{},{},{},{},{},{}\n",
        scenario.kind,
        scenario.nb_tasks,
        scenario.nb_classes,
        scenario.seed,
        scenario.label_policy.train_task_labels,
        scenario.label_policy.test_task_labels,
        shape,
        dataset_path
    );
    for (task, new) in scenario.tasks.iter().zip(&scenario.new_classes) {
        let relabel = task
            .relabel
            .as_ref()
            .map(|m| join(m.iter().map(|(k, v)| format!("{k}>{v}"))))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            task.task_id,
            join(task.classes.iter()),
            task.transform.descriptor(),
            relabel,
            join(new.iter()),
            join(task.indices.iter()),
        ));
    }
    out
}

/// A scenario manifest plus the dataset path recorded in its header.
#[derive(Debug, Clone)]
pub struct ScenarioManifest {
    pub scenario: Scenario,
    pub image_shape: Option<(usize, usize)>,
    pub dataset_path: String,
}

fn parse_set(field: &str) -> Result<BTreeSet<u32>, ScenarioError> {
    if field.is_empty() {
        return Ok(BTreeSet::new());
    }
    field
        .split(';')
        .map(|s| {
            s.parse()
                .map_err(|_| ScenarioError::Parse(format!("bad class id `{s}`")))
        })
        .collect()
}

pub fn parse_scenario_manifest(text: &str) -> Result<ScenarioManifest, ScenarioError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ScenarioError::Parse("empty scenario manifest".into()))?;
    let fields: Vec<&str> = header.splitn(9, ',').collect();
    if fields.len() != 9 || fields[0] != "scenario" {
        return Err(ScenarioError::Parse("bad scenario header".into()));
    }
    let kind: ScenarioKind = fields[1].parse()?;
    let nb_tasks: usize = fields[2]
        .parse()
        .map_err(|_| ScenarioError::Parse("bad nb_tasks".into()))?;
    let nb_classes: usize = fields[3]
        .parse()
        .map_err(|_| ScenarioError::Parse("bad nb_classes".into()))?;
    let seed: u64 = fields[4]
        .parse()
        .map_err(|_| ScenarioError::Parse("bad seed".into()))?;
    let parse_bool = |s: &str| match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ScenarioError::Parse(format!("bad bool `{other}`"))),
    };
    let label_policy = LabelPolicy {
        train_task_labels: parse_bool(fields[5])?,
        test_task_labels: parse_bool(fields[6])?,
    };
    let image_shape = if fields[7].is_empty() {
        None
    } else {
        let (h, w) = fields[7]
            .split_once('x')
            .ok_or_else(|| ScenarioError::Parse("bad image_shape".into()))?;
        Some((
            h.parse()
                .map_err(|_| ScenarioError::Parse("bad image_shape".into()))?,
            w.parse()
                .map_err(|_| ScenarioError::Parse("bad image_shape".into()))?,
        ))
    };
    let dataset_path = fields[8].to_string();

    let mut tasks = Vec::new();
    let mut new_classes = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(6, ',').collect();
        if fields.len() != 6 {
            return Err(ScenarioError::Parse(format!("bad task line `{line}`")));
        }
        let task_id: usize = fields[0]
            .parse()
            .map_err(|_| ScenarioError::Parse("bad task_id".into()))?;
        let classes = parse_set(fields[1])?;
        let transform = Transform::parse_descriptor(fields[2], image_shape)?;
        let relabel = if fields[3].is_empty() {
            None
        } else {
            let mut m = BTreeMap::new();
            for pair in fields[3].split(';') {
                let (k, v) = pair
                    .split_once('>')
                    .ok_or_else(|| ScenarioError::Parse(format!("bad relabel pair `{pair}`")))?;
                m.insert(
                    k.parse()
                        .map_err(|_| ScenarioError::Parse("bad relabel key".into()))?,
                    v.parse()
                        .map_err(|_| ScenarioError::Parse("bad relabel value".into()))?,
                );
            }
            Some(m)
        };
        new_classes.push(parse_set(fields[4])?);
        let indices: Result<Vec<usize>, _> = fields[5]
            .split(';')
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| ScenarioError::Parse(format!("bad index `{s}`")))
            })
            .collect();
        tasks.push(TaskSpec {
            task_id,
            indices: indices?,
            classes,
            transform,
            relabel,
        });
    }
    if tasks.len() != nb_tasks {
        return Err(ScenarioError::Parse(format!(
            "header says {nb_tasks} tasks, found {}",
            tasks.len()
        )));
    }
    Ok(ScenarioManifest {
        scenario: Scenario {
            kind,
            seed,
            label_policy,
            nb_tasks,
            nb_classes,
            tasks,
            new_classes,
        },
        image_shape,
        dataset_path,
    })
}
