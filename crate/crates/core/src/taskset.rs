//! Immutable per-task data view yielding (features, label, task-id)
//! triples, with deterministic batch iteration.
//!
//! Transforms are applied on access rather than pre-materialized, so a
//! transformation scenario over N tasks does not hold N copies of the
//! dataset in memory.

use std::collections::BTreeMap;

use crate::dataset::{DatasetManifest, Sample, SampleRef};
use crate::scenario::{Scenario, ScenarioError, TaskSpec};
use crate::rng::{fisher_yates, SplitMix64};
use crate::transforms::TransformError;

/// One (x, y, t) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub features: Vec<f64>,
    pub label: u32,
    pub task_id: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub shuffle: bool,
    pub seed: u64,
    pub drop_last: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("IndexOutOfRange: index {index} of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("RefKindUnsupported: sample id {0} is not an inline feature vector")]
    RefKindUnsupported(u64),
    #[error("InvalidBatchPlan: batch_size must be >= 1")]
    InvalidBatchPlan,
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Immutable view of one task's samples.
#[derive(Debug, Clone)]
pub struct TaskSet<'a> {
    dataset: &'a DatasetManifest,
    task: &'a TaskSpec,
    exposed_task_id: i64,
}

impl<'a> TaskSet<'a> {
    pub fn new(dataset: &'a DatasetManifest, task: &'a TaskSpec, exposed_task_id: i64) -> Self {
        debug_assert!(task.indices.iter().all(|&i| i < dataset.len()));
        Self {
            dataset,
            task,
            exposed_task_id,
        }
    }

    pub fn len(&self) -> usize {
        self.task.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.task.indices.is_empty()
    }

    pub fn task(&self) -> &TaskSpec {
        self.task
    }

    pub fn exposed_task_id(&self) -> i64 {
        self.exposed_task_id
    }

    fn sample(&self, i: usize) -> Result<&'a Sample, TaskError> {
        let pos = *self
            .task
            .indices
            .get(i)
            .ok_or(TaskError::IndexOutOfRange {
                index: i,
                len: self.len(),
            })?;
        Ok(&self.dataset.samples()[pos])
    }

    fn effective_label(&self, sample: &Sample) -> u32 {
        match &self.task.relabel {
            Some(map) => map.get(&sample.label).copied().unwrap_or(sample.label),
            None => sample.label,
        }
    }

    /// The i-th triple, transform and relabel applied.
    pub fn get(&self, i: usize) -> Result<Triple, TaskError> {
        let sample = self.sample(i)?;
        let features = match &sample.r#ref {
            SampleRef::Inline(v) => self.task.transform.apply(v)?,
            _ => return Err(TaskError::RefKindUnsupported(sample.id)),
        };
        Ok(Triple {
            features,
            label: self.effective_label(sample),
            task_id: self.exposed_task_id,
        })
    }

    /// Deterministic batch iteration order: manifest-index order, or a
    /// seeded Fisher-Yates shuffle of it.
    pub fn batch_order(&self, plan: &BatchPlan) -> Result<Vec<usize>, TaskError> {
        if plan.batch_size == 0 {
            return Err(TaskError::InvalidBatchPlan);
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        if plan.shuffle {
            let mut rng = SplitMix64::new(plan.seed);
            fisher_yates(&mut order, &mut rng);
        }
        Ok(order)
    }

    /// Materialized batches of triples. Each task position appears exactly
    /// once; a final partial batch is kept unless `drop_last`.
    pub fn iterate_batches(&self, plan: &BatchPlan) -> Result<Vec<Vec<Triple>>, TaskError> {
        let order = self.batch_order(plan)?;
        let mut batches = Vec::new();
        for chunk in order.chunks(plan.batch_size) {
            if plan.drop_last && chunk.len() < plan.batch_size {
                break;
            }
            let batch: Result<Vec<Triple>, TaskError> =
                chunk.iter().map(|&i| self.get(i)).collect();
            batches.push(batch?);
        }
        Ok(batches)
    }

    /// Histogram of effective (post-relabel) labels.
    pub fn class_counts(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &pos in &self.task.indices {
            let label = self.effective_label(&self.dataset.samples()[pos]);
            *counts.entry(label).or_insert(0) += 1;
        }
        counts
    }

    /// Materialize the task as a standalone dataset manifest with
    /// transforms and relabels applied, for consumption by external
    /// trainers. Sample ids and meta ids are preserved.
    pub fn materialize_manifest(&self, name: &str) -> Result<DatasetManifest, TaskError> {
        let mut samples = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let source = self.sample(i)?;
            let triple = self.get(i)?;
            samples.push(Sample {
                id: source.id,
                r#ref: SampleRef::Inline(triple.features),
                label: triple.label,
                meta_id: source.meta_id,
            });
        }
        let image_shape = self.task.transform.output_shape(self.dataset.image_shape());
        DatasetManifest::new(
            name,
            self.dataset.split(),
            samples,
            self.dataset.feature_dim(),
            image_shape,
        )
        .map_err(|e| TaskError::Transform(TransformError::Parse(e.to_string())))
    }
}

impl Scenario {
    /// Immutable view for task `t` of this scenario over `dataset`. The
    /// exposed task id follows the label policy for the dataset's split.
    pub fn taskset<'a>(
        &'a self,
        dataset: &'a DatasetManifest,
        t: usize,
    ) -> Result<TaskSet<'a>, ScenarioError> {
        let task = self.task(t)?;
        Ok(TaskSet::new(
            dataset,
            task,
            self.exposed_task_id(t, dataset.split()),
        ))
    }
}
