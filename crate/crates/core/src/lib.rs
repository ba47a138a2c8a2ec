//! Reproducible continual-learning task streams and evaluation metrics.
//!
//! The engine is organized in three data levels: [`dataset`] manifests are
//! the raw labeled samples, [`scenario`] builders slice them into ordered
//! task sequences (class-incremental, instance-incremental, NIC,
//! transformation-based, label drift), and [`taskset`] views stream one
//! task's (features, label, task-id) triples. [`metrics`] evaluates
//! learner prediction logs with the standard continual-learning metrics
//! suite. All randomness is seeded and portable ([`rng`]); identical
//! inputs produce byte-identical outputs.

pub mod dataset;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod taskset;
pub mod transforms;

pub use dataset::{
    concat_datasets, load_manifest, parse_manifest, synth_dataset, write_manifest,
    write_manifest_string, DatasetError, DatasetManifest, Relabel, Sample, SampleRef, Split,
    SynthSpec,
};
pub use metrics::{
    load_prediction_log, logger_from_records, metric_report, parse_prediction_log,
    write_prediction_log, AccuracyMatrix, LoggerState, MetricsError, PredictionRecord,
};
pub use scenario::{
    build_scenario, parse_scenario_manifest, write_scenario_string, LabelPolicy, Scenario,
    ScenarioConfig, ScenarioError, ScenarioKind, ScenarioManifest, ScenarioSpec, TaskSpec,
    HIDDEN_TASK_ID,
};
pub use taskset::{BatchPlan, TaskError, TaskSet, Triple};
pub use transforms::{make_permutation, Transform, TransformError};
