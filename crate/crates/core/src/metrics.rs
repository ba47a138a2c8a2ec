//! Prediction logging and the continual-learning metrics suite.
//!
//! The logger collects per-step evaluation records. A "step" closes when a
//! task has been learned and the model was evaluated on every task seen so
//! far; the resulting lower-triangular accuracy matrix R (R[i][j] =
//! accuracy on task j after step i) drives the derived metrics.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionRecord {
    /// Training-step index the record belongs to (0-based).
    pub step: usize,
    pub sample_id: u64,
    pub y_true: u32,
    pub y_pred: u32,
    /// Task index of the evaluated sample. Must be >= 0 for offline
    /// records; online records may carry the hidden sentinel.
    pub task_id: i64,
    /// True when recorded on the incoming training batch, false for
    /// post-step test evaluation.
    pub online: bool,
}

impl PredictionRecord {
    pub fn correct(&self) -> bool {
        self.y_true == self.y_pred
    }
}

/// Lower-triangular accuracy matrix: `rows[i][j]` is defined for `j <= i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMatrix {
    rows: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), i + 1, "row {i} is not lower-triangular");
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        Self { rows }
    }

    /// Number of closed steps.
    pub fn nb_steps(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// A^t: equal-weight mean accuracy over all tasks seen at step t.
    pub fn step_accuracy(&self, t: usize) -> f64 {
        let row = &self.rows[t];
        row.iter().sum::<f64>() / row.len() as f64
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("MissingTaskEvaluation: step {step} has no records for task {task}")]
    MissingTaskEvaluation { step: usize, task: usize },
    #[error("NonPositiveModelSize: model size must be >= 1")]
    NonPositiveModelSize,
    #[error("OutOfOrderStep: record for step {got} while step {expected} is open")]
    OutOfOrderStep { got: usize, expected: usize },
    #[error("StepAlreadyClosed: step {0} is closed")]
    StepAlreadyClosed(usize),
    #[error("InvalidTaskId: offline record with task id {0}")]
    InvalidTaskId(i64),
    #[error("NoStepsClosed: no closed steps to compute over")]
    NoStepsClosed,
    #[error("InsufficientTasks: metric needs at least 2 closed steps")]
    InsufficientTasks,
    #[error("NoOnlineRecords: no online records logged")]
    NoOnlineRecords,
    #[error("NoModelSizes: at least one closed step has no recorded model size")]
    NoModelSizes,
    #[error("ParseError: line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

/// Append-only prediction log with step bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct LoggerState {
    offline: Vec<PredictionRecord>,
    online: Vec<PredictionRecord>,
    /// One entry per closed step. `None` when the step was ingested from a
    /// log file that carries no sizes.
    model_sizes: Vec<Option<u64>>,
    current_step: usize,
}

impl LoggerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn current_step(&self) -> usize {
        self.current_step
    }

    pub fn nb_closed_steps(&self) -> usize {
        self.model_sizes.len()
    }

    pub fn records(&self) -> impl Iterator<Item = &PredictionRecord> {
        self.offline.iter().chain(self.online.iter())
    }

    fn close_step(
        &mut self,
        predictions: Vec<PredictionRecord>,
        model_size: Option<u64>,
    ) -> Result<(), MetricsError> {
        let step = self.current_step;
        let mut covered = vec![false; step + 1];
        for r in &predictions {
            if r.online {
                return Err(MetricsError::OutOfOrderStep {
                    got: r.step,
                    expected: step,
                });
            }
            if r.step != step {
                return Err(MetricsError::OutOfOrderStep {
                    got: r.step,
                    expected: step,
                });
            }
            if r.task_id < 0 || r.task_id as usize > step {
                return Err(MetricsError::InvalidTaskId(r.task_id));
            }
            covered[r.task_id as usize] = true;
        }
        if let Some(task) = covered.iter().position(|c| !c) {
            return Err(MetricsError::MissingTaskEvaluation { step, task });
        }
        self.offline.extend(predictions);
        self.model_sizes.push(model_size);
        self.current_step += 1;
        Ok(())
    }

    /// Close the current step with its post-step test evaluations and the
    /// model's parameter count. Every task seen so far must be covered.
    pub fn add_step(
        &mut self,
        predictions: Vec<PredictionRecord>,
        model_size: u64,
    ) -> Result<(), MetricsError> {
        if model_size == 0 {
            return Err(MetricsError::NonPositiveModelSize);
        }
        self.close_step(predictions, Some(model_size))
    }

    /// Close the current step without a model size (log-file ingestion).
    pub fn add_step_unsized(
        &mut self,
        predictions: Vec<PredictionRecord>,
    ) -> Result<(), MetricsError> {
        self.close_step(predictions, None)
    }

    /// Record accuracy on an incoming training batch of the open step.
    pub fn add_online_batch(
        &mut self,
        records: Vec<PredictionRecord>,
    ) -> Result<(), MetricsError> {
        for r in &records {
            if !r.online || r.step < self.current_step {
                return Err(MetricsError::StepAlreadyClosed(r.step));
            }
            if r.step > self.current_step {
                return Err(MetricsError::OutOfOrderStep {
                    got: r.step,
                    expected: self.current_step,
                });
            }
        }
        self.online.extend(records);
        Ok(())
    }

    /// R[i][j] = fraction of correct offline records at step i, task j.
    pub fn accuracy_matrix(&self) -> Result<AccuracyMatrix, MetricsError> {
        let steps = self.nb_closed_steps();
        if steps == 0 {
            return Err(MetricsError::NoStepsClosed);
        }
        let mut correct = vec![vec![0usize; steps]; steps];
        let mut total = vec![vec![0usize; steps]; steps];
        for r in &self.offline {
            let (i, j) = (r.step, r.task_id as usize);
            total[i][j] += 1;
            correct[i][j] += usize::from(r.correct());
        }
        let rows = (0..steps)
            .map(|i| {
                (0..=i)
                    .map(|j| correct[i][j] as f64 / total[i][j] as f64)
                    .collect()
            })
            .collect();
        Ok(AccuracyMatrix::from_rows(rows))
    }

    /// A^{T-1}: mean accuracy over all tasks at the last closed step.
    pub fn last_accuracy(&self) -> Result<f64, MetricsError> {
        let r = self.accuracy_matrix()?;
        Ok(r.step_accuracy(r.nb_steps() - 1))
    }

    /// Mean of A^t over all closed steps.
    pub fn average_incremental_accuracy(&self) -> Result<f64, MetricsError> {
        let r = self.accuracy_matrix()?;
        let sum: f64 = (0..r.nb_steps()).map(|t| r.step_accuracy(t)).sum();
        Ok(sum / r.nb_steps() as f64)
    }

    /// BWT = mean over earlier tasks of (final accuracy - accuracy when
    /// the task was learned). Negative values measure forgetting.
    pub fn backward_transfer(&self) -> Result<f64, MetricsError> {
        let r = self.accuracy_matrix()?;
        let t = r.nb_steps();
        if t < 2 {
            return Err(MetricsError::InsufficientTasks);
        }
        let sum: f64 = (0..t - 1).map(|i| r.get(t - 1, i) - r.get(i, i)).sum();
        Ok(sum / (t - 1) as f64)
    }

    /// 1 minus the forgetting part of BWT, clamped to [0, 1].
    pub fn remembering(&self) -> Result<f64, MetricsError> {
        let bwt = self.backward_transfer()?;
        Ok((1.0 - bwt.min(0.0).abs()).clamp(0.0, 1.0))
    }

    /// The improvement part of BWT.
    pub fn positive_backward_transfer(&self) -> Result<f64, MetricsError> {
        Ok(self.backward_transfer()?.max(0.0))
    }

    /// Micro-averaged accuracy over all online records, pooled across
    /// steps.
    pub fn online_cumulative_performance(&self) -> Result<f64, MetricsError> {
        if self.online.is_empty() {
            return Err(MetricsError::NoOnlineRecords);
        }
        let correct = self.online.iter().filter(|r| r.correct()).count();
        Ok(correct as f64 / self.online.len() as f64)
    }

    /// MS = min(1, mean over steps of size(step 0) / size(step t)). A
    /// growing model is penalized; a shrinking one is capped at 1.
    pub fn model_size_efficiency(&self) -> Result<f64, MetricsError> {
        if self.model_sizes.is_empty() {
            return Err(MetricsError::NoStepsClosed);
        }
        let sizes: Option<Vec<u64>> = self.model_sizes.iter().copied().collect();
        let sizes = sizes.ok_or(MetricsError::NoModelSizes)?;
        let first = sizes[0] as f64;
        let mean = sizes.iter().map(|&s| first / s as f64).sum::<f64>() / sizes.len() as f64;
        Ok(mean.min(1.0))
    }
}

// ---------------------------------------------------------------------------
// Prediction-log file format: one record per line,
//   step,sample_id,y_true,y_pred,task_id,online_flag
// with online_flag 0 or 1. UTF-8, LF.
// ---------------------------------------------------------------------------

pub fn write_prediction_log(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.step,
            r.sample_id,
            r.y_true,
            r.y_pred,
            r.task_id,
            u8::from(r.online)
        ));
    }
    out
}

pub fn parse_prediction_log(text: &str) -> Result<Vec<PredictionRecord>, MetricsError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let err = |msg: &str| MetricsError::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err("expected 6 fields"));
        }
        records.push(PredictionRecord {
            step: fields[0].parse().map_err(|_| err("bad step"))?,
            sample_id: fields[1].parse().map_err(|_| err("bad sample_id"))?,
            y_true: fields[2].parse().map_err(|_| err("bad y_true"))?,
            y_pred: fields[3].parse().map_err(|_| err("bad y_pred"))?,
            task_id: fields[4].parse().map_err(|_| err("bad task_id"))?,
            online: match fields[5] {
                "0" => false,
                "1" => true,
                _ => return Err(err("bad online flag")),
            },
        });
    }
    Ok(records)
}

pub fn load_prediction_log(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, MetricsError> {
    parse_prediction_log(&std::fs::read_to_string(path)?)
}

/// Replay parsed records into a logger, closing steps in order. Steps must
/// be contiguous from 0. Model sizes are unknown in log files.
pub fn logger_from_records(records: &[PredictionRecord]) -> Result<LoggerState, MetricsError> {
    let mut by_step: BTreeMap<usize, (Vec<PredictionRecord>, Vec<PredictionRecord>)> =
        BTreeMap::new();
    for r in records {
        let entry = by_step.entry(r.step).or_default();
        if r.online {
            entry.1.push(*r);
        } else {
            entry.0.push(*r);
        }
    }
    let mut logger = LoggerState::new();
    for (step, (offline, online)) in by_step {
        if step != logger.current_step() {
            return Err(MetricsError::OutOfOrderStep {
                got: step,
                expected: logger.current_step(),
            });
        }
        if !online.is_empty() {
            logger.add_online_batch(online)?;
        }
        logger.add_step_unsized(offline)?;
    }
    Ok(logger)
}

/// Flat key/value metric report, 6 decimal places, `n/a` for metrics whose
/// preconditions do not hold.
pub fn metric_report(state: &LoggerState) -> String {
    fn line(name: &str, value: Result<f64, MetricsError>) -> String {
        match value {
            Ok(v) => format!("{name} {v:.6}\n"),
            Err(_) => format!("{name} n/a\n"),
        }
    }
    let mut out = String::new();
    out.push_str(&line("last_accuracy", state.last_accuracy()));
    out.push_str(&line(
        "average_incremental_accuracy",
        state.average_incremental_accuracy(),
    ));
    out.push_str(&line(
        "online_cumulative_performance",
        state.online_cumulative_performance(),
    ));
    out.push_str(&line("backward_transfer", state.backward_transfer()));
    out.push_str(&line("remembering", state.remembering()));
    out.push_str(&line(
        "positive_backward_transfer",
        state.positive_backward_transfer(),
    ));
    out.push_str(&line("model_size_efficiency", state.model_size_efficiency()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn offline(step: usize, task: i64, correct: bool) -> PredictionRecord {
        PredictionRecord {
            step,
            sample_id: 0,
            y_true: 0,
            y_pred: if correct { 0 } else { 1 },
            task_id: task,
            online: false,
        }
    }

    /// Close steps so that R[i][j] holds `correct_of[i][j]` correct
    /// records out of 10.
    fn logger_with_matrix(correct_of: &[Vec<usize>]) -> LoggerState {
        let mut logger = LoggerState::new();
        for (i, row) in correct_of.iter().enumerate() {
            let mut records = Vec::new();
            for (j, &correct) in row.iter().enumerate() {
                for k in 0..10 {
                    records.push(offline(i, j as i64, k < correct));
                }
            }
            logger.add_step(records, 100).unwrap();
        }
        logger
    }

    /// The spec fixture: R = [[1.0], [0.9, 1.0], [0.8, 0.9, 1.0]].
    fn fixture_logger() -> LoggerState {
        logger_with_matrix(&[vec![10], vec![9, 10], vec![8, 9, 10]])
    }

    #[test]
    fn accuracy_matrix_matches_hand_counts() {
        let logger = fixture_logger();
        let r = logger.accuracy_matrix().unwrap();
        assert_eq!(r.rows(), &[vec![1.0], vec![0.9, 1.0], vec![0.8, 0.9, 1.0]]);
    }

    #[test]
    fn accuracy_extremes() {
        let all_correct = logger_with_matrix(&[vec![10], vec![10, 10], vec![10, 10, 10]]);
        let r = all_correct.accuracy_matrix().unwrap();
        assert!(r.rows().iter().flatten().all(|&v| v == 1.0));
        let all_wrong = logger_with_matrix(&[vec![0], vec![0, 0]]);
        let r = all_wrong.accuracy_matrix().unwrap();
        assert!(r.rows().iter().flatten().all(|&v| v == 0.0));
        assert!(matches!(
            LoggerState::new().accuracy_matrix(),
            Err(MetricsError::NoStepsClosed)
        ));
    }

    #[test]
    fn incremental_accuracy_fixture() {
        // A = [1.0, 0.95, 0.9] from the fixture matrix
        let logger = fixture_logger();
        assert!((logger.last_accuracy().unwrap() - 0.9).abs() < TOL);
        assert!((logger.average_incremental_accuracy().unwrap() - 0.95).abs() < TOL);
    }

    #[test]
    fn single_step_collapses_the_mean() {
        let logger = logger_with_matrix(&[vec![7]]);
        assert!(
            (logger.average_incremental_accuracy().unwrap() - logger.last_accuracy().unwrap())
                .abs()
                < TOL
        );
    }

    #[test]
    fn backward_transfer_fixture() {
        let logger = fixture_logger();
        // ((0.8 - 1.0) + (0.9 - 1.0)) / 2
        assert!((logger.backward_transfer().unwrap() + 0.15).abs() < TOL);
        assert!((logger.remembering().unwrap() - 0.85).abs() < TOL);
        assert!(logger.positive_backward_transfer().unwrap().abs() < TOL);
    }

    #[test]
    fn backward_transfer_no_forgetting_is_zero() {
        let logger = logger_with_matrix(&[vec![8], vec![8, 6]]);
        assert!(logger.backward_transfer().unwrap().abs() < TOL);
        assert!((logger.remembering().unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn positive_backward_transfer_sign_split() {
        // R = [[0.8], [0.9, 1.0]] -> BWT = +0.1
        let logger = logger_with_matrix(&[vec![8], vec![9, 10]]);
        assert!((logger.backward_transfer().unwrap() - 0.1).abs() < TOL);
        assert!((logger.remembering().unwrap() - 1.0).abs() < TOL);
        assert!((logger.positive_backward_transfer().unwrap() - 0.1).abs() < TOL);
    }

    #[test]
    fn insufficient_tasks_for_bwt() {
        let logger = logger_with_matrix(&[vec![10]]);
        assert!(matches!(
            logger.backward_transfer(),
            Err(MetricsError::InsufficientTasks)
        ));
    }

    #[test]
    fn online_cumulative_performance_micro_average() {
        let mut logger = LoggerState::new();
        let batch = |correct: usize, n: usize| -> Vec<PredictionRecord> {
            (0..n)
                .map(|k| PredictionRecord {
                    step: 0,
                    sample_id: k as u64,
                    y_true: 0,
                    y_pred: u32::from(k >= correct),
                    task_id: 0,
                    online: true,
                })
                .collect()
        };
        logger.add_online_batch(batch(4, 4)).unwrap();
        logger.add_online_batch(batch(2, 4)).unwrap();
        assert!((logger.online_cumulative_performance().unwrap() - 0.75).abs() < TOL);
        // empty batch is a no-op
        logger.add_online_batch(vec![]).unwrap();
        assert!((logger.online_cumulative_performance().unwrap() - 0.75).abs() < TOL);
        assert!(matches!(
            LoggerState::new().online_cumulative_performance(),
            Err(MetricsError::NoOnlineRecords)
        ));
    }

    #[test]
    fn online_batch_on_closed_step_rejected() {
        let mut logger = logger_with_matrix(&[vec![10]]);
        let r = PredictionRecord {
            step: 0,
            sample_id: 0,
            y_true: 0,
            y_pred: 0,
            task_id: 0,
            online: true,
        };
        assert!(matches!(
            logger.add_online_batch(vec![r]),
            Err(MetricsError::StepAlreadyClosed(0))
        ));
    }

    #[test]
    fn add_step_preconditions() {
        let mut logger = LoggerState::new();
        assert!(matches!(
            logger.add_step(vec![offline(0, 0, true)], 0),
            Err(MetricsError::NonPositiveModelSize)
        ));
        logger.add_step(vec![offline(0, 0, true)], 100).unwrap();
        // step 1 with no task-0 records
        assert!(matches!(
            logger.add_step(vec![offline(1, 1, true)], 100),
            Err(MetricsError::MissingTaskEvaluation { step: 1, task: 0 })
        ));
        assert!(matches!(
            logger.add_step(vec![offline(0, 0, true)], 100),
            Err(MetricsError::OutOfOrderStep { got: 0, expected: 1 })
        ));
    }

    #[test]
    fn model_size_efficiency_cases() {
        let mut logger = LoggerState::new();
        for (i, size) in [100u64, 100, 200].into_iter().enumerate() {
            let records = (0..=i).map(|j| offline(i, j as i64, true)).collect();
            logger.add_step(records, size).unwrap();
        }
        // min(1, (1 + 1 + 0.5) / 3) = 5/6
        assert!((logger.model_size_efficiency().unwrap() - 5.0 / 6.0).abs() < TOL);

        let mut constant = LoggerState::new();
        constant.add_step(vec![offline(0, 0, true)], 7).unwrap();
        assert!((constant.model_size_efficiency().unwrap() - 1.0).abs() < TOL);

        let mut shrinking = LoggerState::new();
        shrinking.add_step(vec![offline(0, 0, true)], 100).unwrap();
        shrinking
            .add_step(vec![offline(1, 0, true), offline(1, 1, true)], 50)
            .unwrap();
        assert!((shrinking.model_size_efficiency().unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn record_order_within_step_is_irrelevant() {
        let mut a = LoggerState::new();
        let mut b = LoggerState::new();
        let records = vec![
            offline(0, 0, true),
            offline(0, 0, false),
            offline(0, 0, true),
        ];
        let mut reversed = records.clone();
        reversed.reverse();
        a.add_step(records, 10).unwrap();
        b.add_step(reversed, 10).unwrap();
        assert_eq!(a.accuracy_matrix().unwrap(), b.accuracy_matrix().unwrap());
    }

    #[test]
    fn log_round_trip_and_replay() {
        let logger = fixture_logger();
        let records: Vec<PredictionRecord> = logger.records().copied().collect();
        let text = write_prediction_log(&records);
        let parsed = parse_prediction_log(&text).unwrap();
        assert_eq!(parsed, records);
        let replayed = logger_from_records(&parsed).unwrap();
        assert_eq!(
            replayed.accuracy_matrix().unwrap(),
            logger.accuracy_matrix().unwrap()
        );
        assert!(matches!(
            replayed.model_size_efficiency(),
            Err(MetricsError::NoModelSizes)
        ));
    }

    #[test]
    fn report_shape() {
        let report = metric_report(&fixture_logger());
        assert!(report.contains("average_incremental_accuracy 0.950000\n"));
        assert!(report.contains("backward_transfer -0.150000\n"));
        assert!(report.contains("remembering 0.850000\n"));
        assert!(report.contains("online_cumulative_performance n/a\n"));

        let single = metric_report(&logger_with_matrix(&[vec![10]]));
        assert!(single.contains("backward_transfer n/a\n"));
    }
}
