//! Evaluation reports and training-history files (pretty JSON).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sesa_core::{
    eval::Metrics,
    train::{StopReason, TrainHistory},
    TrainConfig,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Which scorer produced the numbers, e.g. `"sesa"` or `"logreg"`.
    pub scorer: String,
    pub auc: f64,
    pub mse: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub config_digest: String,
    /// Digest of the model file, when the scorer has one.
    pub model_digest: Option<String>,
    pub dataset: String,
    pub dropped_skills: usize,
    /// The resolved configuration that produced the scorer.
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn new(scorer: &str, metrics: Metrics, config: serde_json::Value, config_digest: String, dataset: &Path) -> Self {
        Self {
            scorer: scorer.into(),
            auc: metrics.auc,
            mse: metrics.mse,
            n_pos: metrics.n_pos,
            n_neg: metrics.n_neg,
            config_digest,
            model_digest: None,
            dataset: dataset.display().to_string(),
            dropped_skills: 0,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub train_mse: f64,
    pub valid_auc: f64,
    /// Milliseconds since the Unix epoch when the evaluation finished.
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryFile {
    pub seed: u64,
    pub config_digest: String,
    pub config: TrainConfig,
    pub records: Vec<HistoryRecord>,
    pub best_iteration: usize,
    pub best_auc: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Vocabulary rows covered by the pretrained embedding file, if any.
    pub embedding_coverage: Option<usize>,
}

impl HistoryFile {
    pub fn new(config: &TrainConfig, history: &TrainHistory, timestamps: &[u64], coverage: Option<usize>) -> Self {
        Self {
            seed: config.seed,
            config_digest: crate::config::digest_of(config),
            config: config.clone(),
            records: history
                .records
                .iter()
                .enumerate()
                .map(|(i, r)| HistoryRecord {
                    iteration: r.iteration,
                    train_mse: r.train_mse,
                    valid_auc: r.valid_auc,
                    timestamp_ms: timestamps.get(i).copied().unwrap_or(0),
                })
                .collect(),
            best_iteration: history.best_iteration,
            best_auc: history.best_auc,
            iterations: history.iterations,
            stop_reason: history.stop_reason,
            embedding_coverage: coverage,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialize");
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(Error::io(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(Error::io(path))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}
