//! Benchmark orchestration: expand plans, run detectors with timing,
//! evaluate every criterion and emit reports.

mod config;
mod eval;
mod report;
mod runner;
mod scores;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::DatasetError;
use crate::metrics::{DatasetScore, MetricReport};
use crate::schemas::{PlanError, Schema};
use crate::series::SeriesError;

pub use config::{
    load_run_config, parse_run_config, CriterionSpec, DetectorSource, DetectorSpec, KDelaySpec, RunConfig,
};
pub use eval::evaluate_scores;
pub use report::{emit_reports, parse_results_json, parse_runtime_csv, write_runtime_csv, ReportFiles};
pub use runner::{load_datasets, run, LoadedDataset};
pub use scores::{dump_path, parse_score_dump, write_score_dump, SCORE_HEADER};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("dataset '{dataset}': {source}")]
    Plan {
        dataset: String,
        #[source]
        source: PlanError,
    },
    #[error("score dump for '{series_id}': row {row}: {message}")]
    ScoreDump {
        series_id: String,
        row: usize,
        message: String,
    },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report is empty")]
    EmptyReport,
    #[error("invalid report: {0}")]
    Report(String),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for configuration and output problems, 2 for
    /// dataset and score-input problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Dataset(_) | BenchError::Plan { .. } | BenchError::ScoreDump { .. } | BenchError::Series(_) => 2,
            BenchError::Config(_) | BenchError::Io { .. } | BenchError::EmptyReport | BenchError::Report(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Success,
    /// Statistical detector under a pooled schema without the override.
    Unsupported,
    Failed,
}

/// Outcome for one evaluation target of one planned task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub dataset: String,
    pub schema: Schema,
    pub detector: String,
    pub curve: String,
    pub status: TaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// A curve dropped before planning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub dataset: String,
    pub curve: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub dataset: String,
    pub curve: String,
    pub detector: String,
    pub schema: Schema,
    pub criterion: CriterionSpec,
    /// Carries the criterion as resolved for this dataset.
    pub report: MetricReport,
}

/// Dataset-level aggregation for one (detector, schema, criterion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub detector: String,
    pub schema: Schema,
    pub criterion: CriterionSpec,
    pub datasets: Vec<DatasetScore>,
    pub f1_best: f64,
    pub auprc: f64,
}

/// Wall-clock cost for one (detector, schema), summed over datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub detector: String,
    pub schema: Schema,
    pub parameter_count: usize,
    pub fit_seconds: f64,
    /// Score loop only.
    pub inference_seconds: f64,
    pub scored_samples: usize,
    pub per_sample_seconds: f64,
}

impl RuntimeStats {
    pub fn new(detector: String, schema: Schema) -> Self {
        Self {
            detector,
            schema,
            parameter_count: 0,
            fit_seconds: 0.0,
            inference_seconds: 0.0,
            scored_samples: 0,
            per_sample_seconds: 0.0,
        }
    }

    fn finish(&mut self) {
        self.per_sample_seconds = if self.scored_samples == 0 {
            0.0
        } else {
            self.inference_seconds / self.scored_samples as f64
        };
    }
}

/// Everything a run produces. Serialized as `results.json` without the
/// wall-clock `runtime` section, which goes to `runtime.csv` instead, so
/// the JSON depends only on the inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub datasets: Vec<String>,
    pub metrics: Vec<MetricRow>,
    pub aggregates: Vec<AggregateRow>,
    pub tasks: Vec<TaskRecord>,
    pub exclusions: Vec<Exclusion>,
    #[serde(skip)]
    pub runtime: Vec<RuntimeStats>,
}

impl RunReport {
    pub fn has_failures(&self) -> bool {
        self.tasks.iter().any(|t| t.status == TaskStatus::Failed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TaskRecord> {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Failed)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization is infallible");
        text.push('\n');
        text
    }
}
