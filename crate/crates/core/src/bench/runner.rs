use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{DetectorSource, DetectorSpec, RunConfig};
use super::eval::{assemble, evaluate_curve, CurveScores};
use super::report::emit_reports;
use super::scores::{dump_path, write_score_dump};
use super::{BenchError, Exclusion, RunReport, RuntimeStats, TaskRecord, TaskStatus};
use crate::datasets::{filter_anomaly_free, load_dataset, Dataset};
use crate::detectors::{fit, DetectorConfig};
use crate::external::{drive, ExternalDetectorSpec};
use crate::schemas::{plan, Schema, Task};
use crate::series::{validate_scores, TimeSeries};

/// A dataset with its anomaly-free curves removed.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub excluded: Vec<String>,
    index: HashMap<String, usize>,
}

impl LoadedDataset {
    pub fn new(dataset: Dataset) -> Self {
        let Dataset { manifest, series } = dataset;
        let (kept, excluded) = filter_anomaly_free(series);
        let index = kept.iter().enumerate().map(|(i, s)| (s.id().to_string(), i)).collect();
        Self {
            dataset: Dataset { manifest, series: kept },
            excluded,
            index,
        }
    }

    pub fn name(&self) -> &str {
        self.dataset.name()
    }

    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.index.get(id).map(|&i| &self.dataset.series[i])
    }

    pub(crate) fn exclusions(&self) -> impl Iterator<Item = Exclusion> + '_ {
        self.excluded.iter().map(|id| Exclusion {
            dataset: self.name().to_string(),
            curve: id.clone(),
            reason: "test region contains no anomalies".into(),
        })
    }
}

/// Loads every dataset root, requiring distinct dataset names.
pub fn load_datasets(roots: &[PathBuf]) -> Result<Vec<LoadedDataset>, BenchError> {
    let mut out = Vec::with_capacity(roots.len());
    let mut names = HashSet::new();
    for root in roots {
        let loaded = LoadedDataset::new(load_dataset(root)?);
        if !names.insert(loaded.name().to_string()) {
            return Err(BenchError::Config(format!("dataset name '{}' used twice", loaded.name())));
        }
        log::info!(
            "loaded dataset '{}': {} curves, {} excluded as anomaly-free",
            loaded.name(),
            loaded.dataset.series.len(),
            loaded.excluded.len()
        );
        out.push(loaded);
    }
    Ok(out)
}

/// Override for this dataset, else the `"*"` override, else the manifest
/// default, else none.
pub(crate) fn dataset_k(data: &LoadedDataset, overrides: &BTreeMap<String, usize>) -> Option<usize> {
    overrides
        .get(data.name())
        .or_else(|| overrides.get("*"))
        .copied()
        .or(data.dataset.manifest.k_delay)
}

struct Unit<'a> {
    data: &'a LoadedDataset,
    schema: Schema,
    task: &'a Task,
    detector: &'a DetectorSpec,
    detector_name: String,
}

enum CurveOutcome {
    Scored(Vec<f64>),
    Unsupported,
    Failed(String),
}

struct UnitResult {
    curves: Vec<(String, CurveOutcome)>,
    fit_seconds: f64,
    inference_seconds: f64,
    scored_samples: usize,
    parameter_count: usize,
}

impl UnitResult {
    fn all(unit: &Unit, outcome: impl Fn() -> CurveOutcome) -> Self {
        Self {
            curves: unit.task.eval_refs.iter().map(|r| (r.series_id.clone(), outcome())).collect(),
            fit_seconds: 0.0,
            inference_seconds: 0.0,
            scored_samples: 0,
            parameter_count: 0,
        }
    }
}

fn series_of<'a>(unit: &Unit<'a>, id: &str) -> &'a TimeSeries {
    unit.data.get(id).expect("plans only reference loaded series")
}

fn run_builtin(unit: &Unit, config: &DetectorConfig) -> UnitResult {
    let pools: Vec<&[f64]> = unit
        .task
        .train_refs
        .iter()
        .map(|r| &series_of(unit, &r.series_id).values()[r.start..r.end])
        .collect();
    let started = Instant::now();
    let fitted = match fit(config, &pools) {
        Ok(f) => f,
        Err(e) => return UnitResult::all(unit, || CurveOutcome::Failed(format!("fit: {e}"))),
    };
    let mut result = UnitResult {
        curves: Vec::with_capacity(unit.task.eval_refs.len()),
        fit_seconds: started.elapsed().as_secs_f64(),
        inference_seconds: 0.0,
        scored_samples: 0,
        parameter_count: fitted.parameter_count(),
    };
    for r in &unit.task.eval_refs {
        let series = series_of(unit, &r.series_id);
        let values = series.values();
        let started = Instant::now();
        let scored = fitted.score(&values[..r.start], &values[r.start..r.end]);
        result.inference_seconds += started.elapsed().as_secs_f64();
        let outcome = match scored {
            Ok(scores) => {
                result.scored_samples += scores.len();
                let s = crate::series::ScoreSeries::new(r.series_id.clone(), scores);
                match validate_scores(&s, series) {
                    Ok(()) => CurveOutcome::Scored(s.scores),
                    Err(e) => CurveOutcome::Failed(e.to_string()),
                }
            }
            Err(e) => CurveOutcome::Failed(format!("score: {e}")),
        };
        result.curves.push((r.series_id.clone(), outcome));
    }
    result
}

fn run_external(unit: &Unit, spec: &ExternalDetectorSpec) -> UnitResult {
    match drive(spec, unit.task, &unit.data.dataset) {
        Ok(run) => UnitResult {
            scored_samples: run.scores.iter().map(|s| s.scores.len()).sum(),
            curves: run
                .scores
                .into_iter()
                .map(|s| (s.series_id, CurveOutcome::Scored(s.scores)))
                .collect(),
            fit_seconds: run.fit_seconds,
            inference_seconds: run.score_seconds,
            parameter_count: unit.detector.parameter_count.unwrap_or(0),
        },
        Err(e) => {
            let message = e.to_string();
            log::warn!(
                "{} / {} / {}: task failed: {message}",
                unit.data.name(),
                unit.detector_name,
                unit.schema
            );
            UnitResult::all(unit, || CurveOutcome::Failed(message.clone()))
        }
    }
}

fn run_unit(unit: &Unit, allow_pooling: bool) -> UnitResult {
    if unit.schema.is_pooled() && unit.detector.is_statistical() && !allow_pooling {
        return UnitResult::all(unit, || CurveOutcome::Unsupported);
    }
    match &unit.detector.source {
        DetectorSource::Builtin(config) => run_builtin(unit, config),
        DetectorSource::External(spec) => run_external(unit, spec),
    }
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, BenchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs every (dataset, schema, task, detector) combination, writes score
/// dumps under `out_dir/scores` and the reports under `out_dir`.
///
/// Only configuration and dataset problems abort; a failing task is recorded
/// and the run continues.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunReport, BenchError> {
    config.validate()?;
    let datasets = load_datasets(&config.datasets)?;
    let mut plans = Vec::new();
    for data in &datasets {
        for &schema in &config.schemas {
            let p = plan(&data.dataset.series, schema, config.seed).map_err(|source| BenchError::Plan {
                dataset: data.name().to_string(),
                source,
            })?;
            plans.push((data, schema, p));
        }
    }
    let units: Vec<Unit> = plans
        .iter()
        .flat_map(|(data, schema, p)| {
            p.tasks.iter().flat_map(move |task| {
                config.detectors.iter().map(move |detector| Unit {
                    data,
                    schema: *schema,
                    task,
                    detector,
                    detector_name: detector.name(),
                })
            })
        })
        .collect();

    let pool = thread_pool(config.workers)?;
    let results: Vec<UnitResult> =
        pool.install(|| units.par_iter().map(|u| run_unit(u, config.allow_statistical_pooling)).collect());

    let score_root = out_dir.join("scores");
    let mut runtime: BTreeMap<(String, Schema), RuntimeStats> = BTreeMap::new();
    for d in &config.detectors {
        for &s in &config.schemas {
            runtime.insert((d.name(), s), RuntimeStats::new(d.name(), s));
        }
    }
    let mut tasks = Vec::new();
    let mut scored = Vec::new();
    for (unit, result) in units.iter().zip(results) {
        let stats = runtime
            .get_mut(&(unit.detector_name.clone(), unit.schema))
            .expect("runtime entry per detector and schema");
        stats.fit_seconds += result.fit_seconds;
        stats.inference_seconds += result.inference_seconds;
        stats.scored_samples += result.scored_samples;
        stats.parameter_count = stats.parameter_count.max(result.parameter_count);
        for (curve, outcome) in result.curves {
            let (status, message) = match outcome {
                CurveOutcome::Scored(scores) => {
                    let series = series_of(unit, &curve);
                    let path = dump_path(&score_root, unit.data.name(), &unit.detector_name, unit.schema, &curve);
                    write_file(&path, &write_score_dump(series.split().valid_end, &scores))?;
                    scored.push(CurveScores {
                        data: unit.data,
                        curve: curve.clone(),
                        detector: unit.detector_name.clone(),
                        schema: unit.schema,
                        scores,
                    });
                    (TaskStatus::Success, None)
                }
                CurveOutcome::Unsupported => (
                    TaskStatus::Unsupported,
                    Some("statistical detector under a pooled schema".to_string()),
                ),
                CurveOutcome::Failed(message) => (TaskStatus::Failed, Some(message)),
            };
            tasks.push(TaskRecord {
                dataset: unit.data.name().to_string(),
                schema: unit.schema,
                detector: unit.detector_name.clone(),
                curve,
                status,
                message,
            });
        }
    }

    let metrics = pool.install(|| {
        scored
            .par_iter()
            .flat_map_iter(|c| {
                let k = dataset_k(c.data, &config.k_delay_overrides);
                config.criteria.iter().map(move |spec| evaluate_curve(c, spec, k))
            })
            .collect::<Vec<_>>()
    });
    let mut report = assemble(&datasets, metrics, tasks)?;
    for stats in runtime.values_mut() {
        stats.finish();
    }
    report.runtime = runtime.into_values().collect();
    for f in report.failures() {
        log::warn!(
            "failed: {} / {} / {} / {}: {}",
            f.dataset,
            f.detector,
            f.schema,
            f.curve,
            f.message.as_deref().unwrap_or("")
        );
    }
    emit_reports(&report, out_dir)?;
    Ok(report)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), BenchError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| BenchError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}
