use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::config::CriterionSpec;
use super::runner::{dataset_k, LoadedDataset};
use super::scores::parse_score_dump;
use super::{AggregateRow, BenchError, Exclusion, MetricRow, RunReport, TaskRecord, TaskStatus};
use crate::metrics::{aggregate, evaluate, CurveScore};
use crate::schemas::Schema;
use crate::series::{validate_scores, ScoreSeries};

/// Scores of one evaluated curve.
pub(crate) struct CurveScores<'a> {
    pub data: &'a LoadedDataset,
    pub curve: String,
    pub detector: String,
    pub schema: Schema,
    pub scores: Vec<f64>,
}

pub(crate) fn evaluate_curve(c: &CurveScores, spec: &CriterionSpec, k: Option<usize>) -> Result<MetricRow, BenchError> {
    let series = c.data.get(&c.curve).expect("scored curves are loaded");
    let criterion = spec.resolve(k);
    let report = evaluate(&c.scores, series.test_labels(), &criterion)
        .map_err(|e| BenchError::Report(format!("{} / {}: {e}", c.data.name(), c.curve)))?;
    Ok(MetricRow {
        dataset: c.data.name().to_string(),
        curve: c.curve.clone(),
        detector: c.detector.clone(),
        schema: c.schema,
        criterion: *spec,
        report,
    })
}

type RowKey = (String, String, String, Schema, CriterionSpec);

fn row_key(r: &MetricRow) -> RowKey {
    (r.dataset.clone(), r.curve.clone(), r.detector.clone(), r.schema, r.criterion)
}

fn build_aggregates(metrics: &[MetricRow]) -> Result<Vec<AggregateRow>, BenchError> {
    let mut groups: BTreeMap<(&str, Schema, CriterionSpec), Vec<CurveScore>> = BTreeMap::new();
    for m in metrics {
        groups
            .entry((m.detector.as_str(), m.schema, m.criterion))
            .or_default()
            .push(CurveScore {
                dataset: m.dataset.clone(),
                curve: m.curve.clone(),
                f1_best: m.report.f1_best,
                auprc: m.report.auprc,
            });
    }
    groups
        .into_iter()
        .map(|((detector, schema, criterion), curves)| {
            let agg = aggregate(&curves, &[]).map_err(|e| BenchError::Report(e.to_string()))?;
            Ok(AggregateRow {
                detector: detector.to_string(),
                schema,
                criterion,
                datasets: agg.datasets,
                f1_best: agg.f1_best,
                auprc: agg.auprc,
            })
        })
        .collect()
}

/// Sorts everything into canonical order and derives the aggregates.
pub(crate) fn assemble(
    datasets: &[LoadedDataset],
    metrics: Vec<Result<MetricRow, BenchError>>,
    mut tasks: Vec<TaskRecord>,
) -> Result<RunReport, BenchError> {
    let mut metrics = metrics.into_iter().collect::<Result<Vec<_>, _>>()?;
    metrics.sort_by_cached_key(row_key);
    tasks.sort_by(|a, b| {
        (&a.dataset, a.schema, &a.detector, &a.curve).cmp(&(&b.dataset, b.schema, &b.detector, &b.curve))
    });
    let mut exclusions: Vec<Exclusion> = datasets.iter().flat_map(LoadedDataset::exclusions).collect();
    exclusions.sort_by(|a, b| (&a.dataset, &a.curve).cmp(&(&b.dataset, &b.curve)));
    let mut names: Vec<String> = datasets.iter().map(|d| d.name().to_string()).collect();
    names.sort();
    Ok(RunReport {
        datasets: names,
        aggregates: build_aggregates(&metrics)?,
        metrics,
        tasks,
        exclusions,
        runtime: Vec::new(),
    })
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::fs::DirEntry>, BenchError> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| BenchError::io(dir, e))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| BenchError::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    Ok(entries)
}

/// Recomputes metrics from score dumps under `score_root` (laid out as
/// `<dataset>/<detector>/<schema>/<curve>.csv`).
///
/// Rows already present in `existing` are reused rather than recomputed, so
/// adding a criterion only evaluates the new one. Existing tasks and runtime
/// figures carry over.
pub fn evaluate_scores(
    score_root: &Path,
    datasets: &[LoadedDataset],
    criteria: &[CriterionSpec],
    k_delay_overrides: &BTreeMap<String, usize>,
    existing: Option<&RunReport>,
) -> Result<RunReport, BenchError> {
    if criteria.is_empty() {
        return Err(BenchError::Config("at least one criterion is required".into()));
    }
    let mut rows: BTreeMap<RowKey, MetricRow> = existing
        .map(|r| r.metrics.iter().map(|m| (row_key(m), m.clone())).collect())
        .unwrap_or_default();
    let mut tasks: Vec<TaskRecord> = existing.map(|r| r.tasks.clone()).unwrap_or_default();
    let mut known_tasks: BTreeSet<(String, Schema, String, String)> = tasks
        .iter()
        .map(|t| (t.dataset.clone(), t.schema, t.detector.clone(), t.curve.clone()))
        .collect();

    for data in datasets {
        let data_dir = score_root.join(data.name());
        if !data_dir.is_dir() {
            continue;
        }
        let k = dataset_k(data, k_delay_overrides);
        for det in sorted_entries(&data_dir)? {
            if !det.path().is_dir() {
                continue;
            }
            let detector = det.file_name().to_string_lossy().into_owned();
            for sch in sorted_entries(&det.path())? {
                let Ok(schema) = sch.file_name().to_string_lossy().parse::<Schema>() else {
                    log::warn!("skipping unknown schema directory {}", sch.path().display());
                    continue;
                };
                for file in sorted_entries(&sch.path())? {
                    let path = file.path();
                    if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                        continue;
                    }
                    let curve = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    let Some(series) = data.get(&curve) else {
                        if data.excluded.contains(&curve) {
                            continue;
                        }
                        return Err(BenchError::ScoreDump {
                            series_id: curve,
                            row: 0,
                            message: format!("no such curve in dataset '{}'", data.name()),
                        });
                    };
                    let text = std::fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
                    let (first, scores) = parse_score_dump(&text, &curve)?;
                    validate_scores(&ScoreSeries::new(curve.clone(), scores.clone()), series)?;
                    if first != series.split().valid_end && !scores.is_empty() {
                        return Err(BenchError::ScoreDump {
                            series_id: curve,
                            row: 1,
                            message: format!("first index {first}, expected {}", series.split().valid_end),
                        });
                    }
                    let scored = CurveScores {
                        data,
                        curve: curve.clone(),
                        detector: detector.clone(),
                        schema,
                        scores,
                    };
                    for spec in criteria {
                        let key = (data.name().to_string(), curve.clone(), detector.clone(), schema, *spec);
                        if let Entry::Vacant(slot) = rows.entry(key) {
                            slot.insert(evaluate_curve(&scored, spec, k)?);
                        }
                    }
                    if known_tasks.insert((data.name().to_string(), schema, detector.clone(), curve.clone())) {
                        tasks.push(TaskRecord {
                            dataset: data.name().to_string(),
                            schema,
                            detector: detector.clone(),
                            curve,
                            status: TaskStatus::Success,
                            message: None,
                        });
                    }
                }
            }
        }
    }
    let mut report = assemble(datasets, rows.into_values().map(Ok).collect(), tasks)?;
    if let Some(existing) = existing {
        report.runtime = existing.runtime.clone();
    }
    Ok(report)
}
