//! Report files:
//!
//! - `results.json`: the full report minus wall-clock figures
//! - `tables/<criterion>.csv` and `tables/<criterion>-auprc.csv`: detectors
//!   ranked by mean dataset score, one column per dataset plus `avg`
//! - `runtime.csv`: per (detector, schema) cost
//! - `plotdata/tradeoff.csv`: inference time against score, with a marker
//!   size of the cube root of the parameter count

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::config::CriterionSpec;
use super::runner::write_file;
use super::{AggregateRow, BenchError, RunReport, RuntimeStats};
use crate::datasets::format_value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub results_json: PathBuf,
    pub runtime_csv: Option<PathBuf>,
    pub tables: Vec<PathBuf>,
    pub tradeoff_csv: Option<PathBuf>,
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Stable ranking: mean dataset score descending, then detector name and
/// schema ascending.
fn ranked<'a>(rows: &[&'a AggregateRow], score: impl Fn(&AggregateRow) -> f64) -> Vec<&'a AggregateRow> {
    let mut out = rows.to_vec();
    out.sort_by(|a, b| {
        score(b)
            .total_cmp(&score(a))
            .then_with(|| a.detector.cmp(&b.detector))
            .then_with(|| a.schema.cmp(&b.schema))
    });
    out
}

fn table(report: &RunReport, rows: &[&AggregateRow], auprc: bool) -> String {
    let pick = |agg: &AggregateRow| if auprc { agg.auprc } else { agg.f1_best };
    let mut header = vec!["detector".to_string(), "schema".to_string()];
    header.extend(report.datasets.iter().cloned());
    header.push("avg".into());
    let mut out = vec![header];
    for agg in ranked(rows, pick) {
        let mut line = vec![agg.detector.clone(), agg.schema.to_string()];
        for name in &report.datasets {
            let cell = agg
                .datasets
                .iter()
                .find(|d| &d.dataset == name)
                .map(|d| format_value(if auprc { d.auprc } else { d.f1_best }))
                .unwrap_or_default();
            line.push(cell);
        }
        line.push(format_value(pick(agg)));
        out.push(line);
    }
    csv_text(out)
}

pub fn write_runtime_csv(runtime: &[RuntimeStats]) -> String {
    let mut out = vec![[
        "detector",
        "schema",
        "parameter_count",
        "fit_seconds",
        "inference_seconds",
        "scored_samples",
        "per_sample_seconds",
    ]
    .map(String::from)
    .to_vec()];
    for r in runtime {
        out.push(vec![
            r.detector.clone(),
            r.schema.to_string(),
            r.parameter_count.to_string(),
            format_value(r.fit_seconds),
            format_value(r.inference_seconds),
            r.scored_samples.to_string(),
            format_value(r.per_sample_seconds),
        ]);
    }
    csv_text(out)
}

pub fn parse_runtime_csv(text: &str) -> Result<Vec<RuntimeStats>, BenchError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<RuntimeStats>, _>>()
        .map_err(|e| BenchError::Report(format!("runtime.csv: {e}")))
}

pub fn parse_results_json(text: &str) -> Result<RunReport, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Report(format!("results.json: {e}")))
}

fn tradeoff(report: &RunReport) -> String {
    let runtime: BTreeMap<_, _> = report.runtime.iter().map(|r| ((r.detector.as_str(), r.schema), r)).collect();
    let mut out = vec![[
        "detector",
        "schema",
        "criterion",
        "inference_seconds",
        "per_sample_seconds",
        "score",
        "parameter_count",
        "size",
    ]
    .map(String::from)
    .to_vec()];
    for agg in &report.aggregates {
        let Some(r) = runtime.get(&(agg.detector.as_str(), agg.schema)) else {
            continue;
        };
        out.push(vec![
            agg.detector.clone(),
            agg.schema.to_string(),
            agg.criterion.to_string(),
            format_value(r.inference_seconds),
            format_value(r.per_sample_seconds),
            format_value(agg.f1_best),
            r.parameter_count.to_string(),
            format_value((r.parameter_count as f64).cbrt()),
        ]);
    }
    csv_text(out)
}

/// Writes every report file under `out_dir`.
pub fn emit_reports(report: &RunReport, out_dir: &Path) -> Result<ReportFiles, BenchError> {
    if report.metrics.is_empty() && report.tasks.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    let results_json = out_dir.join("results.json");
    write_file(&results_json, &report.to_json())?;

    let mut by_criterion: BTreeMap<CriterionSpec, Vec<&AggregateRow>> = BTreeMap::new();
    for agg in &report.aggregates {
        by_criterion.entry(agg.criterion).or_default().push(agg);
    }
    let mut tables = Vec::new();
    for (criterion, rows) in &by_criterion {
        let slug = criterion.slug();
        for (suffix, auprc) in [("", false), ("-auprc", true)] {
            let path = out_dir.join("tables").join(format!("{slug}{suffix}.csv"));
            write_file(&path, &table(report, rows, auprc))?;
            tables.push(path);
        }
    }

    let (mut runtime_csv, mut tradeoff_csv) = (None, None);
    if !report.runtime.is_empty() {
        let path = out_dir.join("runtime.csv");
        write_file(&path, &write_runtime_csv(&report.runtime))?;
        runtime_csv = Some(path);
        let path = out_dir.join("plotdata").join("tradeoff.csv");
        write_file(&path, &tradeoff(report))?;
        tradeoff_csv = Some(path);
    }
    Ok(ReportFiles {
        results_json,
        runtime_csv,
        tables,
        tradeoff_csv,
    })
}
