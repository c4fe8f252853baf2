//! Score dumps: `scores/<dataset>/<detector>/<schema>/<curve>.csv` with a
//! header `index,score` and one row per test point, indexed from the start
//! of the full series. Values are written in shortest round-trip form, so a
//! dump re-evaluates to bit-identical metrics.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::datasets::format_value;
use crate::schemas::Schema;
use crate::series::SeriesError;

use super::BenchError;

pub const SCORE_HEADER: &str = "index,score";

pub fn dump_path(root: &Path, dataset: &str, detector: &str, schema: Schema, curve: &str) -> PathBuf {
    root.join(dataset)
        .join(detector)
        .join(schema.as_str())
        .join(format!("{curve}.csv"))
}

pub fn write_score_dump(first_index: usize, scores: &[f64]) -> String {
    let mut out = String::with_capacity(16 * scores.len() + 16);
    out.push_str(SCORE_HEADER);
    out.push('\n');
    for (i, s) in scores.iter().enumerate() {
        let _ = writeln!(out, "{},{}", first_index + i, format_value(*s));
    }
    out
}

/// Parses a dump into its first index and scores. Non-finite scores are
/// rejected with [`SeriesError::NonFiniteScore`].
pub fn parse_score_dump(text: &str, series_id: &str) -> Result<(usize, Vec<f64>), BenchError> {
    let parse_err = |row: usize, message: String| BenchError::ScoreDump {
        series_id: series_id.to_string(),
        row,
        message,
    };
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    match lines.next() {
        Some(SCORE_HEADER) => {}
        other => return Err(parse_err(0, format!("expected header '{SCORE_HEADER}', got {other:?}"))),
    }
    let mut first = None;
    let mut scores = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        if line.is_empty() {
            return Err(parse_err(row, "empty row".into()));
        }
        let (index, value) = line
            .split_once(',')
            .ok_or_else(|| parse_err(row, "expected 2 fields".into()))?;
        let index: usize = index
            .parse()
            .map_err(|_| parse_err(row, format!("invalid index '{index}'")))?;
        let start = *first.get_or_insert(index);
        if index != start + scores.len() {
            return Err(parse_err(row, format!("index {index} out of sequence")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(row, format!("invalid score '{value}'")))?;
        if !value.is_finite() {
            return Err(SeriesError::NonFiniteScore {
                series_id: series_id.to_string(),
                index: scores.len(),
            }
            .into());
        }
        scores.push(value);
    }
    Ok((first.unwrap_or(0), scores))
}
