//! Event-based evaluation of anomaly scores.
//!
//! All entry points take the test-region scores and the matching labels.
//! True segments are extracted from the labels, prolonged by the criterion's
//! `prolong_len`, and then scored under one of three point-adjustment
//! variants:
//!
//! - point-wise PA: every point of a detected segment counts as a true
//!   positive, every alarm outside a segment as a false positive.
//! - event-wise PA: each segment is one TP or FN; each maximal run of
//!   alarms outside all segments is one FP.
//! - reduced-length PA: event-wise counting where a segment of original
//!   length `k` weighs `ln(k + e)` and a false-alarm run of length `j`
//!   weighs `ln(j + e)`.
//!
//! An optional latency limit `K` only accepts a segment as detected when an
//! alarm fires at most `K` points after its start.

mod adjust;
mod aggregate;
mod criterion;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adjust::{
    adjust_scores_pa, confusion_at_threshold, detected_within_delay, prolong_segments,
    severity_weight, ExtendedSegment, WeightedConfusion,
};
pub use aggregate::{aggregate, AggregateReport, CurveScore, DatasetScore};
pub use criterion::{EvalCriterion, PaVariant, DEFAULT_PROLONG_LEN};
pub use sweep::{sweep, SweepPoint};

use crate::series::extract_segments;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("labels contain no anomaly event")]
    NoPositiveEvents,
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("dataset '{0}' has no curves to aggregate")]
    EmptyDataset(String),
    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestF1 {
    pub f1: f64,
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub f1_best: f64,
    /// `+inf` (no alarms) is written as the string `"inf"`.
    #[serde(with = "threshold_serde")]
    pub best_threshold: f64,
    pub precision_at_best: f64,
    pub recall_at_best: f64,
    pub auprc: f64,
    pub criterion: EvalCriterion,
}

mod threshold_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid threshold '{t}'"))),
        }
    }
}

/// Precision, recall and F1 with zero-denominator conventions: no alarms
/// gives P = 0, no events gives R = 0, and P + R = 0 gives F1 = 0.
pub fn prf_from_confusion(c: &WeightedConfusion) -> (f64, f64, f64) {
    let precision = if c.tp + c.fp > 0.0 { c.tp / (c.tp + c.fp) } else { 0.0 };
    let recall = if c.tp + c.fn_ > 0.0 { c.tp / (c.tp + c.fn_) } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Extracts and prolongs the true segments of `labels`.
pub fn true_segments(labels: &[u8], prolong_len: usize) -> Vec<ExtendedSegment> {
    prolong_segments(&extract_segments(labels), prolong_len, labels.len())
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    Ok(())
}

/// Precision/recall per unique threshold, descending.
pub fn pr_curve(
    scores: &[f64],
    labels: &[u8],
    criterion: &EvalCriterion,
) -> Result<Vec<PrPoint>, MetricsError> {
    check_lengths(scores, labels)?;
    let segments = true_segments(labels, criterion.prolong_len);
    Ok(pr_points(&sweep(scores, &segments, criterion)))
}

fn pr_points(points: &[SweepPoint]) -> Vec<PrPoint> {
    points
        .iter()
        .map(|p| {
            let (precision, recall, _) = prf_from_confusion(&p.confusion);
            PrPoint {
                threshold: p.threshold,
                precision,
                recall,
            }
        })
        .collect()
}

fn best_of(points: &[SweepPoint]) -> BestF1 {
    // +inf (no alarms) is always a candidate and scores F1 = 0.
    let mut best = BestF1 {
        f1: 0.0,
        threshold: f64::INFINITY,
        precision: 0.0,
        recall: 0.0,
    };
    for p in points {
        let (precision, recall, f1) = prf_from_confusion(&p.confusion);
        // `>=` over descending thresholds keeps the lowest threshold on ties.
        if f1 >= best.f1 {
            best = BestF1 {
                f1,
                threshold: p.threshold,
                precision,
                recall,
            };
        }
    }
    best
}

fn area_of(points: &[SweepPoint]) -> f64 {
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for pr in pr_points(points) {
        area += (pr.recall - prev_recall) * pr.precision;
        prev_recall = pr.recall;
    }
    area.clamp(0.0, 1.0)
}

/// Highest F1 over all candidate thresholds (every unique score plus +inf),
/// taking the lowest threshold on ties.
pub fn best_f1(
    scores: &[f64],
    labels: &[u8],
    criterion: &EvalCriterion,
) -> Result<BestF1, MetricsError> {
    check_lengths(scores, labels)?;
    let segments = true_segments(labels, criterion.prolong_len);
    Ok(best_of(&sweep(scores, &segments, criterion)))
}

/// Step-integrated (average precision) area under the PR curve.
pub fn auprc(scores: &[f64], labels: &[u8], criterion: &EvalCriterion) -> Result<f64, MetricsError> {
    check_lengths(scores, labels)?;
    let segments = true_segments(labels, criterion.prolong_len);
    if segments.is_empty() {
        return Err(MetricsError::NoPositiveEvents);
    }
    Ok(area_of(&sweep(scores, &segments, criterion)))
}

/// `F1_best` and AUPRC from a single sweep.
pub fn evaluate(
    scores: &[f64],
    labels: &[u8],
    criterion: &EvalCriterion,
) -> Result<MetricReport, MetricsError> {
    check_lengths(scores, labels)?;
    let segments = true_segments(labels, criterion.prolong_len);
    if segments.is_empty() {
        return Err(MetricsError::NoPositiveEvents);
    }
    let points = sweep(scores, &segments, criterion);
    let best = best_of(&points);
    Ok(MetricReport {
        f1_best: best.f1,
        best_threshold: best.threshold,
        precision_at_best: best.precision,
        recall_at_best: best.recall,
        auprc: area_of(&points),
        criterion: *criterion,
    })
}
