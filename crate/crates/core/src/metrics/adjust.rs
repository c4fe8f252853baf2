//! Segment prolonging, point adjustment and the per-threshold confusion
//! counts for every point-adjustment variant.
//!
//! Everything here is the direct, mask-based definition. The threshold sweep
//! in [`super::sweep`] computes the same quantities incrementally.

use serde::{Deserialize, Serialize};

use super::{EvalCriterion, PaVariant};
use crate::series::AnomalySegment;

/// A true segment after prolonging. `original_end` is kept for severity
/// weighting; `end` is the tolerance boundary used for matching alarms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedSegment {
    pub start: usize,
    pub end: usize,
    pub original_end: usize,
}

impl ExtendedSegment {
    pub fn original_len(&self) -> usize {
        self.original_end - self.start + 1
    }

    pub fn extended_len(&self) -> usize {
        self.end - self.start + 1
    }

    /// Last index at which an alarm still counts as a detection under the
    /// latency limit `k_delay`.
    pub fn detection_end(&self, k_delay: Option<usize>) -> usize {
        match k_delay {
            Some(k) => self.end.min(self.start.saturating_add(k)),
            None => self.end,
        }
    }
}

/// Real-valued confusion counts produced by event-based criteria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedConfusion {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl WeightedConfusion {
    pub fn new(tp: f64, fp: f64, fn_: f64) -> Self {
        Self { tp, fp, fn_ }
    }
}

/// Severity coefficient `ln(k + e)` for a run of length `k`.
pub fn severity_weight(len: usize) -> f64 {
    (len as f64 + std::f64::consts::E).ln()
}

/// Extends each segment's end by up to `prolong_len` points without ever
/// reaching the next segment or running past `n`.
pub fn prolong_segments(
    segments: &[AnomalySegment],
    prolong_len: usize,
    n: usize,
) -> Vec<ExtendedSegment> {
    segments
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let mut end = seg.end.saturating_add(prolong_len).min(n.saturating_sub(1));
            if let Some(next) = segments.get(i + 1) {
                end = end.min(next.start - 1);
            }
            ExtendedSegment {
                start: seg.start,
                end: end.max(seg.end),
                original_end: seg.end,
            }
        })
        .collect()
}

/// Point adjustment: every position of a segment takes the segment's
/// maximum raw score.
pub fn adjust_scores_pa(scores: &[f64], segments: &[ExtendedSegment]) -> Vec<f64> {
    let mut adjusted = scores.to_vec();
    for seg in segments {
        let range = seg.start..=seg.end;
        let peak = scores[range.clone()]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        adjusted[range].fill(peak);
    }
    adjusted
}

/// True iff some raw score `>= threshold` lies in the extended segment at
/// offset `<= k_delay` from the segment start.
pub fn detected_within_delay(
    segment: &ExtendedSegment,
    scores: &[f64],
    threshold: f64,
    k_delay: Option<usize>,
) -> bool {
    scores[segment.start..=segment.detection_end(k_delay)]
        .iter()
        .any(|&s| s >= threshold)
}

/// Confusion counts at a single threshold. `segments` must already be
/// prolonged according to `criterion.prolong_len`.
pub fn confusion_at_threshold(
    scores: &[f64],
    segments: &[ExtendedSegment],
    threshold: f64,
    criterion: &EvalCriterion,
) -> WeightedConfusion {
    match criterion.variant {
        PaVariant::PointWisePa => point_wise(scores, segments, threshold, criterion.k_delay),
        PaVariant::EventWisePa => event_based(scores, segments, threshold, criterion.k_delay, |_| 1.0),
        PaVariant::ReducedLengthPa => {
            event_based(scores, segments, threshold, criterion.k_delay, severity_weight)
        }
    }
}

fn point_wise(
    scores: &[f64],
    segments: &[ExtendedSegment],
    threshold: f64,
    k_delay: Option<usize>,
) -> WeightedConfusion {
    let mut predicted: Vec<bool> = match k_delay {
        None => adjust_scores_pa(scores, segments)
            .iter()
            .map(|&s| s >= threshold)
            .collect(),
        Some(_) => scores.iter().map(|&s| s >= threshold).collect(),
    };
    // Under a latency limit the whole segment is either detected in time or
    // missed; late in-segment alarms earn nothing.
    if k_delay.is_some() {
        for seg in segments {
            let hit = detected_within_delay(seg, scores, threshold, k_delay);
            predicted[seg.start..=seg.end].fill(hit);
        }
    }
    let mut inside = vec![false; scores.len()];
    for seg in segments {
        inside[seg.start..=seg.end].fill(true);
    }
    let mut c = WeightedConfusion::default();
    for (&pred, &truth) in predicted.iter().zip(&inside) {
        match (pred, truth) {
            (true, true) => c.tp += 1.0,
            (true, false) => c.fp += 1.0,
            (false, true) => c.fn_ += 1.0,
            (false, false) => {}
        }
    }
    c
}

fn event_based(
    scores: &[f64],
    segments: &[ExtendedSegment],
    threshold: f64,
    k_delay: Option<usize>,
    weight: impl Fn(usize) -> f64,
) -> WeightedConfusion {
    let mut c = WeightedConfusion::default();
    for seg in segments {
        let w = weight(seg.original_len());
        if detected_within_delay(seg, scores, threshold, k_delay) {
            c.tp += w;
        } else {
            c.fn_ += w;
        }
    }
    let mut inside = vec![false; scores.len()];
    for seg in segments {
        inside[seg.start..=seg.end].fill(true);
    }
    let mut run = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s >= threshold && !inside[i] {
            run += 1;
        } else if run > 0 {
            c.fp += weight(run);
            run = 0;
        }
    }
    if run > 0 {
        c.fp += weight(run);
    }
    c
}
