//! Threshold sweep over every unique score value.
//!
//! Thresholds are visited in descending order. Alarm points outside the
//! extended segments are activated one group at a time and merged into runs
//! with endpoint bookkeeping; events become detected once the sweep passes
//! their detection score (the maximum raw score inside the part of the
//! segment that satisfies the latency limit). The whole sweep is
//! `O(n log n)` and yields exactly the confusion counts of
//! [`super::confusion_at_threshold`] at every threshold.

use std::cmp::Ordering;

use super::adjust::{severity_weight, ExtendedSegment, WeightedConfusion};
use super::{EvalCriterion, PaVariant};

/// Confusion counts at one candidate threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub confusion: WeightedConfusion,
}

fn descending(a: &f64, b: &f64) -> Ordering {
    b.total_cmp(a)
}

/// Runs the sweep, returning one point per unique score value in descending
/// threshold order. `-0.0` and `0.0` form a single threshold.
pub fn sweep(
    scores: &[f64],
    segments: &[ExtendedSegment],
    criterion: &EvalCriterion,
) -> Vec<SweepPoint> {
    let n = scores.len();
    let mut inside = vec![false; n];
    for seg in segments {
        inside[seg.start..=seg.end].fill(true);
    }

    let mut outside: Vec<usize> = (0..n).filter(|&i| !inside[i]).collect();
    outside.sort_by(|&a, &b| descending(&scores[a], &scores[b]));

    let k_delay = criterion.k_delay;
    let mut events: Vec<(f64, &ExtendedSegment)> = segments
        .iter()
        .map(|seg| {
            let peak = scores[seg.start..=seg.detection_end(k_delay)]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            (peak, seg)
        })
        .collect();
    events.sort_by(|a, b| descending(&a.0, &b.0));

    let event_weight = |seg: &ExtendedSegment| match criterion.variant {
        PaVariant::PointWisePa => seg.extended_len() as f64,
        PaVariant::EventWisePa => 1.0,
        PaVariant::ReducedLengthPa => severity_weight(seg.original_len()),
    };
    let total_weight: f64 = segments.iter().map(event_weight).sum();

    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(descending);
    thresholds.dedup_by(|a, b| a == b);

    let mut runs = RunTracker::new(n, criterion.variant);
    let mut tp = 0.0;
    let mut next_outside = 0;
    let mut next_event = 0;
    let mut points = Vec::with_capacity(thresholds.len());
    for &threshold in &thresholds {
        while next_outside < outside.len() && scores[outside[next_outside]] >= threshold {
            runs.activate(outside[next_outside], &inside);
            next_outside += 1;
        }
        while next_event < events.len() && events[next_event].0 >= threshold {
            tp += event_weight(events[next_event].1);
            next_event += 1;
        }
        let fn_ = if next_event == events.len() {
            0.0
        } else {
            (total_weight - tp).max(0.0)
        };
        points.push(SweepPoint {
            threshold,
            confusion: WeightedConfusion::new(tp, runs.false_positive_weight(), fn_),
        });
    }
    points
}

/// Incremental false-positive bookkeeping for alarm points outside every
/// extended segment.
struct RunTracker {
    variant: PaVariant,
    active: Vec<bool>,
    // Valid only at run endpoints: `run_start[r]` for the right end `r`,
    // `run_end[l]` for the left end `l`.
    run_start: Vec<usize>,
    run_end: Vec<usize>,
    weight: f64,
}

impl RunTracker {
    fn new(n: usize, variant: PaVariant) -> Self {
        Self {
            variant,
            active: vec![false; n],
            run_start: vec![0; n],
            run_end: vec![0; n],
            weight: 0.0,
        }
    }

    fn run_weight(&self, len: usize) -> f64 {
        match self.variant {
            PaVariant::PointWisePa => len as f64,
            PaVariant::EventWisePa => 1.0,
            PaVariant::ReducedLengthPa => severity_weight(len),
        }
    }

    fn activate(&mut self, p: usize, inside: &[bool]) {
        self.active[p] = true;
        if self.variant == PaVariant::PointWisePa {
            self.weight += 1.0;
            return;
        }
        let left = (p > 0 && self.active[p - 1] && !inside[p - 1]).then(|| self.run_start[p - 1]);
        let right = (p + 1 < self.active.len() && self.active[p + 1] && !inside[p + 1])
            .then(|| self.run_end[p + 1]);
        let start = left.unwrap_or(p);
        let end = right.unwrap_or(p);
        if left.is_some() {
            self.weight -= self.run_weight(p - start);
        }
        if right.is_some() {
            self.weight -= self.run_weight(end - p);
        }
        self.weight += self.run_weight(end - start + 1);
        self.run_start[end] = start;
        self.run_end[start] = end;
    }

    fn false_positive_weight(&self) -> f64 {
        self.weight.max(0.0)
    }
}
