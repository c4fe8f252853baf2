//! Benchmark harness and evaluation engine for real-time univariate
//! time-series anomaly detection.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: labeled series, split boundaries, segments and score validation.
//! - [`metrics`]: point-adjustment variants, k-delay, prolonging, `F1_best`, AUPRC
//!   and dataset-level aggregation.
//! - [`schemas`]: naive, all-in-one and zero-shot task plans.
//! - [`datasets`]: the canonical on-disk dataset layout and importers.
//! - [`detectors`]: causal statistical detectors (AR, first difference,
//!   subsequence LOF, matrix profile).
//! - [`synth`]: seeded synthetic series with five injected anomaly types.
//! - [`external`]: NDJSON-over-stdio protocol for out-of-process detectors.
//! - [`bench`]: run configuration, orchestration and report emission.

#![forbid(unsafe_code)]

pub mod bench;
pub mod datasets;
pub mod detectors;
pub mod external;
pub mod metrics;
pub mod rng;
pub mod schemas;
pub mod series;
pub mod synth;

pub use series::{AnomalySegment, ScoreSeries, SeriesError, SplitSource, SplitSpec, TimeSeries};
