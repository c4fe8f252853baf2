//! Built-in causal statistical detectors.
//!
//! Every detector follows the same contract: [`fit`] on a list of training
//! pools (series boundaries are never crossed), then [`FittedDetector::score`]
//! a test sequence given the observations that precede it. The score at test
//! position `t` depends only on observations up to and including `t`, and
//! windows are attached to their last index. Windows reaching before the
//! first available observation repeat that observation.

mod ar;
pub mod knn;
mod lof;
mod matrix_profile;
mod window;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ar::{fit_ar, ArModel};
pub use lof::LofModel;
pub use matrix_profile::MatrixProfileModel;
pub use window::{mean_std, window_ending_at, znormalize, CONSTANT_STD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectorError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("no training pool has the {needed} points a window needs")]
    InsufficientTrainingData { needed: usize },
    #[error("non-finite input at position {0}")]
    NonFiniteInput(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Ar,
    FirstDiff,
    SubLof,
    MatrixProfile,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 4] = [
        DetectorKind::Ar,
        DetectorKind::FirstDiff,
        DetectorKind::SubLof,
        DetectorKind::MatrixProfile,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Ar => "ar",
            DetectorKind::FirstDiff => "first_diff",
            DetectorKind::SubLof => "sub_lof",
            DetectorKind::MatrixProfile => "matrix_profile",
        }
    }

    fn is_windowed(self) -> bool {
        !matches!(self, DetectorKind::FirstDiff)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = DetectorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| DetectorError::InvalidConfig(format!("unknown detector kind '{s}'")))
    }
}

pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_NEIGHBORS: usize = 10;
pub const DEFAULT_RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    #[serde(default = "default_window")]
    pub window: usize,
    /// Neighbourhood size for `sub_lof`.
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    /// Ridge penalty for `ar`.
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_neighbors() -> usize {
    DEFAULT_NEIGHBORS
}

fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            window: DEFAULT_WINDOW,
            neighbors: DEFAULT_NEIGHBORS,
            ridge: DEFAULT_RIDGE,
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_neighbors(mut self, neighbors: usize) -> Self {
        self.neighbors = neighbors;
        self
    }

    pub fn with_ridge(mut self, ridge: f64) -> Self {
        self.ridge = ridge;
        self
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        let min_window = if self.kind == DetectorKind::Ar { 1 } else { 2 };
        if self.kind.is_windowed() && self.window < min_window {
            return Err(DetectorError::InvalidConfig(format!(
                "{} needs window >= {min_window}, got {}",
                self.kind, self.window
            )));
        }
        if self.neighbors == 0 {
            return Err(DetectorError::InvalidConfig("neighbors must be >= 1".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(DetectorError::InvalidConfig(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum FittedDetector {
    FirstDiff,
    Ar(ArModel),
    SubLof(LofModel),
    MatrixProfile(MatrixProfileModel),
}

fn check_finite(values: &[f64], offset: usize) -> Result<(), DetectorError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(DetectorError::NonFiniteInput(offset + i)),
        None => Ok(()),
    }
}

fn training_windows(pools: &[&[f64]], m: usize) -> Vec<Vec<f64>> {
    pools
        .iter()
        .filter(|p| p.len() > m)
        .flat_map(|p| p.windows(m).map(<[f64]>::to_vec))
        .collect()
}

/// Fits a detector on label-free training pools.
pub fn fit(config: &DetectorConfig, pools: &[&[f64]]) -> Result<FittedDetector, DetectorError> {
    config.validate()?;
    let mut offset = 0;
    for pool in pools {
        check_finite(pool, offset)?;
        offset += pool.len();
    }
    let m = config.window;
    let needed = DetectorError::InsufficientTrainingData { needed: m + 1 };
    match config.kind {
        DetectorKind::FirstDiff => Ok(FittedDetector::FirstDiff),
        DetectorKind::Ar => fit_ar(pools, m, config.ridge).map(FittedDetector::Ar),
        DetectorKind::SubLof => {
            let windows = training_windows(pools, m);
            if windows.len() < 2 {
                return Err(needed);
            }
            Ok(FittedDetector::SubLof(LofModel::new(windows, config.neighbors)))
        }
        DetectorKind::MatrixProfile => {
            let windows = training_windows(pools, m);
            if windows.is_empty() {
                return Err(needed);
            }
            Ok(FittedDetector::MatrixProfile(MatrixProfileModel::new(&windows)))
        }
    }
}

impl FittedDetector {
    pub fn kind(&self) -> DetectorKind {
        match self {
            FittedDetector::FirstDiff => DetectorKind::FirstDiff,
            FittedDetector::Ar(_) => DetectorKind::Ar,
            FittedDetector::SubLof(_) => DetectorKind::SubLof,
            FittedDetector::MatrixProfile(_) => DetectorKind::MatrixProfile,
        }
    }

    /// Learned parameters: `m + 1` for AR, zero otherwise.
    pub fn parameter_count(&self) -> usize {
        match self {
            FittedDetector::Ar(model) => model.coefficients.len(),
            _ => 0,
        }
    }

    /// Number of stored training windows (memory cost of store-based kinds).
    pub fn store_size(&self) -> usize {
        match self {
            FittedDetector::SubLof(model) => model.store_size(),
            FittedDetector::MatrixProfile(model) => model.store_size(),
            _ => 0,
        }
    }

    /// Scores `test` one point at a time. `context` holds the observations
    /// immediately preceding `test` (usually the train and validation
    /// regions of the same series).
    pub fn score(&self, context: &[f64], test: &[f64]) -> Result<Vec<f64>, DetectorError> {
        check_finite(context, 0)?;
        check_finite(test, context.len())?;
        let series: Vec<f64> = context.iter().chain(test).copied().collect();
        let start = context.len();
        let mut scores = Vec::with_capacity(test.len());
        let mut buf = Vec::new();
        for t in start..series.len() {
            scores.push(self.score_at(&series, t, &mut buf));
        }
        Ok(scores)
    }

    fn score_at(&self, series: &[f64], t: usize, buf: &mut Vec<f64>) -> f64 {
        match self {
            FittedDetector::FirstDiff => {
                if t == 0 {
                    0.0
                } else {
                    (series[t] - series[t - 1]).abs()
                }
            }
            FittedDetector::Ar(model) => {
                let m = model.order();
                if t == 0 {
                    window_ending_at(series, 0, m, buf);
                } else {
                    window_ending_at(series, t - 1, m, buf);
                }
                (model.predict(buf) - series[t]).abs()
            }
            FittedDetector::SubLof(model) => {
                window_ending_at(series, t, model.window(), buf);
                model.score(buf)
            }
            FittedDetector::MatrixProfile(model) => {
                window_ending_at(series, t, model.window(), buf);
                model.score(buf)
            }
        }
    }
}
