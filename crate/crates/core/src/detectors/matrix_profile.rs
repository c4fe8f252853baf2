//! Matrix-profile AB-join: each query window's score is its minimum
//! z-normalized Euclidean distance to any training window.
//!
//! Constant windows (std below [`CONSTANT_STD`]) normalize to the zero
//! vector, except that two constant windows are compared by their mean
//! offset, `sqrt(m) * |mean_a - mean_b|`.

use super::knn::ProjectedStore;
use super::window::{ramp_direction, znormalize};
#[cfg(test)]
use super::window::CONSTANT_STD;

#[derive(Debug, Clone)]
pub struct MatrixProfileModel {
    m: usize,
    store: ProjectedStore,
    // Sorted means of constant training windows.
    constant_means: Vec<f64>,
}

impl MatrixProfileModel {
    pub fn new(windows: &[Vec<f64>]) -> Self {
        let m = windows[0].len();
        let mut normalized = Vec::new();
        let mut constant_means = Vec::new();
        for w in windows {
            match znormalize(w) {
                (_, Some(z)) => normalized.push(z),
                (mean, None) => constant_means.push(mean),
            }
        }
        constant_means.sort_by(f64::total_cmp);
        Self {
            m,
            store: ProjectedStore::new(m, ramp_direction(m), normalized),
            constant_means,
        }
    }

    pub fn store_size(&self) -> usize {
        self.store.len() + self.constant_means.len()
    }

    pub fn window(&self) -> usize {
        self.m
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        let root_m = (self.m as f64).sqrt();
        match znormalize(query) {
            (_, Some(z)) => {
                let mut best = self.store.nearest_dist_sq(&z).map_or(f64::INFINITY, f64::sqrt);
                if !self.constant_means.is_empty() {
                    best = best.min(root_m);
                }
                best
            }
            (mean, None) => {
                let mut best = if self.store.is_empty() { f64::INFINITY } else { root_m };
                if !self.constant_means.is_empty() {
                    let pos = self.constant_means.partition_point(|&c| c < mean);
                    let nearest = [pos.checked_sub(1), Some(pos)]
                        .into_iter()
                        .flatten()
                        .filter_map(|i| self.constant_means.get(i))
                        .map(|c| (c - mean).abs())
                        .fold(f64::INFINITY, f64::min);
                    best = best.min(root_m * nearest);
                }
                best
            }
        }
    }
}
