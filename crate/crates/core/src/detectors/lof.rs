//! Local outlier factor of a query window against a store of training
//! windows (raw Euclidean distance).
//!
//! With `N_k(p)` the k nearest neighbours of `p` and `kdist(o)` the distance
//! from `o` to its k-th neighbour inside the store:
//!
//! ```text
//! reach(p, o) = max(kdist(o), d(p, o))
//! lrd(p)      = 1 / (mean_{o in N_k(p)} reach(p, o) + 1e-10)
//! LOF(p)      = mean_{o in N_k(p)} lrd(o) / lrd(p)
//! ```
//!
//! The `1e-10` keeps densities finite for exact duplicates; a query sitting
//! on a cluster of duplicates whose own reachability is zero gets LOF 1.

use super::knn::{Neighbor, ProjectedStore};
use super::window::uniform_direction;

const DENSITY_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LofModel {
    store: ProjectedStore,
    k: usize,
    k_distance: Vec<f64>,
    lrd: Vec<f64>,
}

impl LofModel {
    /// Builds the model from training windows of equal length. Needs at
    /// least two windows.
    pub fn new(windows: Vec<Vec<f64>>, k_nn: usize) -> Self {
        let dim = windows[0].len();
        let n = windows.len();
        let store = ProjectedStore::new(dim, uniform_direction(dim), windows.clone());
        let k_store = k_nn.min(n - 1).max(1);
        let neighbours: Vec<Vec<Neighbor>> = windows
            .iter()
            .enumerate()
            .map(|(id, w)| store.knn(w, k_store, Some(id)))
            .collect();
        let k_distance: Vec<f64> = neighbours
            .iter()
            .map(|nb| nb.last().map_or(0.0, |n| n.dist_sq.sqrt()))
            .collect();
        let lrd = neighbours
            .iter()
            .map(|nb| local_density(nb, &k_distance))
            .collect();
        Self {
            store,
            k: k_nn.min(n),
            k_distance,
            lrd,
        }
    }

    pub fn store_size(&self) -> usize {
        self.store.len()
    }

    pub fn window(&self) -> usize {
        self.store.dim()
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        let neighbours = self.store.knn(query, self.k, None);
        let lrd_q = local_density(&neighbours, &self.k_distance);
        let mean_lrd = neighbours.iter().map(|n| self.lrd[n.id]).sum::<f64>() / neighbours.len() as f64;
        mean_lrd / lrd_q
    }
}

fn local_density(neighbours: &[Neighbor], k_distance: &[f64]) -> f64 {
    let mean_reach = neighbours
        .iter()
        .map(|n| k_distance[n.id].max(n.dist_sq.sqrt()))
        .sum::<f64>()
        / neighbours.len() as f64;
    1.0 / (mean_reach + DENSITY_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook LOF by exhaustive search, independent of the store.
    fn brute_lof(store: &[Vec<f64>], query: &[f64], k: usize) -> f64 {
        let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let knn = |q: &[f64], skip: Option<usize>, k: usize| {
            let mut all: Vec<(f64, usize)> = store
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .map(|(i, o)| (d(q, o), i))
                .collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            all.truncate(k);
            all
        };
        let kdist: Vec<f64> = (0..store.len())
            .map(|i| knn(&store[i], Some(i), k).last().unwrap().0)
            .collect();
        let lrd = |nb: &[(f64, usize)]| {
            1.0 / (nb.iter().map(|(dist, o)| kdist[*o].max(*dist)).sum::<f64>() / nb.len() as f64 + 1e-10)
        };
        let lrd_store: Vec<f64> = (0..store.len()).map(|i| lrd(&knn(&store[i], Some(i), k))).collect();
        let nq = knn(query, None, k);
        nq.iter().map(|(_, o)| lrd_store[*o]).sum::<f64>() / nq.len() as f64 / lrd(&nq)
    }

    /// 50 windows of a slow ramp: evenly spaced points on a line in R^4.
    fn uniform_store() -> Vec<Vec<f64>> {
        (0..50)
            .map(|i| (0..4).map(|j| (i + j) as f64 * 0.1).collect())
            .collect()
    }

    #[test]
    fn inlier_and_outlier_match_oracle() {
        let store = uniform_store();
        let model = LofModel::new(store.clone(), 10);
        let inside: Vec<f64> = (0..4).map(|j| (25.5 + j as f64) * 0.1).collect();
        let far = vec![30.0, -30.0, 30.0, -30.0];
        let lof_in = model.score(&inside);
        let lof_far = model.score(&far);
        assert!((lof_in - brute_lof(&store, &inside, 10)).abs() < 1e-9);
        assert!((lof_far - brute_lof(&store, &far, 10)).abs() < 1e-6 * lof_far);
        assert!((lof_in - 1.0).abs() <= 0.2, "inlier LOF {lof_in}");
        assert!(lof_far > 2.0, "outlier LOF {lof_far}");
    }

    #[test]
    fn duplicates_stay_finite() {
        let store = vec![vec![1.0, 1.0]; 12];
        let model = LofModel::new(store, 5);
        assert_eq!(model.score(&[1.0, 1.0]), 1.0);
        let off = model.score(&[2.0, 1.0]);
        assert!(off.is_finite() && off > 1.0);
    }

    #[test]
    fn tiny_store() {
        let model = LofModel::new(vec![vec![0.0], vec![1.0]], 10);
        assert!(model.score(&[0.5]).is_finite());
    }
}
