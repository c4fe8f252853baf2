//! Learned autoregression with a bias term, fitted by ridge least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::DetectorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    /// `[bias, w_1, ..., w_m]`; `w_j` multiplies `x_{t-m+j-1}`, so the last
    /// coefficient applies to the most recent observation.
    pub coefficients: Vec<f64>,
}

impl ArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// One-step prediction from the `m` preceding observations.
    pub fn predict(&self, lags: &[f64]) -> f64 {
        debug_assert_eq!(lags.len(), self.order());
        let mut acc = self.coefficients[0];
        for (w, x) in self.coefficients[1..].iter().zip(lags) {
            acc += w * x;
        }
        acc
    }
}

/// Minimises `sum (x_t - w·[1, x_{t-m..t-1}])^2 + ridge * ||w||^2` over
/// windows drawn inside each pool. Pools shorter than `m + 1` are skipped.
pub fn fit_ar(pools: &[&[f64]], m: usize, ridge: f64) -> Result<ArModel, DetectorError> {
    let dim = m + 1;
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    let mut rows = 0usize;
    let mut features = vec![0.0; dim];
    for pool in pools.iter().filter(|p| p.len() > m) {
        for t in m..pool.len() {
            features[0] = 1.0;
            features[1..].copy_from_slice(&pool[t - m..t]);
            let y = pool[t];
            for i in 0..dim {
                let fi = features[i];
                rhs[i] += fi * y;
                for j in i..dim {
                    gram[(i, j)] += fi * features[j];
                }
            }
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(DetectorError::InsufficientTrainingData {
            needed: m + 1,
        });
    }
    for i in 0..dim {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
        gram[(i, i)] += ridge;
    }
    let solution = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        // Rank-deficient normal equations (e.g. a constant pool with no
        // ridge): take the minimum-norm least-squares solution.
        None => gram
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| DetectorError::Numerical(e.to_string()))?,
    };
    let coefficients: Vec<f64> = solution.iter().copied().collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(DetectorError::Numerical("non-finite AR coefficients".into()));
    }
    Ok(ArModel { coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn recovers_first_order_recurrence() {
        let mut x = vec![1.0];
        for _ in 0..40 {
            let last = *x.last().unwrap();
            x.push(0.5 * last);
        }
        let model = fit_ar(&[&x], 1, 0.0).unwrap();
        assert!((model.coefficients[1] - 0.5).abs() < 1e-9, "{:?}", model.coefficients);
        assert!(model.coefficients[0].abs() < 1e-9);
    }

    #[test]
    fn windows_never_cross_pools() {
        // Each pool alone is an exact x_t = 2 x_{t-1} recurrence; stitching
        // them together would break it.
        let a = [1.0, 2.0, 4.0, 8.0, 16.0];
        let b = [-3.0, -6.0, -12.0, -24.0];
        let model = fit_ar(&[&a, &b], 1, 0.0).unwrap();
        assert!((model.coefficients[1] - 2.0).abs() < 1e-9);
        assert!(model.coefficients[0].abs() < 1e-9);
    }

    #[test]
    fn short_pools_are_skipped() {
        assert!(matches!(
            fit_ar(&[&[1.0, 2.0]], 2, 1e-4),
            Err(DetectorError::InsufficientTrainingData { .. })
        ));
        let long: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        assert!(fit_ar(&[&[1.0, 2.0], &long], 2, 1e-4).is_ok());
    }

    #[test]
    fn constant_pool_without_ridge() {
        let model = fit_ar(&[&[3.0; 50]], 4, 0.0).unwrap();
        assert!((model.predict(&[3.0; 4]) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn beats_best_constant_predictor() {
        let mut rng = SplitMix64::new(9);
        let x: Vec<f64> = (0..500)
            .map(|t| (t as f64 * 0.2).sin() * 2.0 + 0.3 * rng.normal())
            .collect();
        let m = 8;
        let model = fit_ar(&[&x], m, 1e-8).unwrap();
        let targets = &x[m..];
        let mean = targets.iter().sum::<f64>() / targets.len() as f64;
        let constant_rss: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
        let ar_rss: f64 = (m..x.len()).map(|t| (x[t] - model.predict(&x[t - m..t])).powi(2)).sum();
        assert!(ar_rss <= constant_rss);
    }
}
