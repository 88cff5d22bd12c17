//! Gaussian naive Bayes with empirical class priors.

use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::record::ClassLabel;
use crate::scalar::Scalar;

/// Added to every variance as a fraction of the largest feature variance,
/// so a class that is constant in one feature stays usable.
pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb<T> {
    /// `None` for classes absent from training.
    pub log_prior: [Option<T>; 3],
    pub mean: [Vec<T>; 3],
    pub var: [Vec<T>; 3],
}

impl<T: Scalar> GaussianNb<T> {
    pub fn fit(data: &FeatureMatrix<T>) -> Self {
        let cols = data.cols();
        let n = data.rows();
        let counts = data.class_counts();
        let mut mean: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); cols]);
        let mut var: [Vec<T>; 3] = std::array::from_fn(|_| vec![T::zero(); cols]);

        for i in 0..n {
            let c = data.labels[i].index();
            for (m, &v) in mean[c].iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        for c in 0..3 {
            if counts[c] > 0 {
                let nc = T::lit(counts[c] as f64);
                mean[c].iter_mut().for_each(|m| *m /= nc);
            }
        }
        for i in 0..n {
            let c = data.labels[i].index();
            for j in 0..cols {
                let d = data.row(i)[j] - mean[c][j];
                var[c][j] += d * d;
            }
        }
        let mut max_var = T::zero();
        for j in 0..cols {
            let all_mean = data.column(j).fold(T::zero(), |a, v| a + v) / T::lit(n.max(1) as f64);
            let v = data.column(j).fold(T::zero(), |a, v| a + (v - all_mean) * (v - all_mean)) / T::lit(n.max(1) as f64);
            max_var = max_var.max(v);
        }
        let eps = T::lit(VAR_SMOOTHING) * max_var.max(T::one());
        for c in 0..3 {
            // Unbiased within-class variance; a single-row class falls back to 0 + eps.
            let denom = T::lit(counts[c].saturating_sub(1).max(1) as f64);
            var[c].iter_mut().for_each(|v| *v = *v / denom + eps);
        }
        let log_prior = std::array::from_fn(|c| (counts[c] > 0).then(|| (T::lit(counts[c] as f64) / T::lit(n as f64)).ln()));
        GaussianNb { log_prior, mean, var }
    }

    pub fn log_posterior(&self, row: &[T]) -> [Option<T>; 3] {
        let half = T::lit(0.5);
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        std::array::from_fn(|c| {
            self.log_prior[c].map(|lp| {
                row.iter().enumerate().fold(lp, |acc, (j, &x)| {
                    let v = self.var[c][j];
                    let d = x - self.mean[c][j];
                    acc - half * ((two_pi * v).ln() + d * d / v)
                })
            })
        })
    }

    pub fn predict_row(&self, row: &[T]) -> ClassLabel {
        let post = self.log_posterior(row);
        let mut best: Option<(usize, T)> = None;
        for (c, p) in post.iter().enumerate() {
            if let Some(p) = *p {
                if best.map_or(true, |(_, b)| p > b) {
                    best = Some((c, p));
                }
            }
        }
        ClassLabel::from_index(best.map_or(1, |(c, _)| c))
    }
}
