//! Brute-force k-nearest-neighbour classifier over standardized features.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::record::ClassLabel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Cosine,
    /// Minkowski distance with exponent 3.
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Equal,
    /// Votes weighted by `1 / d^2`.
    SquaredInverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn<T> {
    pub k: usize,
    pub metric: Metric,
    pub weighting: Weighting,
    pub points: FeatureMatrix<T>,
}

impl<T: Scalar> Knn<T> {
    pub fn fit(points: FeatureMatrix<T>, k: usize, metric: Metric, weighting: Weighting) -> Self {
        Knn { k: k.max(1), metric, weighting, points }
    }

    /// Distance, or a monotone surrogate of it: Euclidean and cubic skip the
    /// final root since only the ordering and `d^2` weights are needed.
    #[inline]
    fn surrogate(&self, a: &[T], b: &[T]) -> T {
        match self.metric {
            Metric::Euclidean => a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y)),
            Metric::Cubic => a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y).abs().powi(3)),
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (T::zero(), T::zero(), T::zero());
                for (&x, &y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == T::zero() || nb == T::zero() {
                    T::one()
                } else {
                    T::one() - dot / (na.sqrt() * nb.sqrt())
                }
            }
        }
    }

    fn squared_distance(&self, surrogate: T) -> T {
        match self.metric {
            Metric::Euclidean => surrogate,
            Metric::Cubic => surrogate.cbrt().powi(2),
            Metric::Cosine => surrogate * surrogate,
        }
    }

    /// Majority (or weighted) vote of the `k` nearest training points.
    /// Equal distances are ordered by training index; tied votes go to the
    /// smallest label.
    pub fn predict_row(&self, row: &[T], scratch: &mut Vec<(T, usize)>) -> ClassLabel {
        let n = self.points.rows();
        scratch.clear();
        scratch.extend((0..n).map(|i| (self.surrogate(row, self.points.row(i)), i)));
        let k = self.k.min(n);
        let cmp = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
        if k < n {
            scratch.select_nth_unstable_by(k - 1, cmp);
        }
        let neighbours = &scratch[..k];

        let mut votes = [T::zero(); 3];
        match self.weighting {
            Weighting::Equal => {
                for &(_, i) in neighbours {
                    votes[self.points.labels[i].index()] += T::one();
                }
            }
            Weighting::SquaredInverse => {
                let exact: Vec<usize> = neighbours.iter().filter(|(d, _)| *d == T::zero()).map(|&(_, i)| i).collect();
                if exact.is_empty() {
                    for &(d, i) in neighbours {
                        votes[self.points.labels[i].index()] += T::one() / self.squared_distance(d);
                    }
                } else {
                    for i in exact {
                        votes[self.points.labels[i].index()] += T::one();
                    }
                }
            }
        }
        let mut best = 0;
        for c in 1..3 {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        ClassLabel::from_index(best)
    }
}
