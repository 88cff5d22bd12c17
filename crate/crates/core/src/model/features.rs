use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::record::{derive_label, ClassLabel, ComfortRecord, RecordSet};
use crate::scalar::Scalar;

/// Which survey parameters feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    /// Temperature, RH, clo, met, age.
    #[serde(rename = "five")]
    FiveParam,
    /// Temperature, RH, clo, met.
    #[serde(rename = "four")]
    FourParamNoAge,
}

impl FeatureSet {
    pub fn width(self) -> usize {
        match self {
            FeatureSet::FiveParam => 5,
            FeatureSet::FourParamNoAge => 4,
        }
    }

    pub fn column_names(self) -> &'static [&'static str] {
        const NAMES: [&str; 5] = ["air_temperature", "relative_humidity", "clothing_insulation", "metabolic_rate", "age"];
        &NAMES[..self.width()]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::FiveParam => "five",
            FeatureSet::FourParamNoAge => "four",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "five" | "5" | "fiveparam" => Some(FeatureSet::FiveParam),
            "four" | "4" | "fourparamnoage" => Some(FeatureSet::FourParamNoAge),
            _ => None,
        }
    }

    fn row(self, r: &ComfortRecord) -> Option<[f64; 5]> {
        let base = [r.air_temperature?, r.relative_humidity?, r.clothing_insulation?, r.metabolic_rate?, 0.0];
        match self {
            FeatureSet::FourParamNoAge => Some(base),
            FeatureSet::FiveParam => Some([base[0], base[1], base[2], base[3], r.age?]),
        }
    }
}

/// Dense row-major feature matrix with a parallel label vector.
///
/// Unlabeled matrices (validation grids) carry an empty label vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<T = f64> {
    pub feature_set: FeatureSet,
    pub values: Vec<T>,
    pub labels: Vec<ClassLabel>,
    /// Source rows dropped for a missing feature or label.
    pub dropped: usize,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(feature_set: FeatureSet, values: Vec<T>, labels: Vec<ClassLabel>) -> Self {
        debug_assert_eq!(values.len() % feature_set.width(), 0);
        debug_assert!(labels.is_empty() || labels.len() * feature_set.width() == values.len());
        FeatureMatrix { feature_set, values, labels, dropped: 0 }
    }

    pub fn unlabeled(feature_set: FeatureSet, values: Vec<T>) -> Self {
        Self::new(feature_set, values, Vec::new())
    }

    pub fn cols(&self) -> usize {
        self.feature_set.width()
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty() || self.values.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = T> + Clone + '_ {
        self.values.iter().skip(j).step_by(self.cols()).copied()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.cols());
        let mut labels = Vec::with_capacity(if self.labels.is_empty() { 0 } else { indices.len() });
        for &i in indices {
            values.extend_from_slice(self.row(i));
            if !self.labels.is_empty() {
                labels.push(self.labels[i]);
            }
        }
        FeatureMatrix { feature_set: self.feature_set, values, labels, dropped: 0 }
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    /// SHA-256 over the little-endian `f64` values and label bytes.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.feature_set.as_str().as_bytes());
        for v in &self.values {
            h.update(v.as_f64().to_le_bytes());
        }
        for l in &self.labels {
            h.update([l.value() as u8]);
        }
        hex::encode(h.finalize())
    }

    pub fn cast<U: Scalar>(&self) -> FeatureMatrix<U> {
        FeatureMatrix {
            feature_set: self.feature_set,
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            labels: self.labels.clone(),
            dropped: self.dropped,
        }
    }
}

/// Keeps rows with every required feature and a derivable label, in order.
pub fn assemble_features<T: Scalar>(records: &RecordSet, feature_set: FeatureSet) -> Result<FeatureMatrix<T>> {
    let width = feature_set.width();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0;
    for r in records {
        match (feature_set.row(r), derive_label(r)) {
            (Some(row), Some(label)) => {
                values.extend(row[..width].iter().map(|&v| T::lit(v)));
                labels.push(label);
            }
            _ => dropped += 1,
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(FeatureMatrix { feature_set, values, labels, dropped })
}

/// Per-column mean and sample standard deviation of a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats<T = f64> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> StandardizationStats<T> {
    pub fn compute(matrix: &FeatureMatrix<T>) -> Result<Self> {
        let n = matrix.rows();
        let cols = matrix.cols();
        let mut mean = Vec::with_capacity(cols);
        let mut std = Vec::with_capacity(cols);
        for j in 0..cols {
            let (m, s) = mean_and_sample_std(matrix.column(j), n);
            if !(s > T::zero()) || !s.is_finite() {
                return Err(Error::ZeroVarianceColumn(j));
            }
            mean.push(m);
            std.push(s);
        }
        Ok(StandardizationStats { mean, std })
    }

    pub fn apply(&self, matrix: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        let cols = matrix.cols();
        if self.mean.len() != cols {
            return Err(Error::ColumnCountMismatch { expected: self.mean.len(), found: cols });
        }
        let values = matrix
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let j = i % cols;
                (v - self.mean[j]) / self.std[j]
            })
            .collect();
        Ok(FeatureMatrix { feature_set: matrix.feature_set, values, labels: matrix.labels.clone(), dropped: matrix.dropped })
    }

    #[inline]
    pub(crate) fn apply_row(&self, row: &[T], out: &mut [T]) {
        for (j, (o, &v)) in out.iter_mut().zip(row).enumerate() {
            *o = (v - self.mean[j]) / self.std[j];
        }
    }
}

fn mean_and_sample_std<T: Scalar>(values: impl Iterator<Item = T> + Clone, n: usize) -> (T, T) {
    if n < 2 {
        return (values.clone().next().unwrap_or_else(T::zero), T::zero());
    }
    let nf = T::lit(n as f64);
    let mean = values.clone().fold(T::zero(), |a, v| a + v) / nf;
    let ss = values.fold(T::zero(), |a, v| a + (v - mean) * (v - mean));
    (mean, (ss / T::lit((n - 1) as f64)).sqrt())
}

/// Standardizes with the given stats, or computes them from `matrix`.
pub fn standardize<T: Scalar>(
    matrix: &FeatureMatrix<T>,
    stats: Option<&StandardizationStats<T>>,
) -> Result<(FeatureMatrix<T>, StandardizationStats<T>)> {
    let stats = match stats {
        Some(s) => s.clone(),
        None => StandardizationStats::compute(matrix)?,
    };
    let out = stats.apply(matrix)?;
    Ok((out, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub const HOLDOUT_70_15_15: SplitFractions = SplitFractions { train: 0.7, val: 0.15, test: 0.15 };
    pub const ALL_TRAIN: SplitFractions = SplitFractions { train: 1.0, val: 0.0, test: 0.0 };
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self::HOLDOUT_70_15_15
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits<T> {
    pub train: FeatureMatrix<T>,
    pub val: FeatureMatrix<T>,
    pub test: FeatureMatrix<T>,
    /// Shuffled row indices; train, val and test are contiguous runs of it.
    pub order: Vec<usize>,
}

/// Seeded shuffle, then contiguous train/val/test partition.
///
/// Validation and test sizes are `floor(n * fraction)`; the remainder goes
/// to training.
pub fn split<T: Scalar>(matrix: &FeatureMatrix<T>, fractions: SplitFractions, seed: u64) -> Result<Splits<T>> {
    let SplitFractions { train, val, test } = fractions;
    let finite = [train, val, test].iter().all(|f| f.is_finite() && *f >= 0.0);
    if !finite || ((train + val + test) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSplitFractions((train, val, test)));
    }
    let n = matrix.rows();
    let part = |f: f64| (n as f64 * f + 1e-9).floor() as usize;
    let n_val = part(val);
    let n_test = part(test);
    let n_train = n - n_val - n_test;
    for (name, size, frac) in [("train", n_train, train), ("validation", n_val, val), ("test", n_test, test)] {
        if size == 0 && frac > 0.0 {
            return Err(Error::DegenerateSplit { rows: n, partition: name });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train_m = matrix.select(&order[..n_train]);
    let val_m = matrix.select(&order[n_train..n_train + n_val]);
    let test_m = matrix.select(&order[n_train + n_val..]);
    Ok(Splits { train: train_m, val: val_m, test: test_m, order })
}
