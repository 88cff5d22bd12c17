use serde::{Deserialize, Serialize};

use super::features::{FeatureMatrix, FeatureSet};
use super::{predict, Method, TrainedModel};
use crate::error::{Error, Result};
use crate::record::ClassLabel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalMode {
    /// Scores a held-out split of the training data.
    HoldoutTest,
    /// Scores the full unfiltered source database.
    AllOriginalData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub feature_set: FeatureSet,
    pub mode: EvalMode,
    pub rows: usize,
    /// Percent correct.
    pub accuracy: f64,
    /// Indexed by label order (Warmer, NoChange, Cooler); `None` when the
    /// class is never predicted (precision) or never present (recall).
    pub precision: [Option<f64>; 3],
    pub recall: [Option<f64>; 3],
    /// `confusion[truth][predicted]`.
    pub confusion: [[usize; 3]; 3],
    pub data_fingerprint: String,
    pub model_data_fingerprint: String,
    pub split_scheme: String,
}

impl EvalReport {
    pub fn from_predictions(
        truth: &[ClassLabel],
        predicted: &[ClassLabel],
        method: Method,
        feature_set: FeatureSet,
        mode: EvalMode,
    ) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::EmptyEvaluationSet);
        }
        assert_eq!(truth.len(), predicted.len());
        let mut confusion = [[0usize; 3]; 3];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[t.index()][p.index()] += 1;
        }
        let total = truth.len();
        let correct: usize = (0..3).map(|c| confusion[c][c]).sum();
        let precision = std::array::from_fn(|c| {
            let col: usize = (0..3).map(|t| confusion[t][c]).sum();
            (col > 0).then(|| confusion[c][c] as f64 / col as f64)
        });
        let recall = std::array::from_fn(|c| {
            let row: usize = confusion[c].iter().sum();
            (row > 0).then(|| confusion[c][c] as f64 / row as f64)
        });
        Ok(EvalReport {
            method,
            feature_set,
            mode,
            rows: total,
            accuracy: 100.0 * correct as f64 / total as f64,
            precision,
            recall,
            confusion,
            data_fingerprint: String::new(),
            model_data_fingerprint: String::new(),
            split_scheme: String::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Scores `model` on the labeled `data`.
pub fn evaluate<T: Scalar>(model: &TrainedModel<T>, data: &FeatureMatrix<T>, mode: EvalMode) -> Result<EvalReport> {
    if data.rows() == 0 || data.labels.len() != data.rows() {
        return Err(Error::EmptyEvaluationSet);
    }
    let predicted = predict(model, data)?;
    let mut report = EvalReport::from_predictions(&data.labels, &predicted, model.spec.method, model.feature_set, mode)?;
    report.data_fingerprint = data.fingerprint();
    report.model_data_fingerprint = model.meta.data_fingerprint.clone();
    report.split_scheme = match (mode, model.meta.split) {
        (EvalMode::AllOriginalData, _) => "trained on all filtered rows; scored on all original rows".into(),
        (_, Some(s)) => format!("seeded shuffle {}/{}/{} train/val/test, seed {}", s.train, s.val, s.test, model.meta.seed),
        (_, None) => format!("seed {}", model.meta.seed),
    };
    Ok(report)
}
