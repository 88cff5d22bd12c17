//! Shallow three-class classifiers over standardized survey features.

pub mod bayes;
pub mod eval;
pub mod features;
pub mod knn;
pub mod nn;
pub mod persist;
pub mod tree;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::ClassLabel;
use crate::scalar::Scalar;

pub use bayes::GaussianNb;
pub use eval::{evaluate, EvalMode, EvalReport};
pub use features::{
    assemble_features, split, standardize, FeatureMatrix, FeatureSet, SplitFractions, Splits, StandardizationStats,
};
pub use knn::{Knn, Metric, Weighting};
pub use nn::{nn_gradient, Mlp, SgdOptions, TrainLog};
pub use persist::{load_model, save_model};
pub use tree::DecisionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    FineTree,
    MediumTree,
    CoarseTree,
    FineKnn,
    MediumKnn,
    CoarseKnn,
    CosineKnn,
    CubicKnn,
    WeightedKnn,
    GaussianNb,
    NarrowNn,
    MediumNn,
    WideNn,
    BilayeredNn,
    TrilayeredNn,
}

impl Method {
    pub const ALL: [Method; 15] = [
        Method::FineTree,
        Method::MediumTree,
        Method::CoarseTree,
        Method::FineKnn,
        Method::MediumKnn,
        Method::CoarseKnn,
        Method::CosineKnn,
        Method::CubicKnn,
        Method::WeightedKnn,
        Method::GaussianNb,
        Method::NarrowNn,
        Method::MediumNn,
        Method::WideNn,
        Method::BilayeredNn,
        Method::TrilayeredNn,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            Method::FineTree => "Fine Tree",
            Method::MediumTree => "Medium Tree",
            Method::CoarseTree => "Coarse Tree",
            Method::FineKnn => "Fine KNN",
            Method::MediumKnn => "Medium KNN",
            Method::CoarseKnn => "Coarse KNN",
            Method::CosineKnn => "Cosine KNN",
            Method::CubicKnn => "Cubic KNN",
            Method::WeightedKnn => "Weighted KNN",
            Method::GaussianNb => "Gaussian Naive Bayes",
            Method::NarrowNn => "Narrow Neural Network",
            Method::MediumNn => "Medium Neural Network",
            Method::WideNn => "Wide Neural Network",
            Method::BilayeredNn => "Bilayered Neural Network",
            Method::TrilayeredNn => "Trilayered Neural Network",
        }
    }

    /// Short identifier used on the command line and in configs.
    pub fn key(self) -> &'static str {
        match self {
            Method::FineTree => "fine-tree",
            Method::MediumTree => "medium-tree",
            Method::CoarseTree => "coarse-tree",
            Method::FineKnn => "fine-knn",
            Method::MediumKnn => "medium-knn",
            Method::CoarseKnn => "coarse-knn",
            Method::CosineKnn => "cosine-knn",
            Method::CubicKnn => "cubic-knn",
            Method::WeightedKnn => "weighted-knn",
            Method::GaussianNb => "gaussian-nb",
            Method::NarrowNn => "narrow-nn",
            Method::MediumNn => "medium-nn",
            Method::WideNn => "wide-nn",
            Method::BilayeredNn => "bilayered-nn",
            Method::TrilayeredNn => "trilayered-nn",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        let norm: String = raw.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        Self::ALL.into_iter().find(|m| {
            let k: String = m.key().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
            let d: String =
                m.display_name().chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
            norm == k || norm == d
        })
    }

    pub fn is_neural(self) -> bool {
        matches!(self, Method::NarrowNn | Method::MediumNn | Method::WideNn | Method::BilayeredNn | Method::TrilayeredNn)
    }

    pub fn tree_max_splits(self) -> Option<usize> {
        match self {
            Method::FineTree => Some(100),
            Method::MediumTree => Some(20),
            Method::CoarseTree => Some(4),
            _ => None,
        }
    }

    pub fn knn_params(self) -> Option<(usize, Metric, Weighting)> {
        match self {
            Method::FineKnn => Some((1, Metric::Euclidean, Weighting::Equal)),
            Method::MediumKnn => Some((10, Metric::Euclidean, Weighting::Equal)),
            Method::CoarseKnn => Some((100, Metric::Euclidean, Weighting::Equal)),
            Method::CosineKnn => Some((10, Metric::Cosine, Weighting::Equal)),
            Method::CubicKnn => Some((10, Metric::Cubic, Weighting::Equal)),
            Method::WeightedKnn => Some((10, Metric::Euclidean, Weighting::SquaredInverse)),
            _ => None,
        }
    }

    pub fn hidden_layers(self) -> Option<&'static [usize]> {
        match self {
            Method::NarrowNn => Some(&[10]),
            Method::MediumNn => Some(&[25]),
            Method::WideNn => Some(&[100]),
            Method::BilayeredNn => Some(&[10, 10]),
            Method::TrilayeredNn => Some(&[10, 10, 10]),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// A classifier configuration. Structural hyperparameters follow from the
/// method; only the optimizer settings of the networks are tunable. The
/// networks are unregularized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub method: Method,
    #[serde(default)]
    pub sgd: SgdOptions,
}

impl ClassifierSpec {
    pub fn new(method: Method) -> Self {
        ClassifierSpec { method, sgd: SgdOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum ModelParams<T> {
    Tree(DecisionTree<T>),
    Knn(Knn<T>),
    Bayes(GaussianNb<T>),
    Network(Mlp<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub split: Option<SplitFractions>,
    pub data_fingerprint: String,
    pub train_rows: usize,
    pub val_rows: usize,
    pub log: Option<TrainLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainedModel<T = f64> {
    pub spec: ClassifierSpec,
    pub feature_set: FeatureSet,
    pub stats: StandardizationStats<T>,
    pub params: ModelParams<T>,
    pub meta: TrainingMeta,
}

/// Fits `spec` on raw (unstandardized) `train` rows.
///
/// Standardization statistics come from `train` alone and are stored in
/// the model; `val` is only used for early stopping of the networks.
pub fn train<T: Scalar>(
    spec: &ClassifierSpec,
    train: &FeatureMatrix<T>,
    val: &FeatureMatrix<T>,
    seed: u64,
) -> Result<TrainedModel<T>> {
    if train.rows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SingleClassTrainingSet);
    }
    if val.cols() != train.cols() {
        return Err(Error::FeatureSetMismatch { expected: train.feature_set, found: val.feature_set });
    }
    let (z_train, stats) = standardize(train, None)?;
    let z_val = stats.apply(val)?;
    let method = spec.method;
    let mut log = None;
    let params = if let Some(max_splits) = method.tree_max_splits() {
        ModelParams::Tree(DecisionTree::fit(&z_train, max_splits))
    } else if let Some((k, metric, weighting)) = method.knn_params() {
        ModelParams::Knn(Knn::fit(z_train, k, metric, weighting))
    } else if let Some(hidden) = method.hidden_layers() {
        let (net, l) = nn::train_mlp(hidden, &z_train, &z_val, seed, &spec.sgd)?;
        log = Some(l);
        ModelParams::Network(net)
    } else {
        ModelParams::Bayes(GaussianNb::fit(&z_train))
    };
    Ok(TrainedModel {
        spec: *spec,
        feature_set: train.feature_set,
        stats,
        params,
        meta: TrainingMeta {
            seed,
            split: None,
            data_fingerprint: train.fingerprint(),
            train_rows: train.rows(),
            val_rows: val.rows(),
            log,
        },
    })
}

/// Labels for every row of raw `features`. Pure in `(model, features)`.
pub fn predict<T: Scalar>(model: &TrainedModel<T>, features: &FeatureMatrix<T>) -> Result<Vec<ClassLabel>> {
    if features.feature_set != model.feature_set {
        return Err(Error::FeatureSetMismatch { expected: model.feature_set, found: features.feature_set });
    }
    let cols = features.cols();
    let out = (0..features.rows())
        .into_par_iter()
        .map_init(
            || (vec![T::zero(); cols], Vec::new()),
            |(z, scratch), i| {
                model.stats.apply_row(features.row(i), z);
                match &model.params {
                    ModelParams::Tree(t) => t.predict_row(z),
                    ModelParams::Knn(k) => k.predict_row(z, scratch),
                    ModelParams::Bayes(b) => b.predict_row(z),
                    ModelParams::Network(n) => n.predict_row(z),
                }
            },
        )
        .collect();
    Ok(out)
}
