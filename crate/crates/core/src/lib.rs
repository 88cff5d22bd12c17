//! Thermal-comfort survey pipeline: ingestion, vote-consistency filtering,
//! semantic augmentation, shallow classifiers and psychrometric validation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

pub mod augment;
pub mod chart;
pub mod error;
pub mod filter;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod psychro;
pub mod record;
pub mod report;
pub mod scalar;
pub mod validate;

pub use augment::{augment_to_balance, balance_subsample, generate_augmentation, grid_count, AugmentationRanges, GridAxis};
pub use chart::{render_chart, ChartDocument, ChartOptions, Polygon, PsychroPoint, YAxis};
pub use error::{Error, Result};
pub use filter::{evaluate_rule, filter_dataset, FilterReport, Outcome, RuleVerdict};
pub use ingest::{load_dataset, missing_data_report, ColumnMapping, LoadOutcome, MissingReport};
pub use model::{
    evaluate, predict, train, ClassifierSpec, EvalMode, EvalReport, FeatureMatrix, FeatureSet, Method, SplitFractions,
    TrainedModel,
};
pub use psychro::{humidity_ratio, saturation_pressure};
pub use record::{derive_label, ClassLabel, ComfortRecord, Preference, RecordSet, Source};
pub use scalar::Scalar;
pub use validate::{comfort_band, generate_grid, parametric_sweep, FixedParams, GridSpec, SweepParam};

pub type Matrix64 = model::FeatureMatrix<f64>;
pub type Matrix32 = model::FeatureMatrix<f32>;
pub type Model64 = model::TrainedModel<f64>;
pub type Model32 = model::TrainedModel<f32>;
pub type Stats64 = model::StandardizationStats<f64>;
pub type Stats32 = model::StandardizationStats<f32>;
pub type Mlp64 = model::Mlp<f64>;
pub type Mlp32 = model::Mlp<f32>;
