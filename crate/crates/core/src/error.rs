use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("mapped column `{0}` is absent from the CSV header")]
    MappingColumnAbsent(String),
    #[error("invalid column mapping at line {line}: {reason}")]
    MappingSyntax { line: usize, reason: String },
    #[error("invalid rule id {0}; expected 1..=5")]
    InvalidRuleId(u8),
    #[error("invalid grid axis [{start}, {end}] step {step}")]
    InvalidAxis { start: f64, end: f64, step: f64 },
    #[error("grid of {rows} rows exceeds the cap of {cap}")]
    GridTooLarge { rows: u128, cap: u64 },
    #[error("subsample target {target} exceeds population {population}")]
    TargetExceedsPopulation { target: usize, population: usize },
    #[error("no rows survive feature assembly")]
    EmptyMatrix,
    #[error("column {0} has zero variance")]
    ZeroVarianceColumn(usize),
    #[error("standardization stats have {expected} columns, matrix has {found}")]
    ColumnCountMismatch { expected: usize, found: usize },
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    InvalidSplitFractions((f64, f64, f64)),
    #[error("split of {rows} rows leaves the {partition} partition empty")]
    DegenerateSplit { rows: usize, partition: &'static str },
    #[error("training set contains a single class")]
    SingleClassTrainingSet,
    #[error("training loss became non-finite at iteration {0}")]
    NonFiniteLoss(usize),
    #[error("model expects {expected:?} features, got {found:?}")]
    FeatureSetMismatch { expected: crate::FeatureSet, found: crate::FeatureSet },
    #[error("evaluation set is empty")]
    EmptyEvaluationSet,
    #[error("model file version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("temperature {0} °C is outside the supported range [-20, 70]")]
    OutOfSupportedRange(f64),
    #[error("vapour pressure {vapour} kPa is not below total pressure {total} kPa")]
    SaturationExceedsTotalPressure { vapour: f64, total: f64 },
    #[error("relative humidity {0} is outside [0, 100]")]
    InvalidHumidity(f64),
    #[error("cannot render an empty point set")]
    EmptyPointSet,
    #[error("parameter sweep needs at least one value")]
    EmptyValueList,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error in {context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::FileNotFound(_) => "FileNotFound",
            Error::MappingColumnAbsent(_) => "MappingColumnAbsent",
            Error::MappingSyntax { .. } => "MappingSyntax",
            Error::InvalidRuleId(_) => "InvalidRuleId",
            Error::InvalidAxis { .. } => "InvalidAxis",
            Error::GridTooLarge { .. } => "GridTooLarge",
            Error::TargetExceedsPopulation { .. } => "TargetExceedsPopulation",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::ZeroVarianceColumn(_) => "ZeroVarianceColumn",
            Error::ColumnCountMismatch { .. } => "ColumnCountMismatch",
            Error::InvalidSplitFractions(_) => "InvalidSplitFractions",
            Error::DegenerateSplit { .. } => "DegenerateSplit",
            Error::SingleClassTrainingSet => "SingleClassTrainingSet",
            Error::NonFiniteLoss(_) => "NonFiniteLoss",
            Error::FeatureSetMismatch { .. } => "FeatureSetMismatch",
            Error::EmptyEvaluationSet => "EmptyEvaluationSet",
            Error::VersionMismatch { .. } => "VersionMismatch",
            Error::CorruptFile(_) => "CorruptFile",
            Error::OutOfSupportedRange(_) => "OutOfSupportedRange",
            Error::SaturationExceedsTotalPressure { .. } => "SaturationExceedsTotalPressure",
            Error::InvalidHumidity(_) => "InvalidHumidity",
            Error::EmptyPointSet => "EmptyPointSet",
            Error::EmptyValueList => "EmptyValueList",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::MissingArtifact(_) => "MissingArtifact",
            Error::Io { .. } => "Io",
            Error::Csv { .. } => "Csv",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    pub(crate) fn csv(context: impl Into<String>, source: csv::Error) -> Self {
        Error::Csv { context: context.into(), source }
    }
}
