use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by distribution validation, lift analysis, mechanism
/// construction, the relaxation algorithms, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative probability {value} at ({s_label}, {x_label})")]
    NegativeEntry {
        s_label: String,
        x_label: String,
        value: f64,
    },

    #[error("probabilities sum to {sum}; expected 1 within {tol:e}")]
    SumNotOne { sum: f64, tol: f64 },

    #[error("zero marginal for {axis} symbol {label}")]
    ZeroMarginal { axis: &'static str, label: String },

    #[error("duplicate label {label:?} on the {axis} axis")]
    DuplicateLabel { axis: &'static str, label: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("index {index} out of range for axis of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("subset of X must be non-empty")]
    EmptySubset,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid randomization distribution: {0}")]
    InvalidR(String),

    #[error("randomized set must contain at least two symbols, found {0}")]
    SingletonOrEmptyRandomizedSet(usize),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("X has zero entropy; normalized loss is undefined")]
    DegenerateX,

    #[error("delta = {delta} must exceed delta0 = {delta0}")]
    DeltaNotAboveDelta0 { delta: f64, delta0: f64 },

    #[error("no feasible partition under the given constraints")]
    Infeasible,

    #[error("alphabet size {size} exceeds the exhaustive-search cap {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable, machine-readable category name for this error.
    pub fn category(&self) -> &'static str {
        match self {
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::SumNotOne { .. } => "SumNotOne",
            Error::ZeroMarginal { .. } => "ZeroMarginal",
            Error::DuplicateLabel { .. } => "DuplicateLabel",
            Error::Parse(_) => "ParseError",
            Error::InvalidShape(_) => "InvalidShape",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::EmptySubset => "EmptySubset",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::InvalidR(_) => "InvalidR",
            Error::SingletonOrEmptyRandomizedSet(_) => "SingletonOrEmptyRandomizedSet",
            Error::InvalidDistribution(_) => "InvalidDistribution",
            Error::DegenerateX => "DegenerateX",
            Error::DeltaNotAboveDelta0 { .. } => "DeltaNotAboveDelta0",
            Error::Infeasible => "Infeasible",
            Error::AlphabetTooLarge { .. } => "AlphabetTooLarge",
            Error::EmptySample => "EmptySample",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Trial { source, .. } => source.category(),
            Error::Io(_) => "Io",
        }
    }
}
