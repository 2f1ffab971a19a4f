use thiserror::Error;

/// Library-wide error type with module-qualified codes for CLI reporting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    #[error("inference unreliable: {0}")]
    InferenceUnreliable(String),

    #[error("sampling scheme infeasible: {0}")]
    SchemeInfeasible(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("scenario failure: {0}")]
    ScenarioFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable code, `module/kind`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "data/dimension-mismatch",
            Error::InvalidArgument(_) => "data/invalid-argument",
            Error::NonFinite(_) => "data/non-finite",
            Error::OptimizerFailure(_) => "optimize/failure",
            Error::InferenceUnreliable(_) => "inference/unreliable",
            Error::SchemeInfeasible(_) => "sampling/scheme-infeasible",
            Error::RankDeficient(_) => "comparator/rank-deficient",
            Error::InvalidWeight(_) => "rankcorr/invalid-weight",
            Error::InsufficientData(_) => "datasets/insufficient-data",
            Error::Schema(_) => "datasets/schema",
            Error::ScenarioFailure(_) => "harness/scenario-failure",
            Error::Io(_) => "io/error",
            Error::Csv(_) => "datasets/csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
