use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e} < -1e-10)")]
    NotPositive { eigenvalue: f64 },

    #[error("trace must equal 1 within 1e-10, found {trace}")]
    TraceNotUnit { trace: f64 },

    #[error("state vector must have unit norm, found norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("measurement basis is not orthonormal and complete")]
    NonOrthonormalBasis,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("{name} = {value} is out of range: {constraint}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("postselection weights must contain at least one positive entry")]
    ZeroGamma,

    #[error("every trial exceeded the restart cap")]
    AllTrialsDiscarded,

    #[error("solver precondition failed: {0}")]
    Precondition(String),

    #[error("malformed transcript at line {line}: {reason}")]
    TranscriptParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
