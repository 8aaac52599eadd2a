use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subset size k={k} is invalid for dimension n={n}")]
    InvalidOrder { n: usize, k: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("dimension {n} exceeds the compound capacity of {max}")]
    Capacity { n: usize, max: usize },

    #[error("{0}")]
    NotOrthonormal(String),

    #[error("point lies outside the model domain: {0}")]
    OutsideDomain(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("sample set is empty")]
    EmptyGrid,

    #[error("reducibility prerequisite not met: {0}")]
    ReducibilityGate(String),

    #[error("norm mismatch: {0}")]
    NormMismatch(String),

    #[error("eigenproblem: {0}")]
    Eigen(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
