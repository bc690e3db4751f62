use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {level} out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("SVD did not converge")]
    SvdFailure,
    #[error("exponent {0} out of range")]
    ExponentOutOfRange(f64),
    #[error("input is not F_{level}-measurable (deviation {deviation:e})")]
    NotMeasurable { level: usize, deviation: f64 },
    #[error("budget guard: {0}")]
    Budget(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
