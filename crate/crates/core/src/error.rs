use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("operator is not an orthogonal projection (defect {defect:.3e})")]
    NotProjection { defect: f64 },

    #[error("invalid geometry parameters: {0}")]
    InvalidGeometry(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("truncation is undefined: Tr(RP) = {weight:.3e}")]
    UndefinedTruncation { weight: f64 },

    #[error("states live on different geometries")]
    GeometryMismatch,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
