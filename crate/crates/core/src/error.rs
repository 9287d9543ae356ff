use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight table horizon too small: need index {needed}, table ends at {available}")]
    HorizonTooSmall { needed: usize, available: usize },

    #[error("nonpositive weight at index {index}")]
    NonpositiveWeight { index: usize },

    #[error("weight sequence rejected: {0}")]
    WeightRejected(String),

    #[error("supremum still increasing at horizon index {horizon} (r = {r})")]
    DivergentSupremum { r: f64, horizon: usize },

    #[error("quadrature underresolved: orthonormality residual {residual:e} exceeds {tolerance:e}")]
    QuadratureUnderresolved { residual: f64, tolerance: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("arrays are not aligned: {0}")]
    Misaligned(String),

    #[error("non-finite entry in block {block}")]
    NonFinite { block: usize },

    #[error("L grid is empty")]
    EmptyGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
