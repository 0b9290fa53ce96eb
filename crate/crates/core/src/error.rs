use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("point is not on the hyperboloid")]
    NotOnHyperboloid,
    #[error("phase point violates constraints: {0}")]
    InvalidPhasePoint(String),
    #[error("matrix is not in SO0(1,n+1): {0}")]
    NotGroupElement(String),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resolution inadequate: {0}")]
    Resolution(String),
    #[error("unsupported transform size {0}")]
    UnsupportedSize(usize),
    #[error("power iteration did not converge; bracket [{lower}, {upper}]")]
    NotConverged { lower: f64, upper: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}
