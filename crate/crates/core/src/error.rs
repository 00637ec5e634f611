use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite value at index {index} ({context})")]
    NonFinite { index: usize, context: &'static str },
    #[error("field length {found} does not match grid size {expected}")]
    Length { expected: usize, found: usize },
    #[error("semi-spectral field is not Hermitian in xi2 (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("exponent {name} = {value} outside [1, inf]")]
    Exponent { name: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parameters outside the admissible window: {0}")]
    OutsideWindow(String),
    #[error("bands {j} and {k} overlap (|j - k| <= 1)")]
    AdjacentBands { j: i32, k: i32 },
    #[error("rescale factor {0} is not a power of two")]
    NonDyadic(f64),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("smallness gate: {0}")]
    Gate(String),
    #[error("dump format: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
