use std::fmt;

/// Error type shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two matrices (or a matrix and an index bound) have incompatible sizes.
    DimensionMismatch { expected: usize, got: usize },
    /// A block or row/column index is outside `1..=n`.
    IndexOutOfRange { index: usize, limit: usize },
    /// A matrix entry is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// Tolerances must be strictly positive with `zero_tol <= eq_tol`.
    InvalidTolerances(String),
    /// The operation requires an upper triangular input.
    NotUpperTriangular,
    /// An iterative kernel exceeded its iteration cap.
    NonConvergence { iterations: usize },
    /// The input is outside the class the operation is defined on.
    NotInClass(String),
    /// A reconstruction pivot fell below its threshold.
    DegenerateStep(String),
    /// A Gram block is inconsistent (no annihilator, negative radicand, ...).
    MalformedBlock(String),
    /// A generator or operation received an invalid parameter.
    InvalidParameter(String),
    /// Rejection sampling exceeded its resample cap.
    ResampleCapExceeded { cap: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::IndexOutOfRange { index, limit } => {
                write!(f, "index {index} out of range 1..={limit}")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite entry at ({row}, {col})")
            }
            Error::InvalidTolerances(msg) => write!(f, "invalid tolerances: {msg}"),
            Error::NotUpperTriangular => write!(f, "matrix is not upper triangular"),
            Error::NonConvergence { iterations } => {
                write!(f, "iteration failed to converge after {iterations} steps")
            }
            Error::NotInClass(msg) => write!(f, "input is not in the required class: {msg}"),
            Error::DegenerateStep(msg) => write!(f, "degenerate reconstruction step: {msg}"),
            Error::MalformedBlock(msg) => write!(f, "malformed Gram block: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::ResampleCapExceeded { cap } => {
                write!(f, "rejection sampling exceeded {cap} attempts")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
