use std::fmt;
use std::path::PathBuf;

use crate::geometry::Point2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "no convergence after {iterations} iterations (last iterate {last}, step {step:e}, residual {residual:e})"
    )]
    Convergence {
        iterations: usize,
        last: Point2,
        step: f64,
        residual: f64,
    },

    #[error("root iteration did not converge after {iterations} iterations (worst residual {residual:e})")]
    RootConvergence { iterations: usize, residual: f64 },

    #[error("invalid series at index {index}: {reason}")]
    Validation { index: usize, reason: String },

    #[error("series has {len} samples, at least 3 are required")]
    TooShort { len: usize },

    #[error("matrix is singular: pivot {pivot:e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("duplicate abscissa {t} at nodes {first} and {second}")]
    DuplicateAbscissa { t: f64, first: usize, second: usize },

    #[error("exponential overflow: |Re(exponent) * t| = {magnitude} exceeds 700")]
    Overflow { magnitude: f64 },

    #[error("characteristic root {index} has modulus {modulus:e}, logarithm undefined")]
    RootAtZero { index: usize, modulus: f64 },

    #[error("exponent set is not closed under conjugation: {0}")]
    ConjugateClosure(String),

    #[error("interpolation residual {residual:e} exceeds tolerance {bound:e}")]
    ResidualTolerance { residual: f64, bound: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
}

impl Error {
    /// True for errors caused by user input rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::TooShort { .. }
                | Error::DimensionMismatch(_)
                | Error::InsufficientData(_)
                | Error::DuplicateAbscissa { .. }
                | Error::InvalidArgument(_)
                | Error::Io { .. }
                | Error::Parse { .. }
                | Error::Schema { .. }
        )
    }
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// Estimated condition number of a linear solve exceeded the threshold.
    IllConditioned { estimate: f64 },
    /// Smoothed node `index` does not have a larger abscissa than its predecessor.
    Monotonicity { index: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::IllConditioned { estimate } => {
                write!(
                    f,
                    "ill-conditioned system (condition estimate {estimate:e})"
                )
            }
            Warning::Monotonicity { index } => {
                write!(f, "smoothed abscissa at node {index} is not increasing")
            }
        }
    }
}
