use std::fmt;

use thiserror::Error;

/// One violated invariant of a covariance specification.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionMismatch { expected: usize, rows: usize, cols: usize },
    NonFinite { row: usize, col: usize },
    Asymmetry { max_abs: f64 },
    NonUnitDiagonal { index: usize, value: f64 },
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    NotPositiveSemidefinite { min_eigenvalue: f64, max_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { expected, rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected {expected}x{expected}")
            }
            Violation::NonFinite { row, col } => write!(f, "entry ({row},{col}) is not finite"),
            Violation::Asymmetry { max_abs } => {
                write!(f, "matrix is not symmetric (max |a_pq - a_qp| = {max_abs:e})")
            }
            Violation::NonUnitDiagonal { index, value } => {
                write!(f, "diagonal entry {index} is {value}, expected 1")
            }
            Violation::EntryOutOfRange { row, col, value } => {
                write!(f, "entry ({row},{col}) = {value} lies outside [-1, 1]")
            }
            Violation::NotPositiveSemidefinite { min_eigenvalue, max_eigenvalue } => write!(
                f,
                "smallest eigenvalue {min_eigenvalue:e} is below -1e-10 * {max_eigenvalue:e}"
            ),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid covariance specification: {}", join_violations(.0))]
    InvalidSpec(Vec<Violation>),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Cholesky factorization failed even with diagonal jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error(
        "circulant embedding has eigenvalue {min_eigenvalue:e} below -1e-8 * {max_eigenvalue:e}; \
         use the cholesky method instead"
    )]
    CirculantEmbedding { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("probability estimate for {side} is {p_hat:e}, below the minimum {min:e}")]
    StarvedEstimate { side: &'static str, p_hat: f64, min: f64 },

    #[error("no successes in {n_samples} replications; use a smaller horizon or more paths")]
    ZeroSuccesses { n_samples: u64 },

    #[error("need at least {needed} usable points for the fit, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("unsupported shape for exact evaluation: d={d}, n={n}")]
    UnsupportedShape { d: usize, n: usize },

    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("could not parse {path}: {reason}")]
    Parse { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
