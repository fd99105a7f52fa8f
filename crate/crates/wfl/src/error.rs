//! Error type shared across the crate.

use std::fmt;

/// Errors raised by frame construction, weaving, and verification.
#[derive(Debug)]
pub enum Error {
    /// Vector length does not match the expected dimension/count.
    DimMismatch { expected: usize, got: usize },
    /// Two families (or a matrix product) have incompatible shapes.
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    /// A value contains NaN or infinite entries.
    NonFinite,
    /// Operator is not self-adjoint within tolerance.
    NotHermitian { deviation: f64 },
    /// Operator has an eigenvalue at or below the positive-definiteness floor.
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// Family does not span C^d (smallest frame-operator eigenvalue too small).
    NotAFrame { min_eigenvalue: f64 },
    /// The weaving at one specific partition fails to be a frame.
    NotWovenAtPartition { sigma: String, min_eigenvalue: f64 },
    /// Exhaustive sweep found a partition whose weaving is not a frame.
    NotWoven { witness: String },
    /// Family too large for exhaustive partition enumeration.
    TooLarge { n: usize, max_n: usize },
    /// The dual of a weaving with n = d is unique; no perturbation exists.
    NoFreedom,
    /// Candidate family is not a dual of the weaving.
    InvalidDual { residual: f64 },
    /// Weaving operator is not the identity within tolerance.
    NotParsevalWeaving { deviation: f64 },
    /// Weaving operator is not a scalar multiple of the identity within tolerance.
    NotTightWeaving { deviation: f64 },
    /// Operation needs a weight sequence but the context has none (or vice versa).
    WeightsMismatch { expected: bool },
    /// Generator parameters are inconsistent (e.g. fewer vectors than dimensions).
    BadShape { dim: usize, count: usize },
    /// Seeded generation could not produce a certified woven pair.
    GenerationFailed { attempts: usize },
    /// Invalid run configuration.
    Config(String),
    /// File I/O failure.
    Io(std::io::Error),
    /// JSON (de)serialization failure.
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::ShapeMismatch { left, right } => write!(
                f,
                "shape mismatch: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::NonFinite => write!(f, "non-finite entries (NaN or infinity)"),
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (relative deviation {deviation:.3e})")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})"
            ),
            Error::NotAFrame { min_eigenvalue } => write!(
                f,
                "family is not a frame (smallest eigenvalue {min_eigenvalue:.3e})"
            ),
            Error::NotWovenAtPartition { sigma, min_eigenvalue } => write!(
                f,
                "weaving at partition {sigma} is not a frame (smallest eigenvalue {min_eigenvalue:.3e})"
            ),
            Error::NotWoven { witness } => {
                write!(f, "families are not woven; witness partition {witness}")
            }
            Error::TooLarge { n, max_n } => write!(
                f,
                "family size {n} exceeds the exhaustive enumeration limit {max_n}"
            ),
            Error::NoFreedom => write!(f, "dual is unique when n = d; no alternate duals exist"),
            Error::InvalidDual { residual } => {
                write!(f, "family is not a dual of the weaving (residual {residual:.3e})")
            }
            Error::NotParsevalWeaving { deviation } => write!(
                f,
                "weaving operator is not the identity (deviation {deviation:.3e})"
            ),
            Error::NotTightWeaving { deviation } => write!(
                f,
                "weaving operator is not tight (deviation {deviation:.3e})"
            ),
            Error::WeightsMismatch { expected } => {
                if *expected {
                    write!(f, "operation requires a weighted dual context")
                } else {
                    write!(f, "operation requires an unweighted dual context")
                }
            }
            Error::BadShape { dim, count } => {
                write!(f, "bad generator shape: dim {dim}, count {count}")
            }
            Error::GenerationFailed { attempts } => {
                write!(f, "could not generate a certified woven pair after {attempts} attempts")
            }
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Io(e) => write!(f, "I/O error: {e}"),
            Error::Json(e) => write!(f, "JSON error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}
