use thiserror::Error;

/// Errors produced while building systems, classifying spectra and evaluating bounds.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("system is not Hurwitz stable: eigenvalue {re} {sign} {im_abs}j has nonnegative real part", sign = if *im >= 0.0 { "+" } else { "-" }, im_abs = im.abs())]
    NotHurwitz { re: f64, im: f64 },

    #[error("eigenvalue {re} {sign} {im_abs}j has algebraic multiplicity {multiplicity}; at most 2 (real) or 1 (complex) is supported", sign = if *im >= 0.0 { "+" } else { "-" }, im_abs = im.abs())]
    UnsupportedMultiplicity { re: f64, im: f64, multiplicity: usize },

    #[error("eigenvalue computation did not converge")]
    EigenFailure,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e} exceeds {requested:e}")]
    QuadratureNotConverged { a: f64, b: f64, error: f64, requested: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
