use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A kernel was evaluated at a coincident or boundary-singular point.
    SingularEvaluation(&'static str),
    UnsupportedDimension(usize),
    /// An argument violated a documented precondition.
    InvalidInput(String),
    NonFinite(&'static str),
    /// Adaptive quadrature hit its subdivision budget.
    QuadratureFailed {
        estimate: f64,
        error: f64,
    },
    /// Fixed-point iteration stopped without meeting its tolerance.
    NoConvergence {
        increments: Vec<f64>,
    },
    /// A doubling search ran past its cap; carries the probed values.
    SearchExhausted {
        trace: Vec<(f64, f64)>,
    },
    /// An empirical certificate came out nonpositive at `(r, t)`.
    CertificateFailed {
        r: f64,
        t: f64,
        value: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularEvaluation(what) => write!(f, "singular kernel evaluation: {what}"),
            Error::UnsupportedDimension(n) => write!(f, "unsupported dimension N = {n}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::QuadratureFailed { estimate, error } => {
                write!(
                    f,
                    "adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})"
                )
            }
            Error::NoConvergence { increments } => write!(
                f,
                "fixed-point iteration did not converge after {} iterations (last increment {:e})",
                increments.len(),
                increments.last().copied().unwrap_or(f64::NAN)
            ),
            Error::SearchExhausted { trace } => {
                write!(f, "doubling search exhausted after {} probes", trace.len())
            }
            Error::CertificateFailed { r, t, value } => {
                write!(f, "nonpositive certificate {value:e} at r = {r}, t = {t}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
