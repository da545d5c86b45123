use thiserror::Error;

use crate::config::PrecisionMode;

/// Errors raised by the spectral and dynamical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("matrix is not symplectic: residual {residual:e} exceeds tolerance {tol:e}")]
    NonSymplectic { residual: f64, tol: f64 },

    #[error(
        "lambda^-n exceeds the {mode} precision budget (lambda = {lambda}, n = {n}, largest admissible n = {max_n}); rerun with --precision {required}"
    )]
    ConditioningExceeded {
        lambda: f64,
        n: u32,
        max_n: u32,
        mode: PrecisionMode,
        required: PrecisionMode,
    },

    #[error("characteristic polynomial is not palindromic: |c1 - c3| = {c1_c3:e}, |c0 - c4| = {c0_c4:e}")]
    NotPalindromic { c1_c3: f64, c0_c4: f64 },

    #[error("oracle cross-check `{check}` failed: residual {residual:e} exceeds tolerance {tol:e}")]
    OracleMismatch {
        check: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("homoclinic matrix is not strongly transverse (Delta = {delta:e}, d22 = {d22:e})")]
    NotStronglyTransverse { delta: f64, d22: f64 },

    #[error("torus has no torsion (nu = 0)")]
    NotWithTorsion,

    #[error("spectrum at n = {n} is not real hyperbolic yet")]
    NotYetHyperbolic { n: u32 },

    #[error("special-case factorization disagrees with the trace oracle: residual {residual:e}")]
    FactorizationMismatch { residual: f64 },

    #[error("point has no return time n <= {n_max} into V-")]
    NotInDomain { n_max: u32 },

    #[error("window coordinates lie outside the unit box C")]
    OutsideWindow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for this error on the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OracleMismatch { .. } | Error::NotPalindromic { .. } | Error::FactorizationMismatch { .. } => 2,
            Error::ConditioningExceeded { .. } => 3,
            Error::NotStronglyTransverse { .. } | Error::NotWithTorsion => 5,
            Error::NotYetHyperbolic { .. } => 6,
            Error::Io(_) => 74,
            Error::NonFinite
            | Error::NonSymplectic { .. }
            | Error::NotInDomain { .. }
            | Error::OutsideWindow
            | Error::InvalidParameter(_)
            | Error::Parse(_) => 64,
        }
    }
}
