use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("total dimension {requested} exceeds the configured maximum {max}")]
    DimensionOverflow { requested: usize, max: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("negative eigenvalue {value:.3e} below positivity floor")]
    NegativeEigenvalue { value: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("Lindblad step too coarse at tau = {tau}: smallest eigenvalue {min_eigenvalue:.3e}; try dt <= {suggested_dt:.3e}")]
    StepTooCoarse {
        tau: f64,
        min_eigenvalue: f64,
        suggested_dt: f64,
    },

    #[error("generator does not fix the reference state (residual {residual:.3e})")]
    ReferenceNotStationary { residual: f64 },

    #[error("time-dependence hook is required for this operation")]
    MissingHook,

    #[error("joint states are required but the trajectory only carries reduced states")]
    ReducedTrajectory,

    #[error("Fock cutoff too small: displaced-state leakage {leakage:.3e} exceeds {threshold:.1e}")]
    CutoffLeakage { leakage: f64, threshold: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
