use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const INVARIANT: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invariant violated: {name} residual {value:.3e} exceeds {threshold:.1e}")]
    Invariant {
        name: &'static str,
        value: f64,
        threshold: f64,
    },

    #[error("comparison failed: {0}")]
    Comparison(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Invariant { .. } | CliError::Comparison(_) => exit::INVARIANT,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Classifies a library error, prefixing `context`.
    pub fn from_core(context: &str, err: corrthermo::Error) -> Self {
        use corrthermo::Error as E;
        let msg = format!("{context}: {err}");
        match err {
            E::InvalidParameter { .. }
            | E::DimensionMismatch(_)
            | E::DimensionOverflow { .. }
            | E::NotHermitian { .. }
            | E::InvalidDensity(_)
            | E::MissingHook
            | E::ReducedTrajectory
            | E::ReferenceNotStationary { .. } => CliError::Validation(msg),
            E::NegativeEigenvalue { .. }
            | E::Undefined(_)
            | E::QuadratureNonConvergence { .. }
            | E::StepTooCoarse { .. }
            | E::CutoffLeakage { .. } => CliError::Numerical(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
