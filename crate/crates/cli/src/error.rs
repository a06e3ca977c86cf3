//! Error taxonomy and process exit codes.
//!
//! Exit codes are part of the CLI contract:
//! `0` success, `2` contract violation (bad flags or parameters),
//! `3` I/O error (unreadable, missing, or malformed files),
//! `4` numerical failure (rank deficiency, non-SPD covariance).

use std::fmt;
use std::path::PathBuf;

use sketchreg_core::bayes::BayesError;
use sketchreg_core::linalg::LinalgError;
use sketchreg_core::metrics::MetricsError;
use sketchreg_core::sketch::SketchError;

#[derive(Debug)]
pub enum CliError {
    /// Flag combinations or parameter values that violate a documented
    /// precondition.
    Contract(String),
    /// Filesystem failures and malformed input files.
    Io { path: PathBuf, detail: String },
    /// Numerical failures: rank deficiency, indefinite covariances.
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Contract(msg) => write!(f, "contract violation: {msg}"),
            CliError::Io { path, detail } => write!(f, "i/o error on {}: {detail}", path.display()),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// The documented exit code for an error class.
pub fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Contract(_) => 2,
        CliError::Io { .. } => 3,
        CliError::Numerical(_) => 4,
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl fmt::Display) -> CliError {
        CliError::Io { path: path.into(), detail: err.to_string() }
    }

    pub fn contract(msg: impl Into<String>) -> CliError {
        CliError::Contract(msg.into())
    }
}

impl From<SketchError> for CliError {
    fn from(e: SketchError) -> Self {
        CliError::Contract(e.to_string())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular | LinalgError::NonFiniteInput => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Contract(other.to_string()),
        }
    }
}

impl From<BayesError> for CliError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::SingularPosterior | BayesError::SingularPrior => {
                CliError::Numerical(e.to_string())
            }
            BayesError::Linalg(inner) => CliError::from(inner),
            other => CliError::Contract(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::RankDeficient | MetricsError::NotPositiveSemidefinite => {
                CliError::Numerical(e.to_string())
            }
            MetricsError::Linalg(inner) => CliError::from(inner),
            MetricsError::Bayes(inner) => CliError::from(inner),
            MetricsError::Sketch(inner) => CliError::from(inner),
            other => CliError::Contract(other.to_string()),
        }
    }
}
