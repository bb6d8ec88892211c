//! Command-line front end: parameter sweeps to CSV, fold location and the mean-field demo.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod sweep;

use caustica_core::CausticaError;

/// A failed command and the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// Exit 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Exit 3.
    #[error("solver failed: {0}")]
    Solver(CausticaError),
    /// Exit 4.
    #[error("oracle failed: {0}")]
    Oracle(CausticaError),
    /// Exit 1.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Oracle(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    /// Library errors outside the oracle: bad names and parameters are configuration
    /// problems, everything else is a solver failure.
    pub fn from_core(e: CausticaError) -> Self {
        match e {
            CausticaError::UnknownIntegrand(_)
            | CausticaError::BadParameter(_)
            | CausticaError::InvalidContour(_)
            | CausticaError::DegenerateCubic { .. } => Failure::Config(e.to_string()),
            _ => Failure::Solver(e),
        }
    }
}

/// `{:.16e}`: 17 significant digits, locale-free.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
