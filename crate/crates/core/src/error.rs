use alloc::string::String;

use crate::ComplexScalar;

/// Failure modes shared by every solver and approximation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CausticaError {
    #[error("finite-difference scheme could not reach tolerance (error estimate {estimate:e})")]
    StepUnderflow { estimate: f64 },
    #[error("unknown integrand `{0}`")]
    UnknownIntegrand(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("argument {0} outside the supported range")]
    OutOfRange(f64),
    #[error("negative fold parameter {0}: the complex-saddle side of the caustic is not supported")]
    NegativeArgument(f64),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("third derivative {f3} vanishes at z = {z}, alpha = {alpha}: higher-order catastrophe")]
    DegenerateCubic {
        z: ComplexScalar,
        alpha: f64,
        f3: ComplexScalar,
    },
    #[error("partner saddle not found ({0})")]
    PartnerNotFound(String),
    #[error("symmetric eigendecomposition failed")]
    EigenFailure,
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("saddle curvature {curvature:e} vanishes: the Gaussian prefactor diverges")]
    CausticDivergence { curvature: f64 },
    #[error("no saddle labeling makes the fold parameter real")]
    BranchAmbiguous,
    #[error("quadrature tolerance not met (error estimate {estimate:e}, target {target:e})")]
    ToleranceNotMet { estimate: f64, target: f64 },
    #[error("integrand does not decay along a contour ray")]
    RayDivergence,
    #[error("dimension {0} is too large for the cubature oracle")]
    DimensionTooLarge(usize),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
}

impl CausticaError {
    /// Short machine-readable tag, used in CSV warning columns.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::StepUnderflow { .. } => "StepUnderflow",
            Self::UnknownIntegrand(_) => "UnknownIntegrand",
            Self::BadParameter(_) => "BadParameter",
            Self::OutOfRange(_) => "OutOfRange",
            Self::NegativeArgument(_) => "NegativeArgument",
            Self::NoConvergence { .. } => "NoConvergence",
            Self::DegenerateCubic { .. } => "DegenerateCubic",
            Self::PartnerNotFound(_) => "PartnerNotFound",
            Self::EigenFailure => "EigenFailure",
            Self::WrongRegime(_) => "WrongRegime",
            Self::CausticDivergence { .. } => "CausticDivergence",
            Self::BranchAmbiguous => "BranchAmbiguous",
            Self::ToleranceNotMet { .. } => "ToleranceNotMet",
            Self::RayDivergence => "RayDivergence",
            Self::DimensionTooLarge(_) => "DimensionTooLarge",
            Self::InvalidContour(_) => "InvalidContour",
        }
    }
}

pub type Result<T> = core::result::Result<T, CausticaError>;
