use std::fmt;

use thiserror::Error;

use crate::propagator::CoefficientTrajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an input outside its domain.
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("drive term {term} overflowed at t = {time}")]
    EnvelopeOverflow { term: usize, time: f64 },

    #[error("coefficients diverged at t = {time}")]
    Divergence { time: f64 },

    /// Norm drift beyond tolerance for a Hermitian drive. The finished
    /// integration is still attached so callers can inspect or emit it.
    #[error("norm drift {max_drift:e} exceeds tolerance {tolerance:e} for a Hermitian drive")]
    NormViolation { max_drift: f64, tolerance: f64, trajectory: Box<CoefficientTrajectory> },

    #[error("density matrix has eigenvalue {eigenvalue:e} below -1e-8")]
    InvalidDensity { eigenvalue: f64 },

    #[error("t = {0} is outside the domain t > 0")]
    NonPositiveTime(f64),

    #[error("no defined phase sample at or before t = {0}")]
    UndefinedPhase(f64),

    #[error("Markov closed form has a pole at omega = omega_nk = {0}")]
    Pole(f64),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("grid too coarse: per-step phase advance {advance:.3} rad exceeds pi")]
    GridTooCoarse { advance: f64 },

    #[error("scan aborted at omega = {omega}: {source}")]
    ScanPoint {
        omega: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::EnvelopeOverflow { .. }
            | Error::Divergence { .. }
            | Error::NormViolation { .. }
            | Error::InvalidDensity { .. } => true,
            Error::ScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

/// Non-fatal conditions attached to results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// An eigenstate had fewer than two defined samples and was fully masked.
    SparseEigenstate {
        index: usize,
    },
    BoundaryPeak {
        omega: f64,
    },
    PredictionUnavailable,
    /// Perturbation scenario outside the Omega << omega regime.
    SlowGaugeRatio {
        ratio: f64,
    },
    NormDrift {
        max_drift: f64,
    },
    UnwrapDisagreement {
        index: usize,
        max_diff: f64,
    },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SparseEigenstate { index } => {
                write!(f, "eigenstate {index} has fewer than 2 defined samples; series masked")
            }
            Warning::BoundaryPeak { omega } => {
                write!(f, "peak at scan boundary omega = {omega}; interpolation skipped")
            }
            Warning::PredictionUnavailable => {
                write!(f, "phases undefined at the horizon; no predicted resonance")
            }
            Warning::SlowGaugeRatio { ratio } => {
                write!(f, "Omega/omega = {ratio} exceeds 0.1; Markov form is outside its regime")
            }
            Warning::NormDrift { max_drift } => {
                write!(f, "norm drift {max_drift:e} exceeds tolerance")
            }
            Warning::UnwrapDisagreement { index, max_diff } => write!(
                f,
                "grid too coarse: phase of eigenstate {index} differs by {max_diff:.3} rad at double resolution"
            ),
        }
    }
}
