//! Driven finite-level quantum systems and their sub-geometric phases.
//!
//! Each interaction-picture coefficient is written `c_n(t) = exp(a_n + i phi_n)`.
//! The crate integrates the coefficients ([`propagator`]), splits them into
//! log-amplitude and continuous phase ([`subphase`]), and uses the parts for
//! resonance-shift prediction, stability classification and resonance scans
//! ([`scan`]). Closed-form and quadrature references for the perturbative and
//! two-level examples live in [`models`].

pub mod drive;
pub mod error;
pub mod models;
pub mod propagator;
pub mod scan;
pub mod subphase;
pub mod system;

pub use drive::{evaluate_drive, is_hermitian, CMatrix, DriveSpec, DriveTerm, Envelope};
pub use error::{Error, Result, Warning};
pub use propagator::{
    convergence_report, propagate, propagate_with_initial, CVector, CoefficientTrajectory, ConvergenceReport,
    IntegratorConfig,
};
pub use scan::{find_peak, resonance_scan, Peak, ScanRequest, ScanResult};
pub use subphase::{extract, ExtractionConfig, PhaseSeries, Stability, StabilityVerdict, SubPhaseTrajectory};
pub use system::{EnergySpectrum, TimeGrid};

pub use num_complex::Complex64;
