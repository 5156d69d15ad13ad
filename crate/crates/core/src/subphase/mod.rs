//! Sub-geometric phase of each expansion coefficient,
//! `c_n(t) = exp(a_n(t) + i phi_n(t))`, and the quantities built from it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::propagator::CoefficientTrajectory;
use crate::system::TimeGrid;

mod density;
mod shift;
mod stability;

pub use density::{density_matrix, dephase, expectation, von_neumann_entropy, DensityMatrixSnapshot};
pub use shift::{effective_shift, effective_shift_series, predicted_resonance, samuel_bhandari_phase};
pub use stability::{classify_stability, least_squares_slope, Stability, StabilityVerdict};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    /// Samples with `|c|` below this are masked.
    pub amplitude_floor: f64,
    /// Slope threshold for the stability classifier (1/time).
    pub slope_tolerance: f64,
    /// Trailing fraction of defined samples used in the stability fit.
    pub window_fraction: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { amplitude_floor: 1e-12, slope_tolerance: 1e-3, window_fraction: 0.5 }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude_floor > 0.0) {
            return Err(Error::validation("amplitude_floor must be positive"));
        }
        if !(self.slope_tolerance > 0.0) {
            return Err(Error::validation("slope_tolerance must be positive"));
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::validation("window_fraction must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Log-amplitude and unwrapped phase of one coefficient. Entries where
/// `defined` is false hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub a: Vec<f64>,
    pub phi: Vec<f64>,
    pub defined: Vec<bool>,
}

impl PhaseSeries {
    /// Series with every sample defined.
    pub fn from_parts(a: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if a.len() != phi.len() {
            return Err(Error::validation("a and phi series differ in length"));
        }
        let defined = vec![true; a.len()];
        Ok(Self { a, phi, defined })
    }

    fn masked(len: usize) -> Self {
        Self { a: vec![f64::NAN; len], phi: vec![f64::NAN; len], defined: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn defined_count(&self) -> usize {
        self.defined.iter().filter(|d| **d).count()
    }

    pub fn defined_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.defined.iter().enumerate().filter(|(_, d)| **d).map(|(j, _)| j)
    }

    pub fn a_at(&self, j: usize) -> Option<f64> {
        self.defined[j].then(|| self.a[j])
    }

    pub fn phi_at(&self, j: usize) -> Option<f64> {
        self.defined[j].then(|| self.phi[j])
    }

    /// `exp(a + i phi)` at sample `j`.
    pub fn reconstruct(&self, j: usize) -> Option<Complex64> {
        self.defined[j].then(|| Complex64::from_polar(self.a[j].exp(), self.phi[j]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubPhaseTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<PhaseSeries>,
    pub warnings: Vec<Warning>,
}

impl SubPhaseTrajectory {
    /// Wraps precomputed series, e.g. synthetic test signals.
    pub fn from_series(grid: TimeGrid, states: Vec<PhaseSeries>) -> Result<Self> {
        if states.iter().any(|s| s.len() != grid.len()) {
            return Err(Error::validation("series length does not match the grid"));
        }
        Ok(Self { grid, states, warnings: Vec::new() })
    }

    pub fn state(&self, n: usize) -> &PhaseSeries {
        &self.states[n]
    }
}

/// Principal argument in `(-pi, pi]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let p = z.im.atan2(z.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// Nearest-branch continuation of principal values: each sample is moved by
/// the multiple of `2 pi` that brings it closest to its predecessor. `None`
/// entries are skipped and do not break continuity.
pub fn unwrap_phases(principal: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(principal.len());
    let mut prev: Option<f64> = None;
    for p in principal {
        let value = p.map(|p| match prev {
            None => p,
            Some(q) => p + 2.0 * PI * ((q - p) / (2.0 * PI)).round(),
        });
        if value.is_some() {
            prev = value;
        }
        out.push(value);
    }
    out
}

/// Splits every coefficient into log-amplitude and continuous phase.
pub fn extract(traj: &CoefficientTrajectory, cfg: &ExtractionConfig) -> Result<SubPhaseTrajectory> {
    cfg.validate()?;
    let len = traj.values.len();
    let mut states = Vec::with_capacity(traj.dim());
    let mut warnings = Vec::new();
    for n in 0..traj.dim() {
        let samples: Vec<Complex64> = traj.component(n).collect();
        let principal: Vec<Option<f64>> =
            samples.iter().map(|z| (z.norm() >= cfg.amplitude_floor).then(|| principal_arg(*z))).collect();
        if principal.iter().flatten().count() < 2 {
            warnings.push(Warning::SparseEigenstate { index: n });
            states.push(PhaseSeries::masked(len));
            continue;
        }
        let phi = unwrap_phases(&principal);
        let mut series = PhaseSeries::masked(len);
        for (j, (z, p)) in samples.iter().zip(phi).enumerate() {
            if let Some(p) = p {
                series.a[j] = z.norm().ln();
                series.phi[j] = p;
                series.defined[j] = true;
            }
        }
        states.push(series);
    }
    Ok(SubPhaseTrajectory { grid: traj.grid, states, warnings })
}
