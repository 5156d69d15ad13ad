//! Parametric time-dependent perturbation `H'(t)`.
//!
//! A drive is a sum of terms `M * env(t) * exp(i (nu t + delta0))`, with the
//! envelope one of constant, real exponential `exp(lambda t)`, or the slow
//! gauge phase `exp(i Omega t)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::system::{EnergySpectrum, TimeGrid};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Constant,
    /// `exp(rate * t)`.
    Exponential {
        rate: f64,
    },
    /// `exp(i * rate * t)`; unit modulus.
    SlowGauge {
        rate: f64,
    },
}

impl Envelope {
    /// Modulus and phase of the envelope at `t`.
    fn polar(&self, t: f64) -> (f64, f64) {
        match *self {
            Envelope::Constant => (1.0, 0.0),
            Envelope::Exponential { rate } => ((rate * t).exp(), 0.0),
            Envelope::SlowGauge { rate } => (1.0, rate * t),
        }
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let (r, theta) = self.polar(t);
        Complex64::from_polar(r, theta)
    }

    /// Rate of the envelope phase.
    pub fn phase_rate(&self) -> f64 {
        match *self {
            Envelope::SlowGauge { rate } => rate,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveTerm {
    pub matrix: CMatrix,
    pub envelope: Envelope,
    /// Carrier angular frequency `nu`.
    pub carrier: f64,
    pub delta_phase: f64,
}

impl DriveTerm {
    pub fn new(matrix: CMatrix, envelope: Envelope, carrier: f64) -> Self {
        Self { matrix, envelope, carrier, delta_phase: 0.0 }
    }

    pub fn with_phase(mut self, delta_phase: f64) -> Self {
        self.delta_phase = delta_phase;
        self
    }

    /// Scalar multiplying `M` at time `t`.
    pub fn factor(&self, t: f64) -> Complex64 {
        let (r, theta) = self.envelope.polar(t);
        Complex64::from_polar(r, self.carrier * t + self.delta_phase + theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    dim: usize,
    terms: Vec<DriveTerm>,
}

impl DriveSpec {
    pub fn new(dim: usize, terms: Vec<DriveTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("drive dimension must be positive"));
        }
        for (i, term) in terms.iter().enumerate() {
            if term.matrix.nrows() != dim || term.matrix.ncols() != dim {
                return Err(Error::validation(format!(
                    "drive term {i} is {}x{}, expected {dim}x{dim}",
                    term.matrix.nrows(),
                    term.matrix.ncols()
                )));
            }
            if term.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::validation(format!("drive term {i} has non-finite entries")));
            }
            let params = [term.carrier, term.delta_phase, term.envelope.phase_rate()];
            let rate = match term.envelope {
                Envelope::Exponential { rate } => rate,
                _ => 0.0,
            };
            if params.iter().any(|p| !p.is_finite()) || !rate.is_finite() {
                return Err(Error::validation(format!("drive term {i} has non-finite parameters")));
            }
        }
        Ok(Self { dim, terms })
    }

    /// No drive: free evolution.
    pub fn empty(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks the drive against a spectrum.
    pub fn check_dim(&self, spectrum: &EnergySpectrum) -> Result<()> {
        if spectrum.dim() != self.dim {
            return Err(Error::validation(format!(
                "drive is {0}x{0} but the spectrum has {1} levels",
                self.dim,
                spectrum.dim()
            )));
        }
        Ok(())
    }

    /// Copy with every swept carrier set to `omega`: positive carriers become
    /// `+omega`, negative ones `-omega`, zero carriers are left alone.
    pub fn with_carrier(&self, omega: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|term| {
                let mut term = term.clone();
                if term.carrier != 0.0 {
                    term.carrier = term.carrier.signum() * omega;
                }
                term
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    /// Copy with every matrix multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        let terms =
            self.terms.iter().map(|term| DriveTerm { matrix: term.matrix.scale(scale), ..term.clone() }).collect();
        Self { dim: self.dim, terms }
    }

    /// Upper bound on the per-unit-time phase advance of the interaction
    /// picture right-hand side on `grid`: the fastest carrier-plus-transition
    /// oscillation over nonzero entries, plus the coupling strength.
    pub fn phase_rate(&self, spectrum: &EnergySpectrum, grid: &TimeGrid) -> f64 {
        let mut oscillation: f64 = 0.0;
        let mut coupling = 0.0;
        for term in &self.terms {
            let env_max = term.envelope.polar(grid.t_start()).0.max(term.envelope.polar(grid.t_end()).0);
            let mut entry_max: f64 = 0.0;
            for m in 0..self.dim {
                for n in 0..self.dim {
                    let z = term.matrix[(m, n)].norm();
                    if z == 0.0 {
                        continue;
                    }
                    entry_max = entry_max.max(z);
                    let rate = term.carrier + term.envelope.phase_rate() + spectrum.omega(m, n);
                    oscillation = oscillation.max(rate.abs());
                }
            }
            coupling += entry_max * env_max / spectrum.hbar();
        }
        oscillation + coupling
    }

    /// Phase advance per grid step; unwrapping needs this below pi.
    pub fn phase_advance_per_step(&self, spectrum: &EnergySpectrum, grid: &TimeGrid) -> f64 {
        self.phase_rate(spectrum, grid) * grid.step()
    }
}

/// `H'(t)` as a dense matrix.
pub fn evaluate_drive(spec: &DriveSpec, t: f64) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(spec.dim, spec.dim);
    evaluate_drive_into(spec, t, &mut out)?;
    Ok(out)
}

pub(crate) fn evaluate_drive_into(spec: &DriveSpec, t: f64, out: &mut CMatrix) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::validation(format!("drive evaluated at non-finite t = {t}")));
    }
    out.fill(Complex64::new(0.0, 0.0));
    for (i, term) in spec.terms.iter().enumerate() {
        let f = term.factor(t);
        if !f.re.is_finite() || !f.im.is_finite() {
            return Err(Error::EnvelopeOverflow { term: i, time: t });
        }
        for (o, m) in out.iter_mut().zip(term.matrix.iter()) {
            let v = *m * f;
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::EnvelopeOverflow { term: i, time: t });
            }
            *o += v;
        }
    }
    Ok(())
}

/// Max-norm deviation from Hermiticity of a square matrix.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// True when `H'(t)` is Hermitian within `tol` at every sample of `grid`.
pub fn is_hermitian(spec: &DriveSpec, grid: &TimeGrid, tol: f64) -> bool {
    let mut m = CMatrix::zeros(spec.dim, spec.dim);
    grid.times().all(|t| match evaluate_drive_into(spec, t, &mut m) {
        Ok(()) => hermitian_defect(&m) <= tol,
        Err(_) => false,
    })
}
