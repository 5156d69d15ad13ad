//! Drive-frequency scans of the transition probability `|c_n(T)|^2`.

use rayon::prelude::*;

use crate::drive::DriveSpec;
use crate::error::{Error, Result, Warning};
use crate::propagator::{propagate, IntegratorConfig};
use crate::subphase::{extract, predicted_resonance, ExtractionConfig};
use crate::system::{EnergySpectrum, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRequest {
    pub spectrum: EnergySpectrum,
    /// Drive whose nonzero carriers are swept (see [`DriveSpec::with_carrier`]).
    pub drive: DriveSpec,
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Integration grid; its end is the horizon `T`.
    pub grid: TimeGrid,
    pub initial_index: usize,
    pub target_index: usize,
}

impl ScanRequest {
    pub fn validate(&self) -> Result<()> {
        self.drive.check_dim(&self.spectrum)?;
        if !(self.omega_min < self.omega_max) || !self.omega_min.is_finite() || !self.omega_max.is_finite() {
            return Err(Error::validation(format!(
                "scan requires omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.points < 3 {
            return Err(Error::validation(format!("scan requires at least 3 points, got {}", self.points)));
        }
        let n = self.spectrum.dim();
        if self.initial_index >= n || self.target_index >= n {
            return Err(Error::validation("scan level index out of range"));
        }
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        let span = self.omega_max - self.omega_min;
        let last = self.points - 1;
        (0..self.points)
            .map(|i| if i == last { self.omega_max } else { self.omega_min + span * i as f64 / last as f64 })
            .collect()
    }

    pub fn horizon(&self) -> f64 {
        self.grid.t_end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub omegas: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub peak_omega: f64,
    pub peak_p: f64,
    /// Sub-phase-shifted resonance from the phases of the peak run at `T`.
    pub predicted_omega: Option<f64>,
    /// `(E_n - E_k) / hbar`.
    pub unshifted_omega: f64,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    /// The maximum sat on the first or last sample; no interpolation done.
    pub boundary: bool,
}

/// Maximum sample refined by the parabola through it and its neighbours.
pub fn find_peak(x: &[f64], y: &[f64]) -> Result<Peak> {
    if x.len() < 3 || y.len() != x.len() {
        return Err(Error::validation("peak search needs at least 3 paired samples"));
    }
    if y.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::validation("peak search needs finite samples"));
    }
    let imax = (1..y.len()).fold(0, |best, i| if y[i] > y[best] { i } else { best });
    if imax == 0 || imax == y.len() - 1 {
        return Ok(Peak { x: x[imax], y: y[imax], boundary: true });
    }
    let (x0, x1, x2) = (x[imax - 1], x[imax], x[imax + 1]);
    let (y0, y1, y2) = (y[imax - 1], y[imax], y[imax + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return Ok(Peak { x: x1, y: y1, boundary: false });
    }
    let xv = x1 - 0.5 * num / den;
    // Lagrange form of the same parabola.
    let yv = y0 * (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
    Ok(Peak { x: xv, y: yv, boundary: false })
}

fn transition_probability(req: &ScanRequest, omega: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let drive = req.drive.with_carrier(omega);
    let traj = propagate(&req.spectrum, &drive, req.initial_index, &req.grid, cfg)
        .map_err(|e| Error::ScanPoint { omega, source: Box::new(e) })?;
    Ok(traj.values.last().expect("grid has samples")[req.target_index].norm_sqr())
}

/// Runs the scan. `threads` caps the worker count; `None` uses the global
/// pool. Output is independent of the thread count and evaluation order.
pub fn resonance_scan(
    req: &ScanRequest,
    integrator: &IntegratorConfig,
    extraction: &ExtractionConfig,
    threads: Option<usize>,
) -> Result<ScanResult> {
    req.validate()?;
    extraction.validate()?;
    let omegas = req.omegas();
    let advance = omegas
        .iter()
        .map(|&w| req.drive.with_carrier(w).phase_advance_per_step(&req.spectrum, &req.grid))
        .fold(0.0, f64::max);
    if advance >= std::f64::consts::PI {
        return Err(Error::GridTooCoarse { advance });
    }

    let evaluate =
        || -> Vec<Result<f64>> { omegas.par_iter().map(|&w| transition_probability(req, w, integrator)).collect() };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?
            .install(evaluate),
        None => evaluate(),
    };
    let probabilities = results.into_iter().collect::<Result<Vec<f64>>>()?;

    let mut warnings = Vec::new();
    let peak = find_peak(&omegas, &probabilities)?;
    if peak.boundary {
        warnings.push(Warning::BoundaryPeak { omega: peak.x });
    }

    // Phases come from the run at the best sampled frequency.
    let imax = (1..probabilities.len()).fold(0, |b, i| if probabilities[i] > probabilities[b] { i } else { b });
    let peak_drive = req.drive.with_carrier(omegas[imax]);
    let traj = propagate(&req.spectrum, &peak_drive, req.initial_index, &req.grid, integrator)
        .map_err(|e| Error::ScanPoint { omega: omegas[imax], source: Box::new(e) })?;
    let phases = extract(&traj, extraction)?;
    let last = req.grid.len() - 1;
    let (n, k) = (req.target_index, req.initial_index);
    let hbar = req.spectrum.hbar();
    let predicted_omega = match (phases.state(n).phi_at(last), phases.state(k).phi_at(last)) {
        (Some(phi_n), Some(phi_k)) => Some(predicted_resonance(
            req.spectrum.energy(n),
            req.spectrum.energy(k),
            phi_n,
            phi_k,
            req.horizon(),
            hbar,
        )?),
        _ => {
            warnings.push(Warning::PredictionUnavailable);
            None
        }
    };

    Ok(ScanResult {
        omegas,
        probabilities,
        peak_omega: peak.x,
        peak_p: peak.y,
        predicted_omega,
        unshifted_omega: req.spectrum.omega(n, k),
        warnings,
    })
}
