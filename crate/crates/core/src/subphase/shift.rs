use crate::error::{Error, Result};
use crate::system::TimeGrid;

use super::PhaseSeries;

/// Total phase `phi - E t / hbar` of one eigencomponent and its geometric part
/// `phi` once the dynamic phase is removed.
pub fn samuel_bhandari_phase(phi: f64, energy: f64, t: f64, hbar: f64) -> (f64, f64) {
    (phi - energy * t / hbar, phi)
}

fn last_defined_before(series: &PhaseSeries, grid: &TimeGrid, t: f64) -> Option<(f64, f64)> {
    (0..series.len()).rev().filter(|&j| grid.time(j) <= t).find_map(|j| series.phi_at(j).map(|phi| (grid.time(j), phi)))
}

/// Sub-phase-modified level `E_n - hbar phi_n(t') / t'`, where `t'` is the
/// last defined sample at or before `t`.
pub fn effective_shift(series: &PhaseSeries, grid: &TimeGrid, energy: f64, t: f64, hbar: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let (ts, phi) = last_defined_before(series, grid, t).ok_or(Error::UndefinedPhase(t))?;
    if !(ts > 0.0) {
        return Err(Error::NonPositiveTime(ts));
    }
    Ok(energy - hbar * phi / ts)
}

/// `E_n - hbar phi_n(t)/t` at every defined sample with `t > 0`.
pub fn effective_shift_series(series: &PhaseSeries, grid: &TimeGrid, energy: f64, hbar: f64) -> Vec<Option<f64>> {
    (0..series.len())
        .map(|j| {
            let t = grid.time(j);
            series.phi_at(j).filter(|_| t > 0.0).map(|phi| energy - hbar * phi / t)
        })
        .collect()
}

/// Resonance frequency between `n` and `k'` shifted by the sub-phases:
/// `(E_n - E_k' - hbar phi_n / t + hbar phi_k' / t) / hbar`.
pub fn predicted_resonance(
    energy_n: f64,
    energy_kprime: f64,
    phi_n: f64,
    phi_kprime: f64,
    t: f64,
    hbar: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok((energy_n - energy_kprime - hbar * phi_n / t + hbar * phi_kprime / t) / hbar)
}
