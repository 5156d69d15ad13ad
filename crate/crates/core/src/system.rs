//! Unperturbed spectrum and the uniform time grid.

use crate::error::{Error, Result};

/// Eigenvalues of the static Hamiltonian together with the value of hbar.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    energies: Vec<f64>,
    hbar: f64,
}

impl EnergySpectrum {
    pub fn new(energies: Vec<f64>, hbar: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::validation("spectrum must contain at least one energy"));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::validation(format!("energy {e} is not finite")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::validation(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { energies, hbar })
    }

    /// Spectrum in natural units (hbar = 1).
    pub fn natural(energies: Vec<f64>) -> Result<Self> {
        Self::new(energies, 1.0)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Transition frequency `(E_m - E_n) / hbar`.
    pub fn omega(&self, m: usize, n: usize) -> f64 {
        (self.energies[m] - self.energies[n]) / self.hbar
    }
}

/// Uniform grid `t_j = t_start + j h` with `steps + 1` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::validation("grid bounds must be finite"));
        }
        if t_end <= t_start {
            return Err(Error::validation(format!("grid requires t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if steps == 0 {
            return Err(Error::validation("grid requires at least one step"));
        }
        let grid = Self { t_start, t_end, steps };
        if grid.step() <= 0.0 {
            return Err(Error::validation("grid step underflows to zero"));
        }
        Ok(grid)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of sample `j`. The last sample is pinned to `t_end`.
    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.t_end
        } else {
            self.t_start + j as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.time(j))
    }

    /// Same interval with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self { steps: self.steps * factor, ..*self }
    }
}
