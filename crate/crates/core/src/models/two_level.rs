//! Two-level system `H0 = diag(-Delta, Delta)` driven by
//! `H' = [[0, w], [w*, 0]] exp(-i omega t)` with `w = B0 exp(lambda t) exp(i delta0)`,
//! starting from the upper level at `t = -inf`.
//!
//! Under the Markov approximation the coefficient of the upper level is
//! `c_21 = exp(a_21 + i phi_21)` with
//!
//! ```text
//! a_21(t)   = -1/hbar^2 int^t |w| [cos d  int^t' |w| cos(d - 2 w21 t'') + sin d int^t' |w| sin(d - 2 w21 t'')]
//! phi_21(t) = -1/hbar^2 int^t |w| [cos d  int^t' |w| sin(d - 2 w21 t'') - sin d int^t' |w| cos(d - 2 w21 t'')]
//! ```
//!
//! both from `-inf`. For `delta0 = 0` both double integrals have elementary
//! antiderivatives, implemented in the `*_closed_form` functions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::quadrature::{nested_simpson, QuadratureConfig};
use crate::drive::{DriveSpec, DriveTerm, Envelope};
use crate::error::{Error, Result};
use crate::system::EnergySpectrum;

/// Largest admissible `exp(lambda (t_floor - t))` for the truncated lower limit.
pub const TRUNCATION_RATIO: f64 = 1e-6;

/// Ratio used by [`TwoLevelScenario::default_floor`].
pub const DEFAULT_FLOOR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelScenario {
    /// Half splitting; levels are `-Delta` and `+Delta`.
    pub delta: f64,
    pub b0: f64,
    pub lambda: f64,
    pub delta0: f64,
    /// Carrier of `H'`.
    pub omega: f64,
    pub hbar: f64,
}

impl TwoLevelScenario {
    pub fn new(delta: f64, b0: f64, lambda: f64, delta0: f64, omega: f64, hbar: f64) -> Result<Self> {
        let s = Self { delta, b0, lambda, delta0, omega, hbar };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.delta, self.b0, self.lambda, self.delta0, self.omega, self.hbar];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("two-level parameters must be finite"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::validation("Delta must be positive"));
        }
        if self.b0 < 0.0 {
            return Err(Error::validation("B0 must be non-negative"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::validation("lambda must be positive"));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::validation("hbar must be positive"));
        }
        Ok(())
    }

    /// `(E_2 - E_1) / hbar = 2 Delta / hbar`.
    pub fn omega21(&self) -> f64 {
        2.0 * self.delta / self.hbar
    }

    pub fn spectrum(&self) -> EnergySpectrum {
        EnergySpectrum::new(vec![-self.delta, self.delta], self.hbar).expect("validated scenario")
    }

    /// Lower limit standing in for `-inf` such that
    /// `exp(lambda (t_floor - t)) = ratio`.
    pub fn floor_for(&self, t: f64, ratio: f64) -> f64 {
        t + ratio.ln() / self.lambda
    }

    pub fn default_floor(&self, t: f64) -> f64 {
        self.floor_for(t, DEFAULT_FLOOR_RATIO)
    }

    pub fn check_floor(&self, t: f64, t_floor: f64) -> Result<()> {
        if !(t_floor < t) {
            return Err(Error::Configuration(format!("t_floor {t_floor} must be below t {t}")));
        }
        if self.lambda * (t_floor - t) > TRUNCATION_RATIO.ln() {
            return Err(Error::Configuration(format!(
                "t_floor {t_floor} too close to t {t}: exp(lambda (t_floor - t)) exceeds {TRUNCATION_RATIO:e}"
            )));
        }
        Ok(())
    }

    fn magnitude(&self, t: f64) -> f64 {
        self.b0 * (self.lambda * t).exp()
    }

    fn initial_panels(&self, t: f64, t_floor: f64) -> usize {
        let rate = 2.0 * self.omega21().abs() + self.lambda;
        (((t - t_floor) * rate).ceil() as usize).max(64)
    }
}

/// `H'(t)` of the scenario as a drive: upper entry `w exp(-i omega t)`, lower
/// entry `w* exp(-i omega t)`.
pub fn two_level_drive_spec(s: &TwoLevelScenario) -> DriveSpec {
    if s.b0 == 0.0 {
        return DriveSpec::empty(2);
    }
    let zero = Complex64::new(0.0, 0.0);
    let b0 = Complex64::new(s.b0, 0.0);
    let upper = DMatrix::from_row_slice(2, 2, &[zero, b0, zero, zero]);
    let lower = DMatrix::from_row_slice(2, 2, &[zero, zero, b0, zero]);
    let envelope = Envelope::Exponential { rate: s.lambda };
    DriveSpec::new(
        2,
        vec![
            DriveTerm::new(upper, envelope, -s.omega).with_phase(s.delta0),
            DriveTerm::new(lower, envelope, -s.omega).with_phase(-s.delta0),
        ],
    )
    .expect("two-level drive is well formed")
}

/// Inner integrands `[|w| cos(d - 2 w21 s), |w| sin(d - 2 w21 s)]`.
fn inner_integrands(s: &TwoLevelScenario) -> impl Fn(f64) -> [f64; 2] + '_ {
    let w21 = s.omega21();
    move |x| {
        let m = s.magnitude(x);
        let theta = s.delta0 - 2.0 * w21 * x;
        [m * theta.cos(), m * theta.sin()]
    }
}

pub fn a21_quadrature(s: &TwoLevelScenario, t: f64, t_floor: f64) -> Result<f64> {
    a21_quadrature_with(s, t, t_floor, &QuadratureConfig::default())
}

pub fn a21_quadrature_with(s: &TwoLevelScenario, t: f64, t_floor: f64, cfg: &QuadratureConfig) -> Result<f64> {
    s.check_floor(t, t_floor)?;
    if s.b0 == 0.0 {
        return Ok(0.0);
    }
    let (cd, sd) = (s.delta0.cos(), s.delta0.sin());
    let integral =
        nested_simpson(t_floor, t, s.initial_panels(t, t_floor), cfg, inner_integrands(s), |x, [ic, is]| {
            s.magnitude(x) * (cd * ic + sd * is)
        })?;
    Ok(-integral / (s.hbar * s.hbar))
}

pub fn phi21_quadrature(s: &TwoLevelScenario, t: f64, t_floor: f64) -> Result<f64> {
    phi21_quadrature_with(s, t, t_floor, &QuadratureConfig::default())
}

pub fn phi21_quadrature_with(s: &TwoLevelScenario, t: f64, t_floor: f64, cfg: &QuadratureConfig) -> Result<f64> {
    s.check_floor(t, t_floor)?;
    if s.b0 == 0.0 {
        return Ok(0.0);
    }
    let (cd, sd) = (s.delta0.cos(), s.delta0.sin());
    let integral =
        nested_simpson(t_floor, t, s.initial_panels(t, t_floor), cfg, inner_integrands(s), |x, [ic, is]| {
            s.magnitude(x) * (cd * is - sd * ic)
        })?;
    Ok(-integral / (s.hbar * s.hbar))
}

fn require_zero_phase(s: &TwoLevelScenario) -> Result<()> {
    if s.delta0 != 0.0 {
        return Err(Error::UnsupportedParameter(format!(
            "closed form requires delta0 = 0 (got {}); use the quadrature",
            s.delta0
        )));
    }
    Ok(())
}

/// Closed-form `a_21(t)` for `w = B0 exp(lambda t)`, `delta0 = 0`.
pub fn a21_closed_form(s: &TwoLevelScenario, t: f64) -> Result<f64> {
    require_zero_phase(s)?;
    let (l, w) = (s.lambda, s.omega21());
    let growth = (2.0 * l * t).exp();
    let (sin, cos) = (2.0 * w * t).sin_cos();
    let inner = 4.0 * l * l + 4.0 * w * w;
    let bracket = l * growth / inner * (2.0 * l * cos + 2.0 * w * sin)
        + 2.0 * w * growth / inner * (2.0 * l * sin - 2.0 * w * cos);
    Ok(-s.b0 * s.b0 / (s.hbar * s.hbar * (l * l + 4.0 * w * w)) * bracket)
}

/// Closed-form `phi_21(t)` for `w = B0 exp(lambda t)`, `delta0 = 0`.
pub fn phi21_closed_form(s: &TwoLevelScenario, t: f64) -> Result<f64> {
    require_zero_phase(s)?;
    let (l, w) = (s.lambda, s.omega21());
    let growth = (2.0 * l * t).exp();
    let (sin, cos) = (2.0 * w * t).sin_cos();
    let inner = 4.0 * l * l + 4.0 * w * w;
    let bracket = (2.0 * l * l - 4.0 * w * w) * growth / inner * sin - 6.0 * w * l * growth / inner * cos;
    Ok(s.b0 * s.b0 / (s.hbar * s.hbar * (l * l + 4.0 * w * w)) * bracket)
}

/// `P_21 = |c_21|^2 = exp(2 a_21)`.
pub fn transition_probability_from_a(a21: f64) -> f64 {
    (2.0 * a21).exp()
}

/// Markov-approximation coefficient `exp(a_21 + i phi_21)`; closed forms when
/// `delta0 = 0`, quadrature otherwise.
pub fn two_level_markov_c21(s: &TwoLevelScenario, t: f64, t_floor: f64) -> Result<Complex64> {
    s.check_floor(t, t_floor)?;
    let (a, phi) = if s.delta0 == 0.0 {
        (a21_closed_form(s, t)?, phi21_closed_form(s, t)?)
    } else {
        (a21_quadrature(s, t, t_floor)?, phi21_quadrature(s, t, t_floor)?)
    };
    Ok(Complex64::from_polar(a.exp(), phi))
}
