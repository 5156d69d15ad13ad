//! Amplitude-tuned perturbation `U exp(i Omega t)` on a fast carrier, to first
//! order in `U`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::drive::{DriveSpec, DriveTerm, Envelope};
use crate::error::{Error, Result, Warning};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationScenario {
    /// `<n|U_Omega|k>`.
    pub matrix_element: Complex64,
    /// Slow amplitude-tuning frequency.
    pub big_omega: f64,
    /// Fast carrier frequency.
    pub omega: f64,
    pub omega_nk: f64,
    pub hbar: f64,
}

impl PerturbationScenario {
    pub fn validate(&self) -> Result<()> {
        let reals = [self.big_omega, self.omega, self.omega_nk, self.hbar];
        if reals.iter().any(|x| !x.is_finite())
            || !self.matrix_element.re.is_finite()
            || !self.matrix_element.im.is_finite()
        {
            return Err(Error::validation("perturbation parameters must be finite"));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::validation("hbar must be positive"));
        }
        Ok(())
    }

    /// Flags parameter sets outside the `Omega << omega` regime.
    pub fn warnings(&self) -> Vec<Warning> {
        let ratio = (self.big_omega / self.omega).abs();
        if ratio > 0.1 {
            vec![Warning::SlowGaugeRatio { ratio }]
        } else {
            Vec::new()
        }
    }

    fn detuning(&self) -> f64 {
        self.omega_nk - self.omega
    }

    /// Hermitian drive realising the scenario between levels `n` and `k` of
    /// a `dim`-level system: `U exp(i (Omega - omega) t)` at `(n, k)` and its
    /// conjugate at `(k, n)`.
    pub fn drive_spec(&self, dim: usize, n: usize, k: usize) -> Result<DriveSpec> {
        if n >= dim || k >= dim || n == k {
            return Err(Error::validation(format!("levels ({n}, {k}) invalid for dimension {dim}")));
        }
        let mut forward = DMatrix::zeros(dim, dim);
        forward[(n, k)] = self.matrix_element;
        let mut backward = DMatrix::zeros(dim, dim);
        backward[(k, n)] = self.matrix_element.conj();
        DriveSpec::new(
            dim,
            vec![
                DriveTerm::new(forward, Envelope::SlowGauge { rate: self.big_omega }, -self.omega),
                DriveTerm::new(backward, Envelope::SlowGauge { rate: -self.big_omega }, self.omega),
            ],
        )
    }
}

/// First-order coefficient
/// `(1 / i hbar) int_0^t exp(i (omega_nk - omega + Omega) t') U dt'` in closed form.
pub fn perturbative_c_exact(s: &PerturbationScenario, t: f64) -> Complex64 {
    let kappa = s.detuning() + s.big_omega;
    if kappa == 0.0 {
        return s.matrix_element * Complex64::new(0.0, -t / s.hbar);
    }
    let prefactor = s.matrix_element / (s.hbar * kappa);
    prefactor * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, kappa * t))
}

/// Markov form with `exp(i Omega t')` frozen at its endpoint value:
/// `U / (hbar (omega_nk - omega)) exp(i Omega t) (1 - exp(i (omega_nk - omega) t))`.
pub fn perturbative_c_markov(s: &PerturbationScenario, t: f64) -> Result<Complex64> {
    let detuning = s.detuning();
    if detuning == 0.0 {
        return Err(Error::Pole(s.omega));
    }
    let prefactor = s.matrix_element / (s.hbar * detuning) * Complex64::from_polar(1.0, s.big_omega * t);
    Ok(prefactor * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, detuning * t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(big_omega: f64) -> PerturbationScenario {
        PerturbationScenario {
            matrix_element: Complex64::new(0.02, -0.01),
            big_omega,
            omega: 1.0,
            omega_nk: 1.6,
            hbar: 1.0,
        }
    }

    /// Composite trapezoid of the first-order integrand.
    fn trapezoid(s: &PerturbationScenario, t: f64, n: usize) -> Complex64 {
        let kappa = s.omega_nk - s.omega + s.big_omega;
        let f = |x: f64| Complex64::from_polar(1.0, kappa * x) * s.matrix_element;
        let h = t / n as f64;
        let mut sum = (f(0.0) + f(t)) * 0.5;
        for j in 1..n {
            sum += f(j as f64 * h);
        }
        sum * h / Complex64::new(0.0, s.hbar)
    }

    #[test]
    fn starts_at_zero() {
        let s = scenario(0.01);
        assert_eq!(perturbative_c_exact(&s, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(perturbative_c_markov(&s, 0.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn zero_matrix_element_forbids_transition() {
        let s = PerturbationScenario { matrix_element: Complex64::new(0.0, 0.0), ..scenario(0.01) };
        for t in [0.5, 3.0, 40.0] {
            assert_eq!(perturbative_c_exact(&s, t).norm(), 0.0);
            assert_eq!(perturbative_c_markov(&s, t).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn exact_matches_trapezoid() {
        let s = scenario(0.05);
        for t in [0.7, 5.0, 17.3] {
            let diff = (perturbative_c_exact(&s, t) - trapezoid(&s, t, 200_000)).norm();
            assert!(diff < 1e-8, "t={t} diff={diff}");
        }
    }

    #[test]
    fn degenerate_denominator_takes_linear_limit() {
        let s = PerturbationScenario { omega_nk: 1.0, omega: 1.2, big_omega: 0.2, ..scenario(0.0) };
        let c = perturbative_c_exact(&s, 3.0);
        assert!((c - s.matrix_element * Complex64::new(0.0, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn markov_equals_exact_without_slow_gauge() {
        let s = scenario(0.0);
        for k in 0..100 {
            let t = 0.37 * k as f64;
            assert_eq!(perturbative_c_markov(&s, t).unwrap(), perturbative_c_exact(&s, t));
        }
    }

    #[test]
    fn markov_pole() {
        let s = PerturbationScenario { omega_nk: 1.0, ..scenario(0.01) };
        assert!(matches!(perturbative_c_markov(&s, 1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn markov_error_shrinks_with_slow_rate() {
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|r| {
                let s = scenario(r * 1.0);
                (0..=200)
                    .map(|j| {
                        let t = 0.1 * j as f64;
                        (perturbative_c_markov(&s, t).unwrap() - perturbative_c_exact(&s, t)).norm()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn regime_warning() {
        assert!(scenario(0.05).warnings().is_empty());
        assert_eq!(scenario(0.5).warnings().len(), 1);
    }

    #[test]
    fn drive_is_hermitian_pair() {
        use crate::drive::{evaluate_drive, hermitian_defect};
        let d = scenario(0.03).drive_spec(3, 2, 0).unwrap();
        for t in [0.0, 1.3, 7.9] {
            let h = evaluate_drive(&d, t).unwrap();
            assert!(hermitian_defect(&h) < 1e-16);
            assert!(h[(2, 0)].norm() > 0.0 && h[(1, 0)].norm() == 0.0);
        }
        assert!(scenario(0.0).drive_spec(2, 1, 1).is_err());
    }
}
