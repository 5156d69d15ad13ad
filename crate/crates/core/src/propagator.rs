//! Fixed-step RK4 integration of the interaction-picture coefficient
//! equations
//!
//! ```text
//! i hbar dc_m/dt = sum_n exp(i omega_mn t) H'_mn(t) c_n,   omega_mn = (E_m - E_n) / hbar
//! ```
//!
//! The dynamic phase `exp(-i E_n t / hbar)` is kept out of the coefficients,
//! so the phases of `c_n` carry only drive-induced evolution.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::drive::{evaluate_drive_into, is_hermitian, CMatrix, DriveSpec};
use crate::error::{Error, Result};
use crate::system::{EnergySpectrum, TimeGrid};

pub type CVector = DVector<Complex64>;

/// Tolerance used when deciding whether a drive is Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step_halving_check: bool,
    pub norm_tolerance: f64,
    pub reconstruction_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { method: Method::Rk4, step_halving_check: true, norm_tolerance: 1e-9, reconstruction_tolerance: 1e-12 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.norm_tolerance > 0.0) || !(self.reconstruction_tolerance > 0.0) {
            return Err(Error::validation("integrator tolerances must be positive"));
        }
        Ok(())
    }
}

/// Sampled coefficients `c_nk(t)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrajectory {
    /// Eigenstate the run started in; `None` for an explicit initial vector.
    pub initial_index: Option<usize>,
    pub grid: TimeGrid,
    pub values: Vec<CVector>,
    pub norm_series: Vec<f64>,
    /// Whether the drive was Hermitian on the grid (norm is then conserved).
    pub hermitian: bool,
}

impl CoefficientTrajectory {
    /// Builds a trajectory from externally computed samples.
    pub fn from_samples(grid: TimeGrid, values: Vec<CVector>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::validation(format!("{} samples for a grid of {} points", values.len(), grid.len())));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::validation("samples have inconsistent dimension"));
        }
        if values.iter().flat_map(|v| v.iter()).any(|z| !is_finite(*z)) {
            return Err(Error::validation("samples contain non-finite values"));
        }
        let norm_series = values.iter().map(|v| v.norm_squared()).collect();
        Ok(Self { initial_index: None, grid, values, norm_series, hermitian: false })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Series of coefficient `n`.
    pub fn component(&self, n: usize) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().map(move |v| v[n])
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_series.iter().map(|p| (p - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Multiplies every coefficient by `exp(i alpha)`.
    pub fn gauge_shifted(&self, alpha: f64) -> Self {
        let g = Complex64::from_polar(1.0, alpha);
        Self { values: self.values.iter().map(|v| v.map(|z| z * g)).collect(), ..self.clone() }
    }
}

fn is_finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Right-hand side generator `K(t)` with `dc/dt = K(t) c`.
struct Generator<'a> {
    spectrum: &'a EnergySpectrum,
    drive: &'a DriveSpec,
    scratch: CMatrix,
}

impl<'a> Generator<'a> {
    fn new(spectrum: &'a EnergySpectrum, drive: &'a DriveSpec) -> Self {
        let n = drive.dim();
        Self { spectrum, drive, scratch: CMatrix::zeros(n, n) }
    }

    fn eval(&mut self, t: f64) -> Result<CMatrix> {
        evaluate_drive_into(self.drive, t, &mut self.scratch)?;
        let n = self.drive.dim();
        // 1 / (i hbar)
        let prefactor = Complex64::new(0.0, -1.0 / self.spectrum.hbar());
        let mut k = CMatrix::zeros(n, n);
        for m in 0..n {
            for j in 0..n {
                let h = self.scratch[(m, j)];
                if h.re == 0.0 && h.im == 0.0 {
                    continue;
                }
                let rotation = Complex64::from_polar(1.0, self.spectrum.omega(m, j) * t);
                k[(m, j)] = prefactor * rotation * h;
            }
        }
        Ok(k)
    }
}

fn integrate(spectrum: &EnergySpectrum, drive: &DriveSpec, initial: CVector, grid: &TimeGrid) -> Result<Vec<CVector>> {
    let h = grid.step();
    let mut gen = Generator::new(spectrum, drive);
    let mut values = Vec::with_capacity(grid.len());
    let mut c = initial;
    values.push(c.clone());
    if drive.is_empty() {
        values.resize(grid.len(), c);
        return Ok(values);
    }
    let mut k_start = gen.eval(grid.time(0))?;
    for j in 0..grid.steps() {
        let t0 = grid.time(j);
        let t1 = grid.time(j + 1);
        let k_mid = gen.eval(t0 + 0.5 * h)?;
        let k_end = gen.eval(t1)?;

        let s1 = &k_start * &c;
        let s2 = &k_mid * (&c + &s1 * Complex64::from(0.5 * h));
        let s3 = &k_mid * (&c + &s2 * Complex64::from(0.5 * h));
        let s4 = &k_end * (&c + &s3 * Complex64::from(h));
        c += (s1 + (s2 + s3) * Complex64::from(2.0) + s4) * Complex64::from(h / 6.0);

        if !c.iter().all(|z| is_finite(*z)) {
            return Err(Error::Divergence { time: t1 });
        }
        values.push(c.clone());
        k_start = k_end;
    }
    Ok(values)
}

fn run(
    spectrum: &EnergySpectrum,
    drive: &DriveSpec,
    initial: CVector,
    initial_index: Option<usize>,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<CoefficientTrajectory> {
    cfg.validate()?;
    drive.check_dim(spectrum)?;
    let values = integrate(spectrum, drive, initial, grid)?;
    let norm_series = values.iter().map(|v| v.norm_squared()).collect();
    let hermitian = is_hermitian(drive, grid, HERMITIAN_TOLERANCE);
    let traj = CoefficientTrajectory { initial_index, grid: *grid, values, norm_series, hermitian };
    if hermitian {
        let max_drift = traj.max_norm_drift();
        if max_drift > cfg.norm_tolerance {
            return Err(Error::NormViolation { max_drift, tolerance: cfg.norm_tolerance, trajectory: Box::new(traj) });
        }
    }
    Ok(traj)
}

/// Integrates from the eigenstate `initial_index` at `grid.t_start()`.
pub fn propagate(
    spectrum: &EnergySpectrum,
    drive: &DriveSpec,
    initial_index: usize,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<CoefficientTrajectory> {
    let n = spectrum.dim();
    if initial_index >= n {
        return Err(Error::validation(format!("initial index {initial_index} out of range for {n} levels")));
    }
    let mut initial = CVector::zeros(n);
    initial[initial_index] = Complex64::new(1.0, 0.0);
    run(spectrum, drive, initial, Some(initial_index), grid, cfg)
}

/// Integrates from an explicit unit vector.
pub fn propagate_with_initial(
    spectrum: &EnergySpectrum,
    drive: &DriveSpec,
    initial: &CVector,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<CoefficientTrajectory> {
    if initial.len() != spectrum.dim() {
        return Err(Error::validation(format!(
            "initial vector has {} entries for {} levels",
            initial.len(),
            spectrum.dim()
        )));
    }
    let norm = initial.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::validation(format!("initial vector norm {norm} is not 1")));
    }
    let index = unit_index(initial);
    run(spectrum, drive, initial.clone(), index, grid, cfg)
}

/// Index `k` if `v` is exactly the unit vector `e_k`.
fn unit_index(v: &CVector) -> Option<usize> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let k = v.iter().position(|z| *z == one)?;
    v.iter().enumerate().all(|(i, z)| i == k || *z == zero).then_some(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub coarse_vs_fine_max_error: f64,
}

/// Reruns with twice the steps and reports the largest coefficient change on
/// the shared samples.
pub fn convergence_report(
    spectrum: &EnergySpectrum,
    drive: &DriveSpec,
    initial_index: usize,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    drive.check_dim(spectrum)?;
    if !grid.steps().is_multiple_of(2) {
        return Err(Error::validation(format!("convergence report needs an even step count, got {}", grid.steps())));
    }
    let n = spectrum.dim();
    if initial_index >= n {
        return Err(Error::validation(format!("initial index {initial_index} out of range")));
    }
    let mut initial = CVector::zeros(n);
    initial[initial_index] = Complex64::new(1.0, 0.0);
    let coarse = integrate(spectrum, drive, initial.clone(), grid)?;
    let fine = integrate(spectrum, drive, initial, &grid.refined(2))?;
    let err = coarse
        .iter()
        .enumerate()
        .flat_map(|(j, c)| c.iter().zip(fine[2 * j].iter()).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    Ok(ConvergenceReport { coarse_vs_fine_max_error: err })
}
