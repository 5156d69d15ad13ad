//! Command implementations. Each returns the outcome so far alongside any
//! error, so warnings gathered before a failure still reach stderr.

use std::path::Path;

use serde::Serialize;
use subphase_core::models::{
    a21_closed_form, a21_quadrature, perturbative_c_exact, perturbative_c_markov, phi21_closed_form, phi21_quadrature,
    transition_probability_from_a, TRUNCATION_RATIO,
};
use subphase_core::propagator::HERMITIAN_TOLERANCE;
use subphase_core::{
    extract, is_hermitian, propagate_with_initial, resonance_scan, CoefficientTrajectory, Error, IntegratorConfig,
    ScanRequest, SubPhaseTrajectory, TimeGrid,
};

use crate::output::{num, opt, report_path, write_text, Csv};
use crate::scenario::ScenarioFile;
use crate::{CliError, Outcome};

pub type CommandResult = Result<Outcome, (Outcome, CliError)>;

/// Branch disagreement at double resolution above this many radians flags
/// an under-resolved grid.
const UNWRAP_CHECK_TOLERANCE: f64 = 1.0;

const THREADS_VAR: &str = "SUBPHASE_THREADS";

fn run(body: impl FnOnce(&mut Outcome) -> Result<(), CliError>) -> CommandResult {
    let mut outcome = Outcome::default();
    match body(&mut outcome) {
        Ok(()) => Ok(outcome),
        Err(e) => Err((outcome, e)),
    }
}

fn trajectory_csv(traj: &CoefficientTrajectory, phases: &SubPhaseTrajectory) -> Csv {
    let n = traj.dim();
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for col in ["re_c", "im_c", "a", "phi", "P"] {
            header.push(format!("{col}_{i}"));
        }
    }
    header.push("norm".to_string());
    let mut csv = Csv::new(&header);
    for (j, c) in traj.values.iter().enumerate() {
        let mut row = Vec::with_capacity(header.len());
        row.push(num(traj.grid.time(j)));
        for (i, z) in c.iter().enumerate() {
            let s = phases.state(i);
            row.extend([num(z.re), num(z.im), opt(s.a_at(j)), opt(s.phi_at(j)), num(z.norm_sqr())]);
        }
        row.push(num(traj.norm_series[j]));
        csv.row(&row);
    }
    csv
}

/// Largest phase difference per eigenstate between a run and its
/// double-resolution rerun on the shared samples.
fn unwrap_disagreements(coarse: &SubPhaseTrajectory, fine: &SubPhaseTrajectory) -> Vec<(usize, f64)> {
    (0..coarse.states.len())
        .filter_map(|i| {
            let (c, f) = (coarse.state(i), fine.state(i));
            let worst = (0..c.len()).filter_map(|j| Some((c.phi_at(j)? - f.phi_at(2 * j)?).abs())).fold(0.0, f64::max);
            (worst > UNWRAP_CHECK_TOLERANCE).then_some((i, worst))
        })
        .collect()
}

pub fn propagate(scenario: &Path, out: &Path) -> CommandResult {
    run(|outcome| {
        let file = ScenarioFile::load(scenario)?;
        let spectrum = file.spectrum()?;
        let drive = file.drive(spectrum.dim())?;
        let grid = file.grid()?;
        let initial = file.initial(spectrum.dim())?;
        let ecfg = file.extraction()?;
        let icfg = IntegratorConfig::default();
        if !is_hermitian(&drive, &grid, HERMITIAN_TOLERANCE) {
            outcome.notes.push("drive is not Hermitian; norm conservation is not asserted".into());
        }

        let (traj, failure) = match propagate_with_initial(&spectrum, &drive, &initial, &grid, &icfg) {
            Ok(t) => (t, None),
            Err(Error::NormViolation { max_drift, tolerance, trajectory }) => {
                let msg = format!("norm drift {max_drift:e} exceeds tolerance {tolerance:e} for a Hermitian drive");
                (*trajectory, Some(CliError::Numerical(msg)))
            }
            Err(e) => return Err(e.into()),
        };
        let phases = extract(&traj, &ecfg)?;
        outcome.warnings.extend(phases.warnings.iter().map(ToString::to_string));
        outcome.outputs.push(trajectory_csv(&traj, &phases).write(out)?);
        if let Some(e) = failure {
            return Err(e);
        }

        if icfg.step_halving_check {
            let fine = propagate_with_initial(&spectrum, &drive, &initial, &grid.refined(2), &icfg)?;
            let fine_phases = extract(&fine, &ecfg)?;
            for (index, max_diff) in unwrap_disagreements(&phases, &fine_phases) {
                let w = subphase_core::Warning::UnwrapDisagreement { index, max_diff };
                outcome.warnings.push(w.to_string());
            }
        }
        Ok(())
    })
}

fn not_na(r: subphase_core::Result<f64>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UnsupportedParameter(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn twolevel(scenario: &Path, out: &Path) -> CommandResult {
    run(|outcome| {
        let file = ScenarioFile::load(scenario)?;
        let grid = file.grid()?;
        let (s, ratio) = file.two_level()?;
        if s.delta0 != 0.0 {
            outcome.notes.push("closed forms need delta0 = 0; closed columns are NA".into());
        }
        let mut csv = Csv::new(&["t", "a21_closed", "phi21_closed", "a21_quad", "phi21_quad", "P21"]);
        for t in grid.times() {
            let floor = s.floor_for(t, ratio);
            let a_closed = not_na(a21_closed_form(&s, t))?;
            let phi_closed = not_na(phi21_closed_form(&s, t))?;
            let a_quad = a21_quadrature(&s, t, floor)?;
            let phi_quad = phi21_quadrature(&s, t, floor)?;
            let p = transition_probability_from_a(a_closed.unwrap_or(a_quad));
            csv.row(&[num(t), opt(a_closed), opt(phi_closed), num(a_quad), num(phi_quad), num(p)]);
        }
        outcome.outputs.push(csv.write(out)?);
        Ok(())
    })
}

pub fn perturb(scenario: &Path, out: &Path) -> CommandResult {
    run(|outcome| {
        let file = ScenarioFile::load(scenario)?;
        let grid = file.grid()?;
        let s = file.perturbation()?;
        if grid.t_start() < 0.0 {
            return Err(CliError::Input(format!("grid.t_start: must be >= 0, got {}", grid.t_start())));
        }
        outcome.warnings.extend(s.warnings().iter().map(ToString::to_string));
        let mut csv = Csv::new(&["t", "re_c_exact", "im_c_exact", "re_c_markov", "im_c_markov", "abs_err"]);
        for t in grid.times() {
            let exact = perturbative_c_exact(&s, t);
            let markov = perturbative_c_markov(&s, t)?;
            csv.row(&[
                num(t),
                num(exact.re),
                num(exact.im),
                num(markov.re),
                num(markov.im),
                num((exact - markov).norm()),
            ]);
        }
        outcome.outputs.push(csv.write(out)?);
        Ok(())
    })
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("{THREADS_VAR}: expected a positive integer, got {v:?}"))),
        },
        Err(e) => Err(CliError::Input(format!("{THREADS_VAR}: {e}"))),
    }
}

#[derive(Serialize)]
struct ScanReport {
    peak_omega: f64,
    #[serde(rename = "peak_P")]
    peak_p: f64,
    predicted_omega: Option<f64>,
    unshifted_omega: f64,
}

fn scan_request(file: &ScenarioFile) -> Result<ScanRequest, CliError> {
    let spectrum = file.spectrum()?;
    let dim = spectrum.dim();
    let scan = file.scan()?;
    let grid = file.grid()?;
    let horizon = scan.horizon.unwrap_or(grid.t_end());
    let grid = TimeGrid::new(grid.t_start(), horizon, grid.steps())
        .map_err(|e| CliError::Input(format!("scan.horizon: {e}")))?;
    let req = ScanRequest {
        drive: file.drive(dim)?,
        initial_index: file.initial_index(dim)?,
        spectrum,
        omega_min: scan.omega_min,
        omega_max: scan.omega_max,
        points: scan.points,
        grid,
        target_index: scan.target_index,
    };
    req.validate().map_err(|e| CliError::Input(format!("scan: {e}")))?;
    Ok(req)
}

pub fn scan(scenario: &Path, out: &Path) -> CommandResult {
    run(|outcome| {
        let file = ScenarioFile::load(scenario)?;
        let req = scan_request(&file)?;
        let ecfg = file.extraction()?;
        let threads = thread_cap()?;
        let result = resonance_scan(&req, &IntegratorConfig::default(), &ecfg, threads)?;
        outcome.warnings.extend(result.warnings.iter().map(ToString::to_string));

        let mut csv = Csv::new(&["omega", "P"]);
        for (w, p) in result.omegas.iter().zip(&result.probabilities) {
            csv.row(&[num(*w), num(*p)]);
        }
        outcome.outputs.push(csv.write(out)?);
        let report = ScanReport {
            peak_omega: result.peak_omega,
            peak_p: result.peak_p,
            predicted_omega: result.predicted_omega,
            unshifted_omega: result.unshifted_omega,
        };
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        outcome.outputs.push(write_text(&report_path(out), &text)?);
        Ok(())
    })
}

/// Findings split by severity; any error makes the scenario invalid.
#[derive(Default)]
struct Findings {
    errors: Vec<String>,
    warnings: Vec<String>,
    notes: Vec<String>,
}

impl Findings {
    fn check<T>(&mut self, r: Result<T, CliError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(match e {
                    CliError::Input(m) | CliError::Numerical(m) => m,
                });
                None
            }
        }
    }
}

fn validate_dynamics(file: &ScenarioFile, grid: &TimeGrid, f: &mut Findings) {
    let Some(spectrum) = f.check(file.spectrum()) else { return };
    let Some(drive) = f.check(file.drive(spectrum.dim())) else { return };
    f.check(file.initial(spectrum.dim()));
    f.check(file.extraction());

    let advance = drive.phase_advance_per_step(&spectrum, grid);
    if advance >= std::f64::consts::PI {
        f.warnings.push(format!("grid too coarse: per-step phase advance {advance:.3} rad exceeds pi"));
    } else {
        f.notes.push(format!("per-step phase advance {advance:.3e} rad"));
    }
    if is_hermitian(&drive, grid, HERMITIAN_TOLERANCE) {
        f.notes.push("drive is Hermitian; norm conservation will be asserted".into());
    } else {
        f.notes.push("drive is not Hermitian; norm conservation will not be asserted".into());
    }

    if file.scan.is_some() {
        if let Some(req) = f.check(scan_request(file)) {
            let worst = req
                .omegas()
                .iter()
                .map(|&w| req.drive.with_carrier(w).phase_advance_per_step(&req.spectrum, &req.grid))
                .fold(0.0, f64::max);
            if worst >= std::f64::consts::PI {
                f.errors.push(format!("scan grid too coarse: per-step phase advance {worst:.3} rad exceeds pi"));
            }
        }
        f.check(thread_cap());
    }
}

fn validate_model(file: &ScenarioFile, grid: &TimeGrid, f: &mut Findings) {
    match &file.model {
        Some(crate::scenario::ModelSection::TwoLevel(_)) => {
            let Some((s, ratio)) = f.check(file.two_level()) else { return };
            if ratio > TRUNCATION_RATIO {
                f.errors.push(format!(
                    "model.parameters.floor_ratio: {ratio:e} violates the truncation rule (at most {TRUNCATION_RATIO:e})"
                ));
            }
            if s.delta0 != 0.0 {
                f.notes.push("delta0 != 0: closed forms unavailable, quadrature only".into());
            }
            if s.omega != s.omega21() {
                f.notes.push(format!(
                    "carrier omega = {} differs from omega21 = {}; the sub-phase formulas assume resonance",
                    s.omega,
                    s.omega21()
                ));
            }
        }
        Some(crate::scenario::ModelSection::Perturbation(_)) => {
            let Some(s) = f.check(file.perturbation()) else { return };
            f.warnings.extend(s.warnings().iter().map(ToString::to_string));
            if s.omega == s.omega_nk {
                f.errors.push("model.parameters: omega = omega_nk is a pole of the Markov form".into());
            }
            if grid.t_start() < 0.0 {
                f.errors.push(format!("grid.t_start: must be >= 0, got {}", grid.t_start()));
            }
        }
        None => {}
    }
}

pub fn validate(scenario: &Path) -> CommandResult {
    let mut outcome = Outcome::default();
    let file = match ScenarioFile::load(scenario) {
        Ok(f) => f,
        Err(e) => return Err((outcome, e)),
    };
    let mut f = Findings::default();
    if let Some(grid) = f.check(file.grid()) {
        if file.spectrum.is_some() {
            validate_dynamics(&file, &grid, &mut f);
        }
        validate_model(&file, &grid, &mut f);
    }
    if file.spectrum.is_none() && file.model.is_none() {
        f.errors.push("scenario needs a spectrum or a model section".into());
    }
    outcome.warnings = f.warnings;
    outcome.notes = f.notes;
    if f.errors.is_empty() {
        Ok(outcome)
    } else {
        let n = f.errors.len();
        let msg = f.errors.join("; ");
        Err((outcome, CliError::Input(format!("{n} problem(s): {msg}"))))
    }
}
