//! Scenario file schema and its conversion into core types.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use subphase_core::models::{PerturbationScenario, TwoLevelScenario, DEFAULT_FLOOR_RATIO};
use subphase_core::{CMatrix, CVector, DriveSpec, DriveTerm, EnergySpectrum, Envelope, ExtractionConfig, TimeGrid};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub spectrum: Option<SpectrumSection>,
    pub drive: Option<DriveSection>,
    pub grid: GridSection,
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub scan: Option<ScanSection>,
    pub model: Option<ModelSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub energies: Vec<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub terms: Vec<TermSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    /// Row-major `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    pub carrier: f64,
    #[serde(default)]
    pub delta0: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeSection {
    #[default]
    Constant,
    Exponential {
        rate: f64,
    },
    SlowGauge {
        rate: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: i64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Index(usize),
    Vector(Vec<[f64; 2]>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_floor")]
    pub amplitude_floor: f64,
    #[serde(default = "default_slope")]
    pub slope_tolerance: f64,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let d = ExtractionConfig::default();
        Self {
            amplitude_floor: d.amplitude_floor,
            slope_tolerance: d.slope_tolerance,
            window_fraction: d.window_fraction,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Final time `T`; defaults to `grid.t_end`.
    pub horizon: Option<f64>,
    pub target_index: usize,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Perturbation(PerturbationParams),
    TwoLevel(TwoLevelParams),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationParams {
    pub matrix_element: [f64; 2],
    pub big_omega: f64,
    pub omega: f64,
    pub omega_nk: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelParams {
    pub delta: f64,
    pub b0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub delta0: f64,
    pub omega: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    /// `exp(lambda (t_floor - t))` for the truncated lower limit.
    #[serde(default = "default_floor_ratio")]
    pub floor_ratio: f64,
}

fn one() -> f64 {
    1.0
}

fn default_floor() -> f64 {
    ExtractionConfig::default().amplitude_floor
}

fn default_slope() -> f64 {
    ExtractionConfig::default().slope_tolerance
}

fn default_window() -> f64 {
    ExtractionConfig::default().window_fraction
}

fn default_floor_ratio() -> f64 {
    DEFAULT_FLOOR_RATIO
}

fn complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn input(key: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{key}: {err}"))
}

fn missing(key: &str) -> CliError {
    CliError::Input(format!("{key}: section required by this command"))
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            CliError::Input(format!("{key}: {}", e.into_inner()))
        })
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        let steps = usize::try_from(self.grid.steps)
            .map_err(|_| input("grid.steps", format!("must be positive, got {}", self.grid.steps)))?;
        TimeGrid::new(self.grid.t_start, self.grid.t_end, steps).map_err(|e| input("grid", e))
    }

    pub fn spectrum(&self) -> Result<EnergySpectrum, CliError> {
        let s = self.spectrum.as_ref().ok_or_else(|| missing("spectrum"))?;
        EnergySpectrum::new(s.energies.clone(), s.hbar).map_err(|e| input("spectrum", e))
    }

    pub fn drive(&self, dim: usize) -> Result<DriveSpec, CliError> {
        let Some(section) = &self.drive else {
            return Ok(DriveSpec::empty(dim));
        };
        let mut terms = Vec::with_capacity(section.terms.len());
        for (i, t) in section.terms.iter().enumerate() {
            let key = format!("drive.terms[{i}].matrix");
            if t.matrix.len() != dim * dim {
                return Err(input(
                    &key,
                    format!("expected {} entries for dimension {dim}, got {}", dim * dim, t.matrix.len()),
                ));
            }
            let matrix = CMatrix::from_row_iterator(dim, dim, t.matrix.iter().copied().map(complex));
            let envelope = match t.envelope {
                EnvelopeSection::Constant => Envelope::Constant,
                EnvelopeSection::Exponential { rate } => Envelope::Exponential { rate },
                EnvelopeSection::SlowGauge { rate } => Envelope::SlowGauge { rate },
            };
            terms.push(DriveTerm::new(matrix, envelope, t.carrier).with_phase(t.delta0));
        }
        DriveSpec::new(dim, terms).map_err(|e| input("drive", e))
    }

    pub fn initial(&self, dim: usize) -> Result<CVector, CliError> {
        match self.initial.as_ref().ok_or_else(|| missing("initial"))? {
            InitialSection::Index(k) => {
                if *k >= dim {
                    return Err(input("initial.index", format!("{k} out of range for dimension {dim}")));
                }
                let mut v = CVector::zeros(dim);
                v[*k] = Complex64::new(1.0, 0.0);
                Ok(v)
            }
            InitialSection::Vector(pairs) => {
                if pairs.len() != dim {
                    return Err(input("initial.vector", format!("expected {dim} entries, got {}", pairs.len())));
                }
                Ok(CVector::from_iterator(dim, pairs.iter().copied().map(complex)))
            }
        }
    }

    pub fn initial_index(&self, dim: usize) -> Result<usize, CliError> {
        match self.initial.as_ref().ok_or_else(|| missing("initial"))? {
            InitialSection::Index(k) if *k < dim => Ok(*k),
            InitialSection::Index(k) => Err(input("initial.index", format!("{k} out of range for dimension {dim}"))),
            InitialSection::Vector(_) => Err(input("initial", "scans require an eigenstate index")),
        }
    }

    pub fn extraction(&self) -> Result<ExtractionConfig, CliError> {
        let cfg = ExtractionConfig {
            amplitude_floor: self.analysis.amplitude_floor,
            slope_tolerance: self.analysis.slope_tolerance,
            window_fraction: self.analysis.window_fraction,
        };
        cfg.validate().map_err(|e| input("analysis", e))?;
        Ok(cfg)
    }

    pub fn scan(&self) -> Result<&ScanSection, CliError> {
        self.scan.as_ref().ok_or_else(|| missing("scan"))
    }

    pub fn two_level(&self) -> Result<(TwoLevelScenario, f64), CliError> {
        match &self.model {
            Some(ModelSection::TwoLevel(p)) => {
                let s = TwoLevelScenario::new(p.delta, p.b0, p.lambda, p.delta0, p.omega, p.hbar)
                    .map_err(|e| input("model.parameters", e))?;
                if !(p.floor_ratio > 0.0 && p.floor_ratio < 1.0) {
                    return Err(input("model.parameters.floor_ratio", "must lie in (0, 1)"));
                }
                Ok((s, p.floor_ratio))
            }
            _ => Err(input("model", "this command requires model kind \"two_level\"")),
        }
    }

    pub fn perturbation(&self) -> Result<PerturbationScenario, CliError> {
        match &self.model {
            Some(ModelSection::Perturbation(p)) => {
                let s = PerturbationScenario {
                    matrix_element: complex(p.matrix_element),
                    big_omega: p.big_omega,
                    omega: p.omega,
                    omega_nk: p.omega_nk,
                    hbar: p.hbar,
                };
                s.validate().map_err(|e| input("model.parameters", e))?;
                Ok(s)
            }
            _ => Err(input("model", "this command requires model kind \"perturbation\"")),
        }
    }
}
