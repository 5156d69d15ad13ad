//! Linear-stability reading of the log-amplitude trend: a growing `a_n`
//! means the initial state is unstable and the system moves into `n`.

use super::{ExtractionConfig, SubPhaseTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Critical,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub classification: Stability,
    /// NaN when undetermined.
    pub fitted_slope: f64,
    pub window: (f64, f64),
}

impl Stability {
    pub fn from_slope(slope: f64, tolerance: f64) -> Self {
        if !slope.is_finite() {
            Stability::Undetermined
        } else if slope > tolerance {
            Stability::Unstable
        } else if slope < -tolerance {
            Stability::Stable
        } else {
            Stability::Critical
        }
    }
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (xi, yi)| {
        let dx = xi - mx;
        (sxy + dx * (yi - my), sxx + dx * dx)
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fits `a_n(t)` over the trailing `window_fraction` of defined samples.
pub fn classify_stability(subphase: &SubPhaseTrajectory, n: usize, cfg: &ExtractionConfig) -> StabilityVerdict {
    let undetermined =
        |window| StabilityVerdict { classification: Stability::Undetermined, fitted_slope: f64::NAN, window };
    let Some(series) = subphase.states.get(n) else {
        return undetermined((f64::NAN, f64::NAN));
    };
    let defined: Vec<usize> = series.defined_indices().collect();
    let take = ((defined.len() as f64) * cfg.window_fraction).ceil() as usize;
    let window = &defined[defined.len() - take.min(defined.len())..];
    if window.len() < 2 {
        let span = window.first().map(|&j| subphase.grid.time(j)).unwrap_or(f64::NAN);
        return undetermined((span, span));
    }
    let t: Vec<f64> = window.iter().map(|&j| subphase.grid.time(j)).collect();
    let a: Vec<f64> = window.iter().map(|&j| series.a[j]).collect();
    let span = (t[0], t[t.len() - 1]);
    match least_squares_slope(&t, &a) {
        Some(slope) => StabilityVerdict {
            classification: Stability::from_slope(slope, cfg.slope_tolerance),
            fitted_slope: slope,
            window: span,
        },
        None => undetermined(span),
    }
}
