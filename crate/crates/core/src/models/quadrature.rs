//! Nested composite Simpson quadrature for `int_a^b g(t, I(t)) dt` where
//! `I(t) = int_a^t f(s) ds` is carried cumulatively on the outer grid.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Doubling stops once successive estimates differ by less than this.
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-9, max_panels: 1 << 20 }
    }
}

/// One fixed-resolution pass with `panels` (even) outer panels. The inner
/// integrals advance by Simpson's rule on each panel using its midpoint, so
/// every outer node has an inner value of the same order.
fn nested_pass<const K: usize>(
    a: f64,
    b: f64,
    panels: usize,
    inner: &impl Fn(f64) -> [f64; K],
    outer: &impl Fn(f64, [f64; K]) -> f64,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = [0.0; K];
    let mut f_left = inner(a);
    let mut sum = outer(a, acc);
    for j in 1..=panels {
        let t_left = a + (j - 1) as f64 * h;
        let t = if j == panels { b } else { a + j as f64 * h };
        let f_mid = inner(t_left + 0.5 * h);
        let f_right = inner(t);
        for i in 0..K {
            acc[i] += h / 6.0 * (f_left[i] + 4.0 * f_mid[i] + f_right[i]);
        }
        let weight = if j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * outer(t, acc);
        f_left = f_right;
    }
    sum * h / 3.0
}

/// Doubles the panel count from `initial_panels` until two estimates agree
/// within `cfg.abs_tol`.
pub fn nested_simpson<const K: usize>(
    a: f64,
    b: f64,
    initial_panels: usize,
    cfg: &QuadratureConfig,
    inner: impl Fn(f64) -> [f64; K],
    outer: impl Fn(f64, [f64; K]) -> f64,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::Configuration(format!("empty integration range [{a}, {b}]")));
    }
    let mut panels = initial_panels.max(2);
    panels += panels % 2;
    let mut prev = nested_pass(a, b, panels, &inner, &outer);
    while panels * 2 <= cfg.max_panels {
        panels *= 2;
        let next = nested_pass(a, b, panels, &inner, &outer);
        if (next - prev).abs() < cfg.abs_tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Configuration(format!("quadrature did not reach {:e} within {} panels", cfg.abs_tol, cfg.max_panels)))
}
