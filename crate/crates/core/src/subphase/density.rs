use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::drive::{hermitian_defect, CMatrix};
use crate::error::{Error, Result};
use crate::propagator::CVector;

const DENSITY_TOLERANCE: f64 = 1e-10;
const EIGENVALUE_FLOOR: f64 = -1e-8;

/// Density matrix at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrixSnapshot {
    matrix: CMatrix,
}

impl DensityMatrixSnapshot {
    /// Validates Hermiticity and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::validation("density matrix must be square"));
        }
        if hermitian_defect(&matrix) > DENSITY_TOLERANCE {
            return Err(Error::validation("density matrix is not Hermitian"));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::validation(format!("density matrix trace {trace} is not 1")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// `rho_{nn'} = c_n conj(c_n')`: populations `A_n^2` on the diagonal, phase
/// differences `phi_n - phi_n'` off it.
pub fn density_matrix(coefficients: &CVector) -> Result<DensityMatrixSnapshot> {
    if coefficients.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::validation("coefficients must be finite"));
    }
    let n = coefficients.len();
    let mut rho = CMatrix::zeros(n, n);
    for i in 0..n {
        rho[(i, i)] = Complex64::new(coefficients[i].norm_sqr(), 0.0);
        for j in 0..n {
            if i != j {
                rho[(i, j)] = coefficients[i] * coefficients[j].conj();
            }
        }
    }
    DensityMatrixSnapshot::new(rho)
}

/// `S = -sum p ln p` over eigenvalues, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrixSnapshot) -> Result<f64> {
    let ev = rho.eigenvalues();
    if let Some(&low) = ev.iter().find(|&&p| p < EIGENVALUE_FLOOR) {
        return Err(Error::InvalidDensity { eigenvalue: low });
    }
    Ok(ev.into_iter().map(|p| p.clamp(0.0, 1.0)).filter(|&p| p > 0.0).map(|p| -p * p.ln()).sum())
}

/// Zeroes the coherences.
pub fn dephase(rho: &DensityMatrixSnapshot) -> DensityMatrixSnapshot {
    let n = rho.dim();
    let matrix = CMatrix::from_fn(n, n, |i, j| if i == j { rho.matrix[(i, j)] } else { Complex64::new(0.0, 0.0) });
    DensityMatrixSnapshot { matrix }
}

/// `Tr(rho A)` for a Hermitian observable.
pub fn expectation(rho: &DensityMatrixSnapshot, observable: &CMatrix) -> Result<f64> {
    if observable.shape() != rho.matrix.shape() {
        return Err(Error::validation("observable dimension does not match the density matrix"));
    }
    if hermitian_defect(observable) > 1e-12 {
        return Err(Error::validation("observable is not Hermitian"));
    }
    let value = (&rho.matrix * observable).trace();
    if value.im.abs() > DENSITY_TOLERANCE {
        return Err(Error::validation(format!("expectation has imaginary residue {}", value.im)));
    }
    Ok(value.re)
}
