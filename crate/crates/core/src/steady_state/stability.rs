//! Linear stability of fixed points.
//!
//! The population sum is conserved, so `v = (0,…,0,1,1,1,1)` is a left null
//! vector of the Jacobian and the hyperplane `v·y = 0` is invariant. The
//! structural zero eigenvalue is removed by restricting the Jacobian to that
//! hyperplane; the remaining eleven eigenvalues decide stability.

use super::refine::{residual_norm, RESIDUAL_GATE};
use crate::error::{BistabError, Result};
use crate::model::{jacobian, MeanFieldState, StateMatrix, SystemParams};
use nalgebra::SMatrix;
use num_complex::Complex64;

/// Threshold on |Re λ| below which an eigenvalue counts as a zero mode.
pub const EPS_ZERO: f64 = 1e-9;
/// Strict-stability margin: stable iff every retained Re λ < −EPS_STAB.
pub const EPS_STAB: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Largest real part over the non-conserved eigenvalues.
    pub spectrum_max_real: f64,
}

type Basis = SMatrix<f64, 12, 11>;

fn conserving_basis() -> Basis {
    let mut b = Basis::zeros();
    for k in 0..8 {
        b[(k, k)] = 1.0;
    }
    // Helmert basis of the population subspace orthogonal to (1,1,1,1)
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let s12 = 12f64.sqrt();
    let helmert = [
        [1.0 / s2, -1.0 / s2, 0.0, 0.0],
        [1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0],
        [1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12],
    ];
    for (col, h) in helmert.iter().enumerate() {
        for (k, v) in h.iter().enumerate() {
            b[(8 + k, 8 + col)] = *v;
        }
    }
    b
}

/// Eigenvalues of the Jacobian restricted to the population-conserving
/// hyperplane (eleven values).
pub fn reduced_spectrum(state: &MeanFieldState, params: &SystemParams) -> Vec<Complex64> {
    let b = conserving_basis();
    let reduced = b.transpose() * jacobian(state, params) * b;
    reduced.complex_eigenvalues().iter().copied().collect()
}

/// Full 12×12 spectrum, including the structural zero.
pub fn full_spectrum(jac: &StateMatrix) -> Vec<Complex64> {
    jac.complex_eigenvalues().iter().copied().collect()
}

/// Classifies a refined fixed point.
///
/// Fails with [`BistabError::NotAFixedPoint`] if the residual gate is not met and
/// with [`BistabError::Marginal`] when a retained eigenvalue has |Re λ| below
/// [`EPS_ZERO`], i.e. the point sits on a stability boundary.
pub fn classify_stability(state: &MeanFieldState, params: &SystemParams) -> Result<Stability> {
    let residual = residual_norm(state, params);
    if !(residual < RESIDUAL_GATE) {
        return Err(BistabError::NotAFixedPoint(residual));
    }
    let spectrum = reduced_spectrum(state, params);
    let max_real = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let near_zero = spectrum.iter().filter(|z| z.re.abs() < EPS_ZERO).count();
    if near_zero > 0 {
        return Err(BistabError::Marginal(format!(
            "{} additional eigenvalue(s) with |Re λ| < {EPS_ZERO:e} (max Re λ = {max_real:e})",
            near_zero
        )));
    }
    Ok(Stability { stable: max_real < -EPS_STAB, spectrum_max_real: max_real })
}
