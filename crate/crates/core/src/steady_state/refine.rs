//! Damped Newton iteration on the full 12-dimensional fixed-point system.
//!
//! The Jacobian of the flow is singular along the population-sum direction, so
//! the last population equation is replaced by the normalization constraint
//! `n_e1 + n_g1 + n_e2 + n_g2 = 1`.

use crate::model::{jacobian, rhs_real, MeanFieldState, RealStateVector, SystemParams, POPULATION_INDICES};

/// Residual gate `‖rhs‖₂` for accepting a refined fixed point.
pub const RESIDUAL_GATE: f64 = 1e-9;

const CONSTRAINT_ROW: usize = 11;

fn augmented_residual(y: &RealStateVector, params: &SystemParams) -> RealStateVector {
    let mut r = rhs_real(y, params);
    r[CONSTRAINT_ROW] = POPULATION_INDICES.iter().map(|&i| y[i]).sum::<f64>() - 1.0;
    r
}

/// Euclidean norm of the flow at `state`.
pub fn residual_norm(state: &MeanFieldState, params: &SystemParams) -> f64 {
    rhs_real(&state.to_real(), params).norm()
}

/// Polishes `start` onto a nearby fixed point on the normalized manifold.
///
/// Returns the refined state and its residual, or `None` if the iteration fails
/// to bring `‖rhs‖₂` below [`RESIDUAL_GATE`].
pub fn newton_refine(
    start: &MeanFieldState,
    params: &SystemParams,
    max_iter: usize,
) -> Option<(MeanFieldState, f64)> {
    let mut y = start.to_real();
    let mut g = augmented_residual(&y, params);
    let mut gnorm = g.norm();
    for _ in 0..max_iter {
        if !gnorm.is_finite() {
            return None;
        }
        let mut jac = jacobian(&MeanFieldState::from_real(&y), params);
        for j in 0..12 {
            jac[(CONSTRAINT_ROW, j)] = 0.0;
        }
        for &i in &POPULATION_INDICES {
            jac[(CONSTRAINT_ROW, i)] = 1.0;
        }
        let Some(step) = jac.lu().solve(&(-g)) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let trial = y + step * lambda;
            let gt = augmented_residual(&trial, params);
            let gt_norm = gt.norm();
            if gt_norm.is_finite() && gt_norm <= (1.0 - 1e-4 * lambda) * gnorm {
                y = trial;
                g = gt;
                gnorm = gt_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        let step_size = step.amax() * lambda;
        if !accepted || step_size <= 1e-15 * (1.0 + y.amax()) {
            break;
        }
    }
    let state = MeanFieldState::from_real(&y);
    let residual = residual_norm(&state, params);
    let constraint = (state.population_sum() - 1.0).abs();
    (residual < RESIDUAL_GATE && constraint < 1e-12).then_some((state, residual))
}
