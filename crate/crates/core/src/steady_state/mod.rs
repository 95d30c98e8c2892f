//! Every fixed point of the mean-field equations at one parameter point.
//!
//! Pipeline of [`find_all_roots`]: eliminate fields and polarizations into a
//! degree-7 polynomial in `x1 = n_e1 − n_g1`, take its real roots from the
//! balanced companion matrix, lift each to a full state, Newton-polish on the
//! complete system, drop unphysical and duplicate points, classify stability.

mod oracle;
mod reduction;
mod refine;
mod stability;

pub use oracle::{multistart_oracle, multistart_report, random_physical_state, settle_endpoints, OracleReport};
pub use reduction::{
    alpha_of_x, excited_population_of_x, fixed_point_residuals, polarization_of_x,
    polynomial_in_x1, real_roots_in, ModeReduction, Reduction,
};
pub use refine::{newton_refine, residual_norm, RESIDUAL_GATE};
pub use stability::{classify_stability, full_spectrum, reduced_spectrum, Stability, EPS_STAB, EPS_ZERO};

use crate::error::{BistabError, Result};
use crate::model::{validate, MeanFieldState, Mode, SystemParams};
use serde::Serialize;

/// Max-norm distance below which two fixed points are the same.
pub const DEDUP_TOL: f64 = 1e-7;
/// Slack on population non-negativity for a fixed point to count as physical.
pub const PHYSICAL_TOL: f64 = 1e-9;

const NEWTON_MAX_ITER: usize = 60;

/// A refined, classified fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub state: MeanFieldState,
    pub residual_norm: f64,
    pub stable: bool,
    /// Set when a retained eigenvalue has |Re λ| < [`EPS_ZERO`]; such points are
    /// never counted as stable.
    pub marginal: bool,
    pub spectrum_max_real: f64,
    pub x1: f64,
    pub x2: f64,
}

impl SteadyState {
    /// Classifies a refined state. A marginal spectrum yields `marginal = true`.
    pub fn from_refined(state: MeanFieldState, residual_norm: f64, params: &SystemParams) -> Result<Self> {
        let (stable, marginal, spectrum_max_real) = match classify_stability(&state, params) {
            Ok(s) => (s.stable, false, s.spectrum_max_real),
            Err(BistabError::Marginal(_)) => {
                let max = reduced_spectrum(&state, params)
                    .iter()
                    .map(|z| z.re)
                    .fold(f64::NEG_INFINITY, f64::max);
                (false, true, max)
            }
            Err(e) => return Err(e),
        };
        Ok(SteadyState {
            state,
            residual_norm,
            stable,
            marginal,
            spectrum_max_real,
            x1: state.inversion(Mode::One),
            x2: state.inversion(Mode::Two),
        })
    }

    pub fn swapped(&self) -> Self {
        SteadyState {
            state: self.state.swapped(),
            x1: self.x2,
            x2: self.x1,
            ..*self
        }
    }
}

/// Non-fatal events recorded while solving one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SolverWarning {
    /// A real polynomial root whose Newton refinement did not meet the residual gate.
    Unrefined { x1: f64 },
    /// A fixed point on a stability boundary.
    Marginal { x1: f64 },
    /// Leading polynomial coefficients dropped as numerically zero.
    DegreeDrop(usize),
}

impl std::fmt::Display for SolverWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverWarning::Unrefined { x1 } => write!(f, "unrefined root at x1 = {x1:e}"),
            SolverWarning::Marginal { x1 } => write!(f, "marginal fixed point at x1 = {x1:e}"),
            SolverWarning::DegreeDrop(k) => write!(f, "polynomial degree dropped by {k}"),
        }
    }
}

/// All coexisting fixed points at one parameter point, sorted by `x1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub solutions: Vec<SteadyState>,
    pub params: SystemParams,
    pub warnings: Vec<SolverWarning>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn stable_count(&self) -> usize {
        self.solutions.iter().filter(|s| s.stable).count()
    }

    pub fn is_marginal(&self) -> bool {
        self.solutions.iter().any(|s| s.marginal)
    }

    pub fn stable(&self) -> impl Iterator<Item = &SteadyState> {
        self.solutions.iter().filter(|s| s.stable)
    }

    /// Closest member to `state` in max-norm, with its distance.
    pub fn nearest(&self, state: &MeanFieldState) -> Option<(usize, f64)> {
        self.solutions
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.state.distance(state)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Inserts `candidate` unless a member lies within [`DEDUP_TOL`].
    /// Returns whether it was inserted.
    pub fn insert_unique(&mut self, candidate: SteadyState) -> bool {
        if self.nearest(&candidate.state).is_some_and(|(_, d)| d <= DEDUP_TOL) {
            return false;
        }
        self.solutions.push(candidate);
        true
    }

    pub fn sort(&mut self) {
        self.solutions.sort_by(|a, b| a.x1.total_cmp(&b.x1).then(a.x2.total_cmp(&b.x2)));
    }
}

/// True when every population is at least `−tol`.
pub fn is_physical(state: &MeanFieldState, tol: f64) -> bool {
    [state.ne1, state.ng1, state.ne2, state.ng2].iter().all(|&p| p >= -tol && p <= 1.0 + tol)
}

/// Full state assembled from a pair of inversions via the closed forms.
pub fn lift_state(x1: f64, x2: f64, reduction: &Reduction) -> Result<MeanFieldState> {
    let r1 = &reduction.mode1;
    let r2 = &reduction.mode2;
    let alpha1 = r1.alpha(x1)?;
    let alpha2 = r2.alpha(x2)?;
    let ne1 = r1.excited(x1)?;
    let ne2 = r2.excited(x2)?;
    Ok(MeanFieldState {
        alpha1,
        alpha2,
        m1: r1.polarization(x1, alpha1),
        m2: r2.polarization(x2, alpha2),
        ne1,
        ng1: ne1 - x1,
        ne2,
        ng2: ne2 - x2,
    })
}

/// Every physical fixed point at `params`, from the polynomial reduction.
///
/// The undriven point `η₁ = η₂ = 0` has a continuum of fixed points and is
/// rejected as degenerate.
pub fn find_all_roots(params: &SystemParams) -> Result<SolutionSet> {
    validate(params).into_result()?;
    if params.eta1 == 0.0 && params.eta2 == 0.0 {
        return Err(BistabError::Degenerate(
            "undriven system: every split of the atoms between the ground states is a fixed point"
                .to_string(),
        ));
    }
    let reduction = Reduction::new(params);
    if reduction.polynomial.max_abs_coeff() < 1e-300 {
        return Err(BistabError::Degenerate(
            "eliminated polynomial vanishes identically (no cross decay)".to_string(),
        ));
    }
    let mut set = SolutionSet { solutions: Vec::new(), params: *params, warnings: Vec::new() };
    let (roots, warning) = real_roots_in(&reduction.polynomial, -1.0, 1.0 - 1e-12);
    set.warnings.extend(warning);

    for x1 in roots {
        for x2 in reduction.lift(x1)? {
            if !(-1.0 - PHYSICAL_TOL..=1.0 + PHYSICAL_TOL).contains(&x2) {
                continue;
            }
            let lifted = match lift_state(x1, x2, &reduction) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if !is_physical(&lifted, 1e-6) {
                continue;
            }
            let Some((state, residual)) = newton_refine(&lifted, params, NEWTON_MAX_ITER) else {
                set.warnings.push(SolverWarning::Unrefined { x1 });
                continue;
            };
            if !is_physical(&state, PHYSICAL_TOL) {
                continue;
            }
            let ss = SteadyState::from_refined(state, residual, params)?;
            if set.insert_unique(ss) && ss.marginal {
                set.warnings.push(SolverWarning::Marginal { x1: ss.x1 });
            }
        }
    }
    set.sort();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jacobian, rhs};

    fn solve(n: f64, e1: f64, e2: f64) -> SolutionSet {
        find_all_roots(&SystemParams::baseline(n, e1, e2)).unwrap()
    }

    fn arc_point(n: f64, radius: f64, phi: f64) -> SolutionSet {
        solve(n, radius * phi.cos(), radius * phi.sin())
    }

    #[test]
    fn single_solution_on_large_arc() {
        let set = arc_point(5000.0, 4.5, 0.6);
        assert_eq!(set.len(), 1);
        assert!(set.solutions[0].stable);
    }

    #[test]
    fn thermodynamic_limit_bistable_pair() {
        let set = arc_point(1e6, 0.29, std::f64::consts::FRAC_PI_4);
        assert_eq!(set.len(), 3);
        assert_eq!(set.stable_count(), 2);
        let stable: Vec<_> = set.stable().collect();
        // the two stable states are each other's index-swapped image
        assert!(stable[0].state.swapped().distance(&stable[1].state) < 1e-10);
    }

    #[test]
    fn undriven_is_degenerate() {
        assert!(matches!(
            find_all_roots(&SystemParams::baseline(5000.0, 0.0, 0.0)),
            Err(BistabError::Degenerate(_))
        ));
    }

    #[test]
    fn weak_single_drive_is_stable() {
        let set = solve(5000.0, 0.1, 0.0);
        assert_eq!(set.len(), 1);
        let s = &set.solutions[0];
        assert!(s.stable && s.spectrum_max_real < 0.0);
        // mode 1 driven alone pumps every atom into g2
        assert!((s.state.ng2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn middle_branch_unstable() {
        let set = arc_point(5000.0, 1.13, std::f64::consts::FRAC_PI_4);
        assert_eq!(set.len(), 3);
        assert!(set.solutions[0].stable);
        assert!(!set.solutions[1].stable);
        assert!(set.solutions[2].stable);
    }

    #[test]
    fn three_roots_inside_fig2a_bistable_domain() {
        let p = SystemParams::baseline(5000.0, 0.8, 0.8);
        let red = Reduction::new(&p);
        let (roots, _) = real_roots_in(&red.polynomial, -1.0, 0.0);
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn every_solution_meets_residual_gates() {
        for (n, e1, e2) in [(5000.0, 0.8, 0.8), (1e5, 3.0, 3.2), (1e6, 4.0, 2.0), (1e4, 0.3, 2.0)] {
            let p = SystemParams::baseline(n, e1, e2);
            let set = find_all_roots(&p).unwrap();
            assert!(set.len() % 2 == 1);
            for s in &set.solutions {
                assert!(s.residual_norm < 1e-9);
                assert!(rhs(&s.state, &p).to_real().norm() < 1e-9);
                let (r1, r2) = fixed_point_residuals(s.x1, s.x2, &p).unwrap();
                assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10, "{r1} {r2}");
            }
        }
    }

    #[test]
    fn exactly_one_structural_zero_mode() {
        for (n, e1, e2) in [(5000.0, 0.8, 0.8), (1e5, 1.0, 1.0), (1e6, 4.0, 2.0)] {
            let p = SystemParams::baseline(n, e1, e2);
            for s in find_all_roots(&p).unwrap().solutions {
                let ev = full_spectrum(&jacobian(&s.state, &p));
                let zeros = ev.iter().filter(|z| z.norm() < EPS_ZERO).count();
                assert_eq!(zeros, 1, "{ev:?}");
            }
        }
    }

    #[test]
    fn decoupled_limit_reproduces_two_level_bistability() {
        // No cross decay out of e1: every atom ends up on transition 1, which
        // then behaves as a closed two-level system with the classic cubic
        //   −2cη²x − (x + 1)Q(x) = 0.
        let mut p = SystemParams::baseline(1e5, 6.0, 1.0);
        p.cross_decay1 = 0.0;
        let r1 = ModeReduction::new(&p, Mode::One);
        let cubic = &crate::poly::Poly::linear(0.0, -2.0 * r1.c * r1.eta * r1.eta)
            - &(&crate::poly::Poly::linear(1.0, 1.0) * &r1.q);
        let (want, _) = real_roots_in(&cubic, -1.0, 0.0);
        assert_eq!(want.len(), 3, "pick a bistable two-level point");
        let set = find_all_roots(&p).unwrap();
        let got: Vec<f64> = set.solutions.iter().map(|s| s.x1).collect();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
        assert!(set.solutions.iter().all(|s| s.state.ne2.abs() < 1e-12 && s.state.ng2.abs() < 1e-9));
    }

    #[test]
    fn vanishing_cross_decay_is_continuous() {
        let mut p = SystemParams::baseline(1e5, 6.0, 1.0);
        p.cross_decay1 = 0.0;
        let limit = find_all_roots(&p).unwrap();
        let mut last = f64::INFINITY;
        for gamma in [1e-2, 1e-3, 1e-4] {
            p.cross_decay1 = gamma;
            let set = find_all_roots(&p).unwrap();
            // extra solutions holding atoms on transition 2 may exist away from
            // the limit; every limiting solution must be approached by one
            assert!(set.len() >= limit.len());
            let d = limit
                .solutions
                .iter()
                .map(|b| set.solutions.iter().map(|a| a.state.distance(&b.state)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn one_way_cross_decay_into_transition_two() {
        // Γ₂ = 0: transition 1 empties and transition 2 holds every atom.
        let mut p = SystemParams::baseline(1e4, 1.0, 2.0);
        p.cross_decay2 = 0.0;
        let set = find_all_roots(&p).unwrap();
        assert!(!set.is_empty());
        for s in &set.solutions {
            assert!(s.x1.abs() < 1e-9 && (s.state.ng2 + s.state.ne2 - 1.0).abs() < 1e-9);
        }
        let q = p.swapped();
        assert_eq!(find_all_roots(&q).unwrap().len(), set.len());
    }
}
