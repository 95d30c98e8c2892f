//! Independent fixed-point search used to cross-check the polynomial route:
//! damped Newton and ODE settling from random physical initial states.

use super::{is_physical, newton_refine, SolutionSet, SteadyState, PHYSICAL_TOL};
use crate::dynamics::{settle, SettleOptions};
use crate::error::{BistabError, Result};
use crate::model::{validate, MeanFieldState, Mode, SystemParams};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Gamma};

/// Random state on the physical manifold.
///
/// Three families are mixed in equal parts: flat Dirichlet populations,
/// corner-concentrated Dirichlet populations, and near-pure ground states with
/// weak fields. Fields lie in a disc of twice the empty-cavity amplitude and
/// coherences respect `|m|² ≤ n_e·n_g`.
pub fn random_physical_state(params: &SystemParams, rng: &mut ChaCha8Rng) -> MeanFieldState {
    let family = rng.gen_range(0..3u8);
    let [ne1, ng1, ne2, ng2] = if family < 2 {
        let shape = if family == 0 { 1.0 } else { 0.25 };
        let gamma = Gamma::new(shape, 1.0).expect("positive shape");
        let mut w = [0.0f64; 4];
        for v in w.iter_mut() {
            let s: f64 = gamma.sample(rng);
            *v = s.max(1e-300);
        }
        let total: f64 = w.iter().sum();
        w.map(|v| v / total)
    } else {
        // a fraction up to 10% spread uniformly over the other three levels
        let leak = 0.1 * rng.gen::<f64>();
        let mut w = [leak / 3.0; 4];
        w[if rng.gen_bool(0.5) { 1 } else { 3 }] = 1.0 - leak;
        w
    };
    let field_scale = if family == 2 { 0.1 } else { 1.0 };

    let field = |mode: Mode, rng: &mut ChaCha8Rng| {
        let p = params.mode(mode);
        let radius = field_scale * (2.0 * p.eta / p.kappa).max(0.1) * rng.gen::<f64>().sqrt();
        Complex64::from_polar(radius, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let alpha1 = field(Mode::One, rng);
    let alpha2 = field(Mode::Two, rng);
    let coherence = |ne: f64, ng: f64, rng: &mut ChaCha8Rng| {
        let r = (ne * ng).sqrt() * rng.gen::<f64>();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let m1 = coherence(ne1, ng1, rng);
    let m2 = coherence(ne2, ng2, rng);
    MeanFieldState { alpha1, alpha2, m1, m2, ne1, ng1, ne2, ng2 }
}

/// What a multistart search found.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Union of Newton and settle end points.
    pub set: SolutionSet,
    /// Distinct fixed points reached by ODE settling.
    pub settled: Vec<SteadyState>,
    /// Starts whose settle run did not converge.
    pub settle_failures: usize,
}

/// Fixed points reached by Newton iteration and by ODE settling from
/// `n_starts` random physical states. Deterministic for a given seed.
///
/// The result is only a lower bound on the true solution set.
pub fn multistart_oracle(
    params: &SystemParams,
    n_starts: usize,
    seed: u64,
    settle_options: &SettleOptions,
) -> Result<SolutionSet> {
    multistart_report(params, n_starts, seed, settle_options).map(|r| r.set)
}

/// [`multistart_oracle`] keeping track of which points settling reached.
pub fn multistart_report(
    params: &SystemParams,
    n_starts: usize,
    seed: u64,
    settle_options: &SettleOptions,
) -> Result<OracleReport> {
    validate(params).into_result()?;
    if n_starts < 50 {
        return Err(BistabError::InvalidParams(format!("oracle needs at least 50 starts, got {n_starts}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let empty = || SolutionSet { solutions: Vec::new(), params: *params, warnings: Vec::new() };
    let (mut set, mut settled) = (empty(), empty());
    let mut settle_failures = 0;
    for _ in 0..n_starts {
        let start = random_physical_state(params, &mut rng);
        if let Some((state, residual)) = newton_refine(&start, params, 100) {
            if let Ok(ss) = SteadyState::from_refined(state, residual, params) {
                if is_physical(&ss.state, PHYSICAL_TOL) {
                    set.insert_unique(ss);
                }
            }
        }
        match settle(&start, params, settle_options)?.steady() {
            Some(ss) if is_physical(&ss.state, PHYSICAL_TOL) => {
                set.insert_unique(*ss);
                settled.insert_unique(*ss);
            }
            Some(_) => {}
            None => settle_failures += 1,
        }
    }
    set.sort();
    settled.sort();
    Ok(OracleReport { set, settled: settled.solutions, settle_failures })
}

/// Stable fixed points reached by settling alone, one entry per start
/// (`None` when the start did not converge).
pub fn settle_endpoints(
    params: &SystemParams,
    n_starts: usize,
    seed: u64,
    settle_options: &SettleOptions,
) -> Vec<Option<SteadyState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_starts)
        .map(|_| {
            let start = random_physical_state(params, &mut rng);
            settle(&start, params, settle_options).ok().and_then(|o| o.steady().copied())
        })
        .collect()
}
