//! Time evolution of the mean-field equations: an adaptive Dormand–Prince 5(4)
//! integrator with dense output, attractor settling, and quasi-static
//! hysteresis sweeps of the drive amplitudes.

use crate::error::{BistabError, Result};
use crate::model::{rhs_real, MeanFieldState, Mode, RealStateVector, SystemParams};
use crate::observables::ObservableRecord;
use crate::steady_state::{find_all_roots, newton_refine, SteadyState};
use crate::sweep::AngleConvention;
use serde::Serialize;

// Dormand–Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const H_MIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size.
    pub h_max: f64,
    /// Disables step-size control and integrates with this step.
    pub fixed_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_steps: 50_000_000,
            h_max: f64::INFINITY,
            fixed_step: None,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorOptions { rel_tol, abs_tol, ..Default::default() }
    }

    fn check(&self) -> Result<()> {
        let ok = |t: f64| t > 1e-14 && t < 1e-2;
        if self.fixed_step.is_none() && !(ok(self.rel_tol) && ok(self.abs_tol)) {
            return Err(BistabError::InvalidParams(format!(
                "integrator tolerances must lie in (1e-14, 1e-2), got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(BistabError::InvalidParams(format!("fixed step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Which states a [`Trajectory`] keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Every accepted step (plus the initial state).
    Steps,
    /// Dense output at these increasing times in `[0, t_end]`.
    At(Vec<f64>),
    /// Only the initial and final states.
    Endpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

struct Stepper<'a> {
    params: &'a SystemParams,
    evaluations: usize,
}

struct StepResult {
    y1: RealStateVector,
    k7: RealStateVector,
    err: RealStateVector,
    dense: [RealStateVector; 5],
}

impl Stepper<'_> {
    fn f(&mut self, y: &RealStateVector) -> RealStateVector {
        self.evaluations += 1;
        rhs_real(y, self.params)
    }

    fn step(&mut self, y0: &RealStateVector, k1: &RealStateVector, h: f64) -> StepResult {
        let k2 = self.f(&(y0 + k1 * (h * A21)));
        let k3 = self.f(&(y0 + (k1 * A31 + k2 * A32) * h));
        let k4 = self.f(&(y0 + (k1 * A41 + k2 * A42 + k3 * A43) * h));
        let k5 = self.f(&(y0 + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
        let k6 = self.f(&(y0 + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h));
        let y1 = y0 + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        let k7 = self.f(&y1);
        let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let r2 = y1 - y0;
        let r3 = k1 * h - r2;
        let r4 = r2 - k7 * h - r3;
        let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
        StepResult { y1, k7, err, dense: [*y0, r2, r3, r4, r5] }
    }
}

fn dense_eval(d: &[RealStateVector; 5], theta: f64) -> RealStateVector {
    let t1 = 1.0 - theta;
    d[0] + (d[1] + (d[2] + (d[3] + d[4] * t1) * theta) * t1) * theta
}

fn error_norm(err: &RealStateVector, y0: &RealStateVector, y1: &RealStateVector, o: &IntegratorOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..err.len() {
        let sc = o.abs_tol + o.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / err.len() as f64).sqrt()
}

fn initial_step(f0: &RealStateVector, y0: &RealStateVector, o: &IntegratorOptions, stepper: &mut Stepper) -> f64 {
    let sc = y0.map(|v| o.abs_tol + o.rel_tol * v.abs());
    let d0 = y0.component_div(&sc).norm() / (y0.len() as f64).sqrt();
    let d1 = f0.component_div(&sc).norm() / (y0.len() as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let f1 = stepper.f(&(y0 + f0 * h0));
    let d2 = (f1 - f0).component_div(&sc).norm() / (y0.len() as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(o.h_max)
}

/// Integrates from `t = 0` to `t_end`.
pub fn integrate(
    state0: &MeanFieldState,
    params: &SystemParams,
    t_end: f64,
    options: &IntegratorOptions,
    sampling: &Sampling,
) -> Result<Trajectory> {
    options.check()?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(BistabError::InvalidParams(format!("t_end must be finite and nonnegative, got {t_end}")));
    }
    let mut stepper = Stepper { params, evaluations: 0 };
    let mut y = state0.to_real();
    let mut t = 0.0;
    let mut traj = Trajectory { times: vec![], states: vec![], accepted: 0, rejected: 0 };

    let samples: &[f64] = match sampling {
        Sampling::At(ts) => ts,
        _ => &[],
    };
    let mut next_sample = 0;
    if let Sampling::At(ts) = sampling {
        if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|&s| s < 0.0 || s > t_end) {
            return Err(BistabError::InvalidParams("sample times must increase within [0, t_end]".into()));
        }
        while next_sample < samples.len() && samples[next_sample] <= 0.0 {
            traj.times.push(samples[next_sample]);
            traj.states.push(*state0);
            next_sample += 1;
        }
    } else {
        traj.times.push(0.0);
        traj.states.push(*state0);
    }

    let mut k1 = stepper.f(&y);
    let mut h = match options.fixed_step {
        Some(h) => h,
        None => initial_step(&k1, &y, options, &mut stepper),
    };
    let mut err_old = 1e-4f64;
    let mut last_rejected = false;

    while t < t_end {
        if traj.accepted + traj.rejected >= options.max_steps {
            return Err(BistabError::TooManySteps(options.max_steps));
        }
        let remaining = t_end - t;
        let mut h_try = h.min(options.h_max);
        let last = h_try >= remaining * (1.0 - 1e-12);
        if last {
            h_try = remaining;
        }
        let step = stepper.step(&y, &k1, h_try);
        let err = match options.fixed_step {
            Some(_) => 0.0,
            None => error_norm(&step.err, &y, &step.y1, options),
        };
        if !err.is_finite() || !step.y1.iter().all(|v| v.is_finite()) {
            traj.rejected += 1;
            h = h_try * 0.2;
        } else if err <= 1.0 {
            let t_new = if last { t_end } else { t + h_try };
            while next_sample < samples.len() && samples[next_sample] <= t_new {
                let theta = (samples[next_sample] - t) / h_try;
                traj.times.push(samples[next_sample]);
                traj.states.push(MeanFieldState::from_real(&dense_eval(&step.dense, theta)));
                next_sample += 1;
            }
            t = t_new;
            y = step.y1;
            k1 = step.k7;
            traj.accepted += 1;
            if matches!(sampling, Sampling::Steps) {
                traj.times.push(t);
                traj.states.push(MeanFieldState::from_real(&y));
            }
            if options.fixed_step.is_none() {
                // PI controller (Hairer's DOPRI5 defaults)
                let fac = 0.9 * err.max(1e-10).powf(-0.17) * err_old.powf(0.04);
                let fac = fac.clamp(0.2, 10.0);
                h = if last_rejected { h_try * fac.min(1.0) } else { h_try * fac };
                err_old = err.max(1e-4);
            }
            last_rejected = false;
        } else {
            traj.rejected += 1;
            last_rejected = true;
            h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
        }
        if options.fixed_step.is_none() && h < H_MIN && t < t_end {
            return Err(BistabError::StepUnderflow {
                t,
                h,
                last: Box::new(MeanFieldState::from_real(&y)),
            });
        }
    }
    if matches!(sampling, Sampling::Endpoints) {
        traj.times.push(t);
        traj.states.push(MeanFieldState::from_real(&y));
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettleOptions {
    /// Convergence threshold on `‖rhs‖₂`.
    pub eps: f64,
    pub t_max: f64,
    pub integrator: IntegratorOptions,
    /// Hand off to Newton once the flow is slow and two consecutive checkpoints
    /// point at the same stable fixed point.
    pub newton_handoff: bool,
}

impl Default for SettleOptions {
    fn default() -> Self {
        SettleOptions {
            eps: 1e-9,
            t_max: 1e5,
            integrator: IntegratorOptions::default(),
            newton_handoff: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SettleOutcome {
    Converged { steady: SteadyState, t: f64 },
    NonConvergence { last: MeanFieldState, t: f64, rhs_norm: f64 },
}

impl SettleOutcome {
    pub fn steady(&self) -> Option<&SteadyState> {
        match self {
            SettleOutcome::Converged { steady, .. } => Some(steady),
            SettleOutcome::NonConvergence { .. } => None,
        }
    }

    pub fn final_state(&self) -> MeanFieldState {
        match self {
            SettleOutcome::Converged { steady, .. } => steady.state,
            SettleOutcome::NonConvergence { last, .. } => *last,
        }
    }
}

const HANDOFF_RHS: f64 = 1e-4;
const HANDOFF_RADIUS: f64 = 1e-3;

/// Follows the flow from `state0` until it comes to rest.
///
/// Integration proceeds in checkpoints of growing length. The run converges
/// when `‖rhs‖₂ < eps`; the resting state is then Newton-polished and
/// classified. Hitting `t_max` yields [`SettleOutcome::NonConvergence`].
pub fn settle(state0: &MeanFieldState, params: &SystemParams, options: &SettleOptions) -> Result<SettleOutcome> {
    if !(options.eps >= 1e-12) {
        return Err(BistabError::InvalidParams(format!("settle eps must be ≥ 1e-12, got {}", options.eps)));
    }
    let mut state = *state0;
    let mut t = 0.0;
    let mut chunk: f64 = 1.0;
    let mut candidate: Option<(MeanFieldState, f64)> = None;
    loop {
        let r = rhs_real(&state.to_real(), params).norm();
        if r < options.eps {
            let (target, residual) = match newton_refine(&state, params, 30) {
                Some((fp, res)) if fp.distance(&state) < 1e-6 => (fp, res),
                _ => (state, r),
            };
            return match SteadyState::from_refined(target, residual, params) {
                Ok(steady) => Ok(SettleOutcome::Converged { steady, t }),
                Err(BistabError::NotAFixedPoint(_)) => {
                    Ok(SettleOutcome::NonConvergence { last: state, t, rhs_norm: r })
                }
                Err(e) => Err(e),
            };
        }
        if options.newton_handoff && r < HANDOFF_RHS {
            let found = newton_refine(&state, params, 30)
                .filter(|(fp, _)| fp.distance(&state) < HANDOFF_RADIUS);
            match (found, candidate) {
                (Some((fp, res)), Some((prev, prev_dist))) if fp.distance(&prev) < 1e-9 => {
                    let d = fp.distance(&state);
                    if d < prev_dist && res < options.eps {
                        let steady = SteadyState::from_refined(fp, res, params)?;
                        if steady.stable {
                            return Ok(SettleOutcome::Converged { steady, t });
                        }
                    }
                    candidate = Some((fp, d));
                }
                (Some((fp, _)), _) => candidate = Some((fp, fp.distance(&state))),
                (None, _) => candidate = None,
            }
        }
        if t >= options.t_max {
            return Ok(SettleOutcome::NonConvergence { last: state, t, rhs_norm: r });
        }
        let span = chunk.min(options.t_max - t);
        let traj = integrate(&state, params, span, &options.integrator, &Sampling::Endpoints)?;
        state = *traj.last();
        t += span;
        chunk = (chunk * 2.0).min(200.0);
    }
}

/// One node of a quasi-static control path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlPoint {
    /// Control value, e.g. the arc angle φ in radians.
    pub control: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// 0 on the outward leg, 1 on the return leg.
    pub leg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlPath {
    pub points: Vec<ControlPoint>,
}

impl ControlPath {
    /// φ from `from` to `to` in `n_steps` equal steps at fixed radius.
    pub fn arc(radius: f64, from: f64, to: f64, n_steps: usize, convention: AngleConvention) -> Self {
        let points = (0..=n_steps)
            .map(|k| {
                let phi = from + (to - from) * k as f64 / n_steps as f64;
                let (eta1, eta2) = convention.drives(radius, phi);
                ControlPoint { control: phi, eta1, eta2, leg: 0 }
            })
            .collect();
        ControlPath { points }
    }

    /// φ: 0 → π/2 → 0, `n_steps` steps per leg; the turning point is visited once.
    pub fn arc_round_trip(radius: f64, n_steps: usize, convention: AngleConvention) -> Self {
        let up = Self::arc(radius, 0.0, std::f64::consts::FRAC_PI_2, n_steps, convention);
        let mut points = up.points.clone();
        points.extend(up.points.iter().rev().skip(1).map(|p| ControlPoint { leg: 1, ..*p }));
        ControlPath { points }
    }

    pub fn reversed(&self) -> Self {
        let max_leg = self.points.iter().map(|p| p.leg).max().unwrap_or(0);
        ControlPath {
            points: self.points.iter().rev().map(|p| ControlPoint { leg: max_leg - p.leg, ..*p }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub point: ControlPoint,
    pub state: MeanFieldState,
    pub steady: Option<SteadyState>,
    pub observables: ObservableRecord,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisOptions {
    pub settle: SettleOptions,
    /// Seed state for the first point; defaults to the lowest-`x1` stable
    /// fixed point there.
    pub initial: Option<MeanFieldState>,
}

impl Default for HysteresisOptions {
    fn default() -> Self {
        HysteresisOptions { settle: SettleOptions::default(), initial: None }
    }
}

/// Quasi-static sweep: each point settles from the previous settled state.
///
/// Non-convergent points are recorded with `converged = false` and the sweep
/// continues from their last state.
pub fn hysteresis_sweep(
    params_base: &SystemParams,
    path: &ControlPath,
    options: &HysteresisOptions,
) -> Result<Vec<SweepRecord>> {
    if path.points.len() < 11 {
        return Err(BistabError::InvalidParams("hysteresis path needs at least 10 steps".into()));
    }
    let first = path.points[0];
    let first_params = params_base.with_drives(first.eta1, first.eta2);
    let mut seed = match options.initial {
        Some(s) => s,
        None => find_all_roots(&first_params)
            .ok()
            .and_then(|set| set.stable().next().map(|s| s.state))
            .unwrap_or_else(|| MeanFieldState::ground(crate::Mode::One)),
    };
    let mut records = Vec::with_capacity(path.points.len());
    for point in &path.points {
        let params = params_base.with_drives(point.eta1, point.eta2);
        let outcome = settle(&seed, &params, &options.settle)?;
        let state = outcome.final_state();
        records.push(SweepRecord {
            point: *point,
            state,
            steady: outcome.steady().copied(),
            observables: ObservableRecord::of_state(&state, &params),
            converged: outcome.steady().is_some(),
        });
        seed = state;
    }
    Ok(records)
}

/// Transmittance trace of one leg as `(control, T)` in path order.
pub fn leg_trace(records: &[SweepRecord], leg: usize, mode: Mode) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| r.point.leg == leg)
        .filter_map(|r| r.observables.transmittance(mode).map(|t| (r.point.control, t)))
        .collect()
}

/// `∫|T_forward − T_backward| d(control)` over the controls both legs visit
/// (trapezoid rule on the forward grid).
pub fn hysteresis_loop_area(records: &[SweepRecord], mode: Mode) -> f64 {
    let fwd = leg_trace(records, 0, mode);
    let bwd = leg_trace(records, 1, mode);
    let diffs: Vec<(f64, f64)> = fwd
        .iter()
        .filter_map(|&(c, t)| bwd.iter().find(|b| b.0 == c).map(|b| (c, (t - b.1).abs())))
        .collect();
    diffs.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0).abs()).sum()
}

/// Controls at which a leg's transmittance jumps by more than `threshold`
/// between consecutive points (reported at the later point).
pub fn jump_controls(records: &[SweepRecord], leg: usize, mode: Mode, threshold: f64) -> Vec<f64> {
    leg_trace(records, leg, mode)
        .windows(2)
        .filter(|w| (w[1].1 - w[0].1).abs() > threshold)
        .map(|w| w[1].0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mode;
    use crate::steady_state::random_physical_state;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponential_decay_of_empty_cavity() {
        // g = 0: α(t) = α∞ + (α0 − α∞)e^{−κt}
        let mut p = SystemParams::baseline(5000.0, 1.0, 0.0);
        p.g_single = 0.0;
        let s0 = MeanFieldState::ground(Mode::One);
        let traj = integrate(&s0, &p, 3.0, &IntegratorOptions::with_tolerances(1e-12, 1e-12), &Sampling::At(vec![0.5, 1.0, 3.0])).unwrap();
        assert_eq!(traj.times, vec![0.5, 1.0, 3.0]);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let want = (1.0 - (-1.32 * t).exp()) / 1.32;
            assert!((s.alpha1 - Complex64::new(want, 0.0)).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn fixed_point_is_preserved() {
        let p = SystemParams::baseline(5000.0, 0.8, 0.8);
        for ss in find_all_roots(&p).unwrap().solutions {
            let traj = integrate(&ss.state, &p, 10.0, &IntegratorOptions::default(), &Sampling::Endpoints).unwrap();
            assert!(traj.last().distance(&ss.state) < 1e-7);
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        let p = SystemParams::baseline(5000.0, 0.8, 0.8);
        let s = MeanFieldState::ground(Mode::One);
        let o = IntegratorOptions::with_tolerances(1e-16, 1e-10);
        assert!(integrate(&s, &p, 1.0, &o, &Sampling::Steps).is_err());
    }

    #[test]
    fn conserves_population_sum() {
        let p = SystemParams::baseline(5000.0, 1.5, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = random_physical_state(&p, &mut rng);
        let traj = integrate(&s0, &p, 200.0, &IntegratorOptions::default(), &Sampling::Steps).unwrap();
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        for s in &traj.states {
            assert!((s.population_sum() - s0.population_sum()).abs() < 1e-8);
        }
    }

    #[test]
    fn settles_on_unique_solution() {
        let phi = 0.9f64;
        let p = SystemParams::baseline(5000.0, 4.5 * phi.sin(), 4.5 * phi.cos());
        let want = find_all_roots(&p).unwrap();
        assert_eq!(want.len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s0 = random_physical_state(&p, &mut rng);
        let out = settle(&s0, &p, &SettleOptions::default()).unwrap();
        let got = out.steady().expect("converged");
        assert!(got.state.distance(&want.solutions[0].state) < 1e-6);
        assert!(got.stable);
    }

    #[test]
    fn bistable_basins() {
        let p = SystemParams::baseline(5000.0, 0.8, 0.8);
        let set = find_all_roots(&p).unwrap();
        for ss in set.stable() {
            let mut start = ss.state;
            start.alpha1 *= 1.02;
            start.ng1 += 1e-3;
            start.ng2 -= 1e-3;
            let out = settle(&start, &p, &SettleOptions::default()).unwrap();
            assert!(out.steady().unwrap().state.distance(&ss.state) < 1e-6);
        }
    }

    #[test]
    fn unstable_branch_is_left_after_perturbation() {
        let p = SystemParams::baseline(5000.0, 0.8, 0.8);
        let set = find_all_roots(&p).unwrap();
        let middle = set.solutions.iter().find(|s| !s.stable).unwrap();
        let traj = integrate(&middle.state, &p, 10.0, &IntegratorOptions::default(), &Sampling::Steps).unwrap();
        assert!(traj.states.iter().all(|s| s.distance(&middle.state) < 1e-6));

        let mut kicked = middle.state;
        kicked.ng1 += 1e-6;
        kicked.ng2 -= 1e-6;
        let out = settle(&kicked, &p, &SettleOptions::default()).unwrap();
        let end = out.steady().unwrap();
        assert!(end.stable);
        assert!(set.stable().any(|s| s.state.distance(&end.state) < 1e-6));
    }

    #[test]
    fn round_trip_path_layout() {
        let path = ControlPath::arc_round_trip(1.0, 10, AngleConvention::FromAxis1);
        assert_eq!(path.points.len(), 21);
        assert_eq!(path.points[10].control, std::f64::consts::FRAC_PI_2);
        assert_eq!(path.points[20].control, 0.0);
        let rev = path.reversed();
        let fwd: Vec<f64> = path.points.iter().map(|p| p.control).collect();
        let mut back: Vec<f64> = rev.points.iter().map(|p| p.control).collect();
        back.reverse();
        assert_eq!(fwd, back);
    }
}
