//! Measurable quantities: transmittance (the order parameter), populations,
//! the excited-population purity proxy, and physicality diagnostics.

use crate::error::{BistabError, Result};
use crate::model::{cooperativity, MeanFieldState, Mode, SystemParams};
use crate::steady_state::SteadyState;
use serde::Serialize;

/// Observables of one state. Transmittances are `None` for an undriven mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub ng1: f64,
    pub ng2: f64,
    pub ne1: f64,
    pub ne2: f64,
    pub purity_proxy: f64,
    /// Intracavity photon numbers `N·|α_i|²`.
    pub photon1: f64,
    pub photon2: f64,
}

impl ObservableRecord {
    pub fn of_state(state: &MeanFieldState, params: &SystemParams) -> Self {
        ObservableRecord {
            t1: transmittance_of_state(state, params, Mode::One).ok(),
            t2: transmittance_of_state(state, params, Mode::Two).ok(),
            ng1: state.ng1,
            ng2: state.ng2,
            ne1: state.ne1,
            ne2: state.ne2,
            purity_proxy: state.ne1 + state.ne2,
            photon1: params.atom_number * state.alpha1.norm_sqr(),
            photon2: params.atom_number * state.alpha2.norm_sqr(),
        }
    }

    pub fn transmittance(&self, mode: Mode) -> Option<f64> {
        match mode {
            Mode::One => self.t1,
            Mode::Two => self.t2,
        }
    }
}

fn transmittance_of_state(state: &MeanFieldState, params: &SystemParams, mode: Mode) -> Result<f64> {
    let p = params.mode(mode);
    if p.eta == 0.0 {
        return Err(BistabError::ZeroDrive(mode.number()));
    }
    Ok(p.kappa * p.kappa * state.alpha(mode).norm_sqr() / (p.eta * p.eta))
}

/// Intracavity intensity normalized to the resonantly driven empty cavity,
/// `κ²|α|²/η²`, evaluated on the self-consistent steady state.
pub fn transmittance_exact(ss: &SteadyState, params: &SystemParams, mode: Mode) -> Result<f64> {
    transmittance_of_state(&ss.state, params, mode)
}

/// Large-detuning approximation `1/(1 + C²x²)`.
pub fn transmittance_approx(x: f64, params: &SystemParams, mode: Mode) -> f64 {
    let c = cooperativity(params, mode);
    1.0 / (1.0 + c * c * x * x)
}

/// Total excited population `n_e1 + n_e2`.
pub fn purity_proxy(ss: &SteadyState) -> f64 {
    ss.state.ne1 + ss.state.ne2
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub flags: Vec<String>,
}

impl DiagnosticReport {
    pub fn is_clean(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Flags populations outside `[−tol, 1+tol]`, a population sum off by more
/// than `tol`, and coherences violating `|m_i|² ≤ n_ei·n_gi + tol`.
pub fn physicality_check(state: &MeanFieldState, tol: f64) -> DiagnosticReport {
    let mut flags = Vec::new();
    for (name, v) in [("ne1", state.ne1), ("ng1", state.ng1), ("ne2", state.ne2), ("ng2", state.ng2)] {
        if !(v >= -tol && v <= 1.0 + tol) {
            flags.push(format!("population {name} = {v} outside [0, 1]"));
        }
    }
    let sum = state.population_sum();
    if !((sum - 1.0).abs() <= tol) {
        flags.push(format!("population sum {sum} differs from 1"));
    }
    for mode in Mode::BOTH {
        let m2 = state.polarization(mode).norm_sqr();
        let bound = state.excited(mode) * state.ground_population(mode);
        if !(m2 <= bound + tol) {
            flags.push(format!(
                "coherence bound violated on transition {}: |m|² = {m2} > n_e·n_g = {bound}",
                mode.number()
            ));
        }
    }
    DiagnosticReport { flags }
}
