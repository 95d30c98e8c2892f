use crate::dynamics::{SweepRecord, Trajectory};
use crate::model::{rhs, Mode, SystemParams};
use crate::observables::ObservableRecord;
use crate::steady_state::SteadyState;
use crate::sweep::{ArcRow, NodeStatus, PhaseDiagram};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write;

pub const ARC_COLUMNS: [&str; 18] = [
    "phi_rad", "eta1", "eta2", "branch_id", "stable", "T1", "T2", "ng1", "ng2", "ne1", "ne2", "x1", "x2",
    "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "residual",
];

pub const GRID_COLUMNS: [&str; 5] = ["eta1", "eta2", "n_total", "n_stable", "marginal"];

pub const TRAJECTORY_COLUMNS: [&str; 15] = [
    "t", "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "re_m1", "im_m1", "re_m2", "im_m2", "ne1", "ng1",
    "ne2", "ng2", "T1", "T2",
];

pub const SCAN_SUMMARY_COLUMNS: [&str; 4] = ["N", "cooperativity", "bistable_width", "max_stable_purity_proxy"];

/// 17 significant digits; exact round trip for every finite double.
pub fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_number(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), csv_number)
}

pub(crate) fn header(columns: &[&str]) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    s
}

/// One arc-schema line; `prefix` fields (e.g. the atom number) come first.
#[allow(clippy::too_many_arguments)]
fn arc_line(
    out: &mut String,
    prefix: &[String],
    phi: f64,
    eta1: f64,
    eta2: f64,
    branch_id: usize,
    stable: bool,
    obs: &ObservableRecord,
    x: (f64, f64),
    state: &crate::model::MeanFieldState,
    residual: f64,
) {
    let mut fields: Vec<String> = prefix.to_vec();
    fields.extend([csv_number(phi), csv_number(eta1), csv_number(eta2)]);
    fields.push(branch_id.to_string());
    fields.push(if stable { "1" } else { "0" }.to_string());
    fields.extend([opt_number(obs.t1), opt_number(obs.t2)]);
    fields.extend([obs.ng1, obs.ng2, obs.ne1, obs.ne2, x.0, x.1].map(csv_number));
    fields.extend(
        [state.alpha1.re, state.alpha1.im, state.alpha2.re, state.alpha2.im, residual].map(csv_number),
    );
    let _ = writeln!(out, "{}", fields.join(","));
}

pub(crate) fn steady_row(out: &mut String, prefix: &[String], phi: f64, params: &SystemParams, id: usize, ss: &SteadyState) {
    let obs = ObservableRecord::of_state(&ss.state, params);
    arc_line(out, prefix, phi, params.eta1, params.eta2, id, ss.stable, &obs, (ss.x1, ss.x2), &ss.state, ss.residual_norm);
}

pub(crate) fn arc_rows(out: &mut String, prefix: &[String], params_base: &SystemParams, rows: &[ArcRow]) {
    for r in rows {
        let params = params_base.with_drives(r.eta1, r.eta2);
        steady_row(out, prefix, r.phi, &params, r.branch_id, &r.steady);
    }
}

/// Hysteresis records in the arc schema; `branch_id` is the sweep leg.
pub(crate) fn hysteresis_rows(out: &mut String, params_base: &SystemParams, records: &[SweepRecord]) {
    for r in records {
        let params = params_base.with_drives(r.point.eta1, r.point.eta2);
        let (stable, residual) = match &r.steady {
            Some(ss) => (ss.stable, ss.residual_norm),
            None => (false, rhs(&r.state, &params).to_real().norm()),
        };
        let x = (r.state.inversion(Mode::One), r.state.inversion(Mode::Two));
        arc_line(out, &[], r.point.control, r.point.eta1, r.point.eta2, r.point.leg, stable, &r.observables, x, &r.state, residual);
    }
}

pub(crate) fn grid_rows(out: &mut String, pd: &PhaseDiagram) {
    for n in &pd.nodes {
        let (total, stable, marginal) = match n.status {
            NodeStatus::Solved { n_total, n_stable, marginal } => {
                (n_total.to_string(), n_stable.to_string(), if marginal { "1" } else { "0" })
            }
            _ => (String::new(), String::new(), "0"),
        };
        let _ = writeln!(out, "{},{},{},{},{}", csv_number(n.eta1), csv_number(n.eta2), total, stable, marginal);
    }
}

pub(crate) fn trajectory_rows(out: &mut String, params: &SystemParams, traj: &Trajectory) {
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let obs = ObservableRecord::of_state(s, params);
        let mut fields: Vec<String> = [
            *t, s.alpha1.re, s.alpha1.im, s.alpha2.re, s.alpha2.im, s.m1.re, s.m1.im, s.m2.re, s.m2.im, s.ne1, s.ng1,
            s.ne2, s.ng2,
        ]
        .iter()
        .map(|&x| csv_number(x))
        .collect();
        fields.extend([opt_number(obs.t1), opt_number(obs.t2)]);
        let _ = writeln!(out, "{}", fields.join(","));
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    /// Collective coupling `g_single·√N`.
    pub g_collective: f64,
    pub cooperativity1: f64,
    pub cooperativity2: f64,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration (every key, per-mode form).
    pub config: toml::Table,
    pub derived: Derived,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub files: Vec<FileEntry>,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is always serializable")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::BistabError::Config { key: "<manifest>".into(), msg: e.to_string() })
    }

    /// The configuration this manifest was produced from.
    pub fn run_config(&self) -> crate::Result<super::RunConfig> {
        super::RunConfig::from_table(&self.config)
    }
}
