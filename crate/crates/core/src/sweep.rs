//! Phase-diagram grids, circular-arc cuts of the drive plane and finite-size
//! scans, with branch connection along arcs.
//!
//! Grid and arc nodes are solved independently on the current rayon pool and
//! collected in input order, so results do not depend on the worker count.

use crate::error::Result;
use crate::model::{validate, Mode, SystemParams};
use crate::observables::purity_proxy;
use crate::steady_state::{find_all_roots, SolutionSet, SteadyState};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

/// Where the arc angle φ is measured from in the (η₁, η₂) plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AngleConvention {
    /// `η₁ = η cos φ`, `η₂ = η sin φ`, i.e. `φ = arctan(η₂/η₁)`.
    FromAxis1,
    /// `η₁ = η sin φ`, `η₂ = η cos φ`: φ measured from the vertical η₂ axis.
    #[default]
    FromVertical,
}

impl AngleConvention {
    pub fn drives(self, radius: f64, phi: f64) -> (f64, f64) {
        let (s, c) = phi.sin_cos();
        match self {
            AngleConvention::FromAxis1 => (radius * c, radius * s),
            AngleConvention::FromVertical => (radius * s, radius * c),
        }
    }

    /// Inverse of [`drives`](Self::drives): the angle of `(η₁, η₂)`.
    pub fn angle_of(self, eta1: f64, eta2: f64) -> f64 {
        match self {
            AngleConvention::FromAxis1 => eta2.atan2(eta1),
            AngleConvention::FromVertical => eta1.atan2(eta2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AngleConvention::FromAxis1 => "from-axis-1",
            AngleConvention::FromVertical => "from-vertical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "from-axis-1" => Some(AngleConvention::FromAxis1),
            "from-vertical" => Some(AngleConvention::FromVertical),
            _ => None,
        }
    }
}

/// Equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NodeStatus {
    Solved { n_total: usize, n_stable: usize, marginal: bool },
    /// Undriven origin; its fixed points form a continuum.
    Skipped,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridNode {
    pub eta1: f64,
    pub eta2: f64,
    pub status: NodeStatus,
}

/// Solution counts over a rectangular grid of drive amplitudes. Nodes are stored
/// with `eta1` as the outer and `eta2` as the inner index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub eta1_axis: Vec<f64>,
    pub eta2_axis: Vec<f64>,
    pub nodes: Vec<GridNode>,
}

impl PhaseDiagram {
    pub fn node(&self, i1: usize, i2: usize) -> &GridNode {
        &self.nodes[i1 * self.eta2_axis.len() + i2]
    }

    fn matrix<T>(&self, f: impl Fn(&NodeStatus) -> Option<T>) -> Vec<Vec<Option<T>>> {
        (0..self.eta1_axis.len())
            .map(|i| (0..self.eta2_axis.len()).map(|j| f(&self.node(i, j).status)).collect())
            .collect()
    }

    /// Stable-solution counts, `counts[i1][i2]`.
    pub fn counts(&self) -> Vec<Vec<Option<usize>>> {
        self.matrix(|s| match s {
            NodeStatus::Solved { n_stable, .. } => Some(*n_stable),
            _ => None,
        })
    }

    pub fn total_counts(&self) -> Vec<Vec<Option<usize>>> {
        self.matrix(|s| match s {
            NodeStatus::Solved { n_total, .. } => Some(*n_total),
            _ => None,
        })
    }

    pub fn marginal_mask(&self) -> Vec<Vec<bool>> {
        self.matrix(|s| match s {
            NodeStatus::Solved { marginal, .. } => Some(*marginal),
            _ => None,
        })
        .into_iter()
        .map(|row| row.into_iter().map(|v| v.unwrap_or(false)).collect())
        .collect()
    }

    /// Distinct total counts over all solved nodes, ascending.
    pub fn occurring_totals(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n.status {
                NodeStatus::Solved { n_total, .. } => Some(n_total),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn nodes_with_total(&self, total: usize) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.status, NodeStatus::Solved { n_total, .. } if n_total == total))
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &GridNode> {
        self.nodes.iter().filter(|n| matches!(n.status, NodeStatus::Failed(_)))
    }
}

fn solve_node(params: SystemParams) -> NodeStatus {
    if params.eta1 == 0.0 && params.eta2 == 0.0 {
        return NodeStatus::Skipped;
    }
    match find_all_roots(&params) {
        Ok(set) => NodeStatus::Solved {
            n_total: set.len(),
            n_stable: set.stable_count(),
            marginal: set.is_marginal(),
        },
        Err(e) => NodeStatus::Failed(e.to_string()),
    }
}

/// Stable and total fixed-point counts on a `resolution × resolution` grid over
/// `[0, eta1_max] × [0, eta2_max]`.
pub fn phase_diagram_grid(
    params_base: &SystemParams,
    eta1_max: f64,
    eta2_max: f64,
    resolution: usize,
) -> Result<PhaseDiagram> {
    validate(params_base).into_result()?;
    if resolution < 2 || !(eta1_max > 0.0) || !(eta2_max > 0.0) {
        return Err(crate::BistabError::InvalidParams(
            "grid needs resolution ≥ 2 and positive maxima".into(),
        ));
    }
    let eta1_axis = linspace(0.0, eta1_max, resolution);
    let eta2_axis = linspace(0.0, eta2_max, resolution);
    let coords: Vec<(f64, f64)> = eta1_axis
        .iter()
        .flat_map(|&e1| eta2_axis.iter().map(move |&e2| (e1, e2)))
        .collect();
    let nodes = coords
        .par_iter()
        .map(|&(eta1, eta2)| GridNode {
            eta1,
            eta2,
            status: solve_node(params_base.with_drives(eta1, eta2)),
        })
        .collect();
    Ok(PhaseDiagram { eta1_axis, eta2_axis, nodes })
}

/// One branch of an arc cut: consecutive φ indices and the fixed point there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub id: usize,
    pub points: Vec<(usize, SteadyState)>,
}

impl Branch {
    pub fn start(&self) -> usize {
        self.points.first().map(|p| p.0).unwrap_or(0)
    }

    pub fn end(&self) -> usize {
        self.points.last().map(|p| p.0).unwrap_or(0)
    }

    pub fn at(&self, phi_index: usize) -> Option<&SteadyState> {
        let first = self.start();
        if phi_index < first {
            return None;
        }
        self.points.get(phi_index - first).filter(|p| p.0 == phi_index).map(|p| &p.1)
    }
}

/// A cut of the drive plane at fixed `η₁² + η₂² = radius²`, `φ ∈ [0, π/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcSweep {
    pub params_base: SystemParams,
    pub radius: f64,
    pub convention: AngleConvention,
    pub angles: Vec<f64>,
    /// Solution set per angle; `None` where the solver failed.
    pub sets: Vec<Option<SolutionSet>>,
    pub failures: Vec<(usize, String)>,
    pub branches: Vec<Branch>,
    /// φ indices where a branch had more than one candidate continuation.
    pub ambiguities: Vec<usize>,
    /// Distance threshold used to connect consecutive branch points.
    pub jump_threshold: f64,
}

/// One CSV-ready row: a fixed point at one angle with its branch label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcRow {
    pub phi_index: usize,
    pub phi: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub branch_id: usize,
    pub steady: SteadyState,
}

impl ArcSweep {
    pub fn drives(&self, phi_index: usize) -> (f64, f64) {
        self.convention.drives(self.radius, self.angles[phi_index])
    }

    pub fn params_at(&self, phi_index: usize) -> SystemParams {
        let (e1, e2) = self.drives(phi_index);
        self.params_base.with_drives(e1, e2)
    }

    pub fn stable_count(&self, phi_index: usize) -> usize {
        self.sets[phi_index].as_ref().map_or(0, |s| s.stable_count())
    }

    pub fn total_count(&self, phi_index: usize) -> usize {
        self.sets[phi_index].as_ref().map_or(0, |s| s.len())
    }

    /// Angle spacing.
    pub fn step(&self) -> f64 {
        if self.angles.len() < 2 {
            0.0
        } else {
            self.angles[1] - self.angles[0]
        }
    }

    /// Measure of the φ set with at least two stable states (node count × Δφ).
    pub fn bistable_width(&self) -> f64 {
        let n = (0..self.angles.len()).filter(|&k| self.stable_count(k) >= 2).count();
        n as f64 * self.step()
    }

    pub fn is_multivalued(&self) -> bool {
        (0..self.angles.len()).any(|k| self.total_count(k) > 1)
    }

    /// Largest total excited population over every stable fixed point.
    pub fn max_stable_purity_proxy(&self) -> f64 {
        self.sets
            .iter()
            .flatten()
            .flat_map(|s| s.stable())
            .map(purity_proxy)
            .fold(0.0, f64::max)
    }

    /// All fixed points in (φ, x1) order with their branch ids.
    pub fn rows(&self) -> Vec<ArcRow> {
        let mut label = vec![Vec::new(); self.angles.len()];
        for b in &self.branches {
            for (k, ss) in &b.points {
                label[*k].push((b.id, *ss));
            }
        }
        let mut rows = Vec::new();
        for (k, entries) in label.iter_mut().enumerate() {
            entries.sort_by(|a, b| a.1.x1.total_cmp(&b.1.x1).then(a.0.cmp(&b.0)));
            let (eta1, eta2) = self.drives(k);
            for (id, ss) in entries.iter() {
                rows.push(ArcRow { phi_index: k, phi: self.angles[k], eta1, eta2, branch_id: *id, steady: *ss });
            }
        }
        rows
    }

    /// Interior branch endpoints (φ indices strictly inside the arc) as
    /// `(phi_index, branch_id, stable, is_start)`.
    pub fn fold_endpoints(&self) -> Vec<(usize, usize, bool, bool)> {
        let last = self.angles.len().saturating_sub(1);
        let mut out = Vec::new();
        for b in &self.branches {
            let (s, e) = (b.start(), b.end());
            if s > 0 {
                out.push((s, b.id, b.points[0].1.stable, true));
            }
            if e < last {
                out.push((e, b.id, b.points.last().unwrap().1.stable, false));
            }
        }
        out.sort_by_key(|v| (v.0, v.1));
        out
    }
}

fn reduced_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// Connects solution sets along consecutive angles into branches by nearest
/// neighbour in `(x1, x2)`, using linear extrapolation of each branch.
fn connect_branches(sets: &[Option<SolutionSet>]) -> (Vec<Branch>, Vec<usize>, f64) {
    let coords = |s: &SteadyState| (s.x1, s.x2);
    // typical consecutive step
    let mut steps = Vec::new();
    for w in sets.windows(2) {
        if let (Some(prev), Some(cur)) = (&w[0], &w[1]) {
            for s in &cur.solutions {
                if let Some(d) = prev
                    .solutions
                    .iter()
                    .map(|p| reduced_distance(coords(p), coords(s)))
                    .min_by(f64::total_cmp)
                {
                    steps.push(d);
                }
            }
        }
    }
    steps.sort_by(f64::total_cmp);
    let median = steps.get(steps.len() / 2).copied().unwrap_or(0.0);
    let threshold = (10.0 * median).max(1e-12);

    let mut branches: Vec<Branch> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let mut ambiguities = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let Some(set) = set else {
            open.clear();
            continue;
        };
        let mut candidates = Vec::new();
        for (bi, &b) in open.iter().enumerate() {
            let pts = &branches[b].points;
            let last = coords(&pts[pts.len() - 1].1);
            let pred = if pts.len() >= 2 && pts[pts.len() - 2].0 + 1 == pts[pts.len() - 1].0 {
                let prev = coords(&pts[pts.len() - 2].1);
                (2.0 * last.0 - prev.0, 2.0 * last.1 - prev.1)
            } else {
                last
            };
            let mut within = 0;
            for (si, s) in set.solutions.iter().enumerate() {
                let d = reduced_distance(pred, coords(s)).min(reduced_distance(last, coords(s)));
                if d <= threshold {
                    within += 1;
                    candidates.push((d, bi, si));
                }
            }
            if within > 1 {
                ambiguities.push(k);
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut branch_used = vec![false; open.len()];
        let mut sol_used = vec![false; set.solutions.len()];
        let mut next_open = Vec::new();
        for (_, bi, si) in candidates {
            if branch_used[bi] || sol_used[si] {
                continue;
            }
            branch_used[bi] = true;
            sol_used[si] = true;
            branches[open[bi]].points.push((k, set.solutions[si]));
            next_open.push(open[bi]);
        }
        for (si, s) in set.solutions.iter().enumerate() {
            if !sol_used[si] {
                let id = branches.len();
                branches.push(Branch { id, points: vec![(k, *s)] });
                next_open.push(id);
            }
        }
        next_open.sort_unstable();
        open = next_open;
    }
    ambiguities.dedup();
    (branches, ambiguities, threshold)
}

/// Solves every angle of an arc and connects the fixed points into branches.
pub fn arc_sweep(
    params_base: &SystemParams,
    radius: f64,
    n_phi: usize,
    convention: AngleConvention,
) -> Result<ArcSweep> {
    validate(params_base).into_result()?;
    if !(radius > 0.0) || n_phi < 3 {
        return Err(crate::BistabError::InvalidParams("arc needs radius > 0 and n_phi ≥ 3".into()));
    }
    let angles = linspace(0.0, FRAC_PI_2, n_phi);
    let results: Vec<std::result::Result<SolutionSet, String>> = angles
        .par_iter()
        .map(|&phi| {
            let (e1, e2) = convention.drives(radius, phi);
            find_all_roots(&params_base.with_drives(e1, e2)).map_err(|e| e.to_string())
        })
        .collect();
    let mut sets = Vec::with_capacity(n_phi);
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => sets.push(Some(s)),
            Err(e) => {
                failures.push((k, e));
                sets.push(None);
            }
        }
    }
    let (branches, ambiguities, jump_threshold) = connect_branches(&sets);
    Ok(ArcSweep {
        params_base: *params_base,
        radius,
        convention,
        angles,
        sets,
        failures,
        branches,
        ambiguities,
        jump_threshold,
    })
}

/// [`arc_sweep`] for each atom number, everything else held fixed.
pub fn finite_size_scan(
    params_base: &SystemParams,
    atom_numbers: &[f64],
    radius: f64,
    n_phi: usize,
    convention: AngleConvention,
) -> Result<Vec<ArcSweep>> {
    atom_numbers
        .iter()
        .map(|&n| arc_sweep(&params_base.with_atom_number(n), radius, n_phi, convention))
        .collect()
}

/// Transmittance trace of one mode along a branch, `(φ, T)` pairs.
pub fn branch_transmittance(arc: &ArcSweep, branch: &Branch, mode: Mode) -> Vec<(f64, f64)> {
    branch
        .points
        .iter()
        .filter_map(|(k, ss)| {
            let p = arc.params_at(*k);
            crate::observables::transmittance_exact(ss, &p, mode).ok().map(|t| (arc.angles[*k], t))
        })
        .collect()
}
