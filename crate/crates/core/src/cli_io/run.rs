use super::output::{self, header, sha256_hex, Derived, FileEntry, RunManifest, ARC_COLUMNS, GRID_COLUMNS, SCAN_SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};
use super::svg::{self, Series};
use super::{Command, InitialState, RunConfig};
use crate::dynamics::{hysteresis_sweep, integrate, ControlPath, HysteresisOptions, IntegratorOptions, Sampling};
use crate::error::Result;
use crate::model::{cooperativity, MeanFieldState, Mode};
use crate::steady_state::{find_all_roots, random_physical_state, SolutionSet};
use crate::sweep::{arc_sweep, finite_size_scan, linspace, phase_diagram_grid, ArcSweep, NodeStatus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// 0 on success, 1 if some nodes or points failed.
    pub exit_code: i32,
    /// Written files, manifest last.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub manifest: RunManifest,
}

/// Files produced by a command, kept in memory until written.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, String)>,
    warnings: Vec<String>,
    failed: bool,
}

impl Outputs {
    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn set_warnings(&mut self, set: &SolutionSet, context: &str) {
        for w in &set.warnings {
            self.warnings.push(format!("{context}: {w}"));
        }
    }
}

/// Executes one configured command and writes its CSV files, optional SVG
/// figures and `manifest.json` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let mut out = Outputs::default();
    match cfg.command {
        Command::Steady => steady(cfg, &mut out)?,
        Command::Integrate => integrate_cmd(cfg, &mut out)?,
        Command::Arc => arc(cfg, &mut out)?,
        Command::Grid => grid(cfg, &mut out)?,
        Command::Scan => scan(cfg, &mut out)?,
        Command::Hysteresis => hysteresis(cfg, &mut out)?,
    }

    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (name, contents) in &out.files {
        let path = cfg.output_dir.join(name);
        std::fs::write(&path, contents)?;
        entries.push(FileEntry { name: name.clone(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
        files.push(path);
    }
    let exit_code = i32::from(out.failed);
    let p = &cfg.params;
    let manifest = RunManifest {
        tool: "bistab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        config: cfg.to_table(),
        derived: Derived {
            g_collective: p.coupling(),
            cooperativity1: cooperativity(p, Mode::One),
            cooperativity2: cooperativity(p, Mode::Two),
        },
        wall_time_s: started.elapsed().as_secs_f64(),
        warnings: out.warnings.clone(),
        files: entries,
        exit_code,
    };
    let manifest_path = cfg.output_dir.join("manifest.json");
    std::fs::write(&manifest_path, manifest.to_json())?;
    files.push(manifest_path);
    Ok(RunReport { exit_code, files, warnings: out.warnings, manifest })
}

fn steady(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let p = &cfg.params;
    let set = find_all_roots(p)?;
    out.set_warnings(&set, "steady");
    let phi = cfg.convention.angle_of(p.eta1, p.eta2);
    let mut csv = header(&ARC_COLUMNS);
    for (i, ss) in set.solutions.iter().enumerate() {
        output::steady_row(&mut csv, &[], phi, p, i, ss);
    }
    out.add("steady.csv", csv);
    Ok(())
}

fn integrate_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let p = &cfg.params;
    let state0 = match cfg.initial {
        InitialState::Ground1 => MeanFieldState::ground(Mode::One),
        InitialState::Ground2 => MeanFieldState::ground(Mode::Two),
        InitialState::Random => random_physical_state(p, &mut ChaCha8Rng::seed_from_u64(cfg.seed)),
    };
    let times = linspace(0.0, cfg.t_end, cfg.n_samples);
    let opts = IntegratorOptions::with_tolerances(cfg.rel_tol, cfg.abs_tol);
    let traj = integrate(&state0, p, cfg.t_end, &opts, &Sampling::At(times))?;
    let mut csv = header(&TRAJECTORY_COLUMNS);
    output::trajectory_rows(&mut csv, p, &traj);
    out.add("trajectory.csv", csv);
    if cfg.plot {
        let mut series = Vec::new();
        for (k, mode) in Mode::BOTH.into_iter().enumerate() {
            if p.eta(mode) > 0.0 {
                let pm = p.mode(mode);
                let pts = traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .map(|(t, s)| (*t, pm.kappa * pm.kappa * s.alpha(mode).norm_sqr() / (pm.eta * pm.eta)))
                    .collect();
                series.push(Series::new(pts, false, k, &format!("T{}", mode.number())));
            }
        }
        out.add("trajectory.svg", svg::line_plot("Transmittance", "t γ", "T", &series));
    }
    Ok(())
}

fn arc_warnings(arc: &ArcSweep, out: &mut Outputs, context: &str) {
    for (k, e) in &arc.failures {
        out.warnings.push(format!("{context}: φ = {} failed: {e}", arc.angles[*k]));
        out.failed = true;
    }
    for (k, set) in arc.sets.iter().enumerate() {
        if let Some(set) = set {
            out.set_warnings(set, &format!("{context}: φ = {}", arc.angles[k]));
        }
    }
    if !arc.ambiguities.is_empty() {
        out.warnings.push(format!("{context}: ambiguous branch connection at {} angles", arc.ambiguities.len()));
    }
}

/// Stable runs solid, unstable runs dashed, one colour per branch.
fn arc_series(arc: &ArcSweep, mode: Mode, colour: Option<usize>, label: &str) -> Vec<Series> {
    let mut series = Vec::new();
    for b in &arc.branches {
        let colour = colour.unwrap_or(b.id);
        let mut run: Vec<(f64, f64)> = Vec::new();
        let mut run_stable: Option<bool> = None;
        for (k, ss) in &b.points {
            let p = arc.params_at(*k);
            let Ok(t) = crate::observables::transmittance_exact(ss, &p, mode) else { continue };
            let pt = (arc.angles[*k], t);
            if run_stable.is_some_and(|s| s != ss.stable) {
                run.push(pt);
                series.push(Series::new(std::mem::take(&mut run), !run_stable.unwrap(), colour, label));
            }
            run_stable = Some(ss.stable);
            run.push(pt);
        }
        if let Some(s) = run_stable {
            series.push(Series::new(run, !s, colour, label));
        }
    }
    series
}

fn arc(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let a = arc_sweep(&cfg.params, cfg.radius, cfg.n_phi, cfg.convention)?;
    arc_warnings(&a, out, "arc");
    let mut csv = header(&ARC_COLUMNS);
    output::arc_rows(&mut csv, &[], &cfg.params, &a.rows());
    out.add("arc.csv", csv);
    if cfg.plot {
        let series = arc_series(&a, Mode::One, None, "");
        out.add("arc.svg", svg::line_plot(&format!("η = {}", cfg.radius), "φ (rad)", "T1", &series));
    }
    Ok(())
}

fn grid(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let pd = phase_diagram_grid(&cfg.params, cfg.eta1_max, cfg.eta2_max, cfg.resolution)?;
    for n in pd.failures() {
        if let NodeStatus::Failed(e) = &n.status {
            out.warnings.push(format!("grid: node ({}, {}) failed: {e}", n.eta1, n.eta2));
        }
        out.failed = true;
    }
    let marginal = pd.marginal_mask().iter().flatten().filter(|m| **m).count();
    if marginal > 0 {
        out.warnings.push(format!("grid: {marginal} nodes with marginal fixed points"));
    }
    let mut csv = header(&GRID_COLUMNS);
    output::grid_rows(&mut csv, &pd);
    out.add("grid.csv", csv);
    if cfg.plot {
        out.add(
            "grid.svg",
            svg::count_map("Stable solutions", "η1", "η2", &pd.eta1_axis, &pd.eta2_axis, &pd.counts()),
        );
    }
    Ok(())
}

fn scan(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let arcs = finite_size_scan(&cfg.params, &cfg.n_list, cfg.radius, cfg.n_phi, cfg.convention)?;
    let mut cols = vec!["N"];
    cols.extend(ARC_COLUMNS);
    let mut csv = header(&cols);
    let mut summary = header(&SCAN_SUMMARY_COLUMNS);
    let mut series = Vec::new();
    for (i, a) in arcs.iter().enumerate() {
        let n = a.params_base.atom_number;
        arc_warnings(a, out, &format!("scan N = {n}"));
        output::arc_rows(&mut csv, &[output::csv_number(n)], &a.params_base, &a.rows());
        summary.push_str(
            &[n, cooperativity(&a.params_base, Mode::One), a.bistable_width(), a.max_stable_purity_proxy()]
                .map(output::csv_number)
                .join(","),
        );
        summary.push('\n');
        series.extend(arc_series(a, Mode::One, Some(i), &format!("N = {n}")));
    }
    out.add("scan.csv", csv);
    out.add("scan_summary.csv", summary);
    if cfg.plot {
        out.add("scan.svg", svg::line_plot(&format!("η = {}", cfg.radius), "φ (rad)", "T1", &series));
    }
    Ok(())
}

fn hysteresis(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let path = ControlPath::arc_round_trip(cfg.radius, cfg.n_steps, cfg.convention);
    let opts = HysteresisOptions { settle: cfg.settle_options(), initial: None };
    let records = hysteresis_sweep(&cfg.params, &path, &opts)?;
    for r in records.iter().filter(|r| !r.converged) {
        out.warnings.push(format!("hysteresis: no convergence at φ = {} (leg {})", r.point.control, r.point.leg));
        out.failed = true;
    }
    let mut csv = header(&ARC_COLUMNS);
    output::hysteresis_rows(&mut csv, &cfg.params, &records);
    out.add("hysteresis.csv", csv);
    if cfg.plot {
        let series: Vec<Series> = (0..2)
            .map(|leg| {
                let pts = crate::dynamics::leg_trace(&records, leg, Mode::One);
                Series::new(pts, leg == 1, leg, if leg == 0 { "forward" } else { "backward" })
            })
            .collect();
        out.add("hysteresis.svg", svg::line_plot(&format!("η = {}", cfg.radius), "φ (rad)", "T1", &series));
    }
    Ok(())
}
