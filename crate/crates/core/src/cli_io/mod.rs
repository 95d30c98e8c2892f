//! Command-line front end: run configuration, command execution, and CSV,
//! JSON and SVG output.
//!
//! A run is described by one flat key/value file (a TOML subset) plus flags;
//! flags override the file. Symmetric keys such as `kappa` set both modes and
//! are overridden by per-mode keys such as `kappa2` from the same source.

mod output;
mod run;
pub mod svg;

pub use output::{csv_number, sha256_hex, Derived, FileEntry, RunManifest, ARC_COLUMNS, GRID_COLUMNS, SCAN_SUMMARY_COLUMNS, TRAJECTORY_COLUMNS};
pub use run::{run, RunReport};

use crate::error::{BistabError, Result};
use crate::model::{validate, SystemParams};
use crate::sweep::AngleConvention;
use clap::Parser;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Steady,
    Integrate,
    Arc,
    Grid,
    Scan,
    Hysteresis,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Steady, Command::Integrate, Command::Arc, Command::Grid, Command::Scan, Command::Hysteresis];

    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Integrate => "integrate",
            Command::Arc => "arc",
            Command::Grid => "grid",
            Command::Scan => "scan",
            Command::Hysteresis => "hysteresis",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Initial state of the `integrate` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Ground1,
    Ground2,
    /// Random physical state drawn with the configured seed.
    Random,
}

impl InitialState {
    fn name(self) -> &'static str {
        match self {
            InitialState::Ground1 => "ground1",
            InitialState::Ground2 => "ground2",
            InitialState::Random => "random",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [InitialState::Ground1, InitialState::Ground2, InitialState::Random].into_iter().find(|c| c.name() == s)
    }
}

/// Fully resolved run configuration. Defaults are the baseline model at
/// `N = 5000`, `η₁ = η₂ = 0.8`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: SystemParams,
    /// Arc and hysteresis radius.
    pub radius: f64,
    pub n_phi: usize,
    pub convention: AngleConvention,
    pub eta1_max: f64,
    pub eta2_max: f64,
    pub resolution: usize,
    pub n_list: Vec<f64>,
    /// Steps per leg of the hysteresis path.
    pub n_steps: usize,
    pub t_end: f64,
    pub n_samples: usize,
    pub initial: InitialState,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub settle_eps: f64,
    pub t_max: f64,
    pub output_dir: PathBuf,
    pub plot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Steady,
            params: SystemParams::baseline(5000.0, 0.8, 0.8),
            radius: 1.13,
            n_phi: 361,
            convention: AngleConvention::FromVertical,
            eta1_max: 5.0,
            eta2_max: 5.0,
            resolution: 101,
            n_list: vec![5e3, 1e4, 1e5, 1e6],
            n_steps: 90,
            t_end: 100.0,
            n_samples: 1001,
            initial: InitialState::Ground1,
            seed: 0,
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            settle_eps: 1e-9,
            t_max: 1e5,
            output_dir: PathBuf::from("bistab_out"),
            plot: false,
        }
    }
}

/// Keys setting both modes at once; applied before per-mode keys.
const SYMMETRIC_KEYS: [&str; 6] = ["gamma", "Gamma", "kappa", "delta_A", "delta_C", "max"];

fn config_err(key: &str, msg: impl Into<String>) -> BistabError {
    BistabError::Config { key: key.to_string(), msg: msg.into() }
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(config_err(key, format!("expected a number, got {}", other.type_str()))),
    }
}

fn as_count(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        other => Err(config_err(key, format!("expected a nonnegative integer, got {other}"))),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| config_err(key, format!("expected a string, got {}", v.type_str())))
}

impl RunConfig {
    fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        let p = &mut self.params;
        match key {
            "command" => {
                let s = as_str(key, v)?;
                self.command = Command::parse(s).ok_or_else(|| config_err(key, format!("unknown command `{s}`")))?;
            }
            "N" => p.atom_number = as_float(key, v)?,
            "g_single" => p.g_single = as_float(key, v)?,
            "eta1" => p.eta1 = as_float(key, v)?,
            "eta2" => p.eta2 = as_float(key, v)?,
            "gamma" => (p.gamma1, p.gamma2) = (as_float(key, v)?, as_float(key, v)?),
            "gamma1" => p.gamma1 = as_float(key, v)?,
            "gamma2" => p.gamma2 = as_float(key, v)?,
            "Gamma" => (p.cross_decay1, p.cross_decay2) = (as_float(key, v)?, as_float(key, v)?),
            "Gamma1" => p.cross_decay1 = as_float(key, v)?,
            "Gamma2" => p.cross_decay2 = as_float(key, v)?,
            "kappa" => (p.kappa1, p.kappa2) = (as_float(key, v)?, as_float(key, v)?),
            "kappa1" => p.kappa1 = as_float(key, v)?,
            "kappa2" => p.kappa2 = as_float(key, v)?,
            "delta_A" => (p.delta_a1, p.delta_a2) = (as_float(key, v)?, as_float(key, v)?),
            "delta_A1" => p.delta_a1 = as_float(key, v)?,
            "delta_A2" => p.delta_a2 = as_float(key, v)?,
            "delta_C" => (p.delta_c1, p.delta_c2) = (as_float(key, v)?, as_float(key, v)?),
            "delta_C1" => p.delta_c1 = as_float(key, v)?,
            "delta_C2" => p.delta_c2 = as_float(key, v)?,
            "radius" => self.radius = as_float(key, v)?,
            "n_phi" => self.n_phi = as_count(key, v)?,
            "convention" => {
                let s = as_str(key, v)?;
                self.convention = AngleConvention::parse(s)
                    .ok_or_else(|| config_err(key, format!("expected from-vertical or from-axis-1, got `{s}`")))?;
            }
            "max" => (self.eta1_max, self.eta2_max) = (as_float(key, v)?, as_float(key, v)?),
            "eta1_max" => self.eta1_max = as_float(key, v)?,
            "eta2_max" => self.eta2_max = as_float(key, v)?,
            "resolution" => self.resolution = as_count(key, v)?,
            "N_list" => {
                let arr = v.as_array().ok_or_else(|| config_err(key, "expected an array of numbers"))?;
                self.n_list = arr.iter().map(|x| as_float(key, x)).collect::<Result<_>>()?;
            }
            "n_steps" => self.n_steps = as_count(key, v)?,
            "t_end" => self.t_end = as_float(key, v)?,
            "n_samples" => self.n_samples = as_count(key, v)?,
            "initial" => {
                let s = as_str(key, v)?;
                self.initial = InitialState::parse(s)
                    .ok_or_else(|| config_err(key, format!("expected ground1, ground2 or random, got `{s}`")))?;
            }
            "seed" => self.seed = as_count(key, v)? as u64,
            "rel_tol" => self.rel_tol = as_float(key, v)?,
            "abs_tol" => self.abs_tol = as_float(key, v)?,
            "settle_eps" => self.settle_eps = as_float(key, v)?,
            "t_max" => self.t_max = as_float(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(as_str(key, v)?),
            "plot" => self.plot = v.as_bool().ok_or_else(|| config_err(key, "expected true or false"))?,
            _ => return Err(config_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies entries on top of `self`, symmetric keys first.
    pub fn apply(&mut self, entries: &[(String, Value)]) -> Result<()> {
        let (sym, rest): (Vec<_>, Vec<_>) = entries.iter().partition(|(k, _)| SYMMETRIC_KEYS.contains(&k.as_str()));
        for (k, v) in sym.into_iter().chain(rest) {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Checks every invariant; errors carry the offending key.
    pub fn check(&self) -> Result<()> {
        let report = validate(&self.params);
        if let Some(first) = report.violations.first() {
            return Err(config_err("params", first.clone()));
        }
        let positive = |key: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(config_err(key, format!("must be positive and finite, got {x}")))
            }
        };
        positive("radius", self.radius)?;
        positive("eta1_max", self.eta1_max)?;
        positive("eta2_max", self.eta2_max)?;
        positive("t_end", self.t_end)?;
        positive("t_max", self.t_max)?;
        if self.n_phi < 3 {
            return Err(config_err("n_phi", "must be at least 3"));
        }
        if self.resolution < 2 {
            return Err(config_err("resolution", "must be at least 2"));
        }
        if self.n_steps < 10 {
            return Err(config_err("n_steps", "must be at least 10"));
        }
        if self.n_samples < 2 {
            return Err(config_err("n_samples", "must be at least 2"));
        }
        if self.n_list.is_empty() {
            return Err(config_err("N_list", "must not be empty"));
        }
        for &n in &self.n_list {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(config_err("N_list", format!("atom numbers must be ≥ 1, got {n}")));
            }
        }
        for (key, t) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(t > 1e-14 && t < 1e-2) {
                return Err(config_err(key, format!("must lie in (1e-14, 1e-2), got {t}")));
            }
        }
        if !(self.settle_eps >= 1e-12 && self.settle_eps.is_finite()) {
            return Err(config_err("settle_eps", format!("must be ≥ 1e-12, got {}", self.settle_eps)));
        }
        Ok(())
    }

    /// Parses flat `key = value` text on top of the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| config_err("<file>", e.message().to_string()))?;
        Self::from_table(&table)
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let entries = table_entries(table)?;
        let mut cfg = RunConfig::default();
        cfg.apply(&entries)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Every key with its resolved value, per-mode keys only.
    pub fn to_table(&self) -> Table {
        let p = &self.params;
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_string(), v);
        };
        put("command", Value::String(self.command.name().into()));
        put("N", Value::Float(p.atom_number));
        put("g_single", Value::Float(p.g_single));
        put("eta1", Value::Float(p.eta1));
        put("eta2", Value::Float(p.eta2));
        put("gamma1", Value::Float(p.gamma1));
        put("gamma2", Value::Float(p.gamma2));
        put("Gamma1", Value::Float(p.cross_decay1));
        put("Gamma2", Value::Float(p.cross_decay2));
        put("kappa1", Value::Float(p.kappa1));
        put("kappa2", Value::Float(p.kappa2));
        put("delta_A1", Value::Float(p.delta_a1));
        put("delta_A2", Value::Float(p.delta_a2));
        put("delta_C1", Value::Float(p.delta_c1));
        put("delta_C2", Value::Float(p.delta_c2));
        put("radius", Value::Float(self.radius));
        put("n_phi", Value::Integer(self.n_phi as i64));
        put("convention", Value::String(self.convention.name().into()));
        put("eta1_max", Value::Float(self.eta1_max));
        put("eta2_max", Value::Float(self.eta2_max));
        put("resolution", Value::Integer(self.resolution as i64));
        put("N_list", Value::Array(self.n_list.iter().map(|&n| Value::Float(n)).collect()));
        put("n_steps", Value::Integer(self.n_steps as i64));
        put("t_end", Value::Float(self.t_end));
        put("n_samples", Value::Integer(self.n_samples as i64));
        put("initial", Value::String(self.initial.name().into()));
        put("seed", Value::Integer(self.seed as i64));
        put("rel_tol", Value::Float(self.rel_tol));
        put("abs_tol", Value::Float(self.abs_tol));
        put("settle_eps", Value::Float(self.settle_eps));
        put("t_max", Value::Float(self.t_max));
        put("output_dir", Value::String(self.output_dir.to_string_lossy().into_owned()));
        put("plot", Value::Boolean(self.plot));
        t
    }

    pub fn settle_options(&self) -> crate::dynamics::SettleOptions {
        crate::dynamics::SettleOptions {
            eps: self.settle_eps,
            t_max: self.t_max,
            integrator: crate::dynamics::IntegratorOptions::with_tolerances(self.rel_tol, self.abs_tol),
            newton_handoff: true,
        }
    }
}

fn table_entries(table: &Table) -> Result<Vec<(String, Value)>> {
    table
        .iter()
        .map(|(k, v)| match v {
            Value::Table(_) => Err(config_err(k, "nested tables are not supported")),
            _ => Ok((k.clone(), v.clone())),
        })
        .collect()
}

/// Interprets a flag value: TOML literal if it parses as one, else a string.
/// Comma-separated lists become arrays.
pub fn flag_value(raw: &str) -> Value {
    if let Ok(t) = format!("v = {raw}").parse::<Table>() {
        if let Some(v) = t.get("v") {
            return v.clone();
        }
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|s| flag_value(s.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Resolves a configuration from an optional file plus flag overrides.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("<file>", format!("cannot read {}: {e}", path.display())))?;
        let table: Table =
            text.parse().map_err(|e: toml::de::Error| config_err("<file>", e.message().to_string()))?;
        cfg.apply(&table_entries(&table)?)?;
    }
    cfg.apply(overrides)?;
    cfg.check()?;
    Ok(cfg)
}

/// Steady states, trajectories, arcs, grids, scans and hysteresis sweeps of
/// the two-mode cavity model.
#[derive(Debug, Parser)]
#[command(name = "bistab", version, allow_negative_numbers = true)]
pub struct Cli {
    /// steady | integrate | arc | grid | scan | hysteresis (default: from config, else steady)
    pub command: Option<String>,
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N")]
    pub atom_number: Option<String>,
    #[arg(long)]
    pub eta1: Option<String>,
    #[arg(long)]
    pub eta2: Option<String>,
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long = "Gamma")]
    pub cross_decay: Option<String>,
    #[arg(long)]
    pub g_single: Option<String>,
    #[arg(long = "delta-A")]
    pub delta_a: Option<String>,
    #[arg(long = "delta-C")]
    pub delta_c: Option<String>,
    #[arg(long)]
    pub radius: Option<String>,
    #[arg(long)]
    pub n_phi: Option<String>,
    /// Grid maximum for both drives.
    #[arg(long)]
    pub max: Option<String>,
    /// Grid resolution per axis.
    #[arg(long)]
    pub res: Option<String>,
    /// Comma-separated atom numbers for `scan`.
    #[arg(long = "N-list")]
    pub n_list: Option<String>,
    /// Steps per leg for `hysteresis`.
    #[arg(long)]
    pub n_steps: Option<String>,
    #[arg(long)]
    pub t_end: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub rel_tol: Option<String>,
    #[arg(long)]
    pub abs_tol: Option<String>,
    /// Settle threshold on the right-hand-side norm.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub t_max: Option<String>,
    /// from-vertical | from-axis-1
    #[arg(long)]
    pub convention: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Also write SVG figures.
    #[arg(long)]
    pub plot: bool,
    /// Any config key, as KEY=VALUE (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Cli {
    /// Flag overrides as config entries, in a fixed order.
    pub fn overrides(&self) -> Result<Vec<(String, Value)>> {
        let mut out = Vec::new();
        if let Some(c) = &self.command {
            out.push(("command".to_string(), Value::String(c.clone())));
        }
        let flags = [
            ("N", &self.atom_number),
            ("eta1", &self.eta1),
            ("eta2", &self.eta2),
            ("kappa", &self.kappa),
            ("gamma", &self.gamma),
            ("Gamma", &self.cross_decay),
            ("g_single", &self.g_single),
            ("delta_A", &self.delta_a),
            ("delta_C", &self.delta_c),
            ("radius", &self.radius),
            ("n_phi", &self.n_phi),
            ("max", &self.max),
            ("resolution", &self.res),
            ("n_steps", &self.n_steps),
            ("t_end", &self.t_end),
            ("seed", &self.seed),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("settle_eps", &self.eps),
            ("t_max", &self.t_max),
        ];
        for (key, raw) in flags {
            if let Some(raw) = raw {
                out.push((key.to_string(), flag_value(raw)));
            }
        }
        if let Some(raw) = &self.n_list {
            let v = match flag_value(raw) {
                Value::Array(a) => Value::Array(a),
                single => Value::Array(vec![single]),
            };
            out.push(("N_list".to_string(), v));
        }
        for (key, raw) in [("convention", &self.convention), ("output_dir", &self.out)] {
            if let Some(raw) = raw {
                out.push((key.to_string(), Value::String(raw.clone())));
            }
        }
        if self.plot {
            out.push(("plot".to_string(), Value::Boolean(true)));
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| config_err(kv, "expected KEY=VALUE"))?;
            out.push((k.trim().to_string(), flag_value(v.trim())));
        }
        Ok(out)
    }
}

/// Worker count from `BISTAB_THREADS` (0 or unset means automatic).
pub fn worker_count() -> Result<usize> {
    match std::env::var("BISTAB_THREADS") {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| config_err("BISTAB_THREADS", format!("expected a nonnegative integer, got `{s}`"))),
    }
}

/// Full CLI: parse, configure, run. Returns the process exit code
/// (0 success, 1 some nodes failed or a run error, 2 configuration error).
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.overrides().and_then(|o| parse_config(cli.config.as_deref(), &o)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bistab: {e}");
            return 2;
        }
    };
    let threads = match worker_count() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("bistab: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("bistab: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| run(&cfg)) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files {
                println!("{}", f.display());
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("bistab: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml_str("kapa = 1.32").unwrap_err();
        assert_eq!(err, BistabError::Config { key: "kapa".into(), msg: "unknown key".into() });
        assert!(err.to_string().contains("kapa"));
    }

    #[test]
    fn type_mismatch_is_named() {
        let err = RunConfig::from_toml_str("n_phi = \"many\"").unwrap_err();
        assert!(matches!(err, BistabError::Config { ref key, .. } if key == "n_phi"));
        let err = RunConfig::from_toml_str("kappa = -1.0").unwrap_err();
        assert!(err.to_string().contains("kappa1"), "{err}");
    }

    #[test]
    fn per_mode_key_overrides_symmetric_regardless_of_order() {
        let cfg = RunConfig::from_toml_str("kappa2 = 2.0\nkappa = 1.5").unwrap();
        assert_eq!((cfg.params.kappa1, cfg.params.kappa2), (1.5, 2.0));
    }

    #[test]
    fn baseline_file() {
        let text = "kappa = 1.32\nGamma = 1\ng_single = 0.1\ndelta_A = -12\ndelta_C = 0\nN = 5000\n";
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.params, SystemParams::baseline(5000.0, 0.8, 0.8));
    }

    #[test]
    fn table_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.command = Command::Scan;
        cfg.params.eta2 = 0.1 + 0.2;
        cfg.n_list = vec![5e3, 1e6];
        cfg.plot = true;
        assert_eq!(RunConfig::from_table(&cfg.to_table()).unwrap(), cfg);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "N = 1e4\nradius = 2.0\n").unwrap();
        let cli = Cli::try_parse_from(["bistab", "arc", "--config", path.to_str().unwrap(), "--radius", "0.29", "--N-list", "5e3,1e5"]).unwrap();
        let cfg = parse_config(cli.config.as_deref(), &cli.overrides().unwrap()).unwrap();
        assert_eq!(cfg.command, Command::Arc);
        assert_eq!(cfg.params.atom_number, 1e4);
        assert_eq!(cfg.radius, 0.29);
        assert_eq!(cfg.n_list, vec![5e3, 1e5]);
    }

    #[test]
    fn flag_values() {
        assert_eq!(flag_value("5000"), Value::Integer(5000));
        assert_eq!(flag_value("1e4"), Value::Float(1e4));
        assert_eq!(flag_value("from-vertical"), Value::String("from-vertical".into()));
        assert_eq!(flag_value("1,2.5"), Value::Array(vec![Value::Integer(1), Value::Float(2.5)]));
    }

    #[test]
    fn bad_command_is_config_error() {
        assert_eq!(main_entry(["bistab", "frobnicate"]), 2);
        assert_eq!(main_entry(["bistab", "--nope", "1"]), 2);
    }
}
