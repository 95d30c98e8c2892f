use bistab_core::cli_io::{main_entry, run, Command, RunConfig, RunManifest, ARC_COLUMNS, GRID_COLUMNS, TRAJECTORY_COLUMNS};
use std::path::Path;
use std::process::Command as Process;

fn small(command: Command, dir: &Path) -> RunConfig {
    RunConfig {
        command,
        n_phi: 61,
        resolution: 11,
        n_steps: 20,
        t_end: 5.0,
        n_samples: 11,
        n_list: vec![5e3, 1e5],
        output_dir: dir.to_path_buf(),
        ..RunConfig::default()
    }
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn golden_headers() {
    let dir = tempfile::tempdir().unwrap();
    let arc = ARC_COLUMNS.join(",");
    let cases: [(Command, &str, String); 7] = [
        (Command::Steady, "steady.csv", arc.clone()),
        (Command::Arc, "arc.csv", arc.clone()),
        (Command::Hysteresis, "hysteresis.csv", arc.clone()),
        (Command::Grid, "grid.csv", GRID_COLUMNS.join(",")),
        (Command::Integrate, "trajectory.csv", TRAJECTORY_COLUMNS.join(",")),
        (Command::Scan, "scan.csv", format!("N,{arc}")),
        (Command::Scan, "scan_summary.csv", "N,cooperativity,bistable_width,max_stable_purity_proxy".into()),
    ];
    for (command, file, want) in cases {
        let out = dir.path().join(command.name());
        let report = run(&small(command, &out)).unwrap();
        assert_eq!(report.exit_code, 0, "{command:?}: {:?}", report.warnings);
        assert_eq!(first_line(&out.join(file)), want, "{file}");
    }
    assert_eq!(
        arc,
        "phi_rad,eta1,eta2,branch_id,stable,T1,T2,ng1,ng2,ne1,ne2,x1,x2,re_alpha1,im_alpha1,re_alpha2,im_alpha2,residual"
    );
    assert_eq!(GRID_COLUMNS.join(","), "eta1,eta2,n_total,n_stable,marginal");
}

#[test]
fn manifest_lists_checksums_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Command::Arc, dir.path());
    cfg.plot = true;
    cfg.radius = 0.1 + 0.2;
    let report = run(&cfg).unwrap();
    let manifest = RunManifest::from_json(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, report.manifest);
    assert_eq!(manifest.run_config().unwrap(), cfg);
    let names: Vec<&str> = manifest.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["arc.csv", "arc.svg"]);
    for f in &manifest.files {
        let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
        assert_eq!(f.sha256, bistab_core::cli_io::sha256_hex(&bytes));
        assert_eq!(f.bytes, bytes.len());
    }
}

#[test]
fn baseline_config_file_echoes_cooperativity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("baseline.toml");
    std::fs::write(&cfg_path, "kappa = 1.32\nGamma = 1\ng_single = 0.1\ndelta_A = -12\ndelta_C = 0\nN = 5000\n").unwrap();
    let out = dir.path().join("out");
    let code = main_entry(["bistab", "steady", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let manifest = RunManifest::from_json(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!((manifest.derived.cooperativity1 - 3.1457).abs() < 1e-4);
    assert!((manifest.derived.g_collective - 0.1 * 5000f64.sqrt()).abs() < 1e-12);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_bistab");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kapa = 1.32\n").unwrap();
    let out = Process::new(exe).args(["steady", "--config", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kapa"));

    let ok = Process::new(exe)
        .args(["steady", "--N", "1e4", "--delta-C", "-0.5", "--out"])
        .arg(dir.path().join("ok"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    // settling cut off almost immediately: the run completes but reports failures
    let partial = Process::new(exe)
        .args(["hysteresis", "--n-steps", "10", "--t-max", "1e-3", "--out"])
        .arg(dir.path().join("partial"))
        .output()
        .unwrap();
    assert_eq!(partial.status.code(), Some(1));
    assert!(dir.path().join("partial").join("hysteresis.csv").exists());
}

#[test]
fn empty_config_is_deterministic_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let a = bistab_core::cli_io::parse_config(Some(&empty), &[]).unwrap();
    assert_eq!(a, RunConfig::default());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| std::fs::read(dir.path().join(sub).join("arc.csv")).unwrap();
    run(&small(Command::Arc, &dir.path().join("a"))).unwrap();
    run(&small(Command::Arc, &dir.path().join("b"))).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn arc_csv_marks_unstable_middle_branch() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Command::Arc, dir.path());
    cfg.n_phi = 361;
    run(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("arc.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == ARC_COLUMNS.len()));
    assert!(rows.iter().any(|r| r[4] == "0"));
    let branches: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[3]).collect();
    assert!(branches.len() >= 3);
    for r in &rows {
        let x: f64 = r[0].parse().unwrap();
        assert_eq!(bistab_core::cli_io::csv_number(x), r[0]);
    }
}
