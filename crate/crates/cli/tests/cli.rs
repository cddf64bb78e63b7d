use std::path::{Path, PathBuf};
use std::process::Command;

use fts_cli::run::parse_vector;
use fts_cli::sweep::run_sweep;
use fts_cli::{exit, execute, CliError, RunOptions, Scenario, SweepFile};

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).unwrap()
}

fn fts(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fts")).args(args).env_remove("FTS_REPORT_DIR").output().unwrap()
}

#[test]
fn shipped_scenarios_round_trip() {
    for name in ["example1.toml", "example2.toml", "scalar_fts.toml", "scalar_hybrid.toml", "two_mode_law.toml"] {
        let s = load(name);
        let text = s.to_toml().unwrap();
        assert_eq!(Scenario::parse(&text).unwrap(), s, "{name}");
        s.build().unwrap();
    }
}

#[test]
fn bad_scenarios_are_config_errors() {
    let base = std::fs::read_to_string(scenario_path("scalar_fts.toml")).unwrap();
    let unknown_flow = base.replace("power_decay", "no_such_field");
    assert!(matches!(Scenario::parse(&unknown_flow), Err(CliError::Parse(_))));
    let bad_mode = base.replace("segments = [[0.0, 1]]", "segments = [[0.0, 2]]");
    let err = Scenario::parse(&bad_mode).unwrap().build().unwrap_err();
    assert_eq!(err.exit_code(), exit::CONFIG, "{err}");
    let bad_dim = base.replace("x0 = [1.0]", "x0 = [1.0, 2.0]");
    assert!(Scenario::parse(&bad_dim).unwrap().build().is_err());
    let not_gk = base.replace("alpha0 = [{ a = 1.0, b = 2.0 }]", "alpha0 = [{ a = -1.0, b = 2.0 }]");
    assert_eq!(Scenario::parse(&not_gk).unwrap().build().unwrap_err().exit_code(), exit::CONFIG);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = |s: &str| dir.path().join(s).display().to_string();

    let ok = fts(&["run", scenario_path("scalar_hybrid.toml").to_str().unwrap(), "--certify", "--report", &out("ok")]);
    assert_eq!(ok.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&ok.stderr));

    let short = fts(&["run", "--scenario", scenario_path("scalar_hybrid.toml").to_str().unwrap(), "--certify", "--t-end", "5"]);
    assert_eq!(short.status.code(), Some(exit::CERTIFICATE));
    // without --certify the same failing certificate is only reported
    let short = fts(&["run", scenario_path("scalar_hybrid.toml").to_str().unwrap(), "--t-end", "5"]);
    assert_eq!(short.status.code(), Some(exit::OK));
    assert!(String::from_utf8_lossy(&short.stdout).contains("certified: false"));

    let garbage = dir.path().join("garbage.toml");
    std::fs::write(&garbage, "name = 3\n[[[").unwrap();
    assert_eq!(fts(&["run", garbage.to_str().unwrap()]).status.code(), Some(exit::CONFIG));
    assert_eq!(fts(&["run", "--dt", "abc", "x.toml"]).status.code(), Some(exit::CONFIG));
    assert_eq!(fts(&["run", out("missing.toml").as_str()]).status.code(), Some(exit::IO));

    let diverge = fts(&[
        "run",
        scenario_path("scalar_hybrid.toml").to_str().unwrap(),
        "--x0",
        "1e307",
        "--report",
        &out("diverged"),
    ]);
    assert_eq!(diverge.status.code(), Some(exit::SIMULATION));
    assert!(dir.path().join("diverged/trajectory.csv").exists());
    let report = std::fs::read_to_string(dir.path().join("diverged/report.txt")).unwrap();
    assert!(report.contains("status: failed"));
}

#[test]
fn artifacts_have_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { report_dir: Some(dir.path().to_path_buf()), certify: true, ..RunOptions::default() };
    let outcome = execute(&load("scalar_hybrid.toml"), &opts).unwrap();
    assert_eq!(outcome.exit_code, exit::OK);

    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,j,mode,x1"));
    assert_eq!(lines.next(), Some("0,0,1,1"));
    let rows = traj.lines().count() - 1;
    assert_eq!(rows, outcome.trajectory.as_ref().unwrap().len());

    let jumps = std::fs::read_to_string(dir.path().join("jumps.csv")).unwrap();
    assert!(jumps.starts_with("t,jump_index,x_before1,x_after1\n0.3,1,"), "{jumps}");
    assert_eq!(jumps.lines().count() - 1, outcome.report.jumps);

    let lyap = std::fs::read_to_string(dir.path().join("lyapunov.csv")).unwrap();
    assert!(lyap.starts_with("t,j,mode,V1,V2\n"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for c in ["i", "ii", "iii", "iv", "v"] {
        let v = &json["certificate"]["conditions"][c];
        assert!(v["bound"].is_number() && v["achieved"].is_number() && v["pass"].is_boolean(), "{c}");
    }
    assert_eq!(json["certificate"]["certified"], true);
    let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(text.lines().all(|l| l.contains(": ")));
    assert!(text.contains("condition_v.pass: true"));
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let s = load("two_mode_law.toml");
    for d in [&a, &b] {
        execute(&s, &RunOptions { report_dir: Some(d.path().to_path_buf()), ..RunOptions::default() }).unwrap();
    }
    for f in ["trajectory.csv", "jumps.csv", "lyapunov.csv", "report.txt", "report.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn report_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fts"))
        .args(["run", scenario_path("scalar_fts.toml").to_str().unwrap(), "--report", "/nonexistent/ignored"])
        .env("FTS_REPORT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn overrides_apply() {
    let s = load("scalar_fts.toml");
    let o = execute(&s, &RunOptions { dt: Some(1e-3), x0: Some(parse_vector("4").unwrap()), ..RunOptions::default() })
        .unwrap();
    let tr = o.trajectory.unwrap();
    assert_eq!(tr.initial_state(), &[4.0]);
    assert!((tr.dt() - 1e-3).abs() < 1e-18);
    // √4 / (1/2) = 4 s to settle
    assert!((o.report.t_stop - 4.0).abs() < 0.05);
    assert!(parse_vector("1,x").is_err());
    assert!(execute(&s, &RunOptions { x0: Some(vec![1.0, 2.0]), ..RunOptions::default() }).is_err());
}

#[test]
fn switch_law_scenario_keeps_dwell() {
    let o = execute(&load("two_mode_law.toml"), &RunOptions::default()).unwrap();
    let tr = o.trajectory.unwrap();
    assert!(tr.converged());
    let first = &tr.mode_intervals()[0];
    assert_eq!(first.mode, 1);
    assert!(first.len() >= 0.1 - 1e-9);
}

#[test]
fn degenerate_sweep_matches_run() {
    let s = load("scalar_hybrid.toml");
    let sweep = SweepFile { scenario: "scalar_hybrid.toml".into(), x0: vec![vec![1.0]], norms: vec![], envelopes: false };
    let res = run_sweep(&sweep, &s, &RunOptions::default(), None).unwrap();
    assert_eq!(res.rows.len(), 1);
    let run = execute(&s, &RunOptions::default()).unwrap();
    let cert = run.certificate.unwrap();
    let row = &res.rows[0];
    assert_eq!(row.gamma, Some(cert.gamma));
    assert_eq!(row.achieved, Some(cert.achieved_total));
    assert_eq!(row.t_conv, Some(run.report.t_stop));
    assert!(row.converged);
}

#[test]
fn empty_sweep_is_an_error() {
    let s = load("scalar_fts.toml");
    let sweep = SweepFile { scenario: "scalar_fts.toml".into(), x0: vec![], norms: vec![], envelopes: false };
    let err = run_sweep(&sweep, &s, &RunOptions::default(), None).unwrap_err();
    assert_eq!(err.exit_code(), exit::CONFIG);
}

#[test]
fn sweep_gamma_nondecreasing_with_norm() {
    let dir = tempfile::tempdir().unwrap();
    let (sweep, s) = SweepFile::load(&scenario_path("example1_sweep.toml")).unwrap();
    // the budget depends only on ‖x0‖; a short horizon keeps this fast
    let opts = RunOptions { t_end: Some(5.0), ..RunOptions::default() };
    let res = run_sweep(&sweep, &s, &opts, Some(dir.path())).unwrap();
    let gammas: Vec<f64> = res.rows.iter().map(|r| r.gamma.unwrap()).collect();
    assert_eq!(gammas.len(), 4);
    for w in gammas.windows(2) {
        assert!(w[1] >= w[0]);
    }
    for k in 1..=4 {
        assert!(dir.path().join(format!("run_{k:04}/trajectory.csv")).exists());
    }
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(!res.envelopes.is_empty());
    assert!(dir.path().join("envelopes.txt").exists());
}
