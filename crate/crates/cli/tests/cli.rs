use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mps")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn sample_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn solve_into(config: &Path, dir: &Path) -> Output {
    mps(&["solve", config.to_str().unwrap(), "--out", dir.to_str().unwrap()])
}

#[test]
fn solve_writes_solution_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve_into(&sample_config("poisson-1d.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let csv = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,x,value"));
    assert_eq!(lines.count(), 65);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["seconds"].is_null());
    assert!(report["norm"].as_f64().unwrap() > 0.0);
    let res = report["residuals"].as_array().unwrap();
    assert_eq!(res.len(), report["iterations"].as_u64().unwrap() as usize + 1);
}

#[test]
fn nonlinearity_config_solves() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve_into(&sample_config("log-gradient.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn solve_outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = sample_config("kirchhoff-2d.json");
    assert_eq!(code(&solve_into(&cfg, a.path())), 0);
    assert_eq!(code(&solve_into(&cfg, b.path())), 0);
    for f in ["kirchhoff-2d.csv", "kirchhoff-2d.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn timing_flag_records_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sample_config("poisson-1d.json");
    let o = mps(&["solve", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--timing"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn hypothesis_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(sample_config("poisson-1d.json")).unwrap().replace("\"value\": 2.5", "\"value\": 1.8");
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, text).unwrap();
    let o = solve_into(&cfg, dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("p(x) < q(x)"), "{}", stderr(&o));
    assert!(!dir.path().join("solution.csv").exists());
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    fs::write(&cfg, "{\n  \"mesh\": {\"n\": 8},\n  oops\n}").unwrap();
    let o = solve_into(&cfg, dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_config_exits_2() {
    let o = mps(&["solve", "/nonexistent/run.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/run.json"));
}

#[test]
fn exhausted_budget_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(sample_config("kirchhoff-2d.json"))
        .unwrap()
        .replace("\"solver\": {\"tol\": 1e-10}", "\"solver\": {\"tol\": 1e-10, \"max_inner\": 1}");
    let cfg = dir.path().join("short.json");
    fs::write(&cfg, text).unwrap();
    let o = solve_into(&cfg, dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("kirchhoff-2d.json")).unwrap()).unwrap();
    assert_eq!(report["converged"], false);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&mps(&[])), 2);
    assert_eq!(code(&mps(&["frobnicate"])), 2);
    let o = mps(&["verify", "bogus"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus"));
    assert_eq!(code(&mps(&["convergence", "nope"])), 2);
    assert_eq!(code(&mps(&["convergence", "poisson-sin", "--meshes", "16,x"])), 2);
    assert_eq!(code(&mps(&["convergence", "torsion-p3", "--meshes", "16"])), 2);
}

#[test]
fn verify_modular_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("modular.json");
    let o = mps(&["verify", "modular", "--seed", "7", "--cases", "500", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS homogeneity"), "{out}");
    assert!(out.trim_end().ends_with("suite modular: PASS"), "{out}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
}

#[test]
fn verify_operator_records_counterexample() {
    let o = mps(&["verify", "operator", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS flux-gap-literal-counterexample"));
}

#[test]
fn convergence_tables_meet_order() {
    for case in ["poisson-sin", "kirchhoff-sin"] {
        let o = mps(&["convergence", case, "--meshes", "16,32,64"]);
        assert_eq!(code(&o), 0, "{case}: {}", stderr(&o));
        let out = stdout(&o);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("h,err_l2,err_max,order"));
        let orders: Vec<f64> = lines.filter_map(|l| l.rsplit(',').next()?.parse().ok()).collect();
        assert_eq!(orders.len(), 2);
        assert!(orders.iter().all(|&o| o >= 1.9), "{case}: {orders:?}");
    }
}

#[test]
fn convergence_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("torsion.csv");
    let o = mps(&["convergence", "torsion-p3", "--meshes", "16,32", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).is_empty());
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 3);
}
