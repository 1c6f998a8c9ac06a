use std::fs;
use std::path::Path;

use mps_core::catalog::catalog;
use mps_core::config::RunConfig;
use mps_core::{MpsError, ProblemConfig, ProblemSpec};

fn sample_configs() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.display().to_string(), fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn sample_configs_parse_and_converge() {
    let configs = sample_configs();
    assert!(configs.len() >= 3);
    for (name, text) in configs {
        let run = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let (u, rep) = run.prepare().unwrap().solve().unwrap();
        assert!(rep.converged, "{name}: {:?}", rep.message);
        assert!(u.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn problem_config_roundtrips_through_json() {
    for p in catalog() {
        let json = serde_json::to_string(&p.config).unwrap();
        let back: ProblemConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p.config, "{}", p.id);
        assert_eq!(ProblemSpec::new(back).unwrap().to_config(), p.config);
    }
}

#[test]
fn report_schema_is_frozen() {
    let (_, text) = &sample_configs()[0];
    let (_, rep) = RunConfig::parse(text).unwrap().prepare().unwrap().solve().unwrap();
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["converged", "energies", "iterations", "norm", "residuals", "seconds"]);
}

#[test]
fn rejects_exponent_above_critical() {
    // 2D with p = 1.5 gives p* = 6, so s = 7 is out of range
    let mut cfg = catalog().into_iter().find(|p| p.id == "kirchhoff-multiphase-2d").unwrap().config;
    cfg.exponents.p = mps_core::ExprField::constant(1.5);
    cfg.exponents.q = mps_core::ExprField::constant(2.0);
    cfg.exponents.alpha = mps_core::ExprField::constant(1.2);
    cfg.exponents.s = mps_core::ExprField::constant(7.0);
    assert!(matches!(ProblemSpec::new(cfg), Err(MpsError::Hypothesis(_))));
}
