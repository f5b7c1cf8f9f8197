use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phe")).args(args).output().expect("binary runs")
}

fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn shipped_configs_verify() {
    for name in ["type_d_pmmm.json", "type_d_pmpm.json", "type_two_log.json", "abel_closed_form.json", "liouville.json"] {
        let out = phe(&["verify", &shipped(name), "--points", "40"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(rep["schema"], "phe-report/1");
        assert_eq!(rep["summary"]["passed"], true);
    }
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("type_d_pmmm.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = phe(&["verify", &cfg, "--points", "30", "--stamp", "fixed", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let diff = phe(&["report", "diff", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(diff.status.code(), Some(0));
    assert!(diff.stdout.is_empty());

    let c = dir.path().join("c.json");
    phe(&["verify", &cfg, "--points", "30", "--seed", "99", "--out", c.to_str().unwrap()]);
    let diff = phe(&["report", "diff", a.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(diff.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&diff.stdout).contains("/provenance/seed"));
}

#[test]
fn a_tolerance_nobody_meets_fails() {
    let out = phe(&["verify", &shipped("type_d_pmpm.json"), "--points", "10", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{ not json");
    assert_eq!(phe(&["verify", &broken]).status.code(), Some(2));

    let bad_expr = write(
        dir.path(),
        "expr.json",
        r#"{"schema": "phe-config/1", "family": {"tag": "TypeII-pmmm", "f": "w^2 +* 1"},
            "params": {"mu0": 1, "lambda": 0}, "sampling": {"count": 5, "seed": 1}}"#,
    );
    let out = phe(&["verify", &bad_expr]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("family.f"), "{msg}");

    assert_eq!(phe(&["verify", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(phe(&["verify", &shipped("type_d_pmpm.json"), "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn singular_budget_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // ln(y) is undefined on half the default y range
    let cfg = write(
        dir.path(),
        "singular.json",
        r#"{"schema": "phe-config/1", "family": {"tag": "Potential", "w": "x^3*ln(y)"},
            "params": {"mu0": 1, "lambda": 0}, "sampling": {"count": 40, "seed": 3},
            "checks": ["einstein"]}"#,
    );
    let out = phe(&["verify", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["summary"]["singular_budget_exceeded"], true);
}

#[test]
fn classify_runs_only_the_classifiers() {
    let out = phe(&["classify", &shipped("type_two_log.json"), "--points", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = rep["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["petrov", "congruence"]);
}

#[test]
fn ode_verb_samples_the_solution() {
    let out = phe(&["ode", &shipped("abel_closed_form.json"), "--stamp", "t"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["schema"], "phe-ode/1");
    assert!(!rep["samples"].as_array().unwrap().is_empty());
    let out = phe(&["ode", &shipped("type_d_pmmm.json")]);
    assert_eq!(out.status.code(), Some(2));
}
