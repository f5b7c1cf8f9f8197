use phe::report::diff_reports;
use phe::{run_campaign, CampaignConfig, RunOptions, Status};

fn config(family: &str, extra: &str) -> CampaignConfig {
    let text = format!(
        r#"{{"schema": "phe-config/1", "family": {family}, "params": {{"mu0": 1, "lambda": 0.2}},
            "sampling": {{"count": 30, "seed": 5}}{extra}}}"#
    );
    CampaignConfig::from_json(&text).unwrap()
}

#[test]
fn same_seed_same_report() {
    let cfg = config(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#, "");
    let opts = RunOptions { stamp: Some("s".into()) };
    let a = run_campaign(&cfg, &opts).unwrap();
    let b = run_campaign(&cfg, &opts).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let va: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&run_campaign(&cfg, &RunOptions::default()).unwrap().to_json()).unwrap();
    assert!(diff_reports(&va, &vb).is_empty());
}

#[test]
fn wrong_expectations_fail() {
    let cfg = config(
        r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#,
        r#", "checks": ["petrov", "congruence", "symmetry"],
            "expect": {"asd_type": "II", "pattern": "[+-,+-,+-,+-]", "algebra": "2A1"}"#,
    );
    let rep = run_campaign(&cfg, &RunOptions::default()).unwrap();
    for c in ["petrov", "congruence", "symmetry"] {
        assert_eq!(rep.check(c).unwrap().status, Status::Fail, "{c}");
    }
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn non_applicable_checks_do_not_fail() {
    let cfg = config(r#"{"tag": "Potential", "w": "x^3*y"}"#, r#", "checks": ["symmetry", "ode"]"#);
    let rep = run_campaign(&cfg, &RunOptions::default()).unwrap();
    for c in &rep.checks {
        assert_eq!(c.status, Status::NotApplicable, "{}", c.check);
    }
    assert_eq!(rep.exit_code(), 0);
}

#[test]
fn a_non_solution_fails_einstein_and_hh() {
    let cfg = config(r#"{"tag": "Potential", "w": "x^4 + y^2"}"#, r#", "checks": ["einstein", "hh"]"#);
    let rep = run_campaign(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(rep.check("einstein").unwrap().status, Status::Fail);
    assert_eq!(rep.check("hh").unwrap().status, Status::Fail);
}

#[test]
fn config_hash_tracks_content() {
    let a = config(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#, "");
    let b = config(r#"{"tag": "TypeD-pmmm", "b0": 1.5}"#, "");
    let ra = run_campaign(&a, &RunOptions::default()).unwrap();
    let rb = run_campaign(&b, &RunOptions::default()).unwrap();
    assert_ne!(ra.provenance.config_hash, rb.provenance.config_hash);
    assert_eq!(ra.provenance.config_hash.len(), 64);
}

#[test]
fn an_empty_check_list_runs_everything() {
    let cfg = config(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#, "");
    let rep = run_campaign(&cfg, &RunOptions::default()).unwrap();
    let names: Vec<&str> = rep.checks.iter().map(|c| c.check.as_str()).collect();
    assert_eq!(names, ["einstein", "petrov", "congruence", "symmetry", "hh", "ode"]);
    assert_eq!(rep.exit_code(), 0);
}
