//! The `phe-report/1` document and report comparison.

use std::collections::BTreeMap;

use phe_core::conventions::{LAMBDA_OFFSET, LAMBDA_SLOPE, ORIENTATION, SPINOR_SCALE};
use phe_core::symmetry::LATTICE_DENOMINATOR;
use phe_core::Point;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{CampaignConfig, Tolerances};

pub const REPORT_SCHEMA: &str = "phe-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the effective configuration (compact JSON).
    pub config_hash: String,
    /// Only set when `--stamp` is given, so reports stay byte-stable.
    pub timestamp: Option<String>,
    pub seed: u64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub orientation: f64,
    pub spinor_scale: f64,
    pub lambda_slope: f64,
    pub lambda_offset: f64,
    pub lattice_denominator: i64,
    pub tolerances: Tolerances,
}

impl Conventions {
    pub fn pinned(tolerances: &Tolerances) -> Self {
        Conventions {
            orientation: ORIENTATION,
            spinor_scale: SPINOR_SCALE,
            lambda_slope: LAMBDA_SLOPE,
            lambda_offset: LAMBDA_OFFSET,
            lattice_denominator: LATTICE_DENOMINATOR,
            tolerances: tolerances.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub point: Option<Point>,
    pub message: String,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub name: String,
    pub generators: Vec<String>,
    /// Brackets of the certified basis, e.g. `[e2,e4] = 4 e3`.
    pub brackets: Vec<String>,
    pub generator_residual: f64,
    pub rounding_delta: f64,
    pub closure_residual: f64,
    pub jacobi_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub evaluated: usize,
    pub errors: usize,
    pub singular: usize,
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: Option<f64>,
    /// Extra named maxima, e.g. the scalar-curvature spread.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<String, f64>,
    /// Counts of classification outcomes such as `asd:II` or `[+-,--]`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub classifications: BTreeMap<String, usize>,
    /// One criterion trace per classification outcome.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub traces: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraReport>,
    /// Why the check failed or was skipped.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// The first few per-point errors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_samples: Vec<PointError>,
}

impl CheckReport {
    pub fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            status: Status::NotApplicable,
            evaluated: 0,
            errors: 0,
            singular: 0,
            max_residual: None,
            mean_residual: None,
            tolerance: None,
            measures: BTreeMap::new(),
            classifications: BTreeMap::new(),
            traces: BTreeMap::new(),
            algebra: None,
            notes: Vec::new(),
            error_samples: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub singular_points: usize,
    pub singular_budget_exceeded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub provenance: Provenance,
    pub conventions: Conventions,
    pub family: String,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == name)
    }

    /// 0 pass, 1 check failure, 3 singularity budget exceeded.
    pub fn exit_code(&self) -> i32 {
        if self.summary.singular_budget_exceeded {
            3
        } else if self.summary.passed {
            0
        } else {
            1
        }
    }
}

pub fn config_hash(cfg: &CampaignConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

/// Paths at which two report documents differ; the timestamp is ignored.
pub fn diff_reports(a: &Value, b: &Value) -> Vec<String> {
    let mut out = Vec::new();
    walk("", a, b, &mut out);
    out
}

fn walk(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    if path == "/provenance/timestamp" {
        return;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let p = format!("{path}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => walk(&p, u, v, out),
                    (Some(_), None) => out.push(format!("{p}: only in first")),
                    (None, Some(_)) => out.push(format!("{p}: only in second")),
                    (None, None) => {}
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(&format!("{path}/{i}"), u, v, out);
            }
        }
        _ if a != b => out.push(format!("{path}: {a} vs {b}")),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn diff_ignores_only_the_timestamp() {
        let a = json!({"provenance": {"timestamp": "x", "seed": 1}, "checks": [{"max": 1.0}]});
        let b = json!({"provenance": {"timestamp": "y", "seed": 1}, "checks": [{"max": 1.0}]});
        assert!(diff_reports(&a, &b).is_empty());
        let c = json!({"provenance": {"timestamp": "y", "seed": 2}, "checks": [{"max": 2.0}, {}]});
        let d = diff_reports(&a, &c);
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d.iter().any(|s| s.starts_with("/provenance/seed")));
    }
}
