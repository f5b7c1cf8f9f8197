//! The `ode` verb: integrate the configured reduced equation and sample it.

use phe_core::reduced::{integrate_ode, liouville_check, liouville_problem, OdeKind, OdeProblem};
use serde::{Deserialize, Serialize};

use crate::campaign::{is_singular, RunOptions};
use crate::config::{parse_field, CampaignConfig, ConfigError, OdeKindSpec};
use crate::report::{config_hash, Status};

pub const ODE_SCHEMA: &str = "phe-ode/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSample {
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub schema: String,
    pub config_hash: String,
    pub timestamp: Option<String>,
    pub equation: String,
    pub from: f64,
    pub to: f64,
    pub status: Status,
    pub steps: usize,
    pub samples: Vec<OdeSample>,
    /// Liouville runs: largest gap to the closed form over the samples.
    pub max_residual: Option<f64>,
    pub error: Option<String>,
    pub singular: bool,
}

impl OdeReport {
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.singular) {
            (Status::Pass, _) => 0,
            (_, true) => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn build_problem(cfg: &CampaignConfig) -> Result<OdeProblem, ConfigError> {
    let spec = cfg.ode.as_ref().ok_or_else(|| ConfigError::Invalid("the config has no `ode` section".into()))?;
    let params = cfg.params_value();
    let kind = match &spec.kind {
        OdeKindSpec::Abel { a, b } => {
            OdeKind::Abel { a: parse_field("ode.a", a, &["w"], &params)?, b: parse_field("ode.b", b, &["w"], &params)? }
        }
        OdeKindSpec::HomotheticAbel { a0, b0 } => OdeKind::HomotheticAbel { a0: *a0, b0: *b0 },
        OdeKindSpec::Liouville { f, q, q0, order } => {
            let f = parse_field("ode.f", f, &["w"], &params)?;
            let q = parse_field("ode.q", q, &["q"], &params)?;
            return liouville_problem(f, q, params, *q0, spec.from, spec.to, *order).map_err(ConfigError::Family);
        }
        OdeKindSpec::TypeD { a, b, k } => OdeKind::TypeDSystem {
            a: parse_field("ode.a", a, &["q"], &params)?,
            b: parse_field("ode.b", b, &["q"], &params)?,
            k: *k,
        },
    };
    Ok(OdeProblem { kind, params, initial: spec.initial.clone(), from: spec.from, to: spec.to })
}

fn equation_name(kind: &OdeKind) -> &'static str {
    match kind {
        OdeKind::Abel { .. } => "abel",
        OdeKind::HomotheticAbel { .. } => "homothetic-abel",
        OdeKind::Liouville { .. } => "liouville",
        OdeKind::TypeDSystem { .. } => "type-d",
    }
}

pub fn run_ode(cfg: &CampaignConfig, opts: &RunOptions) -> Result<OdeReport, ConfigError> {
    cfg.validate()?;
    let prob = build_problem(cfg)?;
    let n = cfg.ode.as_ref().map_or(2, |s| s.samples);
    let mut rep = OdeReport {
        schema: ODE_SCHEMA.to_string(),
        config_hash: config_hash(cfg),
        timestamp: opts.stamp.clone(),
        equation: equation_name(&prob.kind).to_string(),
        from: prob.from,
        to: prob.to,
        status: Status::Fail,
        steps: 0,
        samples: Vec::new(),
        max_residual: None,
        error: None,
        singular: false,
    };
    let sol = match integrate_ode(&prob) {
        Ok(s) => s,
        Err(e) => {
            rep.singular = is_singular(&e);
            rep.error = Some(e.to_string());
            return Ok(rep);
        }
    };
    rep.steps = sol.solution.ts.len().saturating_sub(1);
    let mut worst: Option<f64> = None;
    for i in 0..n {
        let t = prob.from + (prob.to - prob.from) * i as f64 / (n - 1) as f64;
        let state = match sol.eval(t) {
            Ok(s) => s,
            Err(e) => {
                rep.error = Some(e.to_string());
                return Ok(rep);
            }
        };
        if let OdeKind::Liouville { .. } = prob.kind {
            if let Ok((rebuilt, direct)) = liouville_check(&sol, t) {
                let gap = rebuilt
                    .coeffs()
                    .iter()
                    .zip(direct.coeffs())
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / (1.0 + b.abs())));
                worst = Some(worst.unwrap_or(0.0).max(gap));
            }
        }
        rep.samples.push(OdeSample { t, state });
    }
    rep.max_residual = worst;
    rep.status = match worst {
        Some(w) if !(w < cfg.tolerances.ode) => Status::Fail,
        _ => Status::Pass,
    };
    Ok(rep)
}
