//! The `phe-config/1` campaign document.

use std::collections::BTreeMap;
use std::path::Path;

use phe_core::conventions::{EINSTEIN_TOL, KILLING_TOL, PETROV_TOL, VANISH_TOL};
use phe_core::expr::Expr;
use phe_core::fields::{catalogue, Chart, Family, KeyFunction, MSource, Params};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::{parse_expr, ParseError};

pub const CONFIG_SCHEMA: &str = "phe-config/1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema `{0}` (expected `{CONFIG_SCHEMA}`)")]
    Schema(String),
    #[error("in `{field}`: {source}")]
    Expr { field: String, source: ParseError },
    #[error("`{field}` uses unknown name `{name}`")]
    UnknownName { field: String, name: String },
    #[error("{0}")]
    Invalid(String),
    #[error("family rejected: {0}")]
    Family(phe_core::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Einstein,
    Petrov,
    Congruence,
    Symmetry,
    Hh,
    Ode,
}

impl Check {
    pub const ALL: [Check; 6] = [Check::Einstein, Check::Petrov, Check::Congruence, Check::Symmetry, Check::Hh, Check::Ode];

    pub fn name(self) -> &'static str {
        match self {
            Check::Einstein => "einstein",
            Check::Petrov => "petrov",
            Check::Congruence => "congruence",
            Check::Symmetry => "symmetry",
            Check::Hh => "hh",
            Check::Ode => "ode",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    ClosedForm { h: String, q: String },
    Integrated { a: String, b: String, slice: String, w0: f64 },
    Homothetic { chi0: f64, a0: f64, b0: f64, t0: f64, s0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", deny_unknown_fields)]
pub enum FamilySpec {
    #[serde(rename = "TypeD-pmpm")]
    TypeDPmPm { d0: f64, e0: f64 },
    #[serde(rename = "TypeD-pmmm")]
    TypeDPmMm { b0: f64 },
    #[serde(rename = "TypeD-general")]
    TypeDGeneral { a: String, b: String, d: String, e: String },
    TwistFree { a: String, c: String },
    Potential { w: String },
    #[serde(rename = "TypeII-pmpm")]
    TypeIIPmPm { source: SourceSpec },
    #[serde(rename = "TypeII-pmpm-explicit")]
    TypeIIPmPmExplicit { chi0: f64, a0: f64, b0: f64, u_ref: f64 },
    #[serde(rename = "TypeII-pmmm")]
    TypeIIPmMm { f: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub mu0: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Extra names visible to expressions, e.g. `chi0`.
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exclusion {
    /// Coordinate name of the chart.
    pub axis: String,
    pub center: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Per-coordinate `[lo, hi]`; missing coordinates use the default box.
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    pub count: usize,
    pub seed: u64,
    #[serde(default)]
    pub exclusions: Vec<Exclusion>,
    /// Fraction of points allowed to hit a numerical singularity.
    #[serde(default = "default_budget")]
    pub singular_budget: f64,
}

fn default_budget() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "tol_einstein")]
    pub einstein: f64,
    #[serde(default = "tol_petrov")]
    pub petrov: f64,
    #[serde(default = "tol_vanish")]
    pub vanish: f64,
    #[serde(default = "tol_killing")]
    pub killing: f64,
    #[serde(default = "tol_residual")]
    pub hh: f64,
    #[serde(default = "tol_residual")]
    pub ode: f64,
    #[serde(default = "tol_residual")]
    pub frobenius: f64,
}

fn tol_einstein() -> f64 {
    EINSTEIN_TOL
}
fn tol_petrov() -> f64 {
    PETROV_TOL
}
fn tol_vanish() -> f64 {
    VANISH_TOL
}
fn tol_killing() -> f64 {
    KILLING_TOL
}
fn tol_residual() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            einstein: EINSTEIN_TOL,
            petrov: PETROV_TOL,
            vanish: VANISH_TOL,
            killing: KILLING_TOL,
            hh: tol_residual(),
            ode: tol_residual(),
            frobenius: tol_residual(),
        }
    }
}

impl Tolerances {
    /// Replace every residual bar (not the classifier threshold).
    pub fn override_all(&mut self, tol: f64) {
        self.einstein = tol;
        self.killing = tol;
        self.hh = tol;
        self.ode = tol;
        self.frobenius = tol;
    }
}

/// Expected outcomes; a mismatch fails the check.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asd_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    #[serde(flatten)]
    pub kind: OdeKindSpec,
    pub from: f64,
    pub to: f64,
    #[serde(default)]
    pub initial: Vec<f64>,
    /// Number of evenly spaced output samples.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    11
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "kebab-case")]
pub enum OdeKindSpec {
    /// `36 mu0 M_w = -M^3 + a(w) M + b(w)`
    Abel { a: String, b: String },
    /// `36 mu0 t S_t = -S^3 + (a0 + 18 mu0) S + b0`
    HomotheticAbel { a0: f64, b0: f64 },
    /// Goursat problem for the Liouville equation with data from `F`, `Q`.
    Liouville { f: String, q: String, q0: f64, order: usize },
    /// The type-D system for `e(q)` with `a, b` given.
    TypeD { a: String, b: String, k: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema: String,
    pub family: FamilySpec,
    pub params: ParamsSpec,
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Homothety constant used when building theorem generators.
    #[serde(default = "default_chi0")]
    pub chi0: f64,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSpec>,
}

fn default_chi0() -> f64 {
    1.0
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: CampaignConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(ConfigError::Schema(self.schema.clone()));
        }
        if self.sampling.count == 0 {
            return Err(ConfigError::Invalid("sampling.count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.sampling.singular_budget) {
            return Err(ConfigError::Invalid("sampling.singular_budget must lie in [0, 1]".into()));
        }
        let kf = self.key_function()?;
        let axes = kf.chart().axis_names();
        for name in self.sampling.bounds.keys() {
            if !axes.contains(&name.as_str()) {
                return Err(ConfigError::Invalid(format!("bounds name `{name}` is not a coordinate of {axes:?}")));
            }
        }
        for (k, [lo, hi]) in self.box_bounds(kf.chart()).into_iter().enumerate() {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(ConfigError::Invalid(format!("empty or infinite range for `{}`", axes[k])));
            }
        }
        for ex in &self.sampling.exclusions {
            if !axes.contains(&ex.axis.as_str()) || ex.radius < 0.0 {
                return Err(ConfigError::Invalid(format!("bad exclusion around `{}`", ex.axis)));
            }
        }
        // real-slice domain: the hyperheavenly x and the reduced w stay off zero
        let b = self.box_bounds(kf.chart());
        if b[2][0] <= 0.0 && b[2][1] >= 0.0 {
            return Err(ConfigError::Invalid("x range must not contain 0".into()));
        }
        if kf.chart() == Chart::Reduced && b[3][0] <= 0.0 {
            return Err(ConfigError::Invalid("w range must be positive".into()));
        }
        if let Some(ode) = &self.ode {
            ode.validate(&self.params_value())?;
        }
        Ok(())
    }

    pub fn params_value(&self) -> Params {
        let mut p = Params::new(self.params.mu0, self.params.lambda);
        for (n, v) in &self.params.constants {
            p = p.with(n, *v);
        }
        p
    }

    /// The sampling box, one `[lo, hi]` per chart coordinate.
    pub fn box_bounds(&self, chart: Chart) -> [[f64; 2]; 4] {
        let defaults = [[-1.0, 1.0], [-1.0, 1.0], [0.5, 2.0], if chart == Chart::Hyperheavenly { [-1.0, 1.0] } else { [0.5, 2.0] }];
        let names = chart.axis_names();
        core::array::from_fn(|k| self.sampling.bounds.get(names[k]).copied().unwrap_or(defaults[k]))
    }

    pub fn key_function(&self) -> Result<KeyFunction, ConfigError> {
        let params = self.params_value();
        let fam = self.family.to_family(&params)?;
        catalogue(fam, params).map_err(ConfigError::Family)
    }
}

/// Parse an expression and check its free names against `allowed` and the
/// parameter names.
pub fn parse_field(field: &str, text: &str, allowed: &[&str], params: &Params) -> Result<Expr, ConfigError> {
    let e = parse_expr(text).map_err(|source| ConfigError::Expr { field: field.to_string(), source })?;
    for name in e.free_vars() {
        if !allowed.contains(&name.as_str()) && params.get(&name).is_none() {
            return Err(ConfigError::UnknownName { field: field.to_string(), name });
        }
    }
    Ok(e)
}

impl FamilySpec {
    pub fn to_family(&self, p: &Params) -> Result<Family, ConfigError> {
        let qy = ["q", "y"];
        Ok(match self {
            FamilySpec::TypeDPmPm { d0, e0 } => Family::TypeDPmPm { d0: *d0, e0: *e0 },
            FamilySpec::TypeDPmMm { b0 } => Family::TypeDPmMm { b0: *b0 },
            FamilySpec::TypeDGeneral { a, b, d, e } => Family::TypeDGeneral {
                a: parse_field("family.a", a, &["q"], p)?,
                b: parse_field("family.b", b, &["q"], p)?,
                d: parse_field("family.d", d, &["q"], p)?,
                e: parse_field("family.e", e, &["q"], p)?,
            },
            FamilySpec::TwistFree { a, c } => Family::TwistFree {
                a: parse_field("family.a", a, &qy, p)?,
                c: parse_field("family.c", c, &qy, p)?,
            },
            FamilySpec::Potential { w } => Family::Potential { w: parse_field("family.w", w, &["q", "x", "y"], p)? },
            FamilySpec::TypeIIPmPm { source } => Family::TypeIIPmPm(match source {
                SourceSpec::ClosedForm { h, q } => MSource::ClosedForm {
                    h: parse_field("family.source.h", h, &["w"], p)?,
                    q: parse_field("family.source.q", q, &["q"], p)?,
                },
                SourceSpec::Integrated { a, b, slice, w0 } => MSource::Integrated {
                    a: parse_field("family.source.a", a, &["w"], p)?,
                    b: parse_field("family.source.b", b, &["w"], p)?,
                    slice: parse_field("family.source.slice", slice, &["q"], p)?,
                    w0: *w0,
                },
                SourceSpec::Homothetic { chi0, a0, b0, t0, s0 } => {
                    MSource::Homothetic { chi0: *chi0, a0: *a0, b0: *b0, t0: *t0, s0: *s0 }
                }
            }),
            FamilySpec::TypeIIPmPmExplicit { chi0, a0, b0, u_ref } => {
                Family::TypeIIPmPmExplicit { chi0: *chi0, a0: *a0, b0: *b0, u_ref: *u_ref }
            }
            FamilySpec::TypeIIPmMm { f } => Family::TypeIIPmMm { f: parse_field("family.f", f, &["w"], p)? },
        })
    }
}

impl OdeSpec {
    pub fn validate(&self, p: &Params) -> Result<(), ConfigError> {
        if self.samples < 2 {
            return Err(ConfigError::Invalid("ode.samples must be at least 2".into()));
        }
        let need = match &self.kind {
            OdeKindSpec::Abel { a, b } => {
                parse_field("ode.a", a, &["w"], p)?;
                parse_field("ode.b", b, &["w"], p)?;
                1
            }
            OdeKindSpec::HomotheticAbel { .. } => 1,
            OdeKindSpec::Liouville { f, q, order, .. } => {
                parse_field("ode.f", f, &["w"], p)?;
                parse_field("ode.q", q, &["q"], p)?;
                if *order == 0 || *order > 6 {
                    return Err(ConfigError::Invalid("ode.order must lie in 1..=6".into()));
                }
                0
            }
            OdeKindSpec::TypeD { a, b, .. } => {
                parse_field("ode.a", a, &["q"], p)?;
                parse_field("ode.b", b, &["q"], p)?;
                1
            }
        };
        if self.initial.len() != need {
            return Err(ConfigError::Invalid(format!("ode.initial needs {need} value(s)")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(family: &str) -> String {
        format!(
            r#"{{"schema": "phe-config/1", "family": {family}, "params": {{"mu0": 1.0}},
                "sampling": {{"count": 4, "seed": 7}}, "checks": ["einstein"]}}"#
        )
    }

    #[test]
    fn round_trip() {
        let cfg = CampaignConfig::from_json(&minimal(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#)).unwrap();
        let again = CampaignConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn expression_errors_carry_the_field() {
        let err = CampaignConfig::from_json(&minimal(r#"{"tag": "TypeII-pmmm", "f": "ln("}"#)).unwrap_err();
        match err {
            ConfigError::Expr { field, source } => {
                assert_eq!(field, "family.f");
                assert_eq!(source.offset, 3);
            }
            e => panic!("{e}"),
        }
        let err = CampaignConfig::from_json(&minimal(r#"{"tag": "TypeII-pmmm", "f": "k*w"}"#)).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownName { .. }));
    }

    #[test]
    fn constants_are_in_scope() {
        let text = r#"{"schema": "phe-config/1", "family": {"tag": "TypeII-pmmm", "f": "(3/(2*chi0))*ln(w)"},
            "params": {"mu0": 1.0, "constants": {"chi0": 0.75}}, "sampling": {"count": 1, "seed": 0}}"#;
        let cfg = CampaignConfig::from_json(text).unwrap();
        assert_eq!(cfg.key_function().unwrap().chart(), Chart::Reduced);
    }

    #[test]
    fn domain_and_schema_checks() {
        let bad_schema = minimal(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#).replace("phe-config/1", "phe-config/9");
        assert!(matches!(CampaignConfig::from_json(&bad_schema), Err(ConfigError::Schema(_))));
        let zero_x = r#"{"schema": "phe-config/1", "family": {"tag": "TypeD-pmmm", "b0": 1.0}, "params": {"mu0": 1.0},
            "sampling": {"count": 3, "seed": 1, "bounds": {"x": [-1.0, 1.0]}}}"#;
        assert!(matches!(CampaignConfig::from_json(zero_x), Err(ConfigError::Invalid(_))));
        let zero_count = minimal(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#).replace("\"count\": 4", "\"count\": 0");
        assert!(matches!(CampaignConfig::from_json(&zero_count), Err(ConfigError::Invalid(_))));
        let bad_mu = minimal(r#"{"tag": "TypeD-pmmm", "b0": 1.0}"#).replace("\"mu0\": 1.0", "\"mu0\": 0.0");
        assert!(matches!(CampaignConfig::from_json(&bad_mu), Err(ConfigError::Family(_))));
    }
}
