//! Run the configured checks over a sampled cloud and assemble the report.

use phe_core::congruence::{self, Congruence};
use phe_core::conventions::{LAMBDA_OFFSET, LAMBDA_SLOPE};
use phe_core::expr::Expr;
use phe_core::fields::{describe, Chart, Family, KeyFunction};
use phe_core::geometry::{curvature_at, traceless_ricci};
use phe_core::petrov::{classify_by_criteria, classify_endomorphism, classify_spinor, type_two_terms, PetrovType, PetrovVerdict};
use phe_core::reduced;
use phe_core::symmetry::{self, structure_constants, theorem_claim, verify_algebra, Rational};
use phe_core::{Error, Point};
use rayon::prelude::*;

use crate::config::{CampaignConfig, Check, ConfigError};
use crate::report::{
    config_hash, AlgebraReport, CheckReport, Conventions, PointError, Provenance, Status, Summary, VerificationReport,
    REPORT_SCHEMA,
};
use crate::sample::sample_points;

const ERROR_SAMPLES: usize = 5;

pub fn is_singular(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularPoint(_)
            | Error::SingularityReached { .. }
            | Error::DomainExit { .. }
            | Error::PoleInRange { .. }
            | Error::StepSizeUnderflow { .. }
    )
}

fn not_applicable(e: &Error) -> bool {
    matches!(e, Error::NotApplicable(_) | Error::UnsupportedFamily(_))
}

/// Run options that do not belong to the config itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub stamp: Option<String>,
}

/// Per-point outcomes folded into a check report.
struct Tally<'a> {
    rep: CheckReport,
    points: &'a [Point],
    sum: f64,
    n_res: usize,
    max: f64,
    na: usize,
}

impl<'a> Tally<'a> {
    fn new(check: Check, points: &'a [Point], tol: Option<f64>) -> Self {
        let mut rep = CheckReport::new(check.name());
        rep.tolerance = tol;
        Tally { rep, points, sum: 0.0, n_res: 0, max: 0.0, na: 0 }
    }

    fn error(&mut self, index: Option<usize>, e: &Error) {
        if not_applicable(e) {
            self.na += 1;
            if self.rep.notes.is_empty() {
                self.rep.notes.push(e.to_string());
            }
            return;
        }
        self.rep.errors += 1;
        let singular = is_singular(e);
        if singular {
            self.rep.singular += 1;
        }
        if self.rep.error_samples.len() < ERROR_SAMPLES {
            self.rep.error_samples.push(PointError {
                index: index.unwrap_or(0),
                point: index.map(|i| self.points[i]),
                message: e.to_string(),
                singular,
            });
        }
    }

    fn residual(&mut self, r: f64) {
        self.rep.evaluated += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r.abs() };
        self.max = self.max.max(r);
        self.sum += r;
        self.n_res += 1;
    }

    fn measure(&mut self, name: &str, v: f64) {
        let e = self.rep.measures.entry(name.to_string()).or_insert(0.0);
        *e = e.max(if v.is_nan() { f64::INFINITY } else { v.abs() });
    }

    fn classify(&mut self, key: String, trace: &str) {
        *self.rep.classifications.entry(key.clone()).or_insert(0) += 1;
        self.rep.traces.entry(key).or_insert_with(|| trace.to_string());
    }

    fn fail(&mut self, note: String) {
        self.rep.notes.push(note);
        self.rep.status = Status::Fail;
    }

    /// Close the tally: residual bar, non-singular errors and emptiness.
    fn finish(mut self) -> CheckReport {
        if self.n_res > 0 {
            self.rep.max_residual = Some(self.max);
            self.rep.mean_residual = Some(self.sum / self.n_res as f64);
        }
        if self.rep.status == Status::Fail {
            return self.rep;
        }
        if self.rep.evaluated == 0 && self.rep.errors == 0 {
            self.rep.status = Status::NotApplicable;
            return self.rep;
        }
        let hard = self.rep.errors - self.rep.singular;
        let mut ok = hard == 0 && self.rep.evaluated > 0;
        if let (Some(t), Some(m)) = (self.rep.tolerance, self.rep.max_residual) {
            if !(m < t) {
                self.rep.notes.push(format!("max residual {m:e} not below {t:e}"));
                ok = false;
            }
        }
        if hard > 0 {
            self.rep.notes.push(format!("{hard} point(s) raised errors"));
        }
        self.rep.status = if ok { Status::Pass } else { Status::Fail };
        self.rep
    }
}

fn eval_points<T: Send, F>(points: &[Point], f: F) -> Vec<Result<T, Error>>
where
    F: Fn(Point) -> Result<T, Error> + Sync + Send,
{
    points.par_iter().map(|&p| f(p)).collect()
}

pub fn run_campaign(cfg: &CampaignConfig, opts: &RunOptions) -> Result<VerificationReport, ConfigError> {
    cfg.validate()?;
    let kf = cfg.key_function()?;
    let points = sample_points(cfg, kf.chart())?;
    let mut checks: Vec<Check> = if cfg.checks.is_empty() { Check::ALL.to_vec() } else { cfg.checks.clone() };
    checks.sort();
    checks.dedup();
    let reports: Vec<CheckReport> = checks.iter().map(|&c| run_check(c, cfg, &kf, &points)).collect();

    let failed_checks: Vec<String> = reports.iter().filter(|r| r.status == Status::Fail).map(|r| r.check.clone()).collect();
    let singular_points = reports.iter().map(|r| r.singular).max().unwrap_or(0);
    let budget = (cfg.sampling.singular_budget * points.len() as f64).floor() as usize;
    Ok(VerificationReport {
        schema: REPORT_SCHEMA.to_string(),
        provenance: Provenance {
            tool: "phe".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(cfg),
            timestamp: opts.stamp.clone(),
            seed: cfg.sampling.seed,
            points: points.len(),
        },
        conventions: Conventions::pinned(&cfg.tolerances),
        family: describe(&kf),
        summary: Summary {
            passed: failed_checks.is_empty(),
            failed_checks,
            singular_points,
            singular_budget_exceeded: singular_points > budget,
        },
        checks: reports,
    })
}

pub fn run_check(check: Check, cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    match check {
        Check::Einstein => einstein(cfg, kf, points),
        Check::Petrov => petrov(cfg, kf, points),
        Check::Congruence => congruence_check(cfg, kf, points),
        Check::Symmetry => symmetry_check(cfg, kf, points),
        Check::Hh => hh(cfg, kf, points),
        Check::Ode => ode_check(cfg, kf, points),
    }
}

fn einstein(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let tol = cfg.tolerances.einstein;
    let mut t = Tally::new(Check::Einstein, points, Some(tol));
    let out = eval_points(points, |p| {
        let pack = curvature_at(kf, p)?;
        Ok((traceless_ricci(&pack), pack.scalar))
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok((tr, s)) => {
                t.residual(*tr);
                lo = lo.min(*s);
                hi = hi.max(*s);
            }
            Err(e) => t.error(Some(i), e),
        }
    }
    if lo.is_finite() {
        let spread = hi - lo;
        let expected = 4.0 * (LAMBDA_SLOPE * kf.params.lambda + LAMBDA_OFFSET);
        let offset = (0.5 * (hi + lo) - expected).abs();
        t.measure("scalar_spread", spread);
        t.measure("scalar_minus_4_lambda", offset);
        if !(spread < tol) {
            t.fail(format!("scalar curvature varies by {spread:e}"));
        }
        if !(offset < tol * (1.0 + expected.abs())) {
            t.fail(format!("scalar curvature is off 4 Lambda by {offset:e}"));
        }
    }
    t.finish()
}

struct PetrovPoint {
    sd: PetrovVerdict,
    asd: PetrovVerdict,
    asd_criteria: Option<PetrovVerdict>,
    type_d_term: Option<f64>,
}

fn petrov(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let tol = cfg.tolerances.petrov;
    let mut t = Tally::new(Check::Petrov, points, None);
    let out = eval_points(points, |p| {
        let pack = curvature_at(kf, p)?;
        let sd = classify_endomorphism(&pack.weyl_sd, tol);
        let asd = classify_endomorphism(&pack.weyl_asd, tol);
        let (asd_criteria, type_d_term) = match kf.twist_free_data(p) {
            Ok(d) => {
                let (_, t2) = type_two_terms(&d, kf.params.mu0);
                (Some(classify_by_criteria(kf, p)?), Some(t2))
            }
            Err(Error::NotTwistFree) => (pack.c_asd.map(|c| classify_spinor(&c, tol)), None),
            Err(e) => return Err(e),
        };
        Ok(PetrovPoint { sd, asd, asd_criteria, type_d_term })
    });
    let mut disagreements = 0usize;
    let mut sd_kinds = std::collections::BTreeSet::new();
    let mut asd_kinds = std::collections::BTreeSet::new();
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok(pp) => {
                t.rep.evaluated += 1;
                t.classify(format!("sd:{}", pp.sd.kind.label()), &pp.sd.trace);
                t.classify(format!("asd:{}", pp.asd.kind.label()), &pp.asd.trace);
                sd_kinds.insert(pp.sd.kind.label());
                asd_kinds.insert(pp.asd.kind.label());
                if let Some(c) = &pp.asd_criteria {
                    t.classify(format!("asd-criteria:{}", c.kind.label()), &c.trace);
                    if c.kind != pp.asd.kind {
                        disagreements += 1;
                    }
                }
                if let (Some(v), PetrovType::D) = (pp.type_d_term, pp.asd.kind) {
                    t.measure("type_d_criterion", v);
                }
            }
            Err(e) => t.error(Some(i), e),
        }
    }
    let want_sd = cfg.expect.sd_type.clone().unwrap_or_else(|| "D".to_string());
    if sd_kinds.iter().any(|k| *k != want_sd) {
        t.fail(format!("SD types {sd_kinds:?}, expected {want_sd} everywhere"));
    }
    if let Some(want) = &cfg.expect.asd_type {
        if asd_kinds.iter().any(|k| k != want) {
            t.fail(format!("ASD types {asd_kinds:?}, expected {want} everywhere"));
        }
    }
    if disagreements > 0 {
        t.fail(format!("eigenvalue and criteria routes disagree at {disagreements} point(s)"));
    }
    t.finish()
}

fn congruence_check(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let mut t = Tally::new(Check::Congruence, points, Some(cfg.tolerances.frobenius));
    let vanish = cfg.tolerances.vanish;
    let out = eval_points(points, |p| {
        let optics = congruence::pattern(kf, p)?;
        let frob = congruence::frobenius_check(kf, p)?;
        let cy = kf.twist_free_data(p).ok().map(|d| (d.c_y, d.c_yy.abs() + d.c_y.abs()));
        Ok((optics, frob, cy))
    });
    let mut labels = std::collections::BTreeSet::new();
    let mut iff_failures = 0usize;
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok((optics, frob, cy)) => {
                t.residual(*frob);
                let label = congruence::pattern_label(optics);
                let trace: Vec<String> =
                    optics.iter().map(|o| format!("{}: theta = {:.3e}, rho = {:.3e}", o.which.label(), o.theta, o.rho)).collect();
                t.classify(label.clone(), &trace.join("; "));
                labels.insert(label);
                if let (Some((c_y, scale)), Some(i3)) = (cy, optics.iter().find(|o| o.which == Congruence::I3)) {
                    let cy_zero = c_y.abs() < vanish * (1.0 + scale);
                    if cy_zero != i3.theta_vanishes {
                        iff_failures += 1;
                    }
                }
            }
            Err(e) => t.error(Some(i), e),
        }
    }
    if labels.len() > 1 {
        t.fail(format!("pattern changes across the cloud: {labels:?}"));
    }
    if let Some(want) = &cfg.expect.pattern {
        if labels.iter().any(|l| l != want) {
            t.fail(format!("patterns {labels:?}, expected {want}"));
        }
    }
    if iff_failures > 0 {
        t.fail(format!("I3 expansion and C_y != 0 disagree at {iff_failures} point(s)"));
    }
    t.finish()
}

fn bracket_lines(labels: &[String], c: &[Vec<Vec<Rational>>]) -> Vec<String> {
    let n = labels.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let terms: Vec<String> = (0..n)
                .filter(|&k| *c[i][j][k].numer() != 0)
                .map(|k| {
                    let v = c[i][j][k];
                    if v == Rational::from_integer(1) {
                        labels[k].clone()
                    } else if v == Rational::from_integer(-1) {
                        format!("-{}", labels[k])
                    } else {
                        format!("{v} {}", labels[k])
                    }
                })
                .collect();
            if !terms.is_empty() {
                out.push(format!("[{},{}] = {}", labels[i], labels[j], terms.join(" + ")));
            }
        }
    }
    out
}

fn symmetry_check(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let mut t = Tally::new(Check::Symmetry, points, Some(cfg.tolerances.killing));
    let claim = match theorem_claim(kf, cfg.chi0) {
        Ok(c) => c,
        Err(e) if not_applicable(&e) => {
            t.rep.notes.push(e.to_string());
            return t.finish();
        }
        Err(e) => {
            t.fail(format!("no symmetry claim: {e}"));
            return t.finish();
        }
    };
    let out = eval_points(points, |p| {
        let mut worst = 0.0f64;
        for g in &claim.generators {
            let r = symmetry::killing_residual(kf, g, p)?;
            worst = worst.max(symmetry::relative_size(kf, &r, p)?);
        }
        Ok(worst)
    });
    let mut good = Vec::new();
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok(v) => {
                t.residual(*v);
                good.push(points[i]);
            }
            Err(e) => t.error(Some(i), e),
        }
    }
    let verdict = structure_constants(kf, &claim.generators, &good).and_then(|table| verify_algebra(&table, &claim));
    match verdict {
        Ok(v) => {
            let labels: Vec<String> = (1..=claim.target.labels.len()).map(|i| format!("e{i}")).collect();
            t.classify(v.name.clone(), &format!("certified as {}", claim.target.name));
            t.rep.algebra = Some(AlgebraReport {
                name: v.name.clone(),
                generators: claim.generators.iter().map(|g| g.label.clone()).collect(),
                brackets: bracket_lines(&labels, &v.transformed),
                generator_residual: t.max,
                rounding_delta: v.rounding_delta,
                closure_residual: v.closure_residual,
                jacobi_residual: v.jacobi_residual,
            });
            if let Some(want) = &cfg.expect.algebra {
                if &v.name != want {
                    t.fail(format!("algebra {}, expected {want}", v.name));
                }
            }
        }
        Err(e) => t.fail(format!("algebra not certified: {e}")),
    }
    t.finish()
}

fn hh(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let mut t = Tally::new(Check::Hh, points, Some(cfg.tolerances.hh));
    if kf.chart() != Chart::Hyperheavenly {
        t.rep.notes.push("the hyperheavenly equation is checked in the (q, p, x, y) chart only".into());
        return t.finish();
    }
    let out = eval_points(points, |p| {
        let r = reduced::hh_residual(kf, p)?;
        let pair = match reduced::twist_free_pair_for(kf, p) {
            Ok((a, b)) => Some(a.abs().max(b.abs())),
            Err(Error::NotTwistFree) => None,
            Err(e) => return Err(e),
        };
        Ok((r, pair))
    });
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok((h, pair)) => {
                t.residual(*h);
                if let Some(v) = pair {
                    t.measure("twist_free_pair", *v);
                }
            }
            Err(e) => t.error(Some(i), e),
        }
    }
    if let Some(&v) = t.rep.measures.get("twist_free_pair") {
        if !(v < cfg.tolerances.hh) {
            t.fail(format!("twist-free pair residual {v:e}"));
        }
    }
    t.finish()
}

fn ode_check(cfg: &CampaignConfig, kf: &KeyFunction, points: &[Point]) -> CheckReport {
    let mut t = Tally::new(Check::Ode, points, Some(cfg.tolerances.ode));
    let p = &kf.params;
    let n = Expr::num;
    let out = eval_points(points, |pt| match &kf.family {
        Family::TypeIIPmPm(_) => Ok(reduced::transform_check_pmpm(kf, pt)?.max()),
        Family::TypeIIPmPmExplicit { a0, b0, u_ref, .. } => {
            reduced::separable_round_trip_residual(p.mu0, *a0, *b0, *u_ref, pt[3])
        }
        Family::TypeDGeneral { a, b, d, e } => {
            let (r1, r2) = reduced::typed_constants_residual(a, b, d, e, p, pt[0])?;
            Ok(r1.abs().max(r2.abs()))
        }
        Family::TypeDPmPm { d0, e0 } => {
            let (r1, r2) = reduced::typed_constants_residual(&n(1.0), &n(0.0), &n(*d0), &n(*e0), p, pt[0])?;
            Ok(r1.abs().max(r2.abs()))
        }
        Family::TypeDPmMm { b0 } => {
            let (r1, r2) = reduced::typed_constants_residual(&n(0.0), &n(*b0), &n(0.0), &n(0.0), p, pt[0])?;
            Ok(r1.abs().max(r2.abs()))
        }
        _ => Err(Error::NotApplicable("no reduced ODE system for this family")),
    });
    for (i, r) in out.iter().enumerate() {
        match r {
            Ok(v) => t.residual(*v),
            Err(e) => t.error(Some(i), e),
        }
    }
    t.finish()
}
