//! Key functions, the reduced potentials of the type-[II] families, and the
//! gauge group acting on key functions.
//!
//! Every family evaluates its fields on *coordinate jets*, so the same code
//! serves plain point evaluation, finite-difference probes (order-0 jets) and
//! composition with coordinate maps (gauge transformations, chart changes).

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::jet::{coordinates, Jet, MultiIndex, DEFAULT_ORDER};
use crate::linalg::JetMat4;
use crate::ode::{integrate, picard_expand, OdeOptions};
use crate::quadrature;
use crate::Point;

/// Physical constants plus named constants visible to user expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub mu0: f64,
    pub lambda: f64,
    pub constants: Vec<(String, f64)>,
}

impl Default for Params {
    fn default() -> Self {
        Params { mu0: 1.0, lambda: 0.0, constants: Vec::new() }
    }
}

impl Params {
    pub fn new(mu0: f64, lambda: f64) -> Self {
        Params { mu0, lambda, constants: Vec::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "mu0" => Some(self.mu0),
            "Lambda" => Some(self.lambda),
            _ => self.constants.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v),
        }
    }

    /// Bindings with `mu0`, `Lambda` and the named constants in scope.
    pub fn bindings(&self, proto: &Jet) -> Bindings {
        let mut env = Bindings::new(proto).constant("mu0", self.mu0).constant("Lambda", self.lambda);
        for (n, v) in &self.constants {
            env = env.constant(n, *v);
        }
        env
    }

    fn validate(&self) -> Result<()> {
        if self.mu0 == 0.0 || !self.mu0.is_finite() {
            return Err(Error::BadParams("mu0 must be a nonzero finite number".into()));
        }
        if !self.lambda.is_finite() {
            return Err(Error::BadParams("Lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Coordinate chart used by a family. Axis 3 is `y`, `w` or `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `(q, p, x, y)`
    Hyperheavenly,
    /// `(q, p, x, w)` with `w` the potential-level coordinate of the type-[II] theorems
    Reduced,
    /// `(q, p, x, u)` with `u = S` for the separable homothetic case
    Explicit,
}

impl Chart {
    pub fn axis_names(self) -> [&'static str; 4] {
        match self {
            Chart::Hyperheavenly => ["q", "p", "x", "y"],
            Chart::Reduced => ["q", "p", "x", "w"],
            Chart::Explicit => ["q", "p", "x", "u"],
        }
    }
}

/// How `M(q, w)` of the general [+-,+-] type-[II] metric is produced.
#[derive(Clone, Debug, PartialEq)]
pub enum MSource {
    /// `M = (18 mu0 H_w / (H + Q))^{1/2}`, the `b = 0` solution of the Abel equation.
    ClosedForm { h: Expr, q: Expr },
    /// Integrate `36 mu0 M_w = -M^3 + a(w) M + b(w)` from the slice `M(q, w0)`.
    Integrated { a: Expr, b: Expr, slice: Expr, w0: f64 },
    /// `M = e^{-2 chi0 q/3} t^{-1/2} S(t)`, `t = e^{-4 chi0 q/3} w`, with `S`
    /// from `36 mu0 t S_t = -S^3 + (a0 + 18 mu0) S + b0`, `S(t0) = s0`.
    Homothetic { chi0: f64, a0: f64, b0: f64, t0: f64, s0: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Type-D with `a = 1`, `b = 0`: `W = (y^3 + d0 y + e0) x - (3y^4 + 6 d0 y^2 + 12 e0 y - d0^2)/(3 mu0)`.
    TypeDPmPm { d0: f64, e0: f64 },
    /// Type-D with `a = 0`: `W = b0 y^2 x`.
    TypeDPmMm { b0: f64 },
    /// Type-D key function built from arbitrary `a, b, d, e` of `q`.
    TypeDGeneral { a: Expr, b: Expr, d: Expr, e: Expr },
    /// `W = A(q, y) x + C(q, y)`.
    TwistFree { a: Expr, c: Expr },
    /// Any key function `W(q, x, y)`.
    Potential { w: Expr },
    /// General [+-,+-] type-[II] metric in the `(q, p, x, w)` chart.
    TypeIIPmPm(MSource),
    /// The homothetic [+-,+-] metric written in `(q, p, x, u)` with `u = S`;
    /// `T(u_ref) = 1`.
    TypeIIPmPmExplicit { chi0: f64, a0: f64, b0: f64, u_ref: f64 },
    /// [+-,--] type-[II] metric with `F(w)`, in the `(q, p, x, w)` chart.
    TypeIIPmMm { f: Expr },
    /// A key function pulled through the gauge group.
    Gauged(Box<KeyFunction>, Box<GaugeData>),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::TypeDPmPm { .. } => "TypeD-pmpm",
            Family::TypeDPmMm { .. } => "TypeD-pmmm",
            Family::TypeDGeneral { .. } => "TypeD-general",
            Family::TwistFree { .. } => "TwistFree",
            Family::Potential { .. } => "Potential",
            Family::TypeIIPmPm(_) => "TypeII-pmpm",
            Family::TypeIIPmPmExplicit { .. } => "TypeII-pmpm-explicit",
            Family::TypeIIPmMm { .. } => "TypeII-pmmm",
            Family::Gauged(..) => "Gauged",
        }
    }
}

/// Gauge functions of `q`: the new coordinate `q'(q)` (so `f = dq'/dq`),
/// the shifts `h`, `sigma` and the pair `L`, `M` tied by the constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeData {
    pub qprime: Expr,
    pub h: Expr,
    pub sigma: Expr,
    pub l: Expr,
    pub m: Expr,
}

impl GaugeData {
    pub fn identity() -> Self {
        GaugeData {
            qprime: Expr::var("q"),
            h: Expr::num(0.0),
            sigma: Expr::num(0.0),
            l: Expr::num(0.0),
            m: Expr::num(0.0),
        }
    }

    pub fn f(&self) -> Expr {
        self.qprime.diff("q")
    }

    fn eval(&self, e: &Expr, q: &Jet, params: &Params) -> Result<Jet> {
        e.eval(&params.bindings(q).var("q", q.clone()))
    }

    /// Residual of `3 mu0 M - f^{1/2} (f^{-1/2})'' + (Lambda/3) L` at `q`.
    pub fn constraint_residual(&self, q: f64, params: &Params) -> Result<f64> {
        let qj = Jet::variable(1, 2, 0, q);
        let f = self.eval(&self.f(), &qj, params)?;
        let g = f.powf(-0.5)?;
        let g_qq = 2.0 * g.coeffs()[2];
        let m = self.eval(&self.m, &qj, params)?.value();
        let l = self.eval(&self.l, &qj, params)?.value();
        Ok(3.0 * params.mu0 * m - libm::sqrt(f.value()) * g_qq + params.lambda / 3.0 * l)
    }

    /// The primed coordinates of an unprimed point.
    pub fn map_point(&self, point: Point, params: &Params) -> Result<Point> {
        let q = Jet::variable(1, 1, 0, point[0]);
        let qp = self.eval(&self.qprime, &q, params)?.value();
        let f = self.eval(&self.f(), &q, params)?.value();
        let h = self.eval(&self.h, &q, params)?;
        let sigma = self.eval(&self.sigma, &q, params)?.value();
        let hq = h.coeffs()[1];
        Ok([qp, point[1] + h.value(), point[2], (point[3] + hq * point[2]) / f + sigma])
    }
}

/// Derivatives of `A` and `C` in `y` at a point of a twist-free family,
/// together with the `x` coordinate of the point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistFreeData {
    pub x: f64,
    pub a_y: f64,
    pub a_yy: f64,
    pub a_yyy: f64,
    pub a_yyyy: f64,
    pub c_y: f64,
    pub c_yy: f64,
    pub c_yyy: f64,
    pub c_yyyy: f64,
}

/// The metric functions `𝒜`, `𝒬` (and `ℬ` where the chart has it) and the
/// `x`-derivative of `𝒬`.
#[derive(Clone, Debug)]
pub struct MetricFunctions {
    pub a_cal: Jet,
    pub q_cal: Jet,
    pub b_cal: Option<Jet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyFunction {
    pub family: Family,
    pub params: Params,
}

/// Build a catalogue key function, checking the existence conditions that can
/// be checked without sampling.
pub fn catalogue(family: Family, params: Params) -> Result<KeyFunction> {
    params.validate()?;
    let kf = KeyFunction { family, params };
    kf.validate()?;
    Ok(kf)
}

fn probe_grid() -> impl Iterator<Item = f64> {
    (0..7).map(|i| 0.5 + 0.25 * i as f64)
}

impl KeyFunction {
    fn validate(&self) -> Result<()> {
        let p = &self.params;
        match &self.family {
            Family::TypeIIPmMm { f } => {
                let fw = f.diff("w");
                let all_zero = probe_grid().all(|w| {
                    fw.eval(&p.bindings(&Jet::constant(1, 0, 0.0)).constant("w", w))
                        .map(|j| j.value() == 0.0)
                        .unwrap_or(false)
                });
                if all_zero {
                    return Err(Error::BadParams("F_w vanishes identically".into()));
                }
            }
            Family::TypeIIPmPm(MSource::ClosedForm { h, .. }) => {
                let hw = h.diff("w");
                let all_zero = probe_grid().all(|w| {
                    hw.eval(&p.bindings(&Jet::constant(1, 0, 0.0)).constant("w", w))
                        .map(|j| j.value() == 0.0)
                        .unwrap_or(false)
                });
                if all_zero {
                    return Err(Error::BadParams("H_w vanishes identically".into()));
                }
            }
            Family::TypeIIPmPm(MSource::Homothetic { chi0, a0, b0, t0, s0 }) => {
                if p.lambda != 0.0 {
                    return Err(Error::BadParams("a proper homothety requires Lambda = 0".into()));
                }
                if *chi0 == 0.0 || *t0 <= 0.0 {
                    return Err(Error::BadParams("need chi0 != 0 and t0 > 0".into()));
                }
                let st = homothetic_abel_rhs(p.mu0, *a0, *b0, *t0, *s0);
                if st == 0.0 {
                    return Err(Error::BadParams("S_t vanishes at the initial point".into()));
                }
            }
            Family::TypeIIPmPmExplicit { chi0, a0, b0, u_ref } => {
                if p.lambda != 0.0 {
                    return Err(Error::BadParams("a proper homothety requires Lambda = 0".into()));
                }
                if *chi0 == 0.0 {
                    return Err(Error::BadParams("need chi0 != 0".into()));
                }
                if separable_f(p.mu0, *a0, *b0, *u_ref) == 0.0 {
                    return Err(Error::BadParams("f(u_ref) vanishes".into()));
                }
            }
            Family::TypeIIPmPm(MSource::Integrated { w0, .. }) => {
                if *w0 <= 0.0 {
                    return Err(Error::BadParams("the initial slice needs w0 > 0".into()));
                }
            }
            Family::Gauged(inner, _) => {
                if inner.chart() != Chart::Hyperheavenly {
                    return Err(Error::UnsupportedFamily("gauge maps act on hyperheavenly charts"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn chart(&self) -> Chart {
        match &self.family {
            Family::TypeIIPmPm(_) | Family::TypeIIPmMm { .. } => Chart::Reduced,
            Family::TypeIIPmPmExplicit { .. } => Chart::Explicit,
            _ => Chart::Hyperheavenly,
        }
    }

    /// Whether the family's key function is linear in `x` by construction.
    pub fn is_twist_free(&self) -> bool {
        match &self.family {
            Family::Potential { .. } => false,
            Family::Gauged(inner, _) => inner.is_twist_free(),
            _ => true,
        }
    }

    fn env(&self, proto: &Jet) -> Bindings {
        self.params.bindings(proto)
    }

    /// The key function `W` on coordinate jets `(q, p, x, y)`.
    pub fn key_potential(&self, c: &[Jet; 4]) -> Result<Jet> {
        let mu0 = self.params.mu0;
        let [q, _, x, y] = c;
        match &self.family {
            Family::TypeDPmPm { d0, e0 } => {
                let y2 = y * y;
                let a = &(&(&y2 * y) + &(y * *d0)) + *e0;
                let c4 = &(&(&(&y2 * &y2) * 3.0) + &(&y2 * (6.0 * d0))) + &(y * (12.0 * e0));
                let c_part = (c4 + (-d0 * d0)) * (-1.0 / (3.0 * mu0));
                Ok(&(&a * x) + &c_part)
            }
            Family::TypeDPmMm { b0 } => Ok(&(y * y) * &(x * *b0)),
            Family::TypeDGeneral { a, b, d, e } => {
                let env = self.env(q).var("q", q.clone());
                let ev = |f: &Expr| f.eval(&env);
                let (a_, b_, d_, e_) = (ev(a)?, ev(b)?, ev(d)?, ev(e)?);
                let (a_q, b_q, d_q) = (ev(&a.diff("q"))?, ev(&b.diff("q"))?, ev(&d.diff("q"))?);
                let y2 = y * y;
                let y3 = &y2 * y;
                let big_a = &(&(&a_ * &y3) + &(&b_ * &y2)) + &(&(&d_ * y) + &e_);
                let c_num = &(&(&(&(&a_ * &a_) * &(&y2 * &y2)) * -3.0) + &(&(&(&a_ * &b_) * &y3) * -4.0))
                    + &(&(&(&a_q * 3.0) - &(&(&a_ * &d_) * 6.0)) * &y2);
                let c_num = &(&c_num + &(&(&(&b_q * 2.0) - &(&(&a_ * &e_) * 12.0)) * y))
                    + &(&(&(&(&b_ * &e_) * -4.0) + &(&d_ * &d_)) + &d_q);
                Ok(&(&big_a * x) + &(&c_num * (1.0 / (3.0 * mu0))))
            }
            Family::TwistFree { a, c: cexpr } => {
                let env = self.env(q).var("q", q.clone()).var("y", y.clone());
                Ok(&(&a.eval(&env)? * x) + &cexpr.eval(&env)?)
            }
            Family::Potential { w } => {
                let env = self.env(q).var("q", q.clone()).var("x", x.clone()).var("y", y.clone());
                w.eval(&env)
            }
            Family::Gauged(inner, g) => gauged_potential(inner, g, &self.params, c),
            _ => Err(Error::NotApplicable("no key function in the reduced chart")),
        }
    }

    /// `𝒜`, `𝒬`, `ℬ` from the key function (hyperheavenly chart only).
    pub fn abc_from_w(&self, c: &[Jet; 4]) -> Result<(Jet, Jet, Jet)> {
        let order = c[0].order();
        if order < 2 {
            return Err(Error::NotApplicable("metric functions need jets of order >= 2"));
        }
        let mu0 = self.params.mu0;
        let x = &c[2];
        if x.value().abs() <= crate::jet::SINGULAR_TOL {
            return Err(Error::SingularPoint("x = 0"));
        }
        let w = self.key_potential(c)?;
        let w_x = w.diff(2);
        let w_y = w.diff(3);
        let w_xx = w_x.diff(2);
        let w_xy = w_x.diff(3);
        let w_yy = w_y.diff(3);
        let x2 = x.with_order(order - 2);
        let x3 = &(&x2 * &x2) * &x2;
        let a_cal = &(&(-&(&x2 * &w_yy)) + &(&x3 * mu0)) + self.params.lambda / 6.0;
        let q_cal = &(&x2 * &w_xy) - &w_y.with_order(order - 2);
        let b_cal = &(-&(&x2 * &w_xx)) + &(&w_x.with_order(order - 2) * 2.0);
        Ok((a_cal, q_cal, b_cal))
    }

    /// Metric functions of the family at a point; jets have order `order - 2`
    /// for key-function charts and `order - 2` in the reduced charts as well.
    pub fn metric_functions(&self, point: Point, order: usize) -> Result<MetricFunctions> {
        let c = coordinates(point, order);
        match self.chart() {
            Chart::Hyperheavenly => {
                let (a, q, b) = self.abc_from_w(&c)?;
                Ok(MetricFunctions { a_cal: a, q_cal: q, b_cal: Some(b) })
            }
            Chart::Reduced => {
                let r = self.reduced_fields(&c)?;
                Ok(MetricFunctions { a_cal: r.a_cal, q_cal: r.q_cal, b_cal: None })
            }
            Chart::Explicit => Err(Error::NotApplicable("the explicit chart has no 𝒬 function")),
        }
    }

    /// Metric components `g_ab` as jets of order `order - 2`.
    pub fn metric_jets(&self, point: Point, order: usize) -> Result<JetMat4> {
        let c = coordinates(point, order);
        let mut g = empty_metric(&c[0].with_order(order - 2));
        let x = c[2].with_order(order - 2);
        if x.value().abs() <= crate::jet::SINGULAR_TOL {
            return Err(Error::SingularPoint("x = 0"));
        }
        let xm2 = x.powi(-2)?;
        // ds^2 = 2 x^{-2} { ... }: symmetric components carry x^{-2} for
        // cross terms and 2 x^{-2} for squares.
        let set = |g: &mut JetMat4, a: usize, b: usize, v: Jet| {
            g[a][b] = v.clone();
            g[b][a] = v;
        };
        set(&mut g, 1, 2, -&xm2);
        match self.chart() {
            Chart::Hyperheavenly => {
                let (a, q, b) = self.abc_from_w(&c)?;
                set(&mut g, 0, 3, xm2.clone());
                set(&mut g, 1, 1, &(&xm2 * &a) * 2.0);
                set(&mut g, 0, 1, &(&xm2 * &q) * -2.0);
                set(&mut g, 0, 0, &(&xm2 * &b) * 2.0);
            }
            Chart::Reduced => {
                let r = self.reduced_fields(&c)?;
                set(&mut g, 1, 1, &(&xm2 * &r.a_cal) * 2.0);
                set(&mut g, 0, 1, &(&xm2 * &r.q_cal) * -2.0);
                set(&mut g, 0, 3, &xm2 * &r.g_qw);
            }
            Chart::Explicit => {
                let e = self.explicit_fields(&c)?;
                set(&mut g, 1, 1, &(&xm2 * &e.pp) * 2.0);
                set(&mut g, 0, 1, &xm2 * &e.pq);
                set(&mut g, 0, 0, &(&xm2 * &e.qq) * 2.0);
                set(&mut g, 0, 3, &xm2 * &e.qu);
            }
        }
        Ok(g)
    }

    /// `A`/`C` derivative data at a point (needs jets of order 5 for the
    /// key-function charts).
    pub fn twist_free_data(&self, point: Point) -> Result<TwistFreeData> {
        let order = DEFAULT_ORDER;
        let c = coordinates(point, order);
        match self.chart() {
            Chart::Hyperheavenly => {
                let w = self.key_potential(&c)?;
                let d = |q: u8, x: u8, y: u8| w.derivative(&MultiIndex::new(q, 0, x, y));
                let scale = [d(0, 0, 0), d(0, 1, 0), d(0, 0, 2)]
                    .iter()
                    .fold(1.0f64, |m, v| m.max(v.abs()));
                let w_xx = [d(0, 2, 0), d(0, 2, 1), d(0, 3, 0), d(1, 2, 0)];
                if w_xx.iter().any(|v| v.abs() > 1e-9 * scale) {
                    return Err(Error::NotTwistFree);
                }
                let x = point[2];
                Ok(TwistFreeData {
                    x,
                    a_y: d(0, 1, 1),
                    a_yy: d(0, 1, 2),
                    a_yyy: d(0, 1, 3),
                    a_yyyy: d(0, 1, 4),
                    c_y: d(0, 0, 1) - x * d(0, 1, 1),
                    c_yy: d(0, 0, 2) - x * d(0, 1, 2),
                    c_yyy: d(0, 0, 3) - x * d(0, 1, 3),
                    c_yyyy: d(0, 0, 4) - x * d(0, 1, 4),
                })
            }
            Chart::Reduced => self.reduced_twist_free_data(&c, point[2]),
            Chart::Explicit => {
                // Same space as the reduced chart with w = e^{4 chi0 q/3} T(u)^2.
                let (equiv, wpt) = self.explicit_as_reduced(point)?;
                equiv.twist_free_data(wpt)
            }
        }
    }

    /// The potential `M(q, w)` of the [+-,+-] type-[II] family on jets.
    pub fn m_field(&self, q: &Jet, w: &Jet) -> Result<Jet> {
        let Family::TypeIIPmPm(src) = &self.family else {
            return Err(Error::NotApplicable("M is defined for the [+-,+-] type-[II] family"));
        };
        let mu0 = self.params.mu0;
        match src {
            MSource::ClosedForm { h, q: qe } => {
                let env = self.env(q).var("w", w.clone()).var("q", q.clone());
                let hv = h.eval(&env)?;
                let hw = h.diff("w").eval(&env)?;
                let qv = qe.eval(&env)?;
                (&hw * (18.0 * mu0)).checked_div(&(&hv + &qv))?.sqrt()
            }
            MSource::Homothetic { chi0, a0, b0, t0, s0 } => {
                let e = (q * (-4.0 * chi0 / 3.0)).exp();
                let t = &e * w;
                let s = homothetic_s_jet(mu0, *a0, *b0, *t0, *s0, &t)?;
                let pref = (q * (-2.0 * chi0 / 3.0)).exp();
                Ok(&(&pref * &t.powf(-0.5)?) * &s)
            }
            MSource::Integrated { .. } => {
                let (m2, _) = self.integrated_m_jet(q.value(), w.value(), q.order(), false)?;
                Ok(compose_2(&m2, q, w))
            }
        }
    }

    /// For the integrated source: the `(q, w)` jet of `M` at `(q0, w)`, and
    /// optionally the jet of `Y` with `Y_w = M_q/(6 mu0)`, `Y(q, w0) = 0`.
    pub fn integrated_m_jet(&self, q0: f64, w: f64, order: usize, with_y: bool) -> Result<(Jet, Option<Jet>)> {
        let Family::TypeIIPmPm(MSource::Integrated { a, b, slice, w0 }) = &self.family else {
            return Err(Error::NotApplicable("not an integrated M family"));
        };
        let mu0 = self.params.mu0;
        // q-jet of M (one order more when Y needs M_q), plus q-jet of Y
        let mo = if with_y { order + 1 } else { order };
        let qj = Jet::variable(1, mo, 0, q0);
        let m_init = slice.eval(&self.env(&qj).var("q", qj.clone()))?;
        let nm = m_init.coeffs().len();
        let ny = if with_y { order + 1 } else { 0 };
        let mut y0 = m_init.coeffs().to_vec();
        y0.extend(core::iter::repeat(0.0).take(ny));
        let scalar = Jet::constant(1, 0, 0.0);
        let ab = |wv: f64| -> Result<(f64, f64)> {
            let env = self.env(&scalar).constant("w", wv);
            Ok((a.eval(&env)?.value(), b.eval(&env)?.value()))
        };
        let rhs = |wv: f64, s: &[f64]| -> Result<Vec<f64>> {
            let (av, bv) = ab(wv)?;
            let m = Jet::from_coeffs(1, mo, s[..nm].to_vec());
            let mut out = abel_rhs_jet(&m, av, bv, mu0).coeffs().to_vec();
            if with_y {
                let mq = m.diff(0);
                out.extend(mq.coeffs().iter().map(|c| c / (6.0 * mu0)));
            }
            Ok(out)
        };
        let opts = OdeOptions { rtol: 1e-13, atol: 1e-15, ..OdeOptions::default() };
        let sol = integrate(rhs, *w0, &y0, w, &opts)?;
        let state = sol.final_state();
        let m_q = Jet::from_coeffs(1, mo, state[..nm].to_vec());
        // Picard in w on the 2-variable layout
        let m_slice = m_q.with_order(mo).embed(2, &[0]);
        let wj = Jet::variable(2, mo, 1, w);
        let env2 = self.env(&wj).var("w", wj.clone());
        let a2 = a.eval(&env2)?;
        let b2 = b.eval(&env2)?;
        let mut init = vec![m_slice];
        if with_y {
            let y_q = Jet::from_coeffs(1, order, state[nm..].to_vec());
            init.push(y_q.with_order(mo).embed(2, &[0]));
        }
        let full = picard_expand(&init, 1, |u| {
            let m = &u[0];
            let dm = &(&(&(-&(&(m * m) * m)) + &(&a2 * m)) + &b2) * (1.0 / (36.0 * mu0));
            let mut out = vec![dm];
            if with_y {
                out.push(&m.diff(0).with_order(mo) * (1.0 / (6.0 * mu0)));
            }
            Ok(out)
        })?;
        let m2 = full[0].with_order(order);
        let y2 = if with_y { Some(full[1].with_order(order)) } else { None };
        Ok((m2, y2))
    }

    /// `F(w)` of the [+-,--] family.
    pub fn f_field(&self, w: &Jet) -> Result<Jet> {
        let Family::TypeIIPmMm { f } = &self.family else {
            return Err(Error::NotApplicable("F is defined for the [+-,--] type-[II] family"));
        };
        f.eval(&self.env(w).var("w", w.clone()))
    }

    fn reduced_fields(&self, c: &[Jet; 4]) -> Result<ReducedFields> {
        let mu0 = self.params.mu0;
        let order = c[0].order();
        let (q, x, w) = (&c[0], &c[2].with_order(order - 2), &c[3]);
        let x2 = x * x;
        let x3 = &x2 * x;
        let base = &(&x3 * mu0) + self.params.lambda / 6.0;
        match &self.family {
            Family::TypeIIPmPm(_) => {
                let m = self.m_field(q, w)?;
                let m_q = m.diff(0);
                if m_q.value().abs() <= crate::jet::SINGULAR_TOL {
                    return Err(Error::SingularPoint("M_q = 0"));
                }
                let m_qw = m_q.diff(3);
                let ratio = m_qw.checked_div(&m_q.with_order(order - 2))?;
                let a_cal = &(&base - &(&(&x2 * &m.with_order(order - 2)) * 0.5)) - &(&ratio * x);
                let q_cal = &m_q.with_order(order - 2) * (-1.0 / (6.0 * mu0));
                let g_qw = &m_q.with_order(order - 2) * (1.0 / (6.0 * mu0));
                Ok(ReducedFields { a_cal, q_cal, g_qw })
            }
            Family::TypeIIPmMm { .. } => {
                if w.value() <= 0.0 {
                    return Err(Error::SingularPoint("w <= 0"));
                }
                let f = self.f_field(w)?;
                let f_w = f.diff(3).with_order(order - 2);
                let qf = &q.with_order(order - 2) + &f.with_order(order - 2);
                let denom = &(&w.with_order(order - 2) * &qf) * &qf;
                let a_cal = &base - &(&x2 * &w.with_order(order - 2));
                let g_qw = -f_w.checked_div(&denom)?;
                Ok(ReducedFields { a_cal, q_cal: x.lift(0.0), g_qw })
            }
            _ => Err(Error::NotApplicable("not a reduced-chart family")),
        }
    }

    fn reduced_twist_free_data(&self, c: &[Jet; 4], x: f64) -> Result<TwistFreeData> {
        let mu0 = self.params.mu0;
        let (q, w) = (&c[0], &c[3]);
        match &self.family {
            Family::TypeIIPmPm(_) => {
                let m = self.m_field(q, w)?;
                let m_q = m.diff(0);
                let dy = |f: &Jet| -> Result<Jet> {
                    let o = f.order() - 1;
                    Ok(&f.diff(3).checked_div(&m_q.with_order(o))? * (6.0 * mu0))
                };
                let m_qw = m_q.diff(3);
                let a_yyy = dy(&(&m * 0.5))?;
                let a_yyyy = dy(&a_yyy)?;
                let c_yy = m_qw.checked_div(&m_q.with_order(m_qw.order()))?;
                let c_yyy = dy(&c_yy)?;
                let c_yyyy = dy(&c_yyy)?;
                let a_y = &m_q.diff(0).checked_div(&m_q.with_order(m_q.order() - 1))? * -0.5;
                Ok(TwistFreeData {
                    x,
                    a_y: a_y.value(),
                    a_yy: 0.5 * m.value(),
                    a_yyy: a_yyy.value(),
                    a_yyyy: a_yyyy.value(),
                    c_y: m_q.value() / (6.0 * mu0),
                    c_yy: c_yy.value(),
                    c_yyy: c_yyy.value(),
                    c_yyyy: c_yyyy.value(),
                })
            }
            Family::TypeIIPmMm { .. } => {
                let f = self.f_field(w)?;
                let f_w = f.diff(3);
                let qf = &q.with_order(f_w.order()) + &f.with_order(f_w.order());
                let y_w = -f_w.checked_div(&(&(&w.with_order(f_w.order()) * &qf) * &qf))?;
                let dy = |g: &Jet| -> Result<Jet> {
                    let o = g.order() - 1;
                    g.diff(3).checked_div(&y_w.with_order(o))
                };
                let a_yyy = dy(&w.with_order(y_w.order()))?;
                let a_yyyy = dy(&a_yyy)?;
                // A_y = -Y_{qw}/(2 Y_w)
                let a_y = &y_w.diff(0).checked_div(&y_w.with_order(y_w.order() - 1))? * -0.5;
                Ok(TwistFreeData {
                    x,
                    a_y: a_y.value(),
                    a_yy: w.value(),
                    a_yyy: a_yyy.value(),
                    a_yyyy: a_yyyy.value(),
                    c_y: 0.0,
                    c_yy: 0.0,
                    c_yyy: 0.0,
                    c_yyyy: 0.0,
                })
            }
            _ => Err(Error::NotApplicable("not a reduced-chart family")),
        }
    }

    /// Sign of `∂y/∂(axis 3)`, so that orientations agree with the
    /// hyperheavenly chart.
    pub fn chart_orientation(&self, point: Point) -> Result<f64> {
        match &self.family {
            Family::TypeIIPmPm(_) => {
                let c = coordinates(point, 1);
                let m = self.m_field(&c[0], &c[3])?;
                Ok(m.derivative(&MultiIndex::axis(0, 1)).signum())
            }
            Family::TypeIIPmMm { .. } => {
                let w = Jet::variable(1, 1, 0, point[3]);
                Ok(-self.f_field(&w)?.coeffs()[1].signum())
            }
            Family::TypeIIPmPmExplicit { chi0, .. } => Ok(-chi0.signum()),
            _ => Ok(1.0),
        }
    }

    /// `T(u)` as a jet for the explicit chart, normalised by `T(u_ref) = 1`.
    pub fn t_of_u(&self, u: &Jet) -> Result<Jet> {
        let Family::TypeIIPmPmExplicit { a0, b0, u_ref, .. } = &self.family else {
            return Err(Error::NotApplicable("T(u) belongs to the explicit chart"));
        };
        separable_t_jet(self.params.mu0, *a0, *b0, *u_ref, u)
    }

    fn explicit_fields(&self, c: &[Jet; 4]) -> Result<ExplicitFields> {
        let Family::TypeIIPmPmExplicit { chi0, a0, b0, .. } = &self.family else {
            return Err(Error::NotApplicable("not the explicit chart"));
        };
        let mu0 = self.params.mu0;
        let order = c[0].order() - 2;
        let q = c[0].with_order(order);
        let x = c[2].with_order(order);
        let u = c[3].with_order(order);
        let t = self.t_of_u(&u)?;
        let f = separable_f_jet(mu0, *a0, *b0, &u);
        let e_m2 = (&q * (-2.0 * chi0 / 3.0)).exp();
        let e_p4 = (&q * (4.0 * chi0 / 3.0)).exp();
        let e_m4 = (&q * (-4.0 * chi0 / 3.0)).exp();
        let pref = &(&e_m2 * &f.checked_div(&t)?) * (-chi0 / (81.0 * mu0 * mu0));
        let t2 = &t * &t;
        let pq = pref.clone();
        let qq = &(&(&pref * &e_p4) * &t2) * (2.0 * chi0 / 3.0);
        let qu = (&(&(&pref * &e_p4) * &t2) * (18.0 * mu0)).checked_div(&f)?;
        let x2 = &x * &x;
        let u2 = &u * &u;
        let term2 = &(&(&x2 * &e_m2) * &u.checked_div(&t)?) * -0.5;
        let num3 = &(&u2 * 3.0) + (-a0);
        let term3 = &(&(&x * &e_m4) * &num3.checked_div(&t2)?) * (1.0 / (36.0 * mu0));
        let pp = &(&(&(&(&x2 * &x) * mu0) + &term2) + &term3) + self.params.lambda / 6.0;
        Ok(ExplicitFields { pp, pq, qq, qu })
    }

    /// The reduced-chart family and point describing the same geometry as the
    /// explicit chart at `point`.
    pub fn explicit_as_reduced(&self, point: Point) -> Result<(KeyFunction, Point)> {
        let Family::TypeIIPmPmExplicit { chi0, a0, b0, u_ref } = &self.family else {
            return Err(Error::NotApplicable("not the explicit chart"));
        };
        let u = Jet::constant(1, 0, point[3]);
        let t = self.t_of_u(&u)?.value();
        let tt = t * t;
        let w = libm::exp(4.0 * chi0 * point[0] / 3.0) * tt;
        let kf = KeyFunction {
            family: Family::TypeIIPmPm(MSource::Homothetic { chi0: *chi0, a0: *a0, b0: *b0, t0: tt, s0: point[3] }),
            params: self.params.clone(),
        };
        let _ = u_ref;
        Ok((kf, [point[0], point[1], point[2], w]))
    }
}

struct ReducedFields {
    a_cal: Jet,
    q_cal: Jet,
    g_qw: Jet,
}

struct ExplicitFields {
    pp: Jet,
    pq: Jet,
    qq: Jet,
    qu: Jet,
}

fn empty_metric(proto: &Jet) -> JetMat4 {
    core::array::from_fn(|_| core::array::from_fn(|_| proto.lift(0.0)))
}

/// `(-M^3 + a M + b)/(36 mu0)` on a jet.
pub fn abel_rhs_jet(m: &Jet, a: f64, b: f64, mu0: f64) -> Jet {
    let m3 = &(m * m) * m;
    &(&(&(-&m3) + &(m * a)) + b) * (1.0 / (36.0 * mu0))
}

/// `S_t` from `36 mu0 t S_t = -S^3 + (a0 + 18 mu0) S + b0`.
pub fn homothetic_abel_rhs(mu0: f64, a0: f64, b0: f64, t: f64, s: f64) -> f64 {
    (-s * s * s + (a0 + 18.0 * mu0) * s + b0) / (36.0 * mu0 * t)
}

/// `f(u) = -u^3 + (18 mu0 + a0) u + b0`.
pub fn separable_f(mu0: f64, a0: f64, b0: f64, u: f64) -> f64 {
    -u * u * u + (18.0 * mu0 + a0) * u + b0
}

fn separable_f_jet(mu0: f64, a0: f64, b0: f64, u: &Jet) -> Jet {
    &(&(-&(&(u * u) * u)) + &(u * (18.0 * mu0 + a0))) + b0
}

/// `T(u) = exp(18 mu0 ∫_{u_ref}^u du/f)` as a jet in whatever variables `u` carries.
pub fn separable_t_jet(mu0: f64, a0: f64, b0: f64, u_ref: f64, u: &Jet) -> Result<Jet> {
    let uv = u.value();
    let lo = uv.min(u_ref);
    let hi = uv.max(u_ref);
    if let Some(root) = real_root_in(mu0, a0, b0, lo, hi) {
        return Err(Error::PoleInRange { at: root });
    }
    let log_t = quadrature::integrate(|s| Ok(18.0 * mu0 / separable_f(mu0, a0, b0, s)), u_ref, uv, 1e-14)?;
    // derivative part: ln T has derivative 18 mu0 / f
    let uj = Jet::variable(1, u.order(), 0, uv);
    let g = (separable_f_jet(mu0, a0, b0, &uj).recip()? * (18.0 * mu0)).integrate(0);
    let ln_t = &g + log_t;
    Ok(ln_t.exp().compose(&[u.clone()]))
}

/// A root of `f` in `[lo, hi]`, found on a fine grid plus bisection.
pub fn real_root_in(mu0: f64, a0: f64, b0: f64, lo: f64, hi: f64) -> Option<f64> {
    let f = |u: f64| separable_f(mu0, a0, b0, u);
    if f(lo) == 0.0 {
        return Some(lo);
    }
    let n = 512;
    let mut prev = (lo, f(lo));
    for i in 1..=n {
        let u = lo + (hi - lo) * i as f64 / n as f64;
        let fu = f(u);
        if fu == 0.0 {
            return Some(u);
        }
        if fu.signum() != prev.1.signum() {
            let (mut a, mut b) = (prev.0, u);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if f(m).signum() == f(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = (u, fu);
    }
    // tangential roots between grid nodes
    for i in 0..n {
        let (a, b) = (lo + (hi - lo) * i as f64 / n as f64, lo + (hi - lo) * (i + 1) as f64 / n as f64);
        let m = 0.5 * (a + b);
        if f(m).abs() < 1e-12 * (1.0 + libm::pow(m.abs(), 3.0)) {
            return Some(m);
        }
    }
    None
}

/// `S(t)` as a jet: integrate the homothetic Abel equation from `(t0, s0)` to
/// the value of `t`, then Picard-expand and compose.
pub fn homothetic_s_jet(mu0: f64, a0: f64, b0: f64, t0: f64, s0: f64, t: &Jet) -> Result<Jet> {
    let tv = t.value();
    if tv <= 0.0 {
        return Err(Error::SingularPoint("t <= 0"));
    }
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-15, ..OdeOptions::default() };
    let sol = integrate(|tt, s| Ok(vec![homothetic_abel_rhs(mu0, a0, b0, tt, s[0])]), t0, &[s0], tv, &opts)?;
    let sv = sol.final_state()[0];
    let tj = Jet::variable(1, t.order(), 0, tv);
    let s_init = tj.lift(sv);
    let tinv = tj.recip()?;
    let s = picard_expand(&[s_init], 0, |u| {
        let s = &u[0];
        let r = &(&(&(-&(&(s * s) * s)) + &(s * (a0 + 18.0 * mu0))) + b0) * (1.0 / (36.0 * mu0));
        Ok(vec![&r * &tinv])
    })?;
    Ok(s[0].compose(&[t.clone()]))
}

/// Compose a 2-variable jet in `(q, w)` with coordinate jets.
fn compose_2(m2: &Jet, q: &Jet, w: &Jet) -> Jet {
    m2.with_order(q.order()).compose(&[q.clone(), w.clone()])
}

/// Invert `q'(q) = target` on jets by Newton iteration.
fn invert_qprime(g: &GaugeData, params: &Params, target: &Jet) -> Result<Jet> {
    let scalar = |q: f64| -> Result<(f64, f64)> {
        let qj = Jet::variable(1, 1, 0, q);
        let v = g.eval(&g.qprime, &qj, params)?;
        Ok((v.value(), v.coeffs()[1]))
    };
    let mut q = target.value();
    for _ in 0..100 {
        let (v, d) = scalar(q)?;
        if d == 0.0 {
            return Err(Error::BadGauge { residual: f64::INFINITY });
        }
        let step = (v - target.value()) / d;
        q -= step;
        if step.abs() < 1e-15 * (1.0 + q.abs()) {
            break;
        }
    }
    let f_expr = g.f();
    let mut qj = target.lift(q);
    for _ in 0..=target.order() + 1 {
        let v = g.eval(&g.qprime, &qj, params)?;
        let d = g.eval(&f_expr, &qj, params)?;
        qj = &qj - &(&v - target).checked_div(&d)?;
    }
    Ok(qj)
}

fn gauged_potential(inner: &KeyFunction, g: &GaugeData, params: &Params, c: &[Jet; 4]) -> Result<Jet> {
    let mu0 = params.mu0;
    let lam = params.lambda;
    let [qp, pp, xp, yp] = c;
    let q = invert_qprime(g, params, qp)?;
    let ev = |e: &Expr| g.eval(e, &q, params);
    let f = ev(&g.f())?;
    let f_q = ev(&g.f().diff("q"))?;
    let h_q = ev(&g.h.diff("q"))?;
    let sigma = ev(&g.sigma)?;
    let sigma_q = ev(&g.sigma.diff("q"))?;
    let l = ev(&g.l)?;
    let m = ev(&g.m)?;
    // d/dq (h_q / f)
    let hq_over_f_q = ev(&(g.h.diff("q") / g.f()).diff("q"))?;
    let x = xp.clone();
    let y = &(&f * &(yp - &sigma)) - &(&h_q * &x);
    let p = &pp.clone() - &ev(&g.h)?;
    let w = inner.key_potential(&[q.clone(), p, x.clone(), y.clone()])?;
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x2 * &x2;
    let mut rhs = w;
    rhs += &(&(&(&x3 * &y) + &(&(&h_q * &x4) * 0.5)) * &(&h_q * (0.5 * mu0)));
    rhs -= &(&(&l * &x3) * (1.0 / 3.0));
    rhs += &(&f_q.checked_div(&(&f * 2.0))? * &(&x * &y));
    rhs -= &(&(&(&f * &hq_over_f_q) * &x2) * 0.5);
    rhs -= &(&(&h_q * &y) * (lam / 6.0));
    rhs -= &(&(&(&(&f * &sigma_q) * 0.5) + &(&(&h_q * &h_q) * (lam / 12.0))) * &x);
    rhs -= &m;
    rhs.checked_div(&(&f * &f))
}

/// Apply a gauge map. The constraint tying `L` and `M` is checked on a grid
/// of `q` values in `[-1, 1]`.
pub fn gauge_transform(kf: &KeyFunction, g: &GaugeData) -> Result<KeyFunction> {
    if kf.chart() != Chart::Hyperheavenly {
        return Err(Error::UnsupportedFamily("gauge maps act on hyperheavenly charts"));
    }
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let q = -1.0 + 0.1 * i as f64;
        let r = g.constraint_residual(q, &kf.params)?;
        worst = worst.max(r.abs());
    }
    if worst > 1e-9 || !worst.is_finite() {
        return Err(Error::BadGauge { residual: worst });
    }
    Ok(KeyFunction { family: Family::Gauged(Box::new(kf.clone()), Box::new(g.clone())), params: kf.params.clone() })
}

/// Human-readable one-line description of a family.
pub fn describe(kf: &KeyFunction) -> String {
    match &kf.family {
        Family::TypeDPmPm { d0, e0 } => format!("TypeD-pmpm d0={d0} e0={e0}"),
        Family::TypeDPmMm { b0 } => format!("TypeD-pmmm b0={b0}"),
        Family::TypeIIPmMm { f } => format!("TypeII-pmmm F={f}"),
        other => other.tag().to_string(),
    }
}
