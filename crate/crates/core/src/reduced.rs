//! Residuals and integrators for the reduced field equations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::fields::{separable_f, separable_t_jet, real_root_in, Family, KeyFunction, MSource, Params};
use crate::jet::{coordinates, layout, Jet, MultiIndex, SINGULAR_TOL};
use crate::ode::{self, OdeOptions};
use crate::quadrature;
use crate::Point;

fn d(j: &Jet, m: [u8; 4]) -> f64 {
    j.derivative(&MultiIndex(m))
}

/// Left-hand side of the expanding hyperheavenly equation at a point.
pub fn hh_residual(kf: &KeyFunction, point: Point) -> Result<f64> {
    let x = point[2];
    if x.abs() <= SINGULAR_TOL {
        return Err(Error::SingularPoint("x = 0"));
    }
    let c = coordinates(point, 2);
    let w = kf.key_potential(&c)?;
    let (mu0, lambda) = (kf.params.mu0, kf.params.lambda);
    let w0 = w.value();
    let (wx, wy) = (d(&w, [0, 0, 1, 0]), d(&w, [0, 0, 0, 1]));
    let (wxx, wxy, wyy) = (d(&w, [0, 0, 2, 0]), d(&w, [0, 0, 1, 1]), d(&w, [0, 0, 0, 2]));
    let wqy = d(&w, [1, 0, 0, 1]);
    Ok(wxx * wyy - wxy * wxy + 2.0 / x * (wy * wxy - wx * wyy) + wqy / x
        - mu0 * (x * x * wxx - 3.0 * x * wx + 3.0 * w0)
        - lambda / (6.0 * x) * wxx)
}

/// The two residuals of the twist-free pair from the `(q, y)` jets of `A`
/// and `C` (order >= 2).
pub fn twist_free_pair_from_jets(a: &Jet, c: &Jet, mu0: f64) -> (f64, f64) {
    let e = |j: &Jet, nq: u8, ny: u8| j.derivative(&MultiIndex([nq, ny, 0, 0]));
    let (a0, ay, ayy, ayq) = (a.value(), e(a, 0, 1), e(a, 0, 2), e(a, 1, 1));
    let (c0, cy, cyy, cyq) = (c.value(), e(c, 0, 1), e(c, 0, 2), e(c, 1, 1));
    (ay * ay - 2.0 * a0 * ayy + ayq - 3.0 * mu0 * c0, cyq - 2.0 * a0 * cyy + 2.0 * ay * cy)
}

/// The pair for `A(q, y)`, `C(q, y)` given as expressions.
pub fn twist_free_pair_residual(a: &Expr, c: &Expr, params: &Params, q: f64, y: f64) -> Result<(f64, f64)> {
    let qj = Jet::variable(2, 2, 0, q);
    let yj = Jet::variable(2, 2, 1, y);
    let env = params.bindings(&qj).var("q", qj.clone()).var("y", yj);
    Ok(twist_free_pair_from_jets(&a.eval(&env)?, &c.eval(&env)?, params.mu0))
}

/// The pair for a twist-free key function, with `A = W_x`, `C = W - x W_x`.
pub fn twist_free_pair_for(kf: &KeyFunction, point: Point) -> Result<(f64, f64)> {
    let c = coordinates(point, 3);
    let w = kf.key_potential(&c)?;
    let w_x = w.diff(2);
    if w_x.diff(2).value().abs() > 1e-9 * (1.0 + w_x.value().abs()) {
        return Err(Error::NotTwistFree);
    }
    // restrict to the (q, y) plane through the point
    let x = point[2];
    let restrict = |j: &Jet| -> Jet {
        let mut out = Jet::zero(2, 2);
        let lay = layout(2, 2);
        let mut coeffs = out.coeffs().to_vec();
        for (m, c) in j.terms() {
            if m.0[1] == 0 && m.0[2] == 0 {
                if let Some(k) = lay.index_of(&MultiIndex([m.0[0], m.0[3], 0, 0])) {
                    coeffs[k] = c;
                }
            }
        }
        out = Jet::from_coeffs(2, 2, coeffs);
        out
    };
    let a = restrict(&w_x.with_order(2));
    let cc = restrict(&(&w.with_order(2) - &(&w_x.with_order(2) * x)));
    Ok(twist_free_pair_from_jets(&a, &cc, kf.params.mu0))
}

/// Residuals of the type-D system for `a, b, d, e` given as `q`-jets
/// (`e` may have order 1).
pub fn typed_constants_from_jets(a: &Jet, b: &Jet, dd: &Jet, e: &Jet) -> (f64, f64) {
    let c = |j: &Jet, k: usize| if k <= j.order() { j.coeffs()[k] * [1.0, 1.0, 2.0][k] } else { 0.0 };
    let (a0, a1, a2) = (c(a, 0), c(a, 1), c(a, 2));
    let (b0, b1, b2) = (c(b, 0), c(b, 1), c(b, 2));
    let (d0, d1) = (c(dd, 0), c(dd, 1));
    let (e0, e1) = (c(e, 0), c(e, 1));
    let r1 = 4.0 * b0 * b1 + 3.0 * a2 - 6.0 * (a1 * d0 + a0 * d1);
    let r2 = b2 - 12.0 * e0 * a1 - 6.0 * a0 * e1 + 2.0 * d0 * b1;
    (r1, r2)
}

pub fn typed_constants_residual(a: &Expr, b: &Expr, dd: &Expr, e: &Expr, params: &Params, q: f64) -> Result<(f64, f64)> {
    let qj = Jet::variable(1, 2, 0, q);
    let env = params.bindings(&qj).var("q", qj.clone());
    Ok(typed_constants_from_jets(&a.eval(&env)?, &b.eval(&env)?, &dd.eval(&env)?, &e.eval(&env)?))
}

/// Residual of the Liouville equation `2 w Y_w = -∂_w(Y_{qw}/Y_w)` for
/// `Y_w = -F_w Q_q / (w (Q + F)^2)`.
pub fn liouville_residual(f: &Expr, qf: &Expr, params: &Params, q: f64, w: f64) -> Result<f64> {
    let z = liouville_z(f, qf, params, q, w, 3)?;
    let zq = z.diff(0);
    let ratio = zq.checked_div(&z.with_order(2))?;
    Ok(2.0 * w * z.value() + ratio.diff(1).value())
}

fn liouville_z(f: &Expr, qf: &Expr, params: &Params, q: f64, w: f64, order: usize) -> Result<Jet> {
    let qj = Jet::variable(2, order + 1, 0, q);
    let wj = Jet::variable(2, order + 1, 1, w);
    let env = params.bindings(&qj).var("q", qj.clone()).var("w", wj.clone());
    let fv = f.eval(&env)?;
    let qv = qf.eval(&env)?;
    let num = &fv.diff(1) * &qv.diff(0);
    let s = &qv.with_order(order) + &fv.with_order(order);
    let den = &(&wj.with_order(order) * &s) * &s;
    Ok(-num.checked_div(&den)?)
}

/// Coefficients `a(w)`, `b(w)` of the Abel equation behind a [+-,+-] source.
pub fn abel_coefficients(kf: &KeyFunction) -> Result<(Expr, Expr)> {
    let mu0 = kf.params.mu0;
    let w = Expr::var("w");
    match &kf.family {
        Family::TypeIIPmPm(MSource::ClosedForm { h, .. }) => {
            let hw = h.diff("w");
            Ok((Expr::num(18.0 * mu0) * hw.diff("w") / hw, Expr::num(0.0)))
        }
        Family::TypeIIPmPm(MSource::Integrated { a, b, .. }) => Ok((a.clone(), b.clone())),
        Family::TypeIIPmPm(MSource::Homothetic { a0, b0, .. }) => {
            Ok((Expr::num(*a0) / w.clone(), Expr::num(*b0) * w.pow(Expr::num(-1.5))))
        }
        _ => Err(Error::UnsupportedFamily("Abel coefficients belong to the [+-,+-] type-[II] sources")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OdeKind {
    /// `36 mu0 M_w = -M^3 + a(w) M + b(w)`; state `M`, variable `w`.
    Abel { a: Expr, b: Expr },
    /// `36 mu0 t S_t = -S^3 + (a0 + 18 mu0) S + b0`; state `S`, variable `t`.
    HomotheticAbel { a0: f64, b0: f64 },
    /// The Liouville equation for `φ = ln|Y_w|` as a Goursat problem along
    /// `q = q0`; state the `q`-Taylor coefficients `φ_1..φ_order`, boundary
    /// data from `Y_w = -F_w Q_q/(w (Q + F)^2)`.
    Liouville { f: Expr, q: Expr, q0: f64, order: usize },
    /// The type-D system with `a, b` given, `d` fixed by
    /// `2 b^2 + 3 a_q - 6 a d = k`; state `e`, variable `q`.
    TypeDSystem { a: Expr, b: Expr, k: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeProblem {
    pub kind: OdeKind,
    pub params: Params,
    pub initial: Vec<f64>,
    pub from: f64,
    pub to: f64,
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub problem: OdeProblem,
    pub solution: ode::Solution,
}

impl OdeSolution {
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.solution.eval(t)
    }
}

fn scalar_env(params: &Params) -> Bindings {
    params.bindings(&Jet::constant(1, 0, 0.0))
}

fn eval_at(e: &Expr, params: &Params, name: &str, v: f64) -> Result<f64> {
    Ok(e.eval(&scalar_env(params).constant(name, v))?.value())
}

/// `d` of the type-D system from `a`, `b` and the constant `k`.
pub fn type_d_d(a: &Expr, b: &Expr, k: f64) -> Expr {
    (Expr::num(3.0) * a.diff("q") + Expr::num(2.0) * b.clone() * b.clone() - Expr::num(k)) / (Expr::num(6.0) * a.clone())
}

/// `q`-jets of `φ = ln|Y_w|` at `(q0, w)` and the sign of `Y_w`.
fn liouville_phi(f: &Expr, qf: &Expr, params: &Params, q0: f64, w: f64, order: usize) -> Result<(Vec<f64>, f64)> {
    let qj = Jet::variable(1, order + 1, 0, q0);
    let wj = Jet::variable(1, order + 1, 0, w);
    let wv = Jet::constant(1, order + 1, w);
    let env = params.bindings(&qj).var("q", qj.clone());
    let qv = qf.eval(&env)?;
    let fw_env = params.bindings(&wj).var("w", wj.clone());
    let fv = f.eval(&fw_env)?;
    let fval = fv.value();
    let fw = fv.diff(0).value();
    let s = &qv.with_order(order) + fval;
    let z = -(&qv.diff(0) * fw).checked_div(&(&(&s * &s) * &wv.with_order(order)))?;
    let sign = z.value().signum();
    let phi = (&z * sign).ln()?;
    Ok((phi.coeffs().to_vec(), sign))
}

/// Initial data for the Liouville Goursat problem at `w0`.
pub fn liouville_problem(f: Expr, q: Expr, params: Params, q0: f64, w0: f64, w1: f64, order: usize) -> Result<OdeProblem> {
    let (phi, _) = liouville_phi(&f, &q, &params, q0, w0, order)?;
    Ok(OdeProblem {
        kind: OdeKind::Liouville { f, q, q0, order },
        params,
        initial: phi[1..].to_vec(),
        from: w0,
        to: w1,
    })
}

pub fn integrate_ode(prob: &OdeProblem) -> Result<OdeSolution> {
    let p = &prob.params;
    let mu0 = p.mu0;
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..OdeOptions::default() };
    let sol = match &prob.kind {
        OdeKind::Abel { a, b } => ode::integrate(
            |w, m| {
                if w.abs() <= SINGULAR_TOL {
                    return Err(Error::SingularPoint("w = 0"));
                }
                let (av, bv) = (eval_at(a, p, "w", w)?, eval_at(b, p, "w", w)?);
                Ok(vec![(-m[0] * m[0] * m[0] + av * m[0] + bv) / (36.0 * mu0)])
            },
            prob.from,
            &prob.initial,
            prob.to,
            &opts,
        )?,
        OdeKind::HomotheticAbel { a0, b0 } => {
            if prob.from <= 0.0 || prob.to <= 0.0 {
                return Err(Error::DomainExit { at: 0.0 });
            }
            ode::integrate(
                |t, s| Ok(vec![crate::fields::homothetic_abel_rhs(mu0, *a0, *b0, t, s[0])]),
                prob.from,
                &prob.initial,
                prob.to,
                &opts,
            )?
        }
        OdeKind::Liouville { f, q, q0, order } => ode::integrate(
            |w, state| {
                if w.abs() <= SINGULAR_TOL {
                    return Err(Error::SingularPoint("w = 0"));
                }
                let (phi0, sign) = liouville_phi(f, q, p, *q0, w, 0)?;
                let mut coeffs = vec![phi0[0]];
                coeffs.extend_from_slice(state);
                let e = Jet::from_coeffs(1, *order, coeffs).exp();
                // k φ_k' = -2 sign w [e^φ]_{k-1}
                Ok((1..=*order).map(|k| -2.0 * sign * w * e.coeffs()[k - 1] / k as f64).collect())
            },
            prob.from,
            &prob.initial,
            prob.to,
            &opts,
        )?,
        OdeKind::TypeDSystem { a, b, k } => {
            let dd = type_d_d(a, b, *k);
            ode::integrate(
                |q, e| {
                    let qj = Jet::variable(1, 2, 0, q);
                    let env = p.bindings(&qj).var("q", qj.clone());
                    let (aj, bj, dj) = (a.eval(&env)?, b.eval(&env)?, dd.eval(&env)?);
                    if aj.value().abs() <= SINGULAR_TOL {
                        return Err(Error::SingularPoint("a = 0"));
                    }
                    let (a1, b1, b2) = (aj.coeffs()[1], bj.coeffs()[1], 2.0 * bj.coeffs()[2]);
                    Ok(vec![(b2 + 2.0 * dj.value() * b1 - 12.0 * a1 * e[0]) / (6.0 * aj.value())])
                },
                prob.from,
                &prob.initial,
                prob.to,
                &opts,
            )?
        }
    };
    Ok(OdeSolution { problem: prob.clone(), solution: sol })
}

/// The Liouville solution's `Y_w` as a `q`-jet at `(q0, w)`, rebuilt from
/// the integrated Taylor coefficients, next to the closed form.
pub fn liouville_check(sol: &OdeSolution, w: f64) -> Result<(Jet, Jet)> {
    let OdeKind::Liouville { f, q, q0, order } = &sol.problem.kind else {
        return Err(Error::NotApplicable("not a Liouville solution"));
    };
    let state = sol.eval(w)?;
    let (phi, sign) = liouville_phi(f, q, &sol.problem.params, *q0, w, *order)?;
    let mut coeffs = vec![phi[0]];
    coeffs.extend(state);
    let rebuilt = &Jet::from_coeffs(1, *order, coeffs).exp() * sign;
    let direct = &Jet::from_coeffs(1, *order, phi[..=*order].to_vec()).exp() * sign;
    Ok((rebuilt, direct))
}

/// `t(u) = T(u)^2` and `T(u)` of the separable homothetic Abel equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparableAbel {
    pub mu0: f64,
    pub a0: f64,
    pub b0: f64,
    pub u_ref: f64,
    pub lo: f64,
    pub hi: f64,
}

impl SeparableAbel {
    pub fn big_t(&self, u: f64) -> Result<f64> {
        if u < self.lo || u > self.hi {
            return Err(Error::DomainExit { at: u });
        }
        Ok(separable_t_jet(self.mu0, self.a0, self.b0, self.u_ref, &Jet::constant(1, 0, u))?.value())
    }

    pub fn t(&self, u: f64) -> Result<f64> {
        let tt = self.big_t(u)?;
        Ok(tt * tt)
    }

    /// `ln T(u)` by adaptive quadrature of `18 mu0 / f`.
    pub fn ln_t(&self, u: f64) -> Result<f64> {
        quadrature::integrate(|s| Ok(18.0 * self.mu0 / separable_f(self.mu0, self.a0, self.b0, s)), self.u_ref, u, 1e-13)
    }
}

/// `S = u` along `t = T(u)^2` put back into the homothetic Abel equation,
/// relative to the size of its terms.
pub fn separable_round_trip_residual(mu0: f64, a0: f64, b0: f64, u_ref: f64, u: f64) -> Result<f64> {
    let uj = Jet::variable(1, 1, 0, u);
    let tt = separable_t_jet(mu0, a0, b0, u_ref, &uj)?;
    let t = &tt * &tt;
    let t_u = t.coeffs()[1];
    if t_u.abs() <= SINGULAR_TOL {
        return Err(Error::SingularPoint("t_u = 0"));
    }
    let lhs = 36.0 * mu0 * t.value() / t_u;
    let rhs = -u * u * u + (a0 + 18.0 * mu0) * u + b0;
    let scale = lhs.abs() + (u * u * u).abs() + ((a0 + 18.0 * mu0) * u).abs() + b0.abs();
    Ok((lhs - rhs).abs() / scale.max(1e-300))
}

/// Set up the separable solution on `[lo, hi]`, refusing ranges that contain a
/// root of `f`.
pub fn separable_abel_solution(mu0: f64, a0: f64, b0: f64, u_ref: f64, lo: f64, hi: f64) -> Result<SeparableAbel> {
    if !(lo <= u_ref && u_ref <= hi) {
        return Err(Error::BadParams(alloc::format!("u_ref = {u_ref} outside [{lo}, {hi}]")));
    }
    if let Some(root) = real_root_in(mu0, a0, b0, lo, hi) {
        return Err(Error::PoleInRange { at: root });
    }
    Ok(SeparableAbel { mu0, a0, b0, u_ref, lo, hi })
}

/// Residuals of the [+-,+-] type-II consistency chain at a point `(q, ., ., w)`
/// of a [+-,+-] type-[II] family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PmpmChainResiduals {
    /// `M_q - 6 mu0 Y_w`.
    pub m_q: f64,
    /// `M Y_w + ∂_w(Y_{qw}/Y_w)`.
    pub liouville_like: f64,
    /// `2 A_yy - M`.
    pub a_yy: f64,
    /// `∂_y` of the first equation of the pair.
    pub pair_a_y: f64,
    /// The second equation of the pair.
    pub pair_b: f64,
    /// `36 mu0 M_w + M^3 - a M - b`.
    pub abel: f64,
}

impl PmpmChainResiduals {
    pub fn max(&self) -> f64 {
        [self.m_q, self.liouville_like, self.a_yy, self.pair_a_y, self.pair_b, self.abel]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Rebuild `Y`, `A`, `C` from `M` and check the relations of the proof.
/// For the integrated source `Y(q, w0) = 0` at the source's `w0`; otherwise
/// `Y` vanishes on the line `w = point[3]`.
pub fn transform_check_pmpm(kf: &KeyFunction, point: Point) -> Result<PmpmChainResiduals> {
    let Family::TypeIIPmPm(src) = &kf.family else {
        return Err(Error::UnsupportedFamily("the consistency chain needs a [+-,+-] type-[II] source"));
    };
    let mu0 = kf.params.mu0;
    let order = 5;
    let (q0, w) = (point[0], point[3]);
    let (m, y) = match src {
        MSource::Integrated { .. } => {
            let (m, y) = kf.integrated_m_jet(q0, w, order, true)?;
            (m, y.unwrap())
        }
        _ => {
            let qj = Jet::variable(2, order + 1, 0, q0);
            let wj = Jet::variable(2, order + 1, 1, w);
            let m = kf.m_field(&qj, &wj)?;
            let g = &m.diff(0) * (1.0 / (6.0 * mu0));
            (m.with_order(order), g.integrate(1).with_order(order))
        }
    };
    let m_q = m.diff(0);
    if m_q.value().abs() <= SINGULAR_TOL {
        return Err(Error::SingularPoint("M_q = 0"));
    }
    let y_w = y.diff(1);
    let y_q = y.diff(0);
    let lower = |j: &Jet, o: usize| j.with_order(o);
    // ∂_y = Y_w^{-1} ∂_w, ∂_q|_y = ∂_q - (Y_q/Y_w) ∂_w
    let dy = |f: &Jet| -> Result<Jet> {
        let o = f.order() - 1;
        f.diff(1).checked_div(&lower(&y_w, o))
    };
    let dq = |f: &Jet| -> Result<Jet> {
        let o = f.order() - 1;
        let shift = lower(&y_q, o).checked_div(&lower(&y_w, o))?;
        Ok(&f.diff(0) - &(&shift * &f.diff(1)))
    };
    let a = &y_q * -0.5;
    let a_y = dy(&a)?;
    let a_yy = dy(&a_y)?;
    let a_yyy = dy(&a_yy)?;
    let a_yyq = dq(&a_yy)?;
    let c_y = y_w.clone();
    let c_yy = dy(&c_y)?;
    let c_yq = dq(&c_y)?;

    let r_mq = m_q.value() - 6.0 * mu0 * y_w.value();
    let ratio = y_w.diff(0).checked_div(&lower(&y_w, y_w.order() - 1))?;
    let r_liou = m.value() * y_w.value() + ratio.diff(1).value();
    let r_ayy = 2.0 * a_yy.value() - m.value();
    let r_pa = -2.0 * a.value() * a_yyy.value() + a_yyq.value() - 3.0 * mu0 * c_y.value();
    let r_pb = c_yq.value() - 2.0 * a.value() * c_yy.value() + 2.0 * a_y.value() * c_y.value();

    let (ae, be) = abel_coefficients(kf)?;
    let (av, bv) = (eval_at(&ae, &kf.params, "w", w)?, eval_at(&be, &kf.params, "w", w)?);
    let mv = m.value();
    let r_abel = 36.0 * mu0 * m.diff(1).value() + mv * mv * mv - av * mv - bv;
    Ok(PmpmChainResiduals { m_q: r_mq, liouville_like: r_liou, a_yy: r_ayy, pair_a_y: r_pa, pair_b: r_pb, abel: r_abel })
}

/// Closed form of the `b = 0` Abel solution on the line `q`.
pub fn closed_form_m(h: &Expr, qf: &Expr, params: &Params, q: f64, w: f64) -> Result<f64> {
    let env = scalar_env(params).constant("q", q).constant("w", w);
    let hv = h.eval(&env)?.value();
    let hw = h.diff("w").eval(&env)?.value();
    let qv = qf.eval(&env)?.value();
    let r = 18.0 * params.mu0 * hw / (hv + qv);
    if r < 0.0 {
        return Err(Error::SingularPoint("negative radicand"));
    }
    Ok(libm::sqrt(r))
}

/// `ln u - ½ ln|18 mu0 + a0 - u^2|` for `b0 = 0`, the antiderivative of
/// `18 mu0 / f` when `a0 = 0`.
pub fn separable_log_oracle(mu0: f64, u: f64) -> f64 {
    libm::log(u.abs()) - 0.5 * libm::log((18.0 * mu0 - u * u).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalogue;

    #[test]
    fn synthetic_quartic_is_not_a_key_function() {
        let kf = catalogue(Family::Potential { w: Expr::var("x").pow(Expr::num(4.0)) }, Params::new(1.0, 0.6)).unwrap();
        let x: f64 = 1.3;
        let r = hh_residual(&kf, [0.0, 0.0, x, 0.2]).unwrap();
        let expect = -(3.0 * x.powi(4)) - 0.6 / (6.0 * x) * 12.0 * x * x;
        assert!((r - expect).abs() < 1e-12, "{r} {expect}");
    }

    #[test]
    fn type_d_constants() {
        let p = Params::default();
        let n = Expr::num;
        assert_eq!(typed_constants_residual(&n(1.0), &n(0.0), &n(0.3), &n(-0.2), &p, 0.4).unwrap(), (0.0, 0.0));
        assert_eq!(typed_constants_residual(&n(0.0), &n(1.5), &n(0.0), &n(0.0), &p, 0.4).unwrap(), (0.0, 0.0));
        let q = Expr::var("q");
        let (r1, r2) = typed_constants_residual(&q, &n(0.0), &n(0.0), &q, &p, 0.5).unwrap();
        assert_eq!(r1, 0.0);
        assert!((r2 + 9.0).abs() < 1e-14);
    }

    #[test]
    fn zero_pair() {
        let p = Params::default();
        assert_eq!(twist_free_pair_residual(&Expr::num(0.0), &Expr::num(0.0), &p, 0.1, 0.2).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn liouville_closed_form() {
        let r = liouville_residual(&Expr::var("w"), &Expr::var("q"), &Params::default(), 0.7, 1.3).unwrap();
        assert!(r.abs() < 1e-10, "{r}");
    }

    #[test]
    fn separable_pole_detection() {
        assert!(matches!(separable_abel_solution(1.0, 0.0, 0.0, 0.5, -0.5, 1.0), Err(Error::PoleInRange { .. })));
        assert!(separable_abel_solution(1.0, 0.0, 0.0, 1.0, 1.0, 2.0).is_ok());
    }

    #[test]
    fn separable_round_trip() {
        for u in [0.9, 1.4, 2.2] {
            assert!(separable_round_trip_residual(1.0, 0.5, 0.3, 1.0, u).unwrap() < 1e-13);
        }
    }
}
