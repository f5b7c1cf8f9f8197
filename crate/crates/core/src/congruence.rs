//! Null strings, their expansions, and the optics of the null geodesic
//! congruences where SD and ASD strings meet.
//!
//! Optical scalars are known only up to nonzero factors, so every check
//! here is about which quantities vanish.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::conventions::VANISH_TOL;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{Chart, Family, KeyFunction};
use crate::geometry::{lie_bracket, VectorJets};
use crate::jet::{coordinates, Jet};
use crate::linalg;
use crate::Point;

const SQRT2: f64 = core::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Congruence {
    CmA,
    CnA,
    CmDotA,
    CnDotA,
    I1,
    I2,
    I3,
    I4,
}

impl Congruence {
    pub fn label(self) -> &'static str {
        match self {
            Congruence::CmA => "C_mA",
            Congruence::CnA => "C_nA",
            Congruence::CmDotA => "C_mdotA",
            Congruence::CnDotA => "C_ndotA",
            Congruence::I1 => "I1",
            Congruence::I2 => "I2",
            Congruence::I3 => "I3",
            Congruence::I4 => "I4",
        }
    }
}

/// Expansion components of a null-string congruence.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceData {
    pub which: Congruence,
    pub expansion: [f64; 2],
    pub expanding: bool,
}

/// Expansion and twist of a null geodesic congruence, up to factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Optical {
    pub which: Congruence,
    pub theta: f64,
    pub rho: f64,
    pub theta_vanishes: bool,
    pub rho_vanishes: bool,
}

impl Optical {
    /// `[+-]` style label: expansion sign first, twist second.
    pub fn label(&self) -> String {
        let s = |vanishes: bool| if vanishes { '-' } else { '+' };
        format!("[{}{}]", s(self.theta_vanishes), s(self.rho_vanishes))
    }
}

/// Values of `𝒜`, `𝒬`, `𝒬_x` at a point plus the magnitude used for the
/// vanishing threshold.
struct Local {
    x: f64,
    a_cal: f64,
    q_cal: f64,
    q_x: f64,
    scale: f64,
}

fn local(kf: &KeyFunction, point: Point) -> Result<Local> {
    if kf.chart() == Chart::Explicit {
        let (equiv, p) = kf.explicit_as_reduced(point)?;
        return local(&equiv, p);
    }
    let mf = kf.metric_functions(point, 3)?;
    let q_x = mf.q_cal.derivative(&crate::jet::MultiIndex::axis(2, 1));
    let b = mf.b_cal.as_ref().map_or(0.0, |b| b.value());
    let scale = mf.a_cal.value().abs().max(mf.q_cal.value().abs()).max(b.abs());
    Ok(Local { x: point[2], a_cal: mf.a_cal.value(), q_cal: mf.q_cal.value(), q_x, scale })
}

fn vanishes(v: f64, scale: f64) -> bool {
    v.abs() < VANISH_TOL * (1.0 + scale)
}

/// Residuals of the ASD null string equations for `m_Ȧ ~ [z, 1]`, with `z`
/// an expression in `q, x, y` (hyperheavenly chart).
pub fn null_string_residual(kf: &KeyFunction, z: &Expr, point: Point) -> Result<(f64, f64)> {
    if kf.chart() != Chart::Hyperheavenly {
        return Err(Error::NotApplicable("null string equations are written in hyperheavenly coordinates"));
    }
    let c = coordinates(point, 4);
    let (a, q, b) = kf.abc_from_w(&c)?;
    let env = kf
        .params
        .bindings(&c[0])
        .var("q", c[0].clone())
        .var("p", c[1].clone())
        .var("x", c[2].clone())
        .var("y", c[3].clone());
    let zj = z.eval(&env)?.with_order(2);
    let z_q = zj.diff(0);
    let z_x = zj.diff(2);
    let z_y = zj.diff(3);
    let zz = &(&b + &(&(&zj * &q) * 2.0)) + &(&(&zj * &zj) * &a);
    let r1 = &z_x - &(&zj.with_order(1) * &z_y);
    let r2 = &(&(&z_q - &(&z_y * &zz.with_order(1))) + &(&zj.with_order(1) * &zz.diff(3))) - &zz.diff(2);
    Ok((r1.value(), r2.value()))
}

/// Whether `z = 0` generates an ASD congruence at the point.
pub fn z_zero_is_null_string(kf: &KeyFunction, point: Point) -> Result<bool> {
    match kf.chart() {
        Chart::Hyperheavenly => {
            let (r1, r2) = null_string_residual(kf, &Expr::num(0.0), point)?;
            let scale = local(kf, point)?.scale;
            Ok(vanishes(r1, scale) && vanishes(r2, scale))
        }
        _ => Ok(true),
    }
}

/// `a` of the type-D families (coefficient of `y^3` in `A`).
fn type_d_a(kf: &KeyFunction, q: f64) -> Result<f64> {
    match &kf.family {
        Family::TypeDPmPm { .. } => Ok(1.0),
        Family::TypeDPmMm { .. } => Ok(0.0),
        Family::TypeDGeneral { a, .. } => {
            let qj = Jet::constant(1, 0, q);
            Ok(a.eval(&kf.params.bindings(&qj).var("q", qj.clone()))?.value())
        }
        _ => Err(Error::UnsupportedFamily("the second ASD Penrose spinor is known for the type-D families")),
    }
}

/// Expansion of one of the four null-string congruences, with `n = m = 1`
/// and `z = 0`.
pub fn expansion(kf: &KeyFunction, which: Congruence, point: Point) -> Result<CongruenceData> {
    let l = local(kf, point)?;
    let x = l.x;
    let e = match which {
        Congruence::CmA => [-SQRT2 / x, 0.0],
        Congruence::CnA => [-SQRT2 * x * l.q_cal, SQRT2 * x * l.a_cal],
        Congruence::CmDotA => [-SQRT2 / x, SQRT2 * x * (l.q_cal - x * l.q_x)],
        Congruence::CnDotA => {
            let r = 2.0 * type_d_a(kf, point[0])? / kf.params.mu0;
            [SQRT2 / x * r, SQRT2 * x * (l.a_cal - r * l.q_cal)]
        }
        _ => return Err(Error::NotApplicable("expansions belong to null-string congruences")),
    };
    let expanding = !(vanishes(e[0], l.scale) && vanishes(e[1], l.scale));
    Ok(CongruenceData { which, expansion: e, expanding })
}

/// Raise an undotted or dotted index: `ψ^1 = ψ_2`, `ψ^2 = -ψ_1`.
fn raise(s: [f64; 2]) -> [f64; 2] {
    [s[1], -s[0]]
}

fn contract(a: [f64; 2], b_up: [f64; 2]) -> f64 {
    a[0] * b_up[0] + a[1] * b_up[1]
}

/// Expansion and twist of `I1..I4`.
pub fn optical_scalars(kf: &KeyFunction, which: Congruence, point: Point) -> Result<Optical> {
    let l = local(kf, point)?;
    if !z_zero_is_null_string(kf, point)? {
        return Err(Error::NotApplicable("z = 0 is not an ASD null string for this key function"));
    }
    let (theta, rho) = match which {
        Congruence::I1 => (2.0, 0.0),
        Congruence::I3 => {
            // θ3 ~ -n M_2 + N_1̇, ϱ3 ~ -n M_2 - N_1̇ at z = 0
            let m2 = expansion(kf, Congruence::CmDotA, point)?.expansion[1];
            let n_dot = expansion(kf, Congruence::CnA, point)?.expansion;
            (-m2 + n_dot[0], -m2 - n_dot[0])
        }
        Congruence::I2 | Congruence::I4 => {
            let r = 2.0 * type_d_a(kf, point[0])? / kf.params.mu0;
            let n_dot = [1.0, -r];
            let n_big = expansion(kf, Congruence::CnDotA, point)?.expansion;
            if which == Congruence::I2 {
                let m_a = [0.0, 1.0];
                let m_dot = expansion(kf, Congruence::CmA, point)?.expansion;
                let s = contract(m_a, raise(n_big));
                let t = contract(n_dot, raise(m_dot));
                (s + t, s - t)
            } else {
                let n_a = [1.0, 0.0];
                let nn_dot = expansion(kf, Congruence::CnA, point)?.expansion;
                let s = contract(n_a, raise(n_big));
                let t = contract(n_dot, raise(nn_dot));
                (s + t, s - t)
            }
        }
        _ => return Err(Error::NotApplicable("optical scalars belong to null geodesic congruences")),
    };
    Ok(Optical { which, theta, rho, theta_vanishes: vanishes(theta, l.scale), rho_vanishes: vanishes(rho, l.scale) })
}

/// Optics of `I1, I3`, and of `I1..I4` in order for the type-D families.
pub fn pattern(kf: &KeyFunction, point: Point) -> Result<Vec<Optical>> {
    let type_d = matches!(kf.family, Family::TypeDPmPm { .. } | Family::TypeDPmMm { .. } | Family::TypeDGeneral { .. });
    let which: &[Congruence] = if type_d {
        &[Congruence::I1, Congruence::I2, Congruence::I3, Congruence::I4]
    } else {
        &[Congruence::I1, Congruence::I3]
    };
    which.iter().map(|&w| optical_scalars(kf, w, point)).collect()
}

/// Joined label such as `[+-,--]`.
pub fn pattern_label(optics: &[Optical]) -> String {
    let parts: Vec<String> = optics.iter().map(|o| {
        let l = o.label();
        String::from(&l[1..3])
    }).collect();
    format!("[{}]", parts.join(","))
}

/// Distance of the brackets `[V_i, V_j]` from `span{V_k}` at the base point,
/// relative to the size of the fields.
pub fn frobenius_residual(fields: &[VectorJets]) -> Result<f64> {
    let n = fields.len();
    let span: linalg::Mat = (0..4).map(|a| fields.iter().map(|v| v[a].value()).collect()).collect();
    let scale = fields.iter().flat_map(|v| v.iter().map(|c| c.value().abs())).fold(0.0f64, f64::max).max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let br = lie_bracket(&fields[i], &fields[j]);
            let b: Vec<f64> = br.iter().map(|c| c.value()).collect();
            let coef = linalg::lstsq(&span, &b)?;
            let fit: Vec<f64> = (0..4).map(|a| linalg::dot(&span[a], &coef)).collect();
            let r = b.iter().zip(&fit).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            worst = worst.max(r / scale);
        }
    }
    Ok(worst)
}

/// Integrability of the 3D distribution orthogonal to the `I1` direction.
pub fn frobenius_check(kf: &KeyFunction, point: Point) -> Result<f64> {
    if !z_zero_is_null_string(kf, point)? {
        return Err(Error::NotApplicable("z = 0 is not an ASD null string for this key function"));
    }
    let fields: Vec<VectorJets> = match kf.chart() {
        Chart::Hyperheavenly => {
            // E1, E2, E4 dual to the Plebański coframe
            let c = coordinates(point, 3);
            let (a, q, b) = kf.abc_from_w(&c)?;
            let x = c[2].with_order(1);
            let x2 = &x * &x;
            let zero = x.lift(0.0);
            let one = x.lift(1.0);
            let _ = a;
            vec![
                [-&x2, zero.clone(), &q * &x2, &b * &x2],
                [zero.clone(), zero.clone(), zero.clone(), -&one],
                [zero.clone(), zero.clone(), -&one, zero.clone()],
            ]
        }
        _ => {
            // kernel of g(∂x, ·)
            let g = kf.metric_jets(point, 3)?;
            let kappa: [Jet; 4] = core::array::from_fn(|a| g[2][a].clone());
            let j = (0..4).max_by(|&u, &v| kappa[u].value().abs().total_cmp(&kappa[v].value().abs())).unwrap();
            (0..4)
                .filter(|&i| i != j)
                .map(|i| {
                    let mut v: VectorJets = core::array::from_fn(|_| kappa[0].lift(0.0));
                    v[i] = kappa[j].clone();
                    v[j] = -&kappa[i];
                    v
                })
                .collect()
        }
    };
    frobenius_residual(&fields)
}
