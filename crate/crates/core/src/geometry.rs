//! Metric, tetrad and curvature.
//!
//! Curvature is assembled from the metric and its first and second partial
//! derivatives at a point. Jets supply those derivatives exactly; the
//! finite-difference path exists only as an oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::conventions::ORIENTATION;
use crate::error::{Error, Result};
use crate::fields::{Chart, KeyFunction};
use crate::jet::{coordinates, fd_oracle, Jet, MultiIndex};
use crate::linalg::{self, det_jets, invert_jets, perm_sign, JetMat4, Mat};
use crate::Point;

pub type T2 = [[f64; 4]; 4];
pub type T3 = [[[f64; 4]; 4]; 4];
pub type T4 = [[[[f64; 4]; 4]; 4]; 4];

/// Index pairs of the coordinate 2-form basis.
pub const TWO_FORMS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

#[derive(Clone, Debug)]
pub struct MetricValue {
    pub g: JetMat4,
    pub g_inv: JetMat4,
    pub det: Jet,
}

impl MetricValue {
    pub fn values(&self) -> T2 {
        core::array::from_fn(|a| core::array::from_fn(|b| self.g[a][b].value()))
    }

    /// Numbers of positive and negative eigenvalues of `g`.
    pub fn signature(&self) -> (usize, usize) {
        let g = self.values();
        let m: Mat = g.iter().map(|r| r.to_vec()).collect();
        let ev = symmetric_eigenvalues(&m);
        let pos = ev.iter().filter(|&&v| v > 0.0).count();
        let neg = ev.iter().filter(|&&v| v < 0.0).count();
        (pos, neg)
    }
}

/// Metric jets of order 2 at `point`.
pub fn metric_at(kf: &KeyFunction, point: Point) -> Result<MetricValue> {
    let g = kf.metric_jets(point, 4)?;
    let g_inv = invert_jets(&g)?;
    let det = det_jets(&g);
    Ok(MetricValue { g, g_inv, det })
}

/// Plebański coframe `e^1..e^4` (hyperheavenly chart only); `e[i][a]` is the
/// `dx^a` component of `e^{i+1}`.
#[derive(Clone, Debug)]
pub struct Tetrad {
    pub e: [[Jet; 4]; 4],
}

pub fn tetrad_at(kf: &KeyFunction, point: Point) -> Result<Tetrad> {
    if kf.chart() != Chart::Hyperheavenly {
        return Err(Error::NotApplicable("the Plebański tetrad is written in hyperheavenly coordinates"));
    }
    let c = coordinates(point, 4);
    let (a, q, b) = kf.abc_from_w(&c)?;
    let x = c[2].with_order(2);
    let xm2 = x.powi(-2)?;
    let zero = x.lift(0.0);
    let one = x.lift(1.0);
    let e1 = [-&xm2, zero.clone(), zero.clone(), zero.clone()];
    let e2 = [-&b, q.clone(), zero.clone(), -&one];
    let e3 = [zero.clone(), xm2.clone(), zero.clone(), zero.clone()];
    let e4 = [-&q, a, -&one, zero];
    Ok(Tetrad { e: [e1, e2, e3, e4] })
}

impl Tetrad {
    /// `g = e^1 ⊗ e^2 + e^2 ⊗ e^1 + e^3 ⊗ e^4 + e^4 ⊗ e^3`.
    pub fn metric(&self) -> JetMat4 {
        let e = &self.e;
        core::array::from_fn(|a| {
            core::array::from_fn(|b| {
                &(&(&e[0][a] * &e[1][b]) + &(&e[1][a] * &e[0][b])) + &(&(&e[2][a] * &e[3][b]) + &(&e[3][a] * &e[2][b]))
            })
        })
    }
}

/// The metric and its first two partial derivatives at a point.
/// `dg[c][a][b] = ∂_c g_ab`, `ddg[c][d][a][b] = ∂_c ∂_d g_ab`.
#[derive(Clone, Debug)]
pub struct MetricDerivs {
    pub g: T2,
    pub dg: T3,
    pub ddg: T4,
}

impl MetricDerivs {
    pub fn from_jets(g: &JetMat4) -> Self {
        let mut d = MetricDerivs { g: [[0.0; 4]; 4], dg: [[[0.0; 4]; 4]; 4], ddg: [[[[0.0; 4]; 4]; 4]; 4] };
        for a in 0..4 {
            for b in 0..4 {
                let j = &g[a][b];
                d.g[a][b] = j.value();
                for c in 0..4 {
                    d.dg[c][a][b] = j.derivative(&MultiIndex::axis(c, 1));
                    for e in 0..4 {
                        d.ddg[c][e][a][b] = j.derivative(&MultiIndex::axis(c, 1).add(&MultiIndex::axis(e, 1)));
                    }
                }
            }
        }
        d
    }

    /// Finite-difference derivatives of the metric values.
    pub fn by_finite_differences(kf: &KeyFunction, point: Point, step: Option<f64>) -> Result<Self> {
        let g0 = kf.metric_jets(point, 2)?;
        let mut d = MetricDerivs { g: [[0.0; 4]; 4], dg: [[[0.0; 4]; 4]; 4], ddg: [[[[0.0; 4]; 4]; 4]; 4] };
        let mut failed = None;
        for a in 0..4 {
            for b in a..4 {
                d.g[a][b] = g0[a][b].value();
                d.g[b][a] = d.g[a][b];
                let f = |p: Point| match kf.metric_jets(p, 2) {
                    Ok(g) => g[a][b].value(),
                    Err(_) => f64::NAN,
                };
                for c in 0..4 {
                    let v = fd_oracle(f, point, &MultiIndex::axis(c, 1), step.map(|s| s * 2.0));
                    d.dg[c][a][b] = v;
                    d.dg[c][b][a] = v;
                    for e in c..4 {
                        let m = MultiIndex::axis(c, 1).add(&MultiIndex::axis(e, 1));
                        let v = fd_oracle(f, point, &m, step);
                        if !v.is_finite() {
                            failed = Some(());
                        }
                        for (i, j) in [(c, e), (e, c)] {
                            d.ddg[i][j][a][b] = v;
                            d.ddg[i][j][b][a] = v;
                        }
                    }
                }
            }
        }
        if failed.is_some() {
            return Err(Error::SingularPoint("finite-difference stencil left the domain"));
        }
        Ok(d)
    }
}

#[derive(Clone, Debug)]
pub struct CurvaturePack {
    pub g: T2,
    pub g_inv: T2,
    /// `gamma[a][b][c] = Γ^a_{bc}`
    pub gamma: T3,
    /// All indices down, `R_{abcd}`.
    pub riemann: T4,
    pub ricci: T2,
    pub scalar: f64,
    /// All indices down.
    pub weyl: T4,
    pub weyl_sd: Mat,
    pub weyl_asd: Mat,
    /// Weyl map on 2-forms in the coordinate basis [`TWO_FORMS`].
    pub weyl_2forms: Mat,
    /// Hodge star on 2-forms in the same basis.
    pub hodge: Mat,
    /// `C^(1..5)` and `Ċ^(1..5)` where the family provides them.
    pub c_sd: Option<[f64; 5]>,
    pub c_asd: Option<[f64; 5]>,
}

fn inverse4(g: &T2) -> Result<T2> {
    let m: Mat = g.iter().map(|r| r.to_vec()).collect();
    let mut out = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let col = linalg::solve(&m, &e)?;
        for i in 0..4 {
            out[i][j] = col[i];
        }
    }
    Ok(out)
}

/// Levi-Civita curvature from metric derivatives.
pub fn curvature_from_derivs(d: &MetricDerivs, orientation: f64) -> Result<CurvaturePack> {
    let g = d.g;
    let gi = inverse4(&g)?;
    // ∂_e g^{ad} = -g^{am} ∂_e g_{mn} g^{nd}
    let mut dgi = [[[0.0; 4]; 4]; 4];
    for e in 0..4 {
        for a in 0..4 {
            for dd in 0..4 {
                let mut s = 0.0;
                for m in 0..4 {
                    for n in 0..4 {
                        s += gi[a][m] * d.dg[e][m][n] * gi[n][dd];
                    }
                }
                dgi[e][a][dd] = -s;
            }
        }
    }
    // Γ_{d bc} (first kind) and its derivatives
    let mut gam1 = [[[0.0; 4]; 4]; 4];
    let mut dgam1 = [[[[0.0; 4]; 4]; 4]; 4];
    for dd in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                gam1[dd][b][c] = 0.5 * (d.dg[b][dd][c] + d.dg[c][dd][b] - d.dg[dd][b][c]);
                for e in 0..4 {
                    dgam1[e][dd][b][c] = 0.5 * (d.ddg[e][b][dd][c] + d.ddg[e][c][dd][b] - d.ddg[e][dd][b][c]);
                }
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for dd in 0..4 {
                    s += gi[a][dd] * gam1[dd][b][c];
                }
                gamma[a][b][c] = s;
                for e in 0..4 {
                    let mut t = 0.0;
                    for dd in 0..4 {
                        t += dgi[e][a][dd] * gam1[dd][b][c] + gi[a][dd] * dgam1[e][dd][b][c];
                    }
                    dgamma[e][a][b][c] = t;
                }
            }
        }
    }
    // R^a_{bcd}
    let mut rup = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    let mut s = dgamma[c][a][dd][b] - dgamma[dd][a][c][b];
                    for e in 0..4 {
                        s += gamma[a][c][e] * gamma[e][dd][b] - gamma[a][dd][e] * gamma[e][c][b];
                    }
                    rup[a][b][c][dd] = s;
                }
            }
        }
    }
    let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    riemann[a][b][c][dd] = (0..4).map(|e| g[a][e] * rup[e][b][c][dd]).sum();
                }
            }
        }
    }
    let mut ricci = [[0.0; 4]; 4];
    for b in 0..4 {
        for dd in 0..4 {
            ricci[b][dd] = (0..4).map(|a| rup[a][b][a][dd]).sum();
        }
    }
    let scalar: f64 = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| gi[a][b] * ricci[a][b]).sum();
    let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    weyl[a][b][c][dd] = riemann[a][b][c][dd]
                        - 0.5
                            * (g[a][c] * ricci[b][dd] - g[a][dd] * ricci[b][c] - g[b][c] * ricci[a][dd]
                                + g[b][dd] * ricci[a][c])
                        + scalar / 6.0 * (g[a][c] * g[b][dd] - g[a][dd] * g[b][c]);
                }
            }
        }
    }
    let det = linalg::det(&g.iter().map(|r| r.to_vec()).collect());
    let (weyl_2forms, hodge) = two_form_maps(&weyl, &gi, det, orientation);
    let (weyl_sd, weyl_asd) = split(&weyl_2forms, &hodge);
    Ok(CurvaturePack {
        g,
        g_inv: gi,
        gamma,
        riemann,
        ricci,
        scalar,
        weyl,
        weyl_sd,
        weyl_asd,
        weyl_2forms,
        hodge,
        c_sd: None,
        c_asd: None,
    })
}

fn raise_pair(t: &T4, gi: &T2) -> T4 {
    // T_ab^{cd}
    let mut half = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    half[a][b][c][dd] = (0..4).map(|e| gi[c][e] * t[a][b][e][dd]).sum();
                }
            }
        }
    }
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    out[a][b][c][dd] = (0..4).map(|e| gi[dd][e] * half[a][b][c][e]).sum();
                }
            }
        }
    }
    out
}

/// Weyl action and Hodge star on 2-forms `ω = Σ_{a<b} ω_ab dx^a ∧ dx^b`.
fn two_form_maps(weyl: &T4, gi: &T2, det: f64, orientation: f64) -> (Mat, Mat) {
    let w_up = raise_pair(weyl, gi);
    let vol = orientation * libm::sqrt(det.abs());
    let mut eps = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    eps[a][b][c][dd] = vol * perm_sign([a, b, c, dd]) as f64;
                }
            }
        }
    }
    let eps_up = raise_pair(&eps, gi);
    let mut w = linalg::zeros(6, 6);
    let mut s = linalg::zeros(6, 6);
    for (i, &(a, b)) in TWO_FORMS.iter().enumerate() {
        for (j, &(c, dd)) in TWO_FORMS.iter().enumerate() {
            w[i][j] = w_up[a][b][c][dd];
            s[i][j] = eps_up[a][b][c][dd];
        }
    }
    (w, s)
}

/// Bases (as columns) of the images of `(1 ± *)/2`.
pub fn duality_bases(hodge: &Mat) -> (Mat, Mat) {
    let id = linalg::identity(6);
    let proj = |sign: f64| -> Mat {
        (0..6).map(|i| (0..6).map(|j| 0.5 * (id[i][j] + sign * hodge[i][j])).collect()).collect()
    };
    (linalg::orthonormal_columns(&proj(1.0), 1e-10), linalg::orthonormal_columns(&proj(-1.0), 1e-10))
}

fn restrict(w: &Mat, basis: &Mat) -> Mat {
    if basis[0].is_empty() {
        return Vec::new();
    }
    linalg::matmul(&linalg::transpose(basis), &linalg::matmul(w, basis))
}

fn split(w: &Mat, hodge: &Mat) -> (Mat, Mat) {
    let (bp, bm) = duality_bases(hodge);
    (restrict(w, &bp), restrict(w, &bm))
}

/// Residual of reassembling the 2-form Weyl map from its two halves.
pub fn split_residual(pack: &CurvaturePack) -> f64 {
    let (bp, bm) = duality_bases(&pack.hodge);
    if bp[0].len() != 3 || bm[0].len() != 3 {
        return f64::INFINITY;
    }
    let wbp = linalg::matmul(&pack.weyl_2forms, &bp);
    let wbm = linalg::matmul(&pack.weyl_2forms, &bm);
    let rp = linalg::matmul(&bp, &pack.weyl_sd);
    let rm = linalg::matmul(&bm, &pack.weyl_asd);
    linalg::max_abs(&linalg::sub(&wbp, &rp)).max(linalg::max_abs(&linalg::sub(&wbm, &rm)))
}

/// `(sd, asd)` endomorphisms; a negative `orientation` swaps the halves.
pub fn sd_asd_split(pack: &CurvaturePack, orientation: f64) -> (Mat, Mat) {
    if orientation > 0.0 {
        (pack.weyl_sd.clone(), pack.weyl_asd.clone())
    } else {
        (pack.weyl_asd.clone(), pack.weyl_sd.clone())
    }
}

/// Full curvature pack at a point, with the spinor coefficients attached
/// where the family has them.
pub fn curvature_at(kf: &KeyFunction, point: Point) -> Result<CurvaturePack> {
    let g = kf.metric_jets(point, 4)?;
    let o = ORIENTATION * kf.chart_orientation(point)?;
    let mut pack = curvature_from_derivs(&MetricDerivs::from_jets(&g), o)?;
    match spinor_coeffs(kf, point) {
        Ok((sd, asd)) => {
            pack.c_sd = Some(sd);
            pack.c_asd = Some(asd);
        }
        Err(Error::NotTwistFree) | Err(Error::NotApplicable(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(pack)
}

/// `(C^(1..5), Ċ^(1..5))`; index `k-1` holds `C^(k)`.
pub fn spinor_coeffs(kf: &KeyFunction, point: Point) -> Result<([f64; 5], [f64; 5])> {
    let mu0 = kf.params.mu0;
    let x = point[2];
    if x.abs() <= crate::jet::SINGULAR_TOL {
        return Err(Error::SingularPoint("x = 0"));
    }
    let x3 = x * x * x;
    let sd = [0.0, 0.0, -2.0 * mu0 * x3, 0.0, 0.0];
    let asd = match kf.chart() {
        Chart::Hyperheavenly => {
            let c = coordinates(point, 4);
            let w = kf.key_potential(&c)?;
            let [_, _, xj, yj] = &c;
            let shift = &(&(xj * xj) * &(yj * yj)) * (mu0 / 4.0);
            let f = &w - &shift;
            let d = |nx: u8, ny: u8| 2.0 * x3 * f.derivative(&MultiIndex::new(0, 0, nx, ny));
            [d(0, 4), d(1, 3), d(2, 2), d(3, 1), d(4, 0)]
        }
        _ => {
            let t = kf.twist_free_data(point)?;
            [2.0 * x3 * (t.a_yyyy * x + t.c_yyyy), 2.0 * x3 * t.a_yyy, -2.0 * x3 * mu0, 0.0, 0.0]
        }
    };
    Ok((sd, asd))
}

/// The endomorphism on symmetric 2-spinors built from five coefficients,
/// `Ψ_0 = C^(5), …, Ψ_4 = C^(1)`.
pub fn spinor_matrix(c: &[f64; 5]) -> Mat {
    let psi = [c[4], c[3], c[2], c[1], c[0]];
    vec![
        vec![psi[2], -2.0 * psi[1], psi[0]],
        vec![psi[3], -2.0 * psi[2], psi[1]],
        vec![psi[4], -2.0 * psi[3], psi[2]],
    ]
}

/// Vector field components as jets.
pub type VectorJets = [Jet; 4];

/// `[u, v]^a = u^b ∂_b v^a - v^b ∂_b u^a`; the result has one order less.
pub fn lie_bracket(u: &VectorJets, v: &VectorJets) -> VectorJets {
    let o = u[0].order() - 1;
    core::array::from_fn(|a| {
        let mut s = u[0].with_order(o).lift(0.0);
        for b in 0..4 {
            s += &(&u[b].with_order(o) * &v[a].diff(b));
            s -= &(&v[b].with_order(o) * &u[a].diff(b));
        }
        s
    })
}

/// `max |R_ab - (R/4) g_ab|`.
pub fn traceless_ricci(pack: &CurvaturePack) -> f64 {
    let mut m = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            m = m.max((pack.ricci[a][b] - pack.scalar / 4.0 * pack.g[a][b]).abs());
        }
    }
    m
}

/// Largest violation of the pair symmetries and the first Bianchi identity.
pub fn riemann_symmetry_residual(pack: &CurvaturePack) -> f64 {
    let r = &pack.riemann;
    let mut m = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    m = m
                        .max((r[a][b][c][d] + r[b][a][c][d]).abs())
                        .max((r[a][b][c][d] + r[a][b][d][c]).abs())
                        .max((r[a][b][c][d] - r[c][d][a][b]).abs())
                        .max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                }
            }
        }
    }
    m
}

/// Largest trace `g^{ac} C_{abcd}`.
pub fn weyl_trace_residual(pack: &CurvaturePack) -> f64 {
    let mut m = 0.0f64;
    for b in 0..4 {
        for d in 0..4 {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += pack.g_inv[a][c] * pack.weyl[a][b][c][d];
                }
            }
            m = m.max(s.abs());
        }
    }
    m
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::fields::{catalogue, Family, Params};

    fn kf(family: Family, lambda: f64) -> KeyFunction {
        catalogue(family, Params::new(1.0, lambda)).unwrap()
    }

    #[test]
    fn tetrad_reproduces_metric() {
        let k = kf(Family::TypeDPmPm { d0: 0.4, e0: -0.2 }, 0.3);
        let p = [0.2, 0.5, 1.3, -0.4];
        let g = metric_at(&k, p).unwrap().g;
        let t = tetrad_at(&k, p).unwrap().metric();
        for a in 0..4 {
            for b in 0..4 {
                for (x, y) in g[a][b].coeffs().iter().zip(t[a][b].coeffs()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn signature_is_neutral() {
        let k = kf(Family::TypeDPmMm { b0: 1.0 }, 0.0);
        assert_eq!(metric_at(&k, [0.1, 0.2, 0.9, 0.3]).unwrap().signature(), (2, 2));
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let mut d = MetricDerivs { g: [[0.0; 4]; 4], dg: [[[0.0; 4]; 4]; 4], ddg: [[[[0.0; 4]; 4]; 4]; 4] };
        d.g[0][3] = 1.0;
        d.g[3][0] = 1.0;
        d.g[1][2] = -1.0;
        d.g[2][1] = -1.0;
        let pack = curvature_from_derivs(&d, 1.0).unwrap();
        assert!(pack.riemann.iter().flatten().flatten().flatten().all(|v| *v == 0.0));
        assert!(linalg::max_abs(&pack.weyl_sd) == 0.0 && linalg::max_abs(&pack.weyl_asd) == 0.0);
    }

    #[test]
    fn einstein_constant_is_pinned() {
        for lam in [0.0, 0.3, -0.3] {
            for mu0 in [1.0, 2.5] {
                let k = catalogue(Family::TypeDPmMm { b0: 1.0 }, Params::new(mu0, lam)).unwrap();
                let pack = curvature_at(&k, [0.3, -0.2, 1.1, 0.6]).unwrap();
                let lambda = pack.scalar / 4.0;
                let want = crate::conventions::LAMBDA_SLOPE * lam + crate::conventions::LAMBDA_OFFSET;
                assert!((lambda - want).abs() < 1e-9, "Lambda={lam} mu0={mu0} fitted {lambda}");
                assert!(traceless_ricci(&pack) < 1e-9);
            }
        }
    }

    #[test]
    fn orientation_puts_the_flat_half_on_the_asd_side() {
        let w = Expr::num(0.25) * Expr::var("x").pow(Expr::num(2.0)) * Expr::var("y").pow(Expr::num(2.0));
        let k = kf(Family::Potential { w }, 0.0);
        let pack = curvature_at(&k, [0.1, 0.3, 1.2, 0.7]).unwrap();
        assert!(traceless_ricci(&pack) < 1e-10);
        assert!(linalg::max_abs(&pack.weyl_asd) < 1e-10, "asd {:?}", pack.weyl_asd);
        assert!(linalg::max_abs(&pack.weyl_sd) > 1e-3);
    }

    #[test]
    fn spinor_scale_is_pinned() {
        let k = kf(Family::Potential { w: Expr::num(0.0) }, 0.0);
        for x in [0.7, 1.3] {
            let pack = curvature_at(&k, [0.0, 0.0, x, 0.2]).unwrap();
            let c3 = pack.c_sd.unwrap()[2];
            for m in [&pack.weyl_sd, &pack.weyl_asd] {
                let a = linalg::trace(&linalg::matmul(m, m));
                let b = linalg::trace(&linalg::matmul(m, &linalg::matmul(m, m)));
                let lam = -b / a;
                assert!((lam / c3 - crate::conventions::SPINOR_SCALE).abs() < 1e-9, "ratio {}", lam / c3);
            }
        }
    }

    #[test]
    fn symmetries_and_tracelessness() {
        let k = kf(Family::TypeDPmPm { d0: 1.0, e0: 1.0 }, 0.5);
        let pack = curvature_at(&k, [0.4, -0.3, 0.8, 0.5]).unwrap();
        assert!(riemann_symmetry_residual(&pack) < 1e-9);
        assert!(weyl_trace_residual(&pack) < 1e-9);
        assert!(split_residual(&pack) < 1e-9);
    }
}
