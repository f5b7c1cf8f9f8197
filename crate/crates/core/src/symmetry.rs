//! Killing and homothetic vectors, their commutators, and the symmetry
//! algebras they span.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::conventions::KILLING_TOL;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fields::{Chart, Family, GaugeData, KeyFunction, MSource, Params};
use crate::geometry::{lie_bracket, VectorJets};
use crate::jet::{coordinates, Jet};
use crate::linalg;
use crate::Point;

pub type Rational = Ratio<i64>;

/// Largest denominator of the rational lattice.
pub const LATTICE_DENOMINATOR: i64 = 12;

fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

fn is_zero(r: &Rational) -> bool {
    *r.numer() == 0
}

/// Nearest point of the lattice `p/d`, `d <= LATTICE_DENOMINATOR`, and the
/// distance to it.
pub fn to_lattice(v: f64) -> (Rational, f64) {
    let mut best = (rat(libm::round(v) as i64, 1), (v - libm::round(v)).abs());
    for d in 2..=LATTICE_DENOMINATOR {
        let n = libm::round(v * d as f64) as i64;
        let delta = (v - n as f64 / d as f64).abs();
        if delta < best.1 - 1e-15 {
            best = (rat(n, d), delta);
        }
    }
    best
}

fn exact_param(name: &str, v: f64) -> Result<Rational> {
    let (r, delta) = to_lattice(v);
    if delta > 1e-12 * (1.0 + v.abs()) {
        return Err(Error::CertificateFailed(format!("{name} = {v} is not on the rational lattice")));
    }
    Ok(r)
}

fn r2f(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A vector field with components given as expressions in the chart
/// coordinates, and the homothetic factor it is claimed to have.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub label: String,
    pub components: [Expr; 4],
    pub chi0: f64,
}

impl VectorField {
    pub fn new(label: &str, components: [Expr; 4], chi0: f64) -> Self {
        VectorField { label: label.to_string(), components, chi0 }
    }

    /// Coordinate vector `∂_axis`.
    pub fn coordinate(label: &str, axis: usize) -> Self {
        let components = core::array::from_fn(|a| Expr::num(if a == axis { 1.0 } else { 0.0 }));
        VectorField::new(label, components, 0.0)
    }

    /// Component jets of order `order` at a point of the chart.
    pub fn jets(&self, chart: Chart, params: &Params, point: Point, order: usize) -> Result<VectorJets> {
        let c = coordinates(point, order);
        let names = chart.axis_names();
        let mut env = params.bindings(&c[0]);
        for (n, j) in names.iter().zip(c.iter()) {
            env = env.var(n, j.clone());
        }
        let mut out: VectorJets = core::array::from_fn(|_| c[0].lift(0.0));
        for (o, e) in out.iter_mut().zip(self.components.iter()) {
            *o = e.eval(&env)?;
        }
        Ok(out)
    }
}

/// A homothetic vector of the twist-free hyperheavenly metrics:
/// `K = ã ∂q + c̃0 ∂p - (ã_q y + ε̃) ∂y + (2/3) χ0 (2p ∂p - x ∂x + y ∂y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryVector {
    pub a_tilde: Expr,
    pub c0_tilde: f64,
    pub eps_tilde: Expr,
    pub chi0: f64,
}

impl SymmetryVector {
    pub fn to_field(&self, label: &str) -> VectorField {
        let k = 2.0 * self.chi0 / 3.0;
        let y = Expr::var("y");
        VectorField::new(
            label,
            [
                self.a_tilde.clone(),
                Expr::num(self.c0_tilde) + Expr::num(2.0 * k) * Expr::var("p"),
                Expr::num(-k) * Expr::var("x"),
                Expr::num(k) * y.clone() - (self.a_tilde.diff("q") * y + self.eps_tilde.clone()),
            ],
            self.chi0,
        )
    }

    /// The transformed data `(ã', c̃0', ε̃')` under a gauge with constant
    /// `h`, as functions of the unprimed `q`.
    pub fn gauge_transform(&self, g: &GaugeData, params: &Params) -> Result<SymmetryVector> {
        let f = g.f();
        let q0 = Jet::constant(1, 0, 0.0);
        let h0 = g.h.eval(&params.bindings(&q0).var("q", q0.clone()))?.value();
        let k = Expr::num(2.0 * self.chi0 / 3.0);
        let a = self.a_tilde.clone();
        let sigma = g.sigma.clone();
        // σ ∂q ln(σ f) = σ_q + σ f_q / f
        let log_term = sigma.diff("q") + sigma.clone() * f.diff("q") / f.clone();
        let eps = self.eps_tilde.clone() / f.clone() - (sigma * (a.diff("q") - k) + a.clone() * log_term);
        Ok(SymmetryVector {
            a_tilde: f * a,
            c0_tilde: self.c0_tilde - 4.0 * self.chi0 / 3.0 * h0,
            eps_tilde: eps,
            chi0: self.chi0,
        })
    }

    /// Rewrite `ã`, `ε̃` in terms of `q'` given `q` as an expression of `q'`
    /// (written with the variable `q`).
    pub fn in_primed(&self, q_of_qprime: &Expr) -> SymmetryVector {
        SymmetryVector {
            a_tilde: self.a_tilde.substitute("q", q_of_qprime),
            c0_tilde: self.c0_tilde,
            eps_tilde: self.eps_tilde.substitute("q", q_of_qprime),
            chi0: self.chi0,
        }
    }
}

/// A proper homothety needs `Λ = 0`.
pub fn homothety_gate(params: &Params, chi0: f64) -> Result<()> {
    if chi0 != 0.0 && params.lambda != 0.0 {
        return Err(Error::BadParams(format!(
            "a proper homothety (chi0 = {chi0}) needs Lambda = 0, got Lambda = {}",
            params.lambda
        )));
    }
    Ok(())
}

/// `½ L_K g - χ0 g` at a point, for component jets of order >= 1.
pub fn killing_residual_jets(kf: &KeyFunction, k: &VectorJets, chi0: f64, point: Point) -> Result<[[f64; 4]; 4]> {
    let g = kf.metric_jets(point, 3)?;
    let k: VectorJets = core::array::from_fn(|a| k[a].with_order(1));
    let mut r = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in a..4 {
            let mut s = 0.0;
            for c in 0..4 {
                s += k[c].value() * g[a][b].coeffs()[1 + c];
                s += g[c][b].value() * k[c].coeffs()[1 + a];
                s += g[a][c].value() * k[c].coeffs()[1 + b];
            }
            r[a][b] = 0.5 * s - chi0 * g[a][b].value();
            r[b][a] = r[a][b];
        }
    }
    Ok(r)
}

/// Killing residual of a vector field given by expressions.
pub fn killing_residual(kf: &KeyFunction, k: &VectorField, point: Point) -> Result<[[f64; 4]; 4]> {
    let jets = k.jets(kf.chart(), &kf.params, point, 1)?;
    killing_residual_jets(kf, &jets, k.chi0, point)
}

/// `max |entry|` of a residual relative to `1 + max |g_ab|`.
pub fn relative_size(kf: &KeyFunction, r: &[[f64; 4]; 4], point: Point) -> Result<f64> {
    let g = crate::geometry::metric_at(kf, point)?;
    let gs = g.g.iter().flatten().fold(0.0f64, |m, v| m.max(v.value().abs()));
    Ok(r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + gs))
}

/// Residuals of the reduced symmetry equations for `W = A x + C`, and `Λ χ0`.
pub fn reduced_symmetry_residual(kf: &KeyFunction, k: &SymmetryVector, point: Point) -> Result<(f64, f64, f64)> {
    if kf.chart() != Chart::Hyperheavenly {
        return Err(Error::NotApplicable("the reduced symmetry equations use A(q, y), C(q, y)"));
    }
    let c = coordinates(point, 3);
    let w = kf.key_potential(&c)?;
    let w_x = w.diff(2);
    let w_xx = w_x.diff(2);
    if w_xx.value().abs() > 1e-9 * (1.0 + w_x.value().abs()) {
        return Err(Error::NotTwistFree);
    }
    let x = point[2];
    let y = point[3];
    // A = W_x and C = W - x W_x as functions of (q, y)
    let a = w_x.value();
    let a_q = w_x.diff(0).value();
    let a_y = w_x.diff(3).value();
    let cc = w.value() - x * a;
    let c_q = w.diff(0).value() - x * a_q;
    let c_y = w.diff(3).value() - x * a_y;

    let qj = Jet::variable(1, 3, 0, point[0]);
    let env = kf.params.bindings(&qj).var("q", qj.clone());
    let at = k.a_tilde.eval(&env)?;
    let et = k.eps_tilde.eval(&env)?;
    let d = |j: &Jet, n: usize| j.derivative(&crate::jet::MultiIndex([n as u8, 0, 0, 0]));
    let (a0, a1, a2, a3) = (at.value(), d(&at, 1), d(&at, 2), d(&at, 3));
    let (e0, e1) = (et.value(), d(&et, 1));
    let kap = 2.0 * k.chi0 / 3.0;
    let shift = kap * y - a1 * y - e0;
    let r1 = a0 * a_q + shift * a_y + (2.0 * a1 - kap) * a - 0.5 * a2 * y - 0.5 * e1;
    let r2 = a0 * c_q + shift * c_y + 2.0 * a1 * cc - a3 / (6.0 * kf.params.mu0);
    Ok((r1, r2, kf.params.lambda * k.chi0))
}

/// `[K_a, K_b]` at a point.
pub fn commutator(kf: &KeyFunction, ka: &VectorField, kb: &VectorField, point: Point) -> Result<[f64; 4]> {
    let a = ka.jets(kf.chart(), &kf.params, point, 1)?;
    let b = kb.jets(kf.chart(), &kf.params, point, 1)?;
    let br = lie_bracket(&a, &b);
    Ok(core::array::from_fn(|i| br[i].value()))
}

/// Structure constants `c[i][j][k]` with `[K_i, K_j] = c^k_ij K_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraTable {
    pub labels: Vec<String>,
    pub constants: Vec<Vec<Vec<f64>>>,
    pub rational: Vec<Vec<Vec<Rational>>>,
    /// Largest distance moved by lattice rounding.
    pub rounding_delta: f64,
    /// Largest residual of the least-squares fit over the sample points.
    pub closure_residual: f64,
}

impl LieAlgebraTable {
    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    /// `max |c^k_ij + c^k_ji|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dimension();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m = m.max((self.constants[i][j][k] + self.constants[j][i][k]).abs());
                }
            }
        }
        m
    }

    pub fn jacobi_residual(&self) -> f64 {
        jacobi(&self.constants)
    }
}

fn jacobi(c: &[Vec<Vec<f64>>]) -> f64 {
    let n = c.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for m in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += c[i][j][l] * c[l][k][m] + c[j][k][l] * c[l][i][m] + c[k][i][l] * c[l][j][m];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Least-squares structure constants over the sample points, rounded onto
/// the rational lattice.
pub fn structure_constants(kf: &KeyFunction, gens: &[VectorField], points: &[Point]) -> Result<LieAlgebraTable> {
    let n = gens.len();
    if points.len() < 20 {
        return Err(Error::BadParams(format!("need at least 20 sample points, got {}", points.len())));
    }
    let mut values: Vec<Vec<VectorJets>> = Vec::with_capacity(points.len());
    for &p in points {
        let row: Result<Vec<VectorJets>> = gens.iter().map(|g| g.jets(kf.chart(), &kf.params, p, 1)).collect();
        values.push(row?);
    }
    let mut design: linalg::Mat = Vec::new();
    for row in &values {
        for a in 0..4 {
            design.push(row.iter().map(|v| v[a].value()).collect());
        }
    }
    let mut constants = vec![vec![vec![0.0; n]; n]; n];
    let mut rational = vec![vec![vec![rat(0, 1); n]; n]; n];
    let mut rounding_delta = 0.0f64;
    let mut closure_residual = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let mut rhs = Vec::with_capacity(4 * points.len());
            for row in &values {
                let br = lie_bracket(&row[i], &row[j]);
                rhs.extend(br.iter().map(|c| c.value()));
            }
            let coef = linalg::lstsq(&design, &rhs)?;
            for (r, b) in design.iter().zip(&rhs) {
                closure_residual = closure_residual.max((linalg::dot(r, &coef) - b).abs());
            }
            for k in 0..n {
                let (q, delta) = to_lattice(coef[k]);
                rounding_delta = rounding_delta.max(delta);
                constants[i][j][k] = coef[k];
                constants[j][i][k] = -coef[k];
                rational[i][j][k] = q;
                rational[j][i][k] = -q;
            }
        }
    }
    Ok(LieAlgebraTable {
        labels: gens.iter().map(|g| g.label.clone()).collect(),
        constants,
        rational,
        rounding_delta,
        closure_residual,
    })
}

/// A commutation table `[e_i, e_j] = Σ coeff e_k` (zero-based indices);
/// brackets not listed vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetTable {
    pub name: String,
    pub labels: Vec<String>,
    pub brackets: Vec<(usize, usize, Vec<(usize, Rational)>)>,
}

impl TargetTable {
    fn dense(&self) -> Vec<Vec<Vec<Rational>>> {
        let n = self.labels.len();
        let mut c = vec![vec![vec![rat(0, 1); n]; n]; n];
        for (i, j, terms) in &self.brackets {
            for (k, v) in terms {
                c[*i][*j][*k] = *v;
                c[*j][*i][*k] = -*v;
            }
        }
        c
    }
}

/// New basis `e_i = Σ_j matrix[i][j] K_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub matrix: Vec<Vec<Rational>>,
}

/// A symmetry algebra claimed for a family: generators, certificate and
/// target table.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryClaim {
    pub name: String,
    pub generators: Vec<VectorField>,
    pub certificate: Certificate,
    pub target: TargetTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVerdict {
    pub name: String,
    pub transformed: Vec<Vec<Vec<Rational>>>,
    pub jacobi_residual: f64,
    pub rounding_delta: f64,
    pub closure_residual: f64,
}

fn invert_rational(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| rat(if i == j { 1 } else { 0 }, 1)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !is_zero(&a[r][col]))
            .ok_or_else(|| Error::CertificateFailed("basis change is singular".to_string()))?;
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col && !is_zero(&a[r][col]) {
                let f = a[r][col];
                let pivot_row = a[col].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Structure constants in the basis `e_i = P_ij K_j`, computed exactly.
pub fn change_basis(c: &[Vec<Vec<Rational>>], p: &[Vec<Rational>]) -> Result<Vec<Vec<Vec<Rational>>>> {
    let n = c.len();
    let inv = invert_rational(p)?;
    let mut out = vec![vec![vec![rat(0, 1); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            // [e_i, e_j] = P_ia P_jb c^k_ab K_k = P_ia P_jb c^k_ab inv_kl e_l
            let mut in_k = vec![rat(0, 1); n];
            for a in 0..n {
                if is_zero(&p[i][a]) {
                    continue;
                }
                for b in 0..n {
                    if is_zero(&p[j][b]) {
                        continue;
                    }
                    for k in 0..n {
                        in_k[k] += p[i][a] * p[j][b] * c[a][b][k];
                    }
                }
            }
            for l in 0..n {
                let mut s = rat(0, 1);
                for k in 0..n {
                    s += in_k[k] * inv[k][l];
                }
                out[i][j][l] = s;
            }
        }
    }
    Ok(out)
}

/// Apply the certificate and compare with the target table exactly.
pub fn verify_algebra(table: &LieAlgebraTable, claim: &SymmetryClaim) -> Result<AlgebraVerdict> {
    let n = table.dimension();
    if claim.certificate.matrix.len() != n || claim.target.labels.len() != n {
        return Err(Error::CertificateFailed(format!(
            "dimension {n} does not match the claimed {} algebra",
            claim.name
        )));
    }
    let jac = table.jacobi_residual();
    let transformed = change_basis(&table.rational, &claim.certificate.matrix)?;
    let target = claim.target.dense();
    let mut mismatches = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if transformed[i][j][k] != target[i][j][k] {
                    mismatches.push(format!(
                        "[{}, {}] has {} along {}, expected {}",
                        claim.target.labels[i], claim.target.labels[j], transformed[i][j][k], claim.target.labels[k], target[i][j][k]
                    ));
                }
            }
        }
    }
    if !mismatches.is_empty() {
        return Err(Error::CertificateFailed(mismatches.join("; ")));
    }
    let rational_f: Vec<Vec<Vec<f64>>> =
        transformed.iter().map(|a| a.iter().map(|b| b.iter().map(r2f).collect()).collect()).collect();
    let jac = jac.max(jacobi(&rational_f));
    if jac > 1e-12 {
        return Err(Error::CertificateFailed(format!("Jacobi identity fails by {jac:e}")));
    }
    Ok(AlgebraVerdict {
        name: claim.name.clone(),
        transformed,
        jacobi_residual: jac,
        rounding_delta: table.rounding_delta,
        closure_residual: table.closure_residual,
    })
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn num(v: f64) -> Expr {
    Expr::num(v)
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn one(i: i64) -> Rational {
    rat(i, 1)
}

fn diag_cert(n: usize, entries: &[(usize, usize, Rational)]) -> Certificate {
    let mut m = vec![vec![rat(0, 1); n]; n];
    for &(i, j, r) in entries {
        m[i][j] = r;
    }
    Certificate { matrix: m }
}

fn two_a1(gens: Vec<VectorField>) -> SymmetryClaim {
    SymmetryClaim {
        name: "2A1".to_string(),
        generators: gens,
        certificate: diag_cert(2, &[(0, 0, one(1)), (1, 1, one(1))]),
        target: TargetTable { name: "2A1".to_string(), labels: labels(&["e1", "e2"]), brackets: vec![] },
    }
}

fn a21(k2: VectorField, chi0: f64) -> Result<SymmetryClaim> {
    let c = exact_param("chi0", chi0)?;
    Ok(SymmetryClaim {
        name: "A2,1".to_string(),
        generators: vec![VectorField::coordinate("K1", 1), k2],
        certificate: diag_cert(2, &[(0, 0, one(1)), (1, 1, rat(3, 4) / c)]),
        target: TargetTable {
            name: "A2,1".to_string(),
            labels: labels(&["e1", "e2"]),
            brackets: vec![(0, 1, vec![(0, one(1))])],
        },
    })
}

/// The symmetry algebra the family is claimed to carry, with its generators.
/// `chi0` scales the proper homothety where the family leaves it free.
pub fn theorem_claim(kf: &KeyFunction, chi0: f64) -> Result<SymmetryClaim> {
    let lambda = kf.params.lambda;
    let k1 = VectorField::coordinate("K1", 1);
    let k2 = VectorField::coordinate("K2", 0);
    let hom = |c: f64, label: &str, q_weight: f64, y_weight: f64| {
        let k = 2.0 * c / 3.0;
        VectorField::new(
            label,
            [num(k * q_weight) * v("q"), num(2.0 * k) * v("p"), num(-k) * v("x"), num(k * y_weight) * v("y")],
            c,
        )
    };
    match &kf.family {
        Family::TypeDPmPm { d0, e0 } => {
            if *d0 != 0.0 || *e0 != 0.0 || lambda != 0.0 {
                return Ok(two_a1(vec![k1, k2]));
            }
            homothety_gate(&kf.params, chi0)?;
            let c = exact_param("chi0", chi0)?;
            Ok(SymmetryClaim {
                name: "A3,3".to_string(),
                generators: vec![k1, k2, hom(chi0, "K3", 2.0, -1.0)],
                certificate: diag_cert(3, &[(0, 0, one(1)), (1, 1, one(1)), (2, 2, rat(3, 4) / c)]),
                target: TargetTable {
                    name: "A3,3".to_string(),
                    labels: labels(&["e1", "e2", "e3"]),
                    brackets: vec![(0, 2, vec![(0, one(1))]), (1, 2, vec![(1, one(1))])],
                },
            })
        }
        Family::TypeDPmMm { b0 } => {
            let k3 = VectorField::new("K3", [v("q"), num(0.0), num(0.0), -v("y")], 0.0);
            let k4 = VectorField::new(
                "K4",
                [num(2.0 * b0) * v("q") * v("q"), num(0.0), num(0.0), num(1.0) - num(4.0 * b0) * v("q") * v("y")],
                0.0,
            );
            if *b0 != 0.0 {
                let b = exact_param("b0", *b0)?;
                Ok(SymmetryClaim {
                    name: "A3,8+A1".to_string(),
                    generators: vec![k1, k2, k3, k4],
                    certificate: diag_cert(
                        4,
                        &[(0, 0, one(1)), (1, 1, one(1) / (b * 4)), (2, 2, one(1)), (3, 3, one(-2))],
                    ),
                    target: TargetTable {
                        name: "A3,8+A1".to_string(),
                        labels: labels(&["e0", "e1", "e2", "e3"]),
                        brackets: vec![
                            (1, 2, vec![(1, one(1))]),
                            (1, 3, vec![(2, one(-2))]),
                            (2, 3, vec![(3, one(1))]),
                        ],
                    },
                })
            } else if lambda != 0.0 {
                Ok(SymmetryClaim {
                    name: "A3,4+A1".to_string(),
                    generators: vec![k1, k2, k3, k4],
                    certificate: diag_cert(4, &[(0, 0, one(1)), (1, 1, one(1)), (2, 3, one(1)), (3, 2, one(1))]),
                    target: TargetTable {
                        name: "A3,4+A1".to_string(),
                        labels: labels(&["e0", "e1", "e2", "e3"]),
                        brackets: vec![(1, 3, vec![(1, one(1))]), (2, 3, vec![(2, one(-1))])],
                    },
                })
            } else {
                let c = exact_param("chi0", chi0)?;
                let k5 = hom(chi0, "K5", 0.0, 1.0);
                Ok(SymmetryClaim {
                    name: "A5,33(1/2,-1)".to_string(),
                    generators: vec![k1, k2, k3, k4, k5],
                    certificate: diag_cert(
                        5,
                        &[(0, 1, one(1)), (1, 0, one(1)), (2, 3, one(1)), (3, 2, one(1)), (4, 4, rat(3, 4) / c)],
                    ),
                    target: TargetTable {
                        name: "A5,33(1/2,-1)".to_string(),
                        labels: labels(&["e1", "e2", "e3", "e4", "e5"]),
                        brackets: vec![
                            (0, 3, vec![(0, one(1))]),
                            (1, 4, vec![(1, one(1))]),
                            (2, 3, vec![(2, one(-1))]),
                            (2, 4, vec![(2, rat(1, 2))]),
                        ],
                    },
                })
            }
        }
        Family::TypeIIPmPm(MSource::Homothetic { chi0: c, .. }) => {
            let k = 2.0 * c / 3.0;
            let k2 = VectorField::new("K2", [num(1.0), num(2.0 * k) * v("p"), num(-k) * v("x"), num(2.0 * k) * v("w")], *c);
            a21(k2, *c)
        }
        Family::TypeIIPmPmExplicit { chi0: c, .. } => {
            let k = 2.0 * c / 3.0;
            let k2 = VectorField::new("K2", [num(1.0), num(2.0 * k) * v("p"), num(-k) * v("x"), num(0.0)], *c);
            a21(k2, *c)
        }
        Family::TypeIIPmMm { .. } => {
            // the homothety exists for F = 3/(2 chi0) ln w up to a constant
            for w in [0.5, 1.0, 2.0] {
                let f = kf.f_field(&Jet::variable(1, 1, 0, w))?;
                if (w * f.coeffs()[1] - 1.5 / chi0).abs() > 1e-9 * (1.0 + 1.5 / chi0.abs()) {
                    return Err(Error::UnsupportedFamily("a homothety is claimed only for F = 3/(2 chi0) ln w"));
                }
            }
            homothety_gate(&kf.params, chi0)?;
            let k = 2.0 * chi0 / 3.0;
            let k2 = VectorField::new("K2", [num(1.0), num(2.0 * k) * v("p"), num(-k) * v("x"), num(-k) * v("w")], chi0);
            a21(k2, chi0)
        }
        _ => Err(Error::UnsupportedFamily("no symmetry algebra is claimed for this family")),
    }
}

/// Largest relative Killing residual of the claim's generators at the points.
pub fn generator_residual(kf: &KeyFunction, claim: &SymmetryClaim, points: &[Point]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &p in points {
        for g in &claim.generators {
            let r = killing_residual(kf, g, p)?;
            worst = worst.max(relative_size(kf, &r, p)?);
        }
    }
    Ok(worst)
}

/// Full check of a claim: Killing residuals, structure constants and the
/// certificate.
pub fn check_claim(kf: &KeyFunction, claim: &SymmetryClaim, points: &[Point]) -> Result<(f64, AlgebraVerdict)> {
    let res = generator_residual(kf, claim, points)?;
    if res > KILLING_TOL {
        return Err(Error::CertificateFailed(format!("generator residual {res:e} above {KILLING_TOL:e}")));
    }
    let table = structure_constants(kf, &claim.generators, points)?;
    if table.closure_residual > 1e-9 {
        return Err(Error::CertificateFailed(format!("commutators leave the span by {:e}", table.closure_residual)));
    }
    Ok((res, verify_algebra(&table, claim)?))
}
