//! Small dense linear algebra on `f64` and on jets.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::Jet;

pub type Mat = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for i in 0..n {
        m[i][i] = 1.0;
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Mat) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    let mut out = zeros(m, n);
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

pub fn add_scaled_identity(a: &Mat, s: f64) -> Mat {
    let mut out = a.clone();
    for i in 0..a.len() {
        out[i][i] += s;
    }
    out
}

pub fn trace(a: &Mat) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Largest absolute entry.
pub fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn frobenius(a: &Mat) -> f64 {
    libm::sqrt(a.iter().flatten().map(|x| x * x).sum())
}

/// Determinant by partial-pivot elimination.
pub fn det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

/// Solve `a x = b` by partial-pivot elimination.
pub fn solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(r, &v)| {
        let mut r = r.clone();
        r.push(v);
        r
    }).collect();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        if m[p][c].abs() <= 1e-14 * scale {
            return Err(Error::SingularPoint("singular linear system"));
        }
        m.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Ok((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Least-squares solution of an overdetermined system via Householder QR.
pub fn lstsq(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let (rows, cols) = (a.len(), a[0].len());
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..cols {
        let norm = libm::sqrt((k..rows).map(|i| r[i][k] * r[i][k]).sum());
        if norm == 0.0 {
            return Err(Error::SingularPoint("rank-deficient least-squares system"));
        }
        let alpha = if r[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| r[i][k]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|x| x * x).sum();
        if vn == 0.0 {
            continue;
        }
        for j in k..cols {
            let s: f64 = (k..rows).map(|i| v[i - k] * r[i][j]).sum::<f64>() * 2.0 / vn;
            for i in k..rows {
                r[i][j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..rows).map(|i| v[i - k] * y[i]).sum::<f64>() * 2.0 / vn;
        for i in k..rows {
            y[i] -= s * v[i - k];
        }
    }
    let top = r.iter().take(cols).fold(0.0f64, |m, row| m.max(row.iter().fold(0.0f64, |a, x| a.max(x.abs()))));
    let mut x = vec![0.0; cols];
    for i in (0..cols).rev() {
        if r[i][i].abs() <= 1e-13 * top {
            return Err(Error::SingularPoint("rank-deficient least-squares system"));
        }
        let s: f64 = (i + 1..cols).map(|j| r[i][j] * x[j]).sum();
        x[i] = (y[i] - s) / r[i][i];
    }
    Ok(x)
}

/// Orthonormal basis (as columns) of the column space of `a`, by
/// Gram-Schmidt with column pivoting and re-orthogonalisation. Columns whose
/// residual norm falls below `tol` times the largest column norm are dropped.
pub fn orthonormal_columns(a: &Mat, tol: f64) -> Mat {
    let (n, m) = (a.len(), a[0].len());
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    loop {
        let (best, bn) = cols
            .iter()
            .enumerate()
            .map(|(j, c)| (j, norm(c)))
            .fold((usize::MAX, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
        if best == usize::MAX || bn <= tol * scale || basis.len() == n {
            break;
        }
        let mut v = cols.swap_remove(best);
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&v, b);
                for i in 0..n {
                    v[i] -= d * b[i];
                }
            }
        }
        let nv = norm(&v);
        if nv <= tol * scale {
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        for c in cols.iter_mut() {
            let d = dot(c, &v);
            for i in 0..n {
                c[i] -= d * v[i];
            }
        }
        basis.push(v);
    }
    let mut out = zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        for i in 0..n {
            out[i][j] = b[i];
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Roots of the monic cubic `t^3 + c2 t^2 + c1 t + c0` as (re, im) pairs.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [(f64, f64); 3] {
    // depressed cubic t = s - c2/3: s^3 + p s + q
    let sh = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc > 0.0 {
        let sd = libm::sqrt(disc);
        let u = libm::cbrt(-q / 2.0 + sd);
        let v = libm::cbrt(-q / 2.0 - sd);
        let re = -(u + v) / 2.0 - sh;
        let im = (u - v) * libm::sqrt(3.0) / 2.0;
        [(u + v - sh, 0.0), (re, im), (re, -im)]
    } else if p == 0.0 {
        [(-sh, 0.0); 3]
    } else {
        let r = libm::sqrt(-p / 3.0);
        let arg = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0);
        let phi = libm::acos(arg);
        let tau = 2.0 * core::f64::consts::PI / 3.0;
        let mut roots = [0.0; 3];
        for k in 0..3 {
            roots[k] = 2.0 * r * libm::cos(phi / 3.0 - tau * k as f64) - sh;
        }
        roots.sort_by(f64::total_cmp);
        [(roots[0], 0.0), (roots[1], 0.0), (roots[2], 0.0)]
    }
}

pub type JetMat4 = [[Jet; 4]; 4];

/// Inverse of a 4x4 matrix of jets by Gauss-Jordan elimination, pivoting on
/// the values at the base point.
pub fn invert_jets(a: &JetMat4) -> Result<JetMat4> {
    let mut m: Vec<Vec<Jet>> = a.iter().map(|r| r.to_vec()).collect();
    let proto = a[0][0].lift(0.0);
    let mut inv: Vec<Vec<Jet>> =
        (0..4).map(|i| (0..4).map(|j| proto.lift(if i == j { 1.0 } else { 0.0 })).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |s, j| s.max(j.value().abs()));
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| m[i][c].value().abs().total_cmp(&m[j][c].value().abs())).unwrap();
        if m[p][c].value().abs() <= 1e-13 * scale {
            return Err(Error::SingularPoint("degenerate metric"));
        }
        m.swap(p, c);
        inv.swap(p, c);
        let r = m[c][c].recip()?;
        for k in 0..4 {
            m[c][k] = &m[c][k] * &r;
            inv[c][k] = &inv[c][k] * &r;
        }
        for i in 0..4 {
            if i == c || m[i][c].coeffs().iter().all(|&x| x == 0.0) {
                continue;
            }
            let f = m[i][c].clone();
            for k in 0..4 {
                let t = &f * &m[c][k];
                m[i][k] -= &t;
                let t = &f * &inv[c][k];
                inv[i][k] -= &t;
            }
        }
    }
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| inv[i][j].clone())))
}

/// Determinant of a 4x4 matrix of jets by cofactor expansion.
pub fn det_jets(a: &JetMat4) -> Jet {
    let mut total = a[0][0].lift(0.0);
    for perm in PERMS4 {
        let (p, sign) = perm;
        let mut t = a[0][p[0]].clone();
        for i in 1..4 {
            t = &t * &a[i][p[i]];
        }
        if sign > 0 {
            total += &t;
        } else {
            total -= &t;
        }
    }
    total
}

const PERMS4: [([usize; 4], i8); 24] = [
    ([0, 1, 2, 3], 1), ([0, 1, 3, 2], -1), ([0, 2, 1, 3], -1), ([0, 2, 3, 1], 1),
    ([0, 3, 1, 2], 1), ([0, 3, 2, 1], -1), ([1, 0, 2, 3], -1), ([1, 0, 3, 2], 1),
    ([1, 2, 0, 3], 1), ([1, 2, 3, 0], -1), ([1, 3, 0, 2], -1), ([1, 3, 2, 0], 1),
    ([2, 0, 1, 3], 1), ([2, 0, 3, 1], -1), ([2, 1, 0, 3], -1), ([2, 1, 3, 0], 1),
    ([2, 3, 0, 1], 1), ([2, 3, 1, 0], -1), ([3, 0, 1, 2], -1), ([3, 0, 2, 1], 1),
    ([3, 1, 0, 2], 1), ([3, 1, 2, 0], -1), ([3, 2, 0, 1], -1), ([3, 2, 1, 0], 1),
];

/// Sign of the permutation `p` of `0..4`.
pub fn perm_sign(p: [usize; 4]) -> i8 {
    if p.iter().enumerate().any(|(i, a)| p[i + 1..].contains(a)) {
        return 0;
    }
    let mut s = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}
