//! Petrov-Penrose types of the Weyl halves.

use alloc::format;
use alloc::string::String;

use crate::conventions::{PETROV_TOL, SPINOR_SCALE};
use crate::error::Result;
use crate::fields::{KeyFunction, TwistFreeData};
use crate::geometry::spinor_matrix;
use crate::linalg::{self, Mat};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PetrovType {
    I,
    II,
    D,
    III,
    N,
    O,
}

impl PetrovType {
    pub fn label(self) -> &'static str {
        match self {
            PetrovType::I => "I",
            PetrovType::II => "II",
            PetrovType::D => "D",
            PetrovType::III => "III",
            PetrovType::N => "N",
            PetrovType::O => "0",
        }
    }

    /// Eigenvalue multiplicity pattern of the type.
    pub fn pattern(self) -> &'static str {
        match self {
            PetrovType::I => "[1,1,1]",
            PetrovType::II | PetrovType::D => "[2,1]",
            PetrovType::III | PetrovType::N => "[3]",
            PetrovType::O => "[-]",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PetrovVerdict {
    pub kind: PetrovType,
    /// Eigenvalues as (re, im).
    pub eigenvalues: [(f64, f64); 3],
    pub pattern: &'static str,
    /// Which test decided the type.
    pub trace: String,
}

fn eigenvalues(m: &Mat) -> [(f64, f64); 3] {
    let tr = linalg::trace(m);
    let m2 = linalg::matmul(m, m);
    let c1 = 0.5 * (tr * tr - linalg::trace(&m2));
    let c0 = -linalg::det(m);
    linalg::cubic_roots(-tr, c1, c0)
}

/// Classify a 3x3 endomorphism; `scale` sets the size below which it counts
/// as zero.
pub fn classify_with_scale(m: &Mat, tol: f64, scale: f64) -> PetrovVerdict {
    let ev = eigenvalues(m);
    let n = linalg::frobenius(m);
    let verdict = |kind: PetrovType, trace: String| PetrovVerdict { kind, eigenvalues: ev, pattern: kind.pattern(), trace };
    if n <= tol * scale {
        return verdict(PetrovType::O, format!("|Φ| = {n:.3e} below zero threshold"));
    }
    // work with the traceless part
    let tr = linalg::trace(m) / 3.0;
    let phi = linalg::add_scaled_identity(m, -tr);
    let phi2 = linalg::matmul(&phi, &phi);
    let a = linalg::trace(&phi2);
    let b = linalg::trace(&linalg::matmul(&phi2, &phi));
    if a.abs() <= tol * n * n && b.abs() <= tol * n * n * n {
        let sq = linalg::frobenius(&phi2);
        return if sq <= tol * n * n {
            verdict(PetrovType::N, format!("nilpotent, |Φ²| = {sq:.3e}"))
        } else {
            verdict(PetrovType::III, format!("nilpotent, |Φ²| = {sq:.3e}"))
        };
    }
    let disc = a * a * a - 6.0 * b * b;
    let rel = disc.abs() / ((a.abs() * a * a) + 6.0 * b * b);
    if rel > tol {
        return verdict(PetrovType::I, format!("discriminant ratio {rel:.3e}"));
    }
    let lam = -b / a;
    let p = linalg::matmul(&linalg::add_scaled_identity(&phi, -lam), &linalg::add_scaled_identity(&phi, 2.0 * lam));
    let r = linalg::frobenius(&p) / (n * n);
    if r <= tol {
        verdict(PetrovType::D, format!("repeated eigenvalue {lam:.6e}, minimal polynomial residual {r:.3e}"))
    } else {
        verdict(PetrovType::II, format!("repeated eigenvalue {lam:.6e}, minimal polynomial residual {r:.3e}"))
    }
}

/// Classify with unit zero scale.
pub fn classify_endomorphism(m: &Mat, tol: f64) -> PetrovVerdict {
    classify_with_scale(m, tol, 1.0)
}

/// Classify from the five spinor coefficients of one Weyl half.
pub fn classify_spinor(c: &[f64; 5], tol: f64) -> PetrovVerdict {
    let scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let m: Mat = spinor_matrix(c).into_iter().map(|r| r.into_iter().map(|v| v * SPINOR_SCALE).collect()).collect();
    classify_with_scale(&m, tol, scale * 1e-6)
}

/// The two type-II quantities `A_yyyy` and `3 mu0 C_yyyy + 2 A_yyy^2`.
pub fn type_two_terms(d: &TwistFreeData, mu0: f64) -> (f64, f64) {
    (d.a_yyyy, 3.0 * mu0 * d.c_yyyy + 2.0 * d.a_yyy * d.a_yyy)
}

/// Derivative-criteria verdict from the `A`, `C` derivative data.
pub fn classify_criteria_data(d: &TwistFreeData, mu0: f64, tol: f64) -> PetrovVerdict {
    let (t1, t2) = type_two_terms(d, mu0);
    let s1 = mu0.abs() + d.a_yyy.abs() + d.x.abs() * d.a_yyyy.abs();
    let s2 = mu0.abs() + (3.0 * mu0 * d.c_yyyy).abs() + 2.0 * d.a_yyy * d.a_yyy;
    let zero1 = t1.abs() <= tol * s1;
    let zero2 = t2.abs() <= tol * s2;
    let kind = if zero1 && zero2 { PetrovType::D } else { PetrovType::II };
    let which = match (zero1, zero2) {
        (true, true) => "A_yyyy = 0 and 3 mu0 C_yyyy + 2 A_yyy^2 = 0",
        (false, true) => "A_yyyy != 0",
        (true, false) => "3 mu0 C_yyyy + 2 A_yyy^2 != 0",
        (false, false) => "A_yyyy != 0 and 3 mu0 C_yyyy + 2 A_yyy^2 != 0",
    };
    PetrovVerdict {
        kind,
        eigenvalues: [(f64::NAN, 0.0); 3],
        pattern: kind.pattern(),
        trace: format!("{which} (A_yyyy = {t1:.3e}, 3 mu0 C_yyyy + 2 A_yyy^2 = {t2:.3e})"),
    }
}

/// Derivative-criteria verdict at a point of a twist-free family.
pub fn classify_by_criteria(kf: &KeyFunction, point: Point) -> Result<PetrovVerdict> {
    let d = kf.twist_free_data(point)?;
    Ok(classify_criteria_data(&d, kf.params.mu0, PETROV_TOL))
}

/// The values forced by a second Killing vector `∂_q` in the [+-,+-]
/// type-[II] setting: `A = A0 C_y`, `C_yyyy = -3 mu0/(2 A0^2)`,
/// `A_yyy = -3 mu0/(2 A0)`.
pub fn forced_killing_data(a0: f64, mu0: f64, x: f64) -> TwistFreeData {
    let c_yyyy = -3.0 * mu0 / (2.0 * a0 * a0);
    TwistFreeData {
        x,
        a_y: 0.0,
        a_yy: 0.0,
        a_yyy: a0 * c_yyyy,
        a_yyyy: 0.0,
        c_y: 0.0,
        c_yy: 0.0,
        c_yyy: 0.0,
        c_yyyy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_and_diagonal_cases() {
        let z = linalg::zeros(3, 3);
        assert_eq!(classify_endomorphism(&z, 1e-7).kind, PetrovType::O);
        let d = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -2.0]];
        assert_eq!(classify_endomorphism(&d, 1e-7).kind, PetrovType::D);
        let i = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, -3.0]];
        assert_eq!(classify_endomorphism(&i, 1e-7).kind, PetrovType::I);
    }

    #[test]
    fn jordan_blocks() {
        let ii = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, -2.0]];
        assert_eq!(classify_endomorphism(&ii, 1e-7).kind, PetrovType::II);
        let n = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]];
        assert_eq!(classify_endomorphism(&n, 1e-7).kind, PetrovType::N);
        let iii = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]];
        assert_eq!(classify_endomorphism(&iii, 1e-7).kind, PetrovType::III);
    }

    #[test]
    fn complex_pair_is_type_i() {
        let m = vec![vec![0.0, -1.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]];
        let v = classify_endomorphism(&m, 1e-7);
        assert_eq!(v.kind, PetrovType::I);
        assert!(v.eigenvalues.iter().any(|e| e.1.abs() > 0.5));
    }

    #[test]
    fn forced_killing_values_give_d() {
        for a0 in [0.5, -1.3, 2.0] {
            let d = forced_killing_data(a0, 1.0, 1.1);
            assert_eq!(classify_criteria_data(&d, 1.0, 1e-7).kind, PetrovType::D);
            let (t1, t2) = type_two_terms(&d, 1.0);
            assert!(t1 == 0.0 && t2.abs() < 1e-14);
        }
    }

    #[test]
    fn spinor_route_on_simple_coefficients() {
        assert_eq!(classify_spinor(&[0.0, 0.0, -2.0, 0.0, 0.0], 1e-7).kind, PetrovType::D);
        assert_eq!(classify_spinor(&[1.0, 0.0, -2.0, 0.0, 0.0], 1e-7).kind, PetrovType::II);
        assert_eq!(classify_spinor(&[0.0; 5], 1e-7).kind, PetrovType::O);
        assert_eq!(classify_spinor(&[1.0, 0.0, 0.0, 0.0, 0.0], 1e-7).kind, PetrovType::N);
    }
}
