use phe_core::expr::{Expr, Func};
use phe_core::fields::{catalogue, Family, GaugeData, KeyFunction, MSource, Params};
use phe_core::symmetry::*;
use phe_core::{Error, Point};

fn v(s: &str) -> Expr {
    Expr::var(s)
}

fn n(x: f64) -> Expr {
    Expr::num(x)
}

fn box_points(count: usize, lo: [f64; 4], hi: [f64; 4]) -> Vec<Point> {
    (0..count)
        .map(|i| {
            let t = i as f64 + 0.5;
            let fr = |a: f64| (t * a).fract();
            let u = [fr(0.754877666), fr(0.569840291), fr(0.43297), fr(0.3445)];
            core::array::from_fn(|k| lo[k] + (hi[k] - lo[k]) * u[k])
        })
        .collect()
}

fn verify(kf: &KeyFunction, chi0: f64, pts: &[Point]) -> (String, f64) {
    let claim = theorem_claim(kf, chi0).unwrap();
    let (res, verdict) = check_claim(kf, &claim, pts).unwrap();
    (verdict.name, res)
}

#[test]
fn every_theorem_algebra_is_certified() {
    let hh = box_points(24, [-1.0, -1.0, 0.6, -1.0], [1.0, 1.0, 1.6, 1.0]);
    let cases: Vec<(KeyFunction, &str)> = vec![
        (catalogue(Family::TypeDPmPm { d0: 0.5, e0: 0.2 }, Params::new(1.0, 0.3)).unwrap(), "2A1"),
        (catalogue(Family::TypeDPmPm { d0: 0.0, e0: 0.0 }, Params::new(1.0, 0.0)).unwrap(), "A3,3"),
        (catalogue(Family::TypeDPmMm { b0: 1.0 }, Params::new(1.0, 0.2)).unwrap(), "A3,8+A1"),
        (catalogue(Family::TypeDPmMm { b0: 0.0 }, Params::new(1.0, 0.2)).unwrap(), "A3,4+A1"),
        (catalogue(Family::TypeDPmMm { b0: 0.0 }, Params::new(1.0, 0.0)).unwrap(), "A5,33(1/2,-1)"),
    ];
    for (kf, name) in cases {
        let (got, res) = verify(&kf, 1.0, &hh);
        assert_eq!(got, name);
        assert!(res < 1e-9, "{name}: {res}");
    }
}

#[test]
fn type_two_homothetic_algebras() {
    let chi0 = 0.75;
    let hom = catalogue(
        Family::TypeIIPmPm(MSource::Homothetic { chi0: 1.0, a0: 0.5, b0: 0.3, t0: 1.0, s0: 1.2 }),
        Params::new(1.0, 0.0),
    )
    .unwrap();
    let pts = box_points(24, [0.1, -1.0, 0.8, 1.0], [0.4, 1.0, 1.4, 1.3]);
    assert_eq!(verify(&hom, 1.0, &pts).0, "A2,1");

    let expl = catalogue(Family::TypeIIPmPmExplicit { chi0: 1.0, a0: 0.5, b0: 0.3, u_ref: 1.0 }, Params::new(1.0, 0.0)).unwrap();
    let pts = box_points(24, [-0.5, -1.0, 0.8, 1.2], [0.5, 1.0, 1.4, 1.5]);
    assert_eq!(verify(&expl, 1.0, &pts).0, "A2,1");

    let f = n(3.0 / (2.0 * chi0)) * Expr::apply(Func::Ln, v("w"));
    let pm = catalogue(Family::TypeIIPmMm { f }, Params::new(1.0, 0.0)).unwrap();
    let pts = box_points(24, [2.0, -1.0, 0.8, 0.6], [2.6, 1.0, 1.4, 1.0]);
    assert_eq!(verify(&pm, chi0, &pts).0, "A2,1");
}

#[test]
fn commutator_coefficients() {
    let kf = catalogue(Family::TypeDPmMm { b0: 1.0 }, Params::new(1.0, 0.0)).unwrap();
    let claim = theorem_claim(&kf, 1.0).unwrap();
    let g = &claim.generators;
    for p in box_points(5, [-1.0, -1.0, 0.6, -1.0], [1.0, 1.0, 1.6, 1.0]) {
        // [K2, K4] = 4 b0 K3
        let c = commutator(&kf, &g[1], &g[3], p).unwrap();
        let k3 = [p[0], 0.0, 0.0, -p[3]];
        for a in 0..4 {
            assert!((c[a] - 4.0 * k3[a]).abs() < 1e-9);
        }
    }
}

#[test]
fn wrong_certificate_is_rejected() {
    let kf = catalogue(Family::TypeDPmPm { d0: 0.0, e0: 0.0 }, Params::new(1.0, 0.0)).unwrap();
    let mut claim = theorem_claim(&kf, 1.0).unwrap();
    claim.certificate.matrix[2][2] = Rational::new(4, 3);
    let pts = box_points(24, [-1.0, -1.0, 0.6, -1.0], [1.0, 1.0, 1.6, 1.0]);
    assert!(matches!(check_claim(&kf, &claim, &pts), Err(Error::CertificateFailed(_))));
}

#[test]
fn proper_homothety_with_lambda_is_rejected() {
    let f = n(1.5) * Expr::apply(Func::Ln, v("w"));
    let kf = catalogue(Family::TypeIIPmMm { f }, Params::new(1.0, 0.3)).unwrap();
    assert!(matches!(theorem_claim(&kf, 1.0), Err(Error::BadParams(_))));
    let k = SymmetryVector { a_tilde: n(1.0), c0_tilde: 0.0, eps_tilde: n(0.0), chi0: 1.0 };
    let d = catalogue(Family::TypeDPmPm { d0: 0.0, e0: 0.0 }, Params::new(1.0, 0.3)).unwrap();
    let (_, _, r3) = reduced_symmetry_residual(&d, &k, [0.1, 0.2, 1.0, 0.3]).unwrap();
    assert!(r3 != 0.0);
}

#[test]
fn reduced_equations_for_type_d_homothety() {
    let kf = catalogue(Family::TypeDPmPm { d0: 0.0, e0: 0.0 }, Params::new(1.0, 0.0)).unwrap();
    let chi0 = 1.0;
    let k = SymmetryVector { a_tilde: n(4.0 * chi0 / 3.0) * v("q") + n(0.7), c0_tilde: 0.0, eps_tilde: n(0.0), chi0 };
    for p in box_points(20, [-1.0, -1.0, 0.6, -1.0], [1.0, 1.0, 1.6, 1.0]) {
        let (r1, r2, r3) = reduced_symmetry_residual(&kf, &k, p).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12 && r3 == 0.0, "{r1} {r2}");
        let r = killing_residual(&kf, &k.to_field("K"), p).unwrap();
        assert!(relative_size(&kf, &r, p).unwrap() < 1e-9);
    }
    // d0 != 0 forbids the homothety
    let kd = catalogue(Family::TypeDPmPm { d0: 0.4, e0: 0.0 }, Params::new(1.0, 0.0)).unwrap();
    let (r1, r2, _) = reduced_symmetry_residual(&kd, &k, [0.2, 0.1, 1.1, 0.5]).unwrap();
    assert!(r1.abs() + r2.abs() > 1e-3);
}

#[test]
fn symmetry_data_follows_the_gauge() {
    let params = Params::new(1.0, 0.0);
    let kf = catalogue(Family::TypeDPmPm { d0: 0.0, e0: 0.0 }, params.clone()).unwrap();
    let k = SymmetryVector { a_tilde: n(4.0 / 3.0) * v("q") + n(0.3), c0_tilde: 0.0, eps_tilde: n(0.0), chi0: 1.0 };
    let g = GaugeData {
        qprime: n(2.0) * v("q"),
        h: n(0.4),
        sigma: n(0.2) * v("q") + n(0.1) * v("q") * v("q"),
        l: n(0.0),
        m: n(0.0),
    };
    let gauged = phe_core::fields::gauge_transform(&kf, &g).unwrap();
    let kp = k.gauge_transform(&g, &params).unwrap().in_primed(&(n(0.5) * v("q")));
    for p in box_points(20, [-1.0, -1.0, 0.6, -1.0], [1.0, 1.0, 1.6, 1.0]) {
        let (r1, r2, _) = reduced_symmetry_residual(&gauged, &kp, p).unwrap();
        assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9, "{r1} {r2}");
    }
    let stale = k.in_primed(&(n(0.5) * v("q")));
    let (r1, r2, _) = reduced_symmetry_residual(&gauged, &stale, [0.3, 0.1, 1.1, 0.4]).unwrap();
    assert!(r1.abs() + r2.abs() > 1e-3);
}

#[test]
fn dq_is_not_a_killing_vector_of_a_generic_type_two_metric() {
    // ∂q at fixed y, written in (q, p, x, w): ∂q - (Y_q / Y_w) ∂w
    let kf = catalogue(
        Family::TypeIIPmPm(MSource::Integrated {
            a: n(1.0) + n(0.2) * v("w"),
            b: n(0.1) * v("w") * v("w"),
            slice: n(1.0) + n(0.3) * v("q") + n(0.1) * v("q") * v("q"),
            w0: 1.0,
        }),
        Params::new(1.0, 0.0),
    )
    .unwrap();
    let p = [0.3, 0.1, 1.2, 1.4];
    let (_, y) = kf.integrated_m_jet(p[0], p[3], 3, true).unwrap();
    let y = y.unwrap();
    let ratio = y.diff(0).checked_div(&y.diff(1)).unwrap().embed(4, &[0, 3]);
    let zero = ratio.lift(0.0);
    let k = [ratio.lift(1.0), zero.clone(), zero, -ratio];
    let r = killing_residual_jets(&kf, &k, 0.0, p).unwrap();
    assert!(relative_size(&kf, &r, p).unwrap() > 1e-4);
    // while ∂p always is
    let r = killing_residual(&kf, &VectorField::coordinate("K1", 1), p).unwrap();
    assert!(relative_size(&kf, &r, p).unwrap() < 1e-12);
}

#[test]
fn no_homothety_is_claimed_for_other_f() {
    let kf = catalogue(Family::TypeIIPmMm { f: v("w") }, Params::new(1.0, 0.0)).unwrap();
    assert!(matches!(theorem_claim(&kf, 1.0), Err(Error::UnsupportedFamily(_))));
    let log = catalogue(Family::TypeIIPmMm { f: n(1.5) * Expr::apply(Func::Ln, v("w")) + n(0.2) }, Params::new(1.0, 0.0)).unwrap();
    assert!(theorem_claim(&log, 1.0).is_ok());
}
