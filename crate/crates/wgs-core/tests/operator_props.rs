use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;
use wgs_core::operator::{
    apply_local, canonicalize, cp, cp_family, cz, equal_up_to_local_diag, from_canonical, p_minus, p_plus, rz, rz_real,
    schmidt_weight, CanonicalForm, ComplexAngle, DiagOp2, SingleQubitDiag,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn family_examples() {
    let s2 = 2f64.sqrt();
    assert!(cp_family(0, PI).unwrap().approx_eq(&p_plus().scale(c(s2, 0.0)), 1e-15));
    let e = Complex64::from_polar(1.0, PI / 4.0);
    let want = DiagOp2::new([e, e.conj(), e.conj(), e]);
    assert!(cp_family(1, PI).unwrap().approx_eq(&want, 1e-15));
    assert!(cp_family(2, PI).unwrap().approx_eq(&p_minus().scale(c(s2, 0.0)), 1e-15));
    assert!(cp_family::<f64>(4, 1.0).is_err());
}

#[test]
fn cp_examples() {
    assert!(cp(PI).approx_eq(&cz(), 1e-15));
    assert!(cp(0.0).approx_eq(&DiagOp2::identity(), 0.0));
    assert!((cp(PI / 2.0).d[3] - c(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn rz_examples() {
    assert!(rz(c(0.0, 0.0)).d.iter().all(|x| (x - c(1.0, 0.0)).norm() < 1e-15));
    let r = rz(c(PI, 0.0));
    assert!((r.d[0] - c(0.0, -1.0)).norm() < 1e-15 && (r.d[1] - c(0.0, 1.0)).norm() < 1e-15);
    let r = rz(c(0.0, 2.0 * 2f64.ln()));
    assert!((r.d[0] - c(2.0, 0.0)).norm() < 1e-14 && (r.d[1] - c(0.5, 0.0)).norm() < 1e-14);
}

#[test]
fn canonicalize_examples() {
    let phi = 1.1;
    let f = canonicalize(&cp(phi)).unwrap();
    assert!((f.c - Complex64::from_polar(1.0, phi / 4.0)).norm() < 1e-12);
    assert!((f.c_a.value() - c(phi / 2.0, 0.0)).norm() < 1e-12);
    assert!((f.c_b.value() - c(phi / 2.0, 0.0)).norm() < 1e-12);
    assert!((f.phi - phi).abs() < 1e-12 && (f.theta - PI / 2.0).abs() < 1e-12);
    let f = canonicalize(&DiagOp2::<f64>::identity()).unwrap();
    assert!((f.c - c(1.0, 0.0)).norm() < 1e-12 && f.phi == 0.0 && f.theta == 0.0);
    let f = canonicalize(&p_plus().scale(c(2f64.sqrt(), 0.0))).unwrap();
    assert!((f.c - c(1.0, 0.0)).norm() < 1e-12 && (f.phi - PI).abs() < 1e-12 && f.theta == 0.0);
    assert!(f.c_a.value().norm() < 1e-12 && f.c_b.value().norm() < 1e-12);
    assert!(canonicalize(&DiagOp2::<f64>::from_real([1.0, 0.0, 0.0, 0.0])).is_err());
}

#[test]
fn weight_examples() {
    assert!((schmidt_weight(&cz::<f64>()).unwrap() - PI).abs() < 1e-12);
    assert!(schmidt_weight(&DiagOp2::<f64>::identity()).unwrap().abs() < 1e-12);
    assert!((schmidt_weight(&cp::<f64>(PI / 2.0)).unwrap() - PI / 2.0).abs() < 1e-12);
}

#[test]
fn apply_local_examples() {
    let id = SingleQubitDiag::identity();
    let z = SingleQubitDiag::pauli_z();
    assert!(apply_local(&cz(), &id, &id).approx_eq(&cz(), 0.0));
    assert!(apply_local(&p_plus(), &z, &id).approx_eq(&DiagOp2::from_real([1.0, 0.0, 0.0, -1.0]), 0.0));
    let phi = 0.8;
    let got = apply_local(&cp(phi), &rz_real(-phi / 2.0), &rz_real(-phi / 2.0));
    let want = cp_family(1, phi).unwrap().scale(Complex64::from_polar(1.0, phi / 4.0));
    assert!(got.approx_eq(&want, 1e-14));
}

#[test]
fn equal_up_to_local_examples() {
    let w = equal_up_to_local_diag(&cz(), &cz(), 1e-12).unwrap();
    assert!((w.c - c(1.0, 0.0)).norm() < 1e-12);
    assert!(equal_up_to_local_diag(&p_plus(), &p_minus(), 1e-9).is_none());
    let phi = 2.1;
    let half = (phi / 2.0f64).sin().powi(4) / (8.0 * (1.0 + (phi / 2.0f64).cos().powi(2)));
    let a = rz_real((phi + PI) / 2.0).kron(&rz_real((phi - PI) / 2.0)).mul(&cz()).scale(c(half.sqrt(), 0.0));
    let w = equal_up_to_local_diag(&a, &cz(), 1e-12).unwrap();
    assert!((w.c.norm() - half.sqrt()).abs() < 1e-12);
    assert!(w.left().kron(&w.right()).mul(&cz()).scale(w.c).approx_eq(&a, 1e-12));
}

#[test]
fn complex_angle_wraps() {
    let a = ComplexAngle::new(c(3.0 * PI, 0.5));
    assert!((a.value().re - PI).abs() < 1e-12 && a.value().im == 0.5);
    let (w, s) = ComplexAngle::wrap_with_sign(c(2.5 * PI, 0.0));
    assert!(rz(c(2.5 * PI, 0.0)).d.iter().zip(rz(w.value()).d.iter()).all(|(x, y)| (x - y * s).norm() < 1e-12));
}

#[test]
fn roundtrip_ten_thousand() {
    // deterministic sweep of the sampling box
    let mut x = 0.5f64;
    let mut next = || {
        x = (x * 9301.0 + 0.49297).fract();
        x
    };
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let f = CanonicalForm {
            c: Complex64::from_polar(0.2 + next(), 2.0 * PI * next()),
            c_a: ComplexAngle::new(c((2.0 * next() - 1.0) * PI, 4.0 * next() - 2.0)),
            c_b: ComplexAngle::new(c((2.0 * next() - 1.0) * PI, 4.0 * next() - 2.0)),
            phi: (2.0 * next() - 1.0) * PI,
            theta: (2.0 * next() - 1.0) * PI,
        };
        let o = from_canonical(&f);
        let back = from_canonical(&canonicalize(&o).unwrap());
        worst = worst.max(back.max_diff(&o) / o.max_abs());
    }
    assert!(worst < 1e-10, "{worst}");
}

proptest! {
    #[test]
    fn cp_multiplies(a in -PI..PI, b in -PI..PI) {
        prop_assert!(cp(a).mul(&cp(b)).approx_eq(&cp(a + b), 1e-12));
    }

    #[test]
    fn cp_weight(phi in -PI..PI) {
        prop_assume!(phi.abs() > 1e-6);
        prop_assert!((schmidt_weight(&cp(phi)).unwrap() - phi).abs() < 1e-9);
    }

    #[test]
    fn rz_invertible(re in -10.0..10.0f64, im in -5.0..5.0f64) {
        let p = rz(c(re, im)).mul(&rz(c(-re, -im)));
        prop_assert!(p.d.iter().all(|x| (x - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn canonical_roundtrip(
        cr in 0.1..2.0f64, ca in -PI..PI,
        a in (-PI..PI, -2.0..2.0f64), b in (-PI..PI, -2.0..2.0f64),
        phi in -PI..PI, theta in -PI..PI,
    ) {
        let f = CanonicalForm {
            c: Complex64::from_polar(cr, ca),
            c_a: ComplexAngle::new(c(a.0, a.1)),
            c_b: ComplexAngle::new(c(b.0, b.1)),
            phi,
            theta,
        };
        let o = from_canonical(&f);
        let g = canonicalize(&o).unwrap();
        prop_assert!(from_canonical(&g).max_diff(&o) <= 1e-10 * o.max_abs());
        prop_assert!(g.phi.abs() <= PI && g.theta > -PI && g.theta <= PI);
    }

    #[test]
    fn local_witness_reconstructs(
        phi in -PI..PI, l in (-PI..PI, -1.0..1.0f64), r in (-PI..PI, -1.0..1.0f64), k in 0.1..3.0f64,
    ) {
        let b = cp(phi);
        let a = rz(c(l.0, l.1)).kron(&rz(c(r.0, r.1))).mul(&b).scale(c(k * FRAC_1_SQRT_2, k));
        let w = equal_up_to_local_diag(&a, &b, 1e-9).unwrap();
        prop_assert!(w.left().kron(&w.right()).mul(&b).scale(w.c).max_diff(&a) < 1e-9 * a.max_abs());
    }
}
