use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use wgs_core::basis::{ket_vw, success_failure_basis, BasisLabel, Ket1, PairAngles};
use wgs_core::mbc::{
    chain_weights, chain_weights_closed, compose, compose_closed_form, instrument, pair_basis, u_sign_direct, u_sign_summary,
    uniform_pops, weighted_x_compose, ChainStep, MbcCase, Outcome,
};
use wgs_core::operator::{
    canonicalize, cp, cp_family_mod, equal_up_to_local_diag, from_canonical, rz, rz_real, CanonicalForm, ComplexAngle, DiagOp2,
    SingleQubitDiag,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn angle() -> impl Strategy<Value = f64> {
    (-PI..=PI).prop_filter("nonzero", |x| x.abs() > 1e-2)
}

fn cangle() -> impl Strategy<Value = ComplexAngle> {
    (-PI..PI, -1.5..1.5f64).prop_map(|(a, b)| ComplexAngle::new(c(a, b)))
}

fn diag() -> impl Strategy<Value = DiagOp2> {
    prop::array::uniform4((-2.0..2.0f64, -2.0..2.0f64)).prop_map(|a| DiagOp2::new(a.map(|(x, y)| c(x, y))))
}

fn ket() -> impl Strategy<Value = Ket1> {
    ((-2.0..2.0f64, -2.0..2.0f64), (-2.0..2.0f64, -2.0..2.0f64)).prop_map(|(a, b)| Ket1::new(c(a.0, a.1), c(b.0, b.1)))
}

fn cp_type(phi: f64, a: ComplexAngle, b: ComplexAngle, k: Complex64) -> CanonicalForm {
    CanonicalForm { c: k, c_a: a, c_b: b, phi, theta: PI / 2.0 }
}

/// Compose two operators on (A,B) and (B,C) by an explicit 8-term sum over a three-qubit register.
fn contract(o1: &DiagOp2, o2: &DiagOp2, m: &Ket1) -> DiagOp2 {
    let mut d = [c(0.0, 0.0); 4];
    for x in 0..8usize {
        let (a, b, cc) = (x >> 2, (x >> 1) & 1, x & 1);
        d[2 * a + cc] += m.a[b].conj() * o1.d[2 * a + b] * o2.d[2 * b + cc] * std::f64::consts::FRAC_1_SQRT_2;
    }
    DiagOp2::new(d)
}

#[test]
fn closed_form_sweep() {
    let mut x = 0.71f64;
    let mut next = || {
        x = (x * 4099.0 + 0.3141).fract();
        x
    };
    let start = std::time::Instant::now();
    let mut checked = 0;
    while checked < 10_000 {
        let (p1, p2, th) = ((2.0 * next() - 1.0) * PI, (2.0 * next() - 1.0) * PI, (2.0 * next() - 1.0) * PI);
        let a = PairAngles::new(p1, p2);
        if p1.abs() < 1e-3 || p2.abs() < 1e-3 || (th.abs() - a.phi_plus.abs()).abs() < 1e-3 || (th.abs() - a.phi_minus.abs()).abs() < 1e-3 {
            continue;
        }
        let f1 = cp_type(p1, ComplexAngle::new(c(next(), next() - 0.5)), ComplexAngle::new(c(-next(), next() - 0.5)), c(1.0, 0.0));
        let f2 = cp_type(p2, ComplexAngle::new(c(next(), next() - 0.5)), ComplexAngle::new(c(next(), 0.5 - next())), c(0.0, 1.0));
        let closed = compose_closed_form(&f1, &f2, th).unwrap().to_op();
        let b = pair_basis(&f1, &f2, th, BasisLabel::Custom(th));
        let direct = contract(&from_canonical(&f1), &from_canonical(&f2), &b.success);
        assert!(direct.max_diff(&closed) < 1e-9, "{p1} {p2} {th}: {}", direct.max_diff(&closed));
        checked += 1;
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn pauli_z_branches() {
    let (p1, p2) = (0.7, -1.9);
    let z = instrument(&cp(p1), &cp(p2), &wgs_core::basis::WeightedBasis::pauli_z());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(z.branches[0].kraus.approx_eq(&DiagOp2::identity().scale(c(h, 0.0)), 1e-14));
    assert!(z.branches[1].kraus.approx_eq(&rz_real(p1).kron(&rz_real(p2)).scale(c(h, 0.0)).scale(Complex64::from_polar(1.0, (p1 + p2) / 2.0)), 1e-14));
}

#[test]
fn x_minus_probabilities() {
    for phi in [0.3, 1.0, 2.0, PI] {
        let b = wgs_core::basis::step_observables(wgs_core::basis::StepObservable::X(1.0), phi);
        let ins = instrument(&cp(phi), &cp(phi), &b);
        let p = ins.probabilities(uniform_pops());
        assert!((p[0] - (phi / 2.0).sin().powi(2) / 2.0).abs() < 1e-12);
        assert!((p[1] - (1.0 + (phi / 2.0).cos().powi(2)) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn y_at_pi_gives_half() {
    let f = canonicalize(&cp(PI)).unwrap();
    let th = wgs_core::basis::weighted_y(1, PI, PI);
    let ins = instrument(&cp(PI), &cp(PI), &pair_basis(&f, &f, th, BasisLabel::YwPlus));
    assert!((ins.success_probability(uniform_pops()) - 0.5).abs() < 1e-12);
    let w = equal_up_to_local_diag(&ins.branches[0].kraus, &wgs_core::operator::cz(), 1e-10).unwrap();
    assert!((w.c.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn failure_product() {
    for phi in [0.4, 1.3, 2.7] {
        for k in 1..=5 {
            let fp = compose(&cp(phi), &cp(phi), &ket_vw(PI, phi));
            let fm = compose(&cp(phi), &cp(-phi), &ket_vw(PI, 0.0));
            let mut acc = DiagOp2::identity();
            for _ in 0..k {
                acc = acc.mul(&fp).mul(&fm);
            }
            let want = rz_real(f64::from(k) * phi).kron(&SingleQubitDiag::identity());
            let (s, dev) = acc.proportionality(&want);
            assert!(dev < 1e-12, "{dev}");
            assert!((s.norm() - (phi / 2.0).cos().abs().powi(k)).abs() < 1e-12);
            let prob: f64 = acc.weights().iter().sum::<f64>() / 4.0;
            assert!((prob - (phi / 2.0).cos().powi(2 * k)).abs() < 1e-12);
        }
    }
}

#[test]
fn sign_table_sweep() {
    let mut x = 0.2f64;
    let mut next = || {
        x = (x * 6007.0 + 0.77).fract();
        (2.0 * x - 1.0) * PI
    };
    for _ in 0..20_000 {
        let (th, pp, pm) = (next(), next(), next());
        let (u, l) = (pp.abs().max(pm.abs()), pp.abs().min(pm.abs()));
        if [u, l].iter().any(|b| (th.abs() - b).abs() < 1e-9) {
            continue;
        }
        let (a, b) = (u_sign_direct(th, pp, pm), u_sign_summary(th, pp, pm));
        let (op_a, op_b) = (DiagOp2::from_real(a.map(f64::from)), DiagOp2::from_real(b.map(f64::from)));
        assert!(equal_up_to_local_diag(&op_a, &op_b, 1e-12).is_some(), "{th} {pp} {pm}");
    }
}

/// Whether i − j + 1 stays ≥ 0 over every proper prefix of the chain.
fn counts_stay_nonnegative(steps: &[ChainStep]) -> bool {
    let mut n = 1i64;
    for st in &steps[..steps.len() - 1] {
        n += if st.effective_plus() { 1 } else { -1 };
        if n < 0 {
            return false;
        }
    }
    true
}

#[test]
fn chain_examples() {
    let phi = 0.9;
    let one = [ChainStep { basis_sign: -1, success: true, cp_sign: 1 }];
    let (i, w) = chain_weights(1, phi, &one).unwrap();
    assert_eq!(i, 0);
    assert!((w - PI).abs() < 1e-9);
    let two = [ChainStep { basis_sign: 1, success: true, cp_sign: 1 }, ChainStep { basis_sign: 1, success: true, cp_sign: -1 }];
    let (i, w) = chain_weights(1, phi, &two).unwrap();
    assert_eq!(i, 3);
    assert!((w + 4.0 * (phi / 4.0).tan().powi(3).atan()).abs() < 1e-9);
}

fn chain_steps() -> impl Strategy<Value = (i8, Vec<ChainStep>)> {
    let sign = prop::sample::select(vec![1i8, -1]);
    (
        sign.clone(),
        prop::collection::vec((sign.clone(), any::<bool>(), sign), 1..6)
            .prop_map(|v| v.into_iter().map(|(b, s, cp_sign)| ChainStep { basis_sign: b, success: s, cp_sign }).collect()),
    )
}

proptest! {
    #[test]
    fn associative(o1 in diag(), o2 in diag(), o3 in diag(), m1 in ket(), m2 in ket()) {
        let left = compose(&compose(&o1, &o2, &m1), &o3, &m2);
        let right = compose(&o1, &compose(&o2, &o3, &m2), &m1);
        prop_assert!(left.max_diff(&right) < 1e-12 * (1.0 + left.max_abs()));
    }

    #[test]
    fn local_absorption(
        phi1 in angle(), phi2 in angle(), th in -PI..PI,
        f1a in cangle(), f1b in cangle(), f2a in cangle(), f2b in cangle(),
        l in (-PI..PI, -1.0..1.0f64), shift in (-PI..PI, -1.0..1.0f64),
    ) {
        let f1 = cp_type(phi1, f1a, f1b, c(1.0, 0.0));
        let f2 = cp_type(phi2, f2a, f2b, c(1.0, 0.0));
        let (lq, rq) = (rz(c(l.0, l.1)), rz(c(shift.0, shift.1)));
        let dressed = lq.kron(&rq).mul(&from_canonical(&f1));
        let f1s = CanonicalForm { c_b: ComplexAngle::new(f1.c_b.value() + c(shift.0, shift.1)), ..f1 };
        let lhs = compose(&dressed, &from_canonical(&f2), &pair_basis(&f1s, &f2, th, BasisLabel::Custom(th)).success);
        let base = compose(&from_canonical(&f1), &from_canonical(&f2), &pair_basis(&f1, &f2, th, BasisLabel::Custom(th)).success);
        let rhs = lq.kron(&SingleQubitDiag::identity()).mul(&base);
        prop_assert!(lhs.proportional_to(&rhs, 1e-9));
    }

    #[test]
    fn instruments_complete(
        p in prop::array::uniform4(-PI..PI), q in prop::array::uniform4(-PI..PI),
        c1 in cangle(), c2 in cangle(), th in -PI..PI,
    ) {
        let u = |a: [f64; 4]| DiagOp2::new(a.map(|x| Complex64::from_polar(1.0, x)));
        let ins = instrument(&u(p), &u(q), &success_failure_basis(c1, c2, th));
        prop_assert!(ins.completeness_defect() < 1e-10);
        prop_assert_eq!(ins.branches[0].outcome, Outcome::Success);
        let total: f64 = ins.probabilities(uniform_pops()).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cosh_identity(p1 in angle(), p2 in angle(), th in -PI..PI) {
        let a = PairAngles::new(p1, p2);
        prop_assume!(a.s_minus.abs() > 1e-3);
        prop_assume!((th.abs() - a.phi_plus.abs()).abs() > 1e-3 && (th.abs() - a.phi_minus.abs()).abs() > 1e-3);
        prop_assume!(th.abs() > 1e-3 && th.abs() < PI - 1e-3);
        let f1 = canonicalize(&cp(p1)).unwrap();
        let f2 = canonicalize(&cp(p2)).unwrap();
        let g = compose_closed_form(&f1, &f2, th).unwrap();
        let chi = g.chi;
        let ni = |pi: f64, pj: f64| match g.case {
            MbcCase::I => ((chi / 2.0).tan() * ((pj / 2.0).cos() - th.cos() * (pi / 2.0).cos()) / (2.0 * a.s_minus)).abs(),
            MbcCase::II => ((pi / 2.0).sin() * th.sin() / (2.0 * a.s_minus * (chi / 2.0).cos())).abs(),
        };
        let n1 = ((g.r_plus + g.r_minus) / 2.0).cosh();
        let n2 = ((g.r_plus - g.r_minus) / 2.0).cosh();
        prop_assert!((ni(p1, p2) - n1).abs() < 1e-9 * n1, "{:?} {} {}", g.case, ni(p1, p2), n1);
        prop_assert!((ni(p2, p1) - n2).abs() < 1e-9 * n2, "{:?} {} {}", g.case, ni(p2, p1), n2);
    }

    #[test]
    fn chain_fold_matches_closed((first, steps) in chain_steps(), phi in 0.05..PI) {
        prop_assume!(counts_stay_nonnegative(&steps));
        let (i1, w1) = chain_weights(first, phi, &steps).unwrap();
        let (i2, w2) = chain_weights_closed(first, phi, &steps);
        prop_assert!(
            equal_up_to_local_diag(&cp_family_mod(i1, w1), &cp_family_mod(i2, w2), 1e-9).is_some(),
            "{} {} / {} {}", i1, w1, i2, w2
        );
    }

    #[test]
    fn chain_matches_contraction((first, steps) in chain_steps(), phi in 0.2..3.0f64) {
        let signed = |s: i8| if s > 0 { phi } else { -phi };
        let mut d = cp(signed(first));
        for st in &steps {
            let next = cp(signed(st.cp_sign));
            let (fc, fnx) = (canonicalize(&d).unwrap(), canonicalize(&next).unwrap());
            let th = if st.effective_plus() { PI } else { 0.0 };
            d = compose(&d, &next, &pair_basis(&fc, &fnx, th, BasisLabel::Custom(th)).success);
        }
        let (idx, w) = chain_weights(first, phi, &steps).unwrap();
        prop_assert!(equal_up_to_local_diag(&d, &cp_family_mod(idx, w), 1e-8).is_some(), "{} {}", idx, w);
        if counts_stay_nonnegative(&steps) {
            let (idx, w) = chain_weights_closed(first, phi, &steps);
            prop_assert!(equal_up_to_local_diag(&d, &cp_family_mod(idx, w), 1e-8).is_some(), "{} {}", idx, w);
        }
    }

    #[test]
    fn weighted_x_rules(p1 in angle(), p2 in angle(), i in 0i64..4, j in 0i64..4, s in prop::sample::select(vec![1i8, -1])) {
        prop_assume!((p1.abs() - p2.abs()).abs() > 1e-3);
        let o1 = cp_family_mod(i, p1);
        let o2 = cp_family_mod(j, p2);
        let th = if s > 0 { PI } else { 0.0 };
        let k = contract(&o1, &o2, &success_failure_basis(ComplexAngle::default(), ComplexAngle::default(), th).success);
        let r = weighted_x_compose(s, i, j, p1, p2).unwrap();
        let (_, dev) = k.proportionality(&r.to_op());
        prop_assert!(dev < 1e-9, "{}", dev);
    }
}
