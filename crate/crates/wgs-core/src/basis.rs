//! Single-qubit measurement bases.
//!
//! A basis is a pair of orthonormal kets. The success ket is the outcome the
//! gadgets condition on; for the step observables it is the −1 eigenvector.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::operator::{rz, ComplexAngle};
use crate::scalar::{cis, cr, h, r, sgn, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket1<T: Real = f64> {
    pub a: [Complex<T>; 2],
}

impl<T: Real> Ket1<T> {
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> Self {
        Ket1 { a: [a0, a1] }
    }

    pub fn zero() -> Self {
        Self::new(cr(T::one()), cr(T::zero()))
    }

    pub fn one() -> Self {
        Self::new(cr(T::zero()), cr(T::one()))
    }

    pub fn plus() -> Self {
        let s = T::FRAC_1_SQRT_2();
        Self::new(cr(s), cr(s))
    }

    pub fn minus() -> Self {
        let s = T::FRAC_1_SQRT_2();
        Self::new(cr(s), cr(-s))
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, o: &Self) -> Complex<T> {
        self.a[0].conj() * o.a[0] + self.a[1].conj() * o.a[1]
    }

    pub fn norm_sqr(&self) -> T {
        self.a[0].norm_sqr() + self.a[1].norm_sqr()
    }

    /// |⟨self|other⟩|² = 1, i.e. equal up to a global phase.
    pub fn same_ray(&self, o: &Self, tol: T) -> bool {
        (self.inner(o).norm_sqr() - self.norm_sqr() * o.norm_sqr()).abs() <= tol
    }
}

/// |(v,w)⟩ = R_z(w) R_y(v) |−⟩.
pub fn ket_vw<T: Real>(v: T, w: T) -> Ket1<T> {
    let half = r::<T>(0.5);
    let x = half * v - T::FRAC_PI_4();
    Ket1::new(cis(-half * w) * x.cos(), cis(half * w) * x.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BasisLabel {
    XwPlus,
    XwMinus,
    YwPlus,
    YwMinus,
    Xwpp,
    Xwpm,
    Xwmp,
    Xwmm,
    PauliZ,
    Custom(f64),
    /// X_n with n in units of φ (n may be half-integer).
    XStep(f64),
    /// X_{±1±2}.
    XEta(i8, i8),
    /// Y_±.
    YStep(i8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedBasis<T: Real = f64> {
    pub success: Ket1<T>,
    pub failure: Ket1<T>,
    pub label: BasisLabel,
}

impl<T: Real> WeightedBasis<T> {
    /// Basis {|(v,w)⟩, |(v+π,w)⟩} with the first as success.
    pub fn from_vw(v: T, w: T, label: BasisLabel) -> Self {
        WeightedBasis { success: ket_vw(v, w), failure: ket_vw(v + T::PI(), w), label }
    }

    pub fn pauli_z() -> Self {
        WeightedBasis { success: Ket1::zero(), failure: Ket1::one(), label: BasisLabel::PauliZ }
    }

    /// Ket for outcome index 0 (success) or 1 (failure).
    pub fn ket(&self, outcome: usize) -> Ket1<T> {
        if outcome == 0 {
            self.success
        } else {
            self.failure
        }
    }

    pub fn kets(&self) -> [Ket1<T>; 2] {
        [self.success, self.failure]
    }
}

/// Success/failure pair attached to the ancilla shared by O1 and O2:
/// success = N^{-1/2} R_z†(−(c1+c2+θ))|−⟩, failure = N^{-1/2} R_z(c1+c2+θ)|+⟩,
/// N = cosh(Im(c1+c2)).
pub fn success_failure_basis<T: Real>(c1b: ComplexAngle<T>, c2b: ComplexAngle<T>, theta: T) -> WeightedBasis<T> {
    success_failure_labeled(c1b.value() + c2b.value(), theta, BasisLabel::Custom(theta.to_f64().unwrap()))
}

pub fn success_failure_labeled<T: Real>(c_sum: Complex<T>, theta: T, label: BasisLabel) -> WeightedBasis<T> {
    let x = c_sum + cr(theta);
    let n = c_sum.im.cosh();
    let inv = T::one() / n.sqrt();
    // R_z†(−x) = R_z(conj(x))
    let ds = rz(x.conj());
    let df = rz(x);
    let m = Ket1::<T>::minus();
    let p = Ket1::<T>::plus();
    WeightedBasis {
        success: Ket1::new(ds.d[0] * m.a[0] * inv, ds.d[1] * m.a[1] * inv),
        failure: Ket1::new(df.d[0] * p.a[0] * inv, df.d[1] * p.a[1] * inv),
        label,
    }
}

pub fn normalization<T: Real>(c_sum: Complex<T>) -> T {
    c_sum.im.cosh()
}

/// Derived quantities of a weight pair (φ1, φ2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairAngles<T: Real = f64> {
    pub phi_plus: T,
    pub phi_minus: T,
    pub s_plus: T,
    pub s_minus: T,
    pub c_plus: T,
    pub c_minus: T,
    pub phi_u: T,
    pub phi_l: T,
}

impl<T: Real> PairAngles<T> {
    pub fn new(phi1: T, phi2: T) -> Self {
        let half = r::<T>(0.5);
        let pp = half * (phi1 + phi2);
        let pm = half * (phi1 - phi2);
        let (sp, sm) = ((half * pp).sin().powi(2), (half * pm).sin().powi(2));
        let (cp, cm) = ((half * pp).cos().powi(2), (half * pm).cos().powi(2));
        PairAngles {
            phi_plus: pp,
            phi_minus: pm,
            s_plus: half * (sp + sm),
            s_minus: half * (sp - sm),
            c_plus: half * (cp + cm),
            c_minus: half * (cp - cm),
            phi_u: pp.abs().max(pm.abs()),
            phi_l: pp.abs().min(pm.abs()),
        }
    }
}

fn half_angle<T: Real>(s: T) -> T {
    // θ with sin(θ/2) = s, s clamped into [0,1]
    r::<T>(2.0) * s.max(T::zero()).min(T::one()).asin()
}

/// Weighted Pauli-X: θ = π for X_w^+, θ = 0 for X_w^−.
pub fn weighted_x<T: Real>(sign: i8) -> T {
    if sign > 0 {
        T::PI()
    } else {
        T::zero()
    }
}

/// Weighted Pauli-Y angle ±θ* with sin(θ*/2) = √S_+.
pub fn weighted_y<T: Real>(sign: i8, phi1: T, phi2: T) -> T {
    let a = PairAngles::new(phi1, phi2);
    let t = half_angle(a.s_plus.sqrt());
    if sign > 0 {
        t
    } else {
        -t
    }
}

/// X_{w_inner}^{outer}: sin(θ+/2) = √(S_+ + |S_−|/sin(φ_u/2)) for outer +,
/// sin(θ−/2) = √(S_+ − |S_−|/cos(φ_l/2)) for outer −; inner sign applied last.
pub fn weighted_x2<T: Real>(outer: i8, inner: i8, phi1: T, phi2: T) -> T {
    let half = r::<T>(0.5);
    let a = PairAngles::new(phi1, phi2);
    let rad = if outer > 0 {
        a.s_plus + a.s_minus.abs() / (half * a.phi_u).sin()
    } else {
        a.s_plus - a.s_minus.abs() / (half * a.phi_l).cos()
    };
    let t = half_angle(rad.max(T::zero()).sqrt());
    if inner > 0 {
        t
    } else {
        -t
    }
}

/// Raw radicands of the X_{w±} definitions, for existence checks.
pub fn weighted_x2_radicands<T: Real>(phi1: T, phi2: T) -> (T, T) {
    let half = r::<T>(0.5);
    let a = PairAngles::new(phi1, phi2);
    (a.s_plus + a.s_minus.abs() / (half * a.phi_u).sin(), a.s_plus - a.s_minus.abs() / (half * a.phi_l).cos())
}

/// Angles of the probabilistic CZ/MEP gadgets:
/// θ = 2 asin(|sin(φ/2)|/√2), tan(η/2) = sgn(φ) cos(φ/2)/(√(1+cos²(φ/2)) + 1).
pub fn gadget_angles<T: Real>(phi: T) -> (T, T) {
    let half = r::<T>(0.5);
    let c = (half * phi).cos();
    let theta = half_angle((half * phi).sin().abs() * T::FRAC_1_SQRT_2());
    let eta = r::<T>(2.0) * (sgn(phi) * c / ((T::one() + c * c).sqrt() + T::one())).atan();
    (theta, eta)
}

/// The step observables of the gadgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepObservable<T: Real = f64> {
    /// X_n, n in units of φ.
    X(T),
    /// X_{±1±2}.
    XEta(i8, i8),
    /// Y_±.
    Y(i8),
}

/// Basis of a step observable; success is the −1 outcome.
pub fn step_observables<T: Real>(obs: StepObservable<T>, phi: T) -> WeightedBasis<T> {
    let (theta, eta) = gadget_angles(phi);
    let half_pi = T::FRAC_PI_2();
    match obs {
        StepObservable::X(n) => WeightedBasis::from_vw(T::zero(), n * phi, BasisLabel::XStep(n.to_f64().unwrap())),
        StepObservable::XEta(s1, s2) => {
            let v = if s1 > 0 { eta } else { -eta };
            let w = phi + if s2 > 0 { half_pi } else { -half_pi } + T::PI() * h(phi);
            WeightedBasis::from_vw(v, w, BasisLabel::XEta(s1, s2))
        }
        StepObservable::Y(s) => {
            let w = if s > 0 { phi + theta } else { phi - theta };
            WeightedBasis::from_vw(T::zero(), w, BasisLabel::YStep(s))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vw_examples() {
        let k = ket_vw(0.0, 0.0);
        assert!((k.a[0].re - 0.5f64.sqrt()).abs() < 1e-15 && (k.a[1].re + 0.5f64.sqrt()).abs() < 1e-15);
        assert!(ket_vw(PI, 0.0).same_ray(&Ket1::plus(), 1e-14));
        let phi = 0.7;
        let z = rz(cr(phi));
        let m = Ket1::<f64>::minus();
        assert!(ket_vw(0.0, phi).same_ray(&Ket1::new(z.d[0] * m.a[0], z.d[1] * m.a[1]), 1e-14));
    }

    #[test]
    fn success_failure_examples() {
        let phi = 1.1;
        let b = success_failure_basis(ComplexAngle::real(phi / 2.0), ComplexAngle::real(phi / 2.0), 0.0);
        assert!(b.success.same_ray(&ket_vw(0.0, phi), 1e-14));
        let b = success_failure_basis(ComplexAngle::real(0.0), ComplexAngle::real(0.0), PI);
        assert!(b.success.same_ray(&Ket1::plus(), 1e-14));
        assert!(b.failure.same_ray(&Ket1::minus(), 1e-14));
        let n = normalization(Complex::new(0.0, 2.0 * 2f64.ln()));
        assert!((n - 17.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_angles() {
        assert!((weighted_y(1, PI, PI) - PI / 2.0).abs() < 1e-14);
        assert!((weighted_y(-1, PI, PI / 2.0) + PI / 2.0).abs() < 1e-14);
        let phi = 0.8;
        let s: f64 = (phi / 2.0f64).sin().abs();
        let t = weighted_y(1, phi, phi);
        assert!((2f64.sqrt() * (t / 2.0).sin() - s).abs() < 1e-14);
        let tp = weighted_x2(1, 1, phi, phi);
        assert!(((tp / 2.0).sin() - (s * (1.0 + s) / 2.0).sqrt()).abs() < 1e-14);
        assert!((weighted_x2(1, 1, PI, PI) - PI).abs() < 1e-7);
        assert!(weighted_x2(-1, 1, PI, PI).abs() < 1e-7);
    }

    #[test]
    fn step_bases() {
        let x0 = step_observables(StepObservable::X(0.0), 0.4);
        assert!(x0.success.same_ray(&Ket1::minus(), 1e-14));
        assert!(x0.failure.same_ray(&Ket1::plus(), 1e-14));
        let (_, eta) = gadget_angles(PI);
        assert!(eta.abs() < 1e-15);
        let y = step_observables(StepObservable::Y(1), PI);
        assert!(y.success.same_ray(&ket_vw(0.0, PI + PI / 2.0), 1e-14));
    }
}
