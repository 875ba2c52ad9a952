//! Diagonal one- and two-qubit operators and their Schmidt parametrization.
//!
//! Two-qubit entries are stored in computational order 00, 01, 10, 11 with the
//! first qubit as the high bit.

use num_complex::Complex;

use crate::error::{Result, WgsError};
use crate::scalar::{cis, cr, r, tol, wrap_angle, Real};

/// Complex rotation angle with real part in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexAngle<T: Real = f64>(Complex<T>);

impl<T: Real> ComplexAngle<T> {
    pub fn new(c: Complex<T>) -> Self {
        ComplexAngle(Complex::new(wrap_angle(c.re), c.im))
    }

    /// Wrap `c` and report the sign s with R_z(c) = s·R_z(wrapped).
    pub fn wrap_with_sign(c: Complex<T>) -> (Self, T) {
        let w = Self::new(c);
        let turns = ((c.re - w.0.re) / (T::PI() + T::PI())).round();
        let odd = turns.abs() % (T::one() + T::one()) == T::one();
        (w, if odd { -T::one() } else { T::one() })
    }

    pub fn real(x: T) -> Self {
        Self::new(cr(x))
    }

    pub fn value(&self) -> Complex<T> {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitDiag<T: Real = f64> {
    pub d: [Complex<T>; 2],
}

impl<T: Real> SingleQubitDiag<T> {
    pub fn new(d0: Complex<T>, d1: Complex<T>) -> Self {
        SingleQubitDiag { d: [d0, d1] }
    }

    pub fn identity() -> Self {
        Self::new(Complex::new(T::one(), T::zero()), Complex::new(T::one(), T::zero()))
    }

    pub fn pauli_z() -> Self {
        Self::new(cr(T::one()), cr(-T::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(self.d[0] * o.d[0], self.d[1] * o.d[1])
    }

    pub fn pow_z(self, n: i64) -> Self {
        if n.rem_euclid(2) == 1 {
            self.mul(&Self::pauli_z())
        } else {
            self
        }
    }

    /// Tensor product self ⊗ other.
    pub fn kron(&self, o: &Self) -> DiagOp2<T> {
        DiagOp2::new([
            self.d[0] * o.d[0],
            self.d[0] * o.d[1],
            self.d[1] * o.d[0],
            self.d[1] * o.d[1],
        ])
    }
}

/// R_z(c) = diag(e^{-ic/2}, e^{ic/2}) for complex c.
pub fn rz<T: Real>(c: Complex<T>) -> SingleQubitDiag<T> {
    let half = Complex::new(T::zero(), r::<T>(0.5)) * c;
    SingleQubitDiag::new((-half).exp(), half.exp())
}

pub fn rz_real<T: Real>(x: T) -> SingleQubitDiag<T> {
    rz(cr(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagOp2<T: Real = f64> {
    pub d: [Complex<T>; 4],
}

impl<T: Real> DiagOp2<T> {
    pub fn new(d: [Complex<T>; 4]) -> Self {
        DiagOp2 { d }
    }

    pub fn from_real(d: [T; 4]) -> Self {
        DiagOp2::new(d.map(cr))
    }

    pub fn identity() -> Self {
        Self::from_real([T::one(); 4])
    }

    pub fn zero() -> Self {
        Self::from_real([T::zero(); 4])
    }

    #[inline]
    pub fn entry(&self, a: usize, c: usize) -> Complex<T> {
        self.d[2 * a + c]
    }

    /// Entrywise product, i.e. the operator product of two diagonal operators.
    pub fn mul(&self, o: &Self) -> Self {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d.iter()) {
            *x = *x * *y;
        }
        DiagOp2::new(d)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        DiagOp2::new(self.d.map(|x| x * s))
    }

    pub fn max_abs(&self) -> T {
        self.d.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    /// Squared magnitudes |d_ij|^2, the per-entry weights of a diagonal Kraus operator.
    pub fn weights(&self) -> [T; 4] {
        self.d.map(|x| x.norm_sqr())
    }

    pub fn max_diff(&self, o: &Self) -> T {
        self.d.iter().zip(o.d.iter()).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Swap the two qubits.
    pub fn swapped(&self) -> Self {
        DiagOp2::new([self.d[0], self.d[2], self.d[1], self.d[3]])
    }

    pub fn approx_eq(&self, o: &Self, tol: T) -> bool {
        self.max_diff(o) <= tol
    }

    /// Scalar c with self ≈ c·other, taken from the largest entry of `other`,
    /// together with the largest residual relative to max|self|.
    pub fn proportionality(&self, o: &Self) -> (Complex<T>, T) {
        let (mut idx, mut best) = (0, T::zero());
        for (i, x) in o.d.iter().enumerate() {
            if x.norm() > best {
                best = x.norm();
                idx = i;
            }
        }
        if best == T::zero() {
            return (Complex::new(T::zero(), T::zero()), if self.max_abs() == T::zero() { T::zero() } else { T::infinity() });
        }
        let c = self.d[idx] / o.d[idx];
        let scale = self.max_abs().max(T::min_positive_value());
        (c, self.max_diff(&o.scale(c)) / scale)
    }

    /// Equality up to a global complex factor, relative tolerance.
    pub fn proportional_to(&self, o: &Self, tol: T) -> bool {
        self.proportionality(o).1 <= tol
    }
}

/// CP(phi) = diag(1, 1, 1, e^{i phi}).
pub fn cp<T: Real>(phi: T) -> DiagOp2<T> {
    let one = cr(T::one());
    DiagOp2::new([one, one, one, cis(phi)])
}

pub fn cz<T: Real>() -> DiagOp2<T> {
    DiagOp2::from_real([T::one(), T::one(), T::one(), -T::one()])
}

pub fn p_plus<T: Real>() -> DiagOp2<T> {
    DiagOp2::from_real([T::one(), T::zero(), T::zero(), T::one()])
}

pub fn p_minus<T: Real>() -> DiagOp2<T> {
    DiagOp2::from_real([T::zero(), T::one(), T::one(), T::zero()])
}

/// Z⊗Z as a diagonal.
fn zz<T: Real>() -> [T; 4] {
    [T::one(), -T::one(), -T::one(), T::one()]
}

/// cos(phi/4) I⊗I + beta_unit sin(phi/4) Z⊗Z.
fn schmidt_core<T: Real>(phi: T, beta_unit: Complex<T>) -> DiagOp2<T> {
    let q = r::<T>(0.25) * phi;
    let (a, b) = (cr(q.cos()), beta_unit * q.sin());
    DiagOp2::new(zz::<T>().map(|z| a + b * z))
}

/// The C̃P_(i) family: index 0 → ẼP(φ), 1 → C̃P(φ), 2 → ẼP(−φ), 3 → C̃P(−φ).
pub fn cp_family<T: Real>(index: u8, phi: T) -> Result<DiagOp2<T>> {
    if index > 3 {
        return Err(WgsError::IndexOutOfRange(index));
    }
    Ok(cp_family_mod(index as i64, phi))
}

/// Same as [`cp_family`] with the index taken mod 4.
pub fn cp_family_mod<T: Real>(index: i64, phi: T) -> DiagOp2<T> {
    let unit = match index.rem_euclid(4) {
        0 => cr(T::one()),
        1 => Complex::new(T::zero(), T::one()),
        2 => cr(-T::one()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    schmidt_core(phi, unit)
}

/// ẼP(φ) = cos(φ/4) I⊗I + sin(φ/4) Z⊗Z.
pub fn ep_tilde<T: Real>(phi: T) -> DiagOp2<T> {
    cp_family_mod(0, phi)
}

/// C̃P(φ) = cos(φ/4) I⊗I + i sin(φ/4) Z⊗Z.
pub fn cp_tilde<T: Real>(phi: T) -> DiagOp2<T> {
    cp_family_mod(1, phi)
}

/// C·(R_z(cA)⊗R_z(cB))·(cos(φ/4) I⊗I + e^{iθ} sin(φ/4) Z⊗Z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalForm<T: Real = f64> {
    pub c: Complex<T>,
    pub c_a: ComplexAngle<T>,
    pub c_b: ComplexAngle<T>,
    pub phi: T,
    pub theta: T,
}

impl<T: Real> CanonicalForm<T> {
    /// The non-local factor cos(φ/4) I⊗I + e^{iθ} sin(φ/4) Z⊗Z.
    pub fn core(&self) -> DiagOp2<T> {
        schmidt_core(self.phi, cis(self.theta))
    }

    pub fn to_op(&self) -> DiagOp2<T> {
        let local = rz(self.c_a.value()).kron(&rz(self.c_b.value()));
        local.mul(&self.core()).scale(self.c)
    }
}

pub fn from_canonical<T: Real>(f: &CanonicalForm<T>) -> DiagOp2<T> {
    f.to_op()
}

/// Invert the Schmidt parametrization of a diagonal operator.
pub fn canonicalize<T: Real>(o: &DiagOp2<T>) -> Result<CanonicalForm<T>> {
    let scale = o.max_abs();
    if scale == T::zero() {
        return Err(WgsError::NotRepresentable);
    }
    let small = |x: Complex<T>| x.norm() <= r::<T>(1e-12) * scale;
    let [d00, d01, d10, d11] = o.d;
    let i = Complex::new(T::zero(), T::one());
    let zero = T::zero();

    let (phi, theta, s, t) = if small(d01) && small(d10) {
        if small(d00) || small(d11) {
            return Err(WgsError::NotRepresentable);
        }
        (T::PI(), zero, -i * (d11 / d00).ln(), cr(zero))
    } else if small(d00) && small(d11) {
        (-T::PI(), zero, cr(zero), -i * (d10 / d01).ln())
    } else {
        if small(d01) || small(d10) {
            return Err(WgsError::NotRepresentable);
        }
        let mut lam = ((d00 * d11) / (d01 * d10)).sqrt();
        if lam.re < zero || (lam.re.abs() <= r::<T>(1e-12) * lam.norm() && lam.im < zero) {
            lam = -lam;
        }
        let one = cr(T::one());
        let ratio = (lam - one) / (lam + one);
        let mag = ratio.norm().min(T::one());
        let (phi, theta) = if mag <= r::<T>(1e-15) {
            (zero, zero)
        } else {
            let arg = ratio.arg();
            let (th, sign) = if arg < zero {
                (arg + T::PI(), -T::one())
            } else if arg >= T::PI() - r::<T>(1e-15) {
                (zero, -T::one())
            } else {
                (arg, T::one())
            };
            (sign * r::<T>(4.0) * mag.atan(), th)
        };
        let s = if small(d00) || small(d11) { cr(zero) } else { -i * (d11 / d00).ln() };
        (phi, theta, s, -i * (d10 / d01).ln())
    };

    let half = r::<T>(0.5);
    // s is only known modulo 2π; the two lifts differ by Z⊗Z.
    let fit = |s: Complex<T>| {
        let c_a = ComplexAngle::new((s + t) * half);
        let c_b = ComplexAngle::new((s - t) * half);
        let mut f = CanonicalForm { c: cr(T::one()), c_a, c_b, phi, theta };
        let model = f.to_op();
        let mut num = Complex::new(zero, zero);
        let mut den = zero;
        for (x, m) in o.d.iter().zip(model.d.iter()) {
            num = num + *x * m.conj();
            den = den + m.norm_sqr();
        }
        f.c = num / den;
        let err = f.to_op().max_diff(o);
        (f, err)
    };
    let (f0, e0) = fit(s);
    let (f1, e1) = fit(s + cr(r::<T>(2.0) * T::PI()));
    let (f, err) = if e1 < e0 { (f1, e1) } else { (f0, e0) };
    if err > tol::<T>() * scale {
        return Err(WgsError::NotRepresentable);
    }
    Ok(f)
}

/// The Schmidt weight φ of a representable operator.
pub fn schmidt_weight<T: Real>(o: &DiagOp2<T>) -> Result<T> {
    canonicalize(o).map(|f| f.phi)
}

/// (left ⊗ right)·O.
pub fn apply_local<T: Real>(o: &DiagOp2<T>, left: &SingleQubitDiag<T>, right: &SingleQubitDiag<T>) -> DiagOp2<T> {
    left.kron(right).mul(o)
}

/// Witness for A = C·(L⊗R)·B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalWitness<T: Real = f64> {
    pub c: Complex<T>,
    /// Angle of L written as R_z(left_angle).
    pub left_angle: Complex<T>,
    pub right_angle: Complex<T>,
}

impl<T: Real> LocalWitness<T> {
    pub fn left(&self) -> SingleQubitDiag<T> {
        rz(self.left_angle)
    }

    pub fn right(&self) -> SingleQubitDiag<T> {
        rz(self.right_angle)
    }
}

/// Search for C, L, R with A = C·(L⊗R)·B; `tol` is relative to max|A|.
///
/// L and R are returned as R_z rotations with complex angles, so the witness
/// is unique modulo 2π in each angle whenever B has full support.
pub fn equal_up_to_local_diag<T: Real>(a: &DiagOp2<T>, b: &DiagOp2<T>, tol: T) -> Option<LocalWitness<T>> {
    let scale = a.max_abs().max(b.max_abs());
    if scale == T::zero() {
        return Some(LocalWitness { c: cr(T::one()), left_angle: cr(T::zero()), right_angle: cr(T::zero()) });
    }
    let tiny = r::<T>(1e-13) * scale;
    let support: Vec<bool> = b.d.iter().map(|x| x.norm() > tiny).collect();
    let mut l: [Option<Complex<T>>; 2] = [None, None];
    let mut rr: [Option<Complex<T>>; 2] = [None, None];
    // propagate l_i r_j = a_ij / b_ij over the support graph
    for root in 0..2 {
        if l[root].is_some() || !(support[2 * root] || support[2 * root + 1]) {
            continue;
        }
        l[root] = Some(cr(T::one()));
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..2 {
                for j in 0..2 {
                    if !support[2 * i + j] {
                        continue;
                    }
                    let rho = a.d[2 * i + j] / b.d[2 * i + j];
                    match (l[i], rr[j]) {
                        (Some(li), None) => {
                            rr[j] = Some(rho / li);
                            changed = true;
                        }
                        (None, Some(rj)) => {
                            l[i] = Some(rho / rj);
                            changed = true;
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    let one = cr(T::one());
    let l = l.map(|x| x.unwrap_or(one));
    let rr = rr.map(|x| x.unwrap_or(one));
    if l.iter().chain(rr.iter()).any(|x| x.norm() <= T::min_positive_value() || !x.re.is_finite() || !x.im.is_finite()) {
        return None;
    }
    let left = SingleQubitDiag::new(l[0], l[1]);
    let right = SingleQubitDiag::new(rr[0], rr[1]);
    let pred = apply_local(b, &left, &right);
    if pred.max_diff(a) > tol * a.max_abs().max(tiny) {
        return None;
    }
    let i = Complex::new(T::zero(), T::one());
    let la = -i * (l[1] / l[0]).ln();
    let ra = -i * (rr[1] / rr[0]).ln();
    let half = r::<T>(0.5);
    // diag(x0, x1) = x0 e^{i c/2} R_z(c) with e^{ic} = x1/x0
    let c = l[0] * (i * la * half).exp() * rr[0] * (i * ra * half).exp();
    Some(LocalWitness { c, left_angle: la, right_angle: ra })
}
