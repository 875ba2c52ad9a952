//! Composition of two diagonal operators through a measured ancilla.

use num_complex::Complex;

use crate::basis::{success_failure_labeled, BasisLabel, Ket1, PairAngles, WeightedBasis};
use crate::error::{Result, WgsError};
use crate::operator::{cp_family_mod, rz, CanonicalForm, ComplexAngle, DiagOp2};
use crate::scalar::{cr, r, sgn, Real};

/// ⟨meas|_B (O1)_{AB} (O2)_{BC} |+⟩_B as an operator on (A, C).
pub fn compose<T: Real>(o1: &DiagOp2<T>, o2: &DiagOp2<T>, meas: &Ket1<T>) -> DiagOp2<T> {
    let s = T::FRAC_1_SQRT_2();
    let mut d = [cr(T::zero()); 4];
    for a in 0..2 {
        for c in 0..2 {
            let mut acc = cr(T::zero());
            for b in 0..2 {
                acc = acc + meas.a[b].conj() * o1.entry(a, b) * o2.entry(b, c);
            }
            d[2 * a + c] = acc * s;
        }
    }
    DiagOp2::new(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbcCase {
    /// |θ| < φ_l or |θ| > φ_u.
    I,
    /// φ_l < |θ| < φ_u.
    II,
}

/// Closed-form MBC of two CP-type operators: prefactor·(R_z(local_a) ⊗ R_z(local_c))·ẼP(χ)·U_sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormMbc<T: Real = f64> {
    pub prefactor: Complex<T>,
    pub local_a: Complex<T>,
    pub local_c: Complex<T>,
    pub chi: T,
    pub u_sign: [i8; 4],
    pub case: MbcCase,
    pub r_plus: T,
    pub r_minus: T,
    pub m_plus: T,
    pub m_minus: T,
    /// C = √((m_+² + m_−²)/2).
    pub coefficient: T,
}

impl<T: Real> ClosedFormMbc<T> {
    /// The part without U_sign, in canonical form.
    pub fn canonical(&self) -> CanonicalForm<T> {
        let (c_a, sa) = ComplexAngle::wrap_with_sign(self.local_a);
        let (c_b, sb) = ComplexAngle::wrap_with_sign(self.local_c);
        CanonicalForm {
            c: self.prefactor * (sa * sb),
            c_a,
            c_b,
            phi: self.chi,
            theta: T::zero(),
        }
    }

    pub fn u_sign_op(&self) -> DiagOp2<T> {
        DiagOp2::from_real(self.u_sign.map(|s| r::<T>(s as f64)))
    }

    pub fn to_op(&self) -> DiagOp2<T> {
        let local = rz(self.local_a).kron(&rz(self.local_c));
        let core = crate::operator::ep_tilde(self.chi);
        local.mul(&core).mul(&self.u_sign_op()).scale(self.prefactor)
    }
}

/// Direct sign diagonal diag(sgn(θ+φ+), sgn(θ+φ−), sgn(θ−φ−), sgn(θ−φ+)).
pub fn u_sign_direct<T: Real>(theta: T, phi_plus: T, phi_minus: T) -> [i8; 4] {
    let s = |x: T| if x >= T::zero() { 1i8 } else { -1i8 };
    [s(theta + phi_plus), s(theta + phi_minus), s(theta - phi_minus), s(theta - phi_plus)]
}

/// σ from the signs of φ+, φ−, |φ+|−|φ−|, as a map on {1,2,3,4} (index 0 unused).
pub fn sigma_permutation<T: Real>(phi_plus: T, phi_minus: T) -> [usize; 5] {
    let key = (
        sgn(phi_plus) > T::zero(),
        sgn(phi_minus) > T::zero(),
        sgn(phi_plus.abs() - phi_minus.abs()) > T::zero(),
    );
    // images of 1..4
    let img: [usize; 4] = match key {
        (true, true, true) => [1, 2, 3, 4],
        (false, true, true) => [4, 2, 3, 1],
        (true, false, true) => [1, 3, 2, 4],
        (true, true, false) => [2, 1, 4, 3],
        (false, false, true) => [4, 3, 2, 1],
        (false, true, false) => [2, 4, 1, 3],
        (true, false, false) => [3, 1, 4, 2],
        (false, false, false) => [3, 4, 1, 2],
    };
    [0, img[0], img[1], img[2], img[3]]
}

fn u_k(k: usize) -> [i8; 4] {
    match k {
        1 => [1, 1, 1, 1],
        2 => [1, 1, -1, -1],
        3 => [1, -1, 1, -1],
        _ => [-1, 1, 1, -1],
    }
}

fn dmul(a: [i8; 4], b: [i8; 4]) -> [i8; 4] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]
}

/// U_sign from the five-region summary with the permutation table.
pub fn u_sign_summary<T: Real>(theta: T, phi_plus: T, phi_minus: T) -> [i8; 4] {
    let s = sigma_permutation(phi_plus, phi_minus);
    let cz = [1, 1, 1, -1];
    let neg = |x: [i8; 4]| x.map(|v| -v);
    let (pu, pl) = (phi_plus.abs().max(phi_minus.abs()), phi_plus.abs().min(phi_minus.abs()));
    if theta > pu {
        u_k(1)
    } else if theta > pl {
        dmul(u_k(s[1]), cz)
    } else if theta > -pl {
        dmul(u_k(s[1]), u_k(s[2]))
    } else if theta > -pu {
        neg(dmul(u_k(s[4]), cz))
    } else {
        neg(u_k(1))
    }
}

/// Closed-form composition of two CP-type operators (Schmidt phase π/2)
/// measured in the success state ψ_s(θ) built from their ancilla-side angles.
pub fn compose_closed_form<T: Real>(o1: &CanonicalForm<T>, o2: &CanonicalForm<T>, theta: T) -> Result<ClosedFormMbc<T>> {
    let eps = r::<T>(1e-9);
    for f in [o1, o2] {
        if f.phi == T::zero() {
            return Err(WgsError::ZeroWeight);
        }
        if (f.theta - T::FRAC_PI_2()).abs() > eps {
            return Err(WgsError::UnsupportedPhase(f.theta.to_f64().unwrap()));
        }
    }
    let (phi1, phi2) = (o1.phi, o2.phi);
    let a = PairAngles::new(phi1, phi2);
    let (pp, pm) = (a.phi_plus, a.phi_minus);
    let sing = r::<T>(1e-12);
    if (theta.abs() - pp.abs()).abs() <= sing || (theta.abs() - pm.abs()).abs() <= sing {
        return Err(WgsError::SingularAngle {
            theta: theta.to_f64().unwrap(),
            phi_plus: pp.to_f64().unwrap(),
            phi_minus: pm.to_f64().unwrap(),
        });
    }
    let half = r::<T>(0.5);
    let rr = |p: T| ((half * (p + theta)).sin() / (half * (p - theta)).sin()).abs().ln();
    let mm = |p: T| ((half * p).sin().powi(2) - (half * theta).sin().powi(2)).abs().sqrt();
    let (r_plus, r_minus) = (rr(pp), rr(pm));
    let (m_plus, m_minus) = (mm(pp), mm(pm));
    let coefficient = (half * (m_plus * m_plus + m_minus * m_minus)).sqrt();
    let chi = r::<T>(4.0) * ((m_plus - m_minus) / (m_plus + m_minus)).atan();
    let case = if theta.abs() < a.phi_l || theta.abs() > a.phi_u { MbcCase::I } else { MbcCase::II };

    let c_sum = o1.c_b.value() + o2.c_a.value();
    let n = c_sum.im.cosh();
    let i = Complex::new(T::zero(), T::one());
    let prefactor = o1.c * o2.c * (T::one() / n.sqrt()) * i * coefficient;
    let local_a = o1.c_a.value() + i * (half * (r_plus + r_minus));
    let local_c = o2.c_b.value() + i * (half * (r_plus - r_minus));
    Ok(ClosedFormMbc {
        prefactor,
        local_a,
        local_c,
        chi,
        u_sign: u_sign_direct(theta, pp, pm),
        case,
        r_plus,
        r_minus,
        m_plus,
        m_minus,
        coefficient,
    })
}

/// The basis ψ_s(θ)/ψ_f(θ) for a pair in canonical form.
pub fn pair_basis<T: Real>(o1: &CanonicalForm<T>, o2: &CanonicalForm<T>, theta: T, label: BasisLabel) -> WeightedBasis<T> {
    success_failure_labeled(o1.c_b.value() + o2.c_a.value(), theta, label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZSide {
    None,
    /// Z on the first qubit.
    Left,
    /// Z on the second qubit.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedXResult<T: Real = f64> {
    pub index: i64,
    pub weight: T,
    pub coefficient: T,
    pub z: ZSide,
}

impl<T: Real> WeightedXResult<T> {
    /// The predicted operator, up to a global phase.
    pub fn to_op(&self) -> DiagOp2<T> {
        let op = cp_family_mod(self.index, self.weight).scale(cr(self.coefficient));
        let one = cr(T::one());
        match self.z {
            ZSide::None => op,
            ZSide::Left => op.mul(&DiagOp2::new([one, one, -one, -one])),
            ZSide::Right => op.mul(&DiagOp2::new([one, -one, one, -one])),
        }
    }
}

/// X_w^± composition of C̃P_(i)(φ1) and C̃P_(j)(φ2).
///
/// X_w^+ gives C̃P_(i+j)(χ_c) with coefficient √C_+. X_w^− gives √S_+ times
/// (I⊗Z)·C̃P_(i−j)(χ_s) when |φ1| ≤ |φ2| and (Z⊗I)·C̃P_(j−i)(χ_s) otherwise;
/// χ_s is symmetric in the two weights.
pub fn weighted_x_compose<T: Real>(sign: i8, i: i64, j: i64, phi1: T, phi2: T) -> Result<WeightedXResult<T>> {
    if phi1 == T::zero() || phi2 == T::zero() {
        return Err(WgsError::ZeroWeight);
    }
    let a = PairAngles::new(phi1, phi2);
    let two = r::<T>(2.0);
    let clamp = |x: T| x.max(-T::one()).min(T::one());
    if sign > 0 {
        Ok(WeightedXResult {
            index: (i + j).rem_euclid(4),
            weight: -two * clamp(a.c_minus / a.c_plus).asin(),
            coefficient: a.c_plus.sqrt(),
            z: ZSide::None,
        })
    } else {
        let weight = two * clamp(a.s_minus / a.s_plus).asin();
        let (index, z) = if phi1.abs() <= phi2.abs() { ((i - j).rem_euclid(4), ZSide::Right) } else { ((j - i).rem_euclid(4), ZSide::Left) };
        Ok(WeightedXResult { index, weight, coefficient: a.s_plus.sqrt(), z })
    }
}

/// One link of a chain of CP(±φ) operators joined by weighted Pauli-X measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainStep {
    /// X_w^+ (> 0) or X_w^− (< 0).
    pub basis_sign: i8,
    pub success: bool,
    /// Sign of the weight of the next CP.
    pub cp_sign: i8,
}

impl ChainStep {
    /// Whether the outcome projects onto ψ_s(π) (otherwise ψ_s(0)).
    pub fn effective_plus(&self) -> bool {
        (self.basis_sign > 0) == self.success
    }
}

/// Left fold of [`weighted_x_compose`] along a chain starting from CP(first_sign·φ).
pub fn chain_weights<T: Real>(first_sign: i8, phi: T, steps: &[ChainStep]) -> Result<(i64, T)> {
    if steps.is_empty() {
        return Err(WgsError::InvalidParams("empty chain".into()));
    }
    let signed = |s: i8| if s > 0 { phi } else { -phi };
    let (mut idx, mut w) = (1i64, signed(first_sign));
    for st in steps {
        let rule = if st.effective_plus() { 1 } else { -1 };
        let res = weighted_x_compose(rule, idx, 1, w, signed(st.cp_sign))?;
        idx = res.index;
        w = res.weight;
    }
    Ok((idx, w))
}

/// Chain result from counts: index i−j+1 mod 4 and weight (−1)^m φ^{(i−j+1)},
/// tan(φ^{(n)}/4) = tan^n(φ/4); i counts ψ_s(π) outcomes, j counts ψ_s(0), m counts CP(−φ).
///
/// Agrees with [`chain_weights`] up to local unitaries while i − j + 1 stays
/// nonnegative over every proper prefix; past a projection the fold reflects.
pub fn chain_weights_closed<T: Real>(first_sign: i8, phi: T, steps: &[ChainStep]) -> (i64, T) {
    let i = steps.iter().filter(|s| s.effective_plus()).count() as i64;
    let j = steps.len() as i64 - i;
    let m = steps.iter().filter(|s| s.cp_sign < 0).count() + usize::from(first_sign < 0);
    let n = i - j + 1;
    let quarter = r::<T>(0.25);
    let w = r::<T>(4.0) * (quarter * phi).tan().powi(n as i32).atan();
    let w = if m % 2 == 1 { -w } else { w };
    (n.rem_euclid(4), w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MbcBranch<T: Real = f64> {
    pub kraus: DiagOp2<T>,
    pub outcome: Outcome,
    pub register: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Instrument<T: Real = f64> {
    pub branches: Vec<MbcBranch<T>>,
}

impl<T: Real> Instrument<T> {
    /// Σ_b |K_b|² per diagonal entry.
    pub fn completeness(&self) -> [T; 4] {
        let mut acc = [T::zero(); 4];
        for b in &self.branches {
            for (x, w) in acc.iter_mut().zip(b.kraus.weights()) {
                *x = *x + w;
            }
        }
        acc
    }

    /// max_i |Σ_b |K_b,ii|² − 1|.
    pub fn completeness_defect(&self) -> T {
        self.completeness().iter().fold(T::zero(), |m, x| m.max((*x - T::one()).abs()))
    }

    /// Branch probabilities for a two-qubit input with computational-basis populations `pops`.
    pub fn probabilities(&self, pops: [T; 4]) -> Vec<T> {
        self.branches
            .iter()
            .map(|b| b.kraus.weights().iter().zip(pops.iter()).fold(T::zero(), |s, (w, p)| s + *w * *p))
            .collect()
    }

    pub fn success_probability(&self, pops: [T; 4]) -> T {
        self.branches
            .iter()
            .zip(self.probabilities(pops))
            .filter(|(b, _)| b.outcome == Outcome::Success)
            .fold(T::zero(), |s, (_, p)| s + p)
    }
}

/// Populations of |++⟩.
pub fn uniform_pops<T: Real>() -> [T; 4] {
    [r::<T>(0.25); 4]
}

/// Both branches of measuring the shared ancilla in `basis`.
pub fn instrument<T: Real>(o1: &DiagOp2<T>, o2: &DiagOp2<T>, basis: &WeightedBasis<T>) -> Instrument<T> {
    let mk = |k: &Ket1<T>, outcome, bit| MbcBranch { kraus: compose(o1, o2, k), outcome, register: vec![bit] };
    Instrument { branches: vec![mk(&basis.success, Outcome::Success, 0), mk(&basis.failure, Outcome::Failure, 1)] }
}
