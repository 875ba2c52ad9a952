//! Probabilistic and near-deterministic gadgets on chains of CP(φ) edges.
//!
//! A chain gadget is a path target − q1 − … − qn − target with every edge
//! CP(φ); measuring q1..qn left to right leaves a diagonal Kraus operator on
//! the two ends. Outcome −1 (the success ket of a step observable) is encoded
//! as bit 0, outcome +1 as bit 1.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::basis::{ket_vw, step_observables, BasisLabel, Ket1, StepObservable, WeightedBasis};
use crate::error::{Result, WgsError};
use crate::mbc::{compose, instrument, Instrument, MbcBranch, Outcome};
use crate::operator::{cp, cz, p_minus, p_plus, rz_real, DiagOp2, SingleQubitDiag};
use crate::scalar::{h, sgn};

/// Kraus relative proportionality tolerance used by the class checks.
const PROP_TOL: f64 = 1e-8;
/// Branches with total weight below this are structurally zero.
const ZERO_WEIGHT: f64 = 1e-24;

fn check_phi(phi: f64) -> Result<()> {
    if phi == 0.0 || !phi.is_finite() {
        return Err(WgsError::ZeroWeight);
    }
    Ok(())
}

/// Left fold of compose over a chain of CP(φ) edges.
pub fn chain_kraus(phi: f64, kets: &[Ket1]) -> DiagOp2 {
    let e = cp(phi);
    kets.iter().fold(e, |k, m| compose(&k, &e, m))
}

fn branch_ket(b: &WeightedBasis, bit: u8) -> Ket1 {
    b.ket(bit as usize)
}

/// Measurement bases of the probabilistic CZ_± gadget, in chain order.
/// The πh(±φ) offset is folded into the ±π/2 of the X_{∓·} labels.
pub fn cz_bases(sign: i8, phi: f64) -> [WeightedBasis; 3] {
    let s = if sign > 0 { 1 } else { -1 };
    [
        step_observables(StepObservable::XEta(-s, s), phi),
        step_observables(StepObservable::Y(s), phi),
        step_observables(StepObservable::XEta(-s, -s), phi),
    ]
}

/// Bases of the probabilistic MEP gadget; the fifth depends on the center outcome bit.
pub fn mep_bases(phi: f64, center_bit: u8) -> [WeightedBasis; 5] {
    let last = if center_bit == 0 { StepObservable::XEta(-1, 1) } else { StepObservable::XEta(-1, -1) };
    [
        step_observables(StepObservable::XEta(1, -1), phi),
        step_observables(StepObservable::Y(-1), phi),
        step_observables(StepObservable::X(1.0), phi),
        step_observables(StepObservable::Y(1), phi),
        step_observables(last, phi),
    ]
}

/// θ′ and η′ of the alternative CZ gadget.
pub fn alt_angles(phi: f64) -> (f64, f64) {
    let s = (phi / 2.0).sin().abs();
    let theta = 2.0 * (s * (1.0 + s) / 2.0).sqrt().min(1.0).asin();
    let eta = 2.0 * (sgn(phi) * (s / (2.0 + s)).sqrt()).atan();
    (theta, eta)
}

pub fn alt_bases(phi: f64) -> [WeightedBasis; 4] {
    let (th, eta) = alt_angles(phi);
    let w0 = phi + PI * h(-phi);
    [
        WeightedBasis::from_vw(0.0, w0, BasisLabel::Custom(0.0)),
        WeightedBasis::from_vw(-eta, phi, BasisLabel::Custom(0.0)),
        WeightedBasis::from_vw(0.0, phi + th, BasisLabel::Xwpp),
        WeightedBasis::from_vw(-eta, w0, BasisLabel::Custom(0.0)),
    ]
}

fn enumerate_fixed(phi: f64, bases: &[WeightedBasis]) -> Instrument {
    let n = bases.len();
    let mut branches = Vec::with_capacity(1 << n);
    for mask in 0..(1u32 << n) {
        let bits: Vec<u8> = (0..n).map(|q| ((mask >> (n - 1 - q)) & 1) as u8).collect();
        let kets: Vec<Ket1> = bases.iter().zip(&bits).map(|(b, &x)| branch_ket(b, x)).collect();
        branches.push(MbcBranch {
            kraus: chain_kraus(phi, &kets),
            outcome: if mask == 0 { Outcome::Success } else { Outcome::Failure },
            register: bits.iter().map(|&x| x as i64).collect(),
        });
    }
    Instrument { branches }
}

/// All 8 branches of the probabilistic CZ_± gadget; the all-(−1) branch is the success.
pub fn cz_gadget(sign: i8, phi: f64) -> Result<Instrument> {
    check_phi(phi)?;
    Ok(enumerate_fixed(phi, &cz_bases(sign, phi)))
}

/// All 16 branches of the alternative CZ gadget.
pub fn alt_cz_gadget(phi: f64) -> Result<Instrument> {
    check_phi(phi)?;
    Ok(enumerate_fixed(phi, &alt_bases(phi)))
}

/// All 32 branches of the probabilistic MEP gadget. Registers hold the five
/// outcome bits; success covers both MP_+ (center bit 0) and MP_− (center bit 1).
pub fn mep_gadget(phi: f64) -> Result<Instrument> {
    check_phi(phi)?;
    let mut branches = Vec::with_capacity(32);
    for mask in 0..32u32 {
        let bits: Vec<u8> = (0..5).map(|q| ((mask >> (4 - q)) & 1) as u8).collect();
        let bases = mep_bases(phi, bits[2]);
        let kets: Vec<Ket1> = bases.iter().zip(&bits).map(|(b, &x)| branch_ket(b, x)).collect();
        let success = bits[0] == 0 && bits[1] == 0 && bits[3] == 0 && bits[4] == 0;
        branches.push(MbcBranch {
            kraus: chain_kraus(phi, &kets),
            outcome: if success { Outcome::Success } else { Outcome::Failure },
            register: bits.iter().map(|&x| x as i64).collect(),
        });
    }
    Ok(Instrument { branches })
}

/// Pauli-Z measurement of the middle qubit of CP(φ)·CP(φ); register holds b^z.
pub fn detach(phi: f64) -> Instrument {
    let mut ins = instrument(&cp(phi), &cp(phi), &WeightedBasis::pauli_z());
    ins.branches[0].outcome = Outcome::Success;
    ins.branches[1].outcome = Outcome::Success;
    ins
}

/// Predicted success Kraus of CZ_± and of the alternative gadget: (R_z((φ+π)/2) ⊗ R_z((φ−π)/2))·CZ.
pub fn cz_locals(phi: f64) -> (SingleQubitDiag, SingleQubitDiag) {
    (rz_real((phi + PI) / 2.0), rz_real((phi - PI) / 2.0))
}

/// Predicted MP_± Kraus shape: (R_z(φ/2) ⊗ Z R_z(φ/2))·P_±.
pub fn mp_shape(phi: f64, sign: i8) -> DiagOp2 {
    let z = SingleQubitDiag::pauli_z();
    let p = if sign > 0 { p_plus() } else { p_minus() };
    rz_real(phi / 2.0).kron(&z.mul(&rz_real(phi / 2.0))).mul(&p)
}

// ---------------------------------------------------------------------------
// Analytic probabilities

pub fn p_cz(phi: f64) -> f64 {
    let (s, c) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    s.powi(4) / (8.0 * (1.0 + c * c))
}

pub fn p_p(phi: f64) -> f64 {
    let (s, c) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    s.powi(6) / (16.0 * (1.0 + c * c))
}

pub fn p_cz_alt(phi: f64) -> f64 {
    let s = (phi / 2.0).sin().abs();
    s.powi(5) / (16.0 * (1.0 + s).powi(2))
}

/// Per-part success probability sin⁸(φ/2)/(32(1+cos²(φ/2))).
pub fn part_success(phi: f64) -> f64 {
    let (s, c) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    s.powi(8) / (32.0 * (1.0 + c * c))
}

pub fn d_k(phi: f64, k: u32) -> f64 {
    1.0 - (1.0 - part_success(phi)).powi(k as i32)
}

pub fn e_m(phi: f64, m: u32) -> f64 {
    1.0 - (1.0 - p_cz(phi)).powi(m as i32)
}

pub fn edge_probability(phi: f64, k: u32, m: u32) -> f64 {
    d_k(phi, k).powi(2) * e_m(phi, m)
}

/// P(n,k,m) = (D_k² E_m)^{2n(n−1)}.
pub fn overall_probability(phi: f64, n: u32, k: u32, m: u32) -> f64 {
    edge_probability(phi, k, m).powi((2 * n * (n - 1)) as i32)
}

/// N = 2n(n−1)(5m + 14km).
pub fn qubit_count(n: u64, k: u64, m: u64) -> u64 {
    2 * n * (n - 1) * (5 * m + 14 * k * m)
}

pub fn k_min(phi: f64, n: u32, delta: f64) -> u64 {
    let nn = (n * (n - 1)) as f64;
    (64.0 * (PI / phi).abs().powi(8) * (8.0 * nn / delta).ln()).ceil() as u64
}

pub fn m_min(phi: f64, n: u32, delta: f64) -> u64 {
    let nn = (n * (n - 1)) as f64;
    (16.0 * (PI / phi).abs().powi(4) * (4.0 * nn / delta).ln()).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Analytic {
    pub p_cz: f64,
    pub p_p: f64,
    pub p_cz_alt: f64,
    pub d_k: f64,
    pub e_m: f64,
    pub p: f64,
    pub k_min: u64,
    pub m_min: u64,
    pub n_qubits: u64,
    pub p_at_bounds: f64,
}

pub fn analytic(phi: f64, n: u32, k: u32, m: u32, delta: f64) -> Result<Analytic> {
    check_phi(phi)?;
    if n < 2 || !(delta > 0.0) || k == 0 || m == 0 {
        return Err(WgsError::InvalidParams(format!("n={n} k={k} m={m} delta={delta}")));
    }
    let (kmin, mmin) = (k_min(phi, n, delta), m_min(phi, n, delta));
    Ok(Analytic {
        p_cz: p_cz(phi),
        p_p: p_p(phi),
        p_cz_alt: p_cz_alt(phi),
        d_k: d_k(phi, k),
        e_m: e_m(phi, m),
        p: overall_probability(phi, n, k, m),
        k_min: kmin,
        m_min: mmin,
        n_qubits: qubit_count(n as u64, k as u64, m as u64),
        p_at_bounds: p_at(phi, n, kmin, mmin),
    })
}

/// P(n,k,m) for large k, m computed in log space.
pub fn p_at(phi: f64, n: u32, k: u64, m: u64) -> f64 {
    let ln_d = (-(k as f64) * (-part_success(phi)).ln_1p().abs()).exp();
    let ln_e = (-(m as f64) * (-p_cz(phi)).ln_1p().abs()).exp();
    let edge = (-ln_d).ln_1p() * 2.0 + (-ln_e).ln_1p();
    (edge * (2 * n * (n - 1)) as f64).exp()
}

// ---------------------------------------------------------------------------
// Near-deterministic MEP part

/// Outcome class of one seven-qubit MEP part (u1, m1..m5, u7).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartClass {
    /// Middle pattern passed condition (i) with MP sign `sign`; ends measured in X_1
    /// with outcome bits (0 ↔ −1).
    Pass { sign: i8, end_l: u8, end_r: u8 },
    /// Middle pattern failed; ends measured in Z with outcome bits (1 ↔ Z = −1).
    Fail { bz_l: u8, bz_r: u8 },
}

impl PartClass {
    pub fn cond_i(&self) -> bool {
        matches!(self, PartClass::Pass { .. })
    }

    /// Condition (ii): X_1·X_1 = +1.
    pub fn cond_ii(&self) -> bool {
        matches!(self, PartClass::Pass { end_l, end_r, .. } if end_l == end_r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartBranch {
    /// Outcome bits for u1, m1..m5, u7.
    pub bits: [u8; 7],
    pub kraus: DiagOp2,
    pub class: PartClass,
}

/// Bases of a part's end qubits given whether the middle passed.
pub fn part_end_basis(phi: f64, pass: bool) -> WeightedBasis {
    if pass {
        step_observables(StepObservable::X(1.0), phi)
    } else {
        // bit 0 ↔ |1⟩ (Z = −1) to keep "bit 0 is the −1 outcome"
        WeightedBasis { success: Ket1::one(), failure: Ket1::zero(), label: BasisLabel::PauliZ }
    }
}

/// Whether the middle outcome bits (m1..m5) pass condition (i), and the MP sign.
pub fn middle_pass(mid: &[u8]) -> (bool, i8) {
    let sign = if mid[2] == 0 { 1 } else { -1 };
    (mid[0] == 0 && mid[1] == 0 && mid[3] == 0 && mid[4] == 0, sign)
}

/// All 128 branches of one part, Kraus on (first end neighbour, last end neighbour).
pub fn mep_part_branches(phi: f64) -> Vec<PartBranch> {
    let mut out = Vec::with_capacity(128);
    for mask in 0..32u32 {
        let mid: Vec<u8> = (0..5).map(|q| ((mask >> (4 - q)) & 1) as u8).collect();
        let (pass, sign) = middle_pass(&mid);
        let bases = mep_bases(phi, mid[2]);
        let end = part_end_basis(phi, pass);
        for el in 0..2u8 {
            for er in 0..2u8 {
                let mut kets = vec![end.ket(el as usize)];
                kets.extend(bases.iter().zip(&mid).map(|(b, &x)| branch_ket(b, x)));
                kets.push(end.ket(er as usize));
                let bz = |b: u8| 1 - b;
                let class = if pass {
                    PartClass::Pass { sign, end_l: el, end_r: er }
                } else {
                    PartClass::Fail { bz_l: bz(el), bz_r: bz(er) }
                };
                let mut bits = [0u8; 7];
                bits[0] = el;
                bits[1..6].copy_from_slice(&mid);
                bits[6] = er;
                out.push(PartBranch { bits, kraus: chain_kraus(phi, &kets), class });
            }
        }
    }
    out
}

/// Class-level instrument of a part: each class op O_c satisfies
/// Σ_{b ∈ c} |K_b|² = |O_c|² entrywise and every K_b ∝ O_c.
#[derive(Debug, Clone, PartialEq)]
pub struct PartModel {
    pub phi: f64,
    pub classes: Vec<(PartClass, DiagOp2)>,
}

/// Aggregate branches sharing a key into one op, checking proportionality.
fn aggregate<K: Ord + Copy>(items: impl IntoIterator<Item = (K, DiagOp2)>) -> Result<Vec<(K, DiagOp2)>> {
    let mut groups: BTreeMap<K, Vec<DiagOp2>> = BTreeMap::new();
    for (k, op) in items {
        groups.entry(k).or_default().push(op);
    }
    let mut out = Vec::new();
    for (k, ops) in groups {
        let total: f64 = ops.iter().map(|o| o.weights().iter().sum::<f64>()).sum();
        if total < ZERO_WEIGHT {
            continue;
        }
        let rep = *ops
            .iter()
            .max_by(|a, b| a.max_abs().partial_cmp(&b.max_abs()).unwrap())
            .unwrap();
        let mut w = 0.0;
        for o in &ops {
            if o.weights().iter().sum::<f64>() < ZERO_WEIGHT {
                continue;
            }
            let (c, dev) = o.proportionality(&rep);
            if dev > PROP_TOL {
                return Err(WgsError::InvalidParams(format!("class branches not proportional (dev {dev:e})")));
            }
            w += c.norm_sqr();
        }
        out.push((k, rep.scale(Complex64::new(w.sqrt(), 0.0))));
    }
    Ok(out)
}

impl PartModel {
    pub fn new(phi: f64) -> Result<Self> {
        check_phi(phi)?;
        let classes = aggregate(mep_part_branches(phi).into_iter().map(|b| (b.class, b.kraus)))?;
        Ok(PartModel { phi, classes })
    }

    /// Class weights |O_c(a, c)|² for end-neighbour bits (a, c).
    pub fn weights_at(&self, a: usize, c: usize) -> Vec<f64> {
        self.classes.iter().map(|(_, o)| o.entry(a, c).norm_sqr()).collect()
    }
}

/// Registers of one near-deterministic MEP side (k parts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize)]
pub struct SideRegisters {
    /// n̂: parts passing condition (i).
    pub n: u32,
    /// n̂^s: parts passing condition (ii).
    pub ns: u32,
    /// n̂^z_l, n̂^z_r: Z = −1 outcomes on the first / last end of failed parts.
    pub nz_l: u32,
    pub nz_r: u32,
    /// P sign from the condition-(ii) parts (0 when none).
    pub sign: i8,
}

impl SideRegisters {
    pub fn success(&self) -> bool {
        self.ns > 0
    }

    pub fn push(&mut self, c: &PartClass) {
        match *c {
            PartClass::Pass { sign, end_l, end_r } => {
                self.n += 1;
                if end_l == end_r {
                    self.ns += 1;
                    self.sign = if self.sign == 0 || self.sign == sign { sign } else { 2 };
                }
            }
            PartClass::Fail { bz_l, bz_r } => {
                self.nz_l += bz_l as u32;
                self.nz_r += bz_r as u32;
            }
        }
    }

    /// Predicted success shape (R_z((n^z_l + n/2)φ) ⊗ Z^{n^s} R_z((n^z_r + n/2)φ))·P_±.
    pub fn mep_shape(&self, phi: f64) -> DiagOp2 {
        let half_n = self.n as f64 / 2.0;
        let l = rz_real((self.nz_l as f64 + half_n) * phi);
        let r = rz_real((self.nz_r as f64 + half_n) * phi).pow_z(self.ns as i64);
        let p = if self.sign > 0 { p_plus() } else { p_minus() };
        l.kron(&r).mul(&p)
    }
}

/// Exact class-level enumeration of a k-part side, keyed by registers.
#[derive(Debug, Clone)]
pub struct SideEnumeration {
    /// Success keys with their aggregated op (∝ the predicted shape).
    pub success: Vec<(SideRegisters, DiagOp2)>,
    /// Per-entry weight of all failure branches.
    pub failure_weight: [f64; 4],
}

impl SideEnumeration {
    pub fn success_weight(&self) -> [f64; 4] {
        let mut w = [0.0; 4];
        for (_, o) in &self.success {
            for (x, y) in w.iter_mut().zip(o.weights()) {
                *x += y;
            }
        }
        w
    }
}

pub fn enumerate_side(model: &PartModel, k: usize) -> Result<SideEnumeration> {
    if k == 0 {
        return Err(WgsError::InvalidK(k));
    }
    let nc = model.classes.len();
    let mut items = Vec::new();
    let mut failure_weight = [0.0; 4];
    let mut idx = vec![0usize; k];
    loop {
        let mut reg = SideRegisters::default();
        let mut op = DiagOp2::identity();
        for &i in &idx {
            reg.push(&model.classes[i].0);
            op = op.mul(&model.classes[i].1);
        }
        if reg.success() {
            if reg.sign == 2 {
                if op.max_abs() > 1e-12 {
                    return Err(WgsError::InvalidParams("mixed-sign side with nonzero Kraus".into()));
                }
            } else {
                items.push((reg, op));
            }
        } else {
            for (x, y) in failure_weight.iter_mut().zip(op.weights()) {
                *x += y;
            }
        }
        // odometer
        let mut p = 0;
        loop {
            if p == k {
                let success = aggregate(items)?;
                return Ok(SideEnumeration { success, failure_weight });
            }
            idx[p] += 1;
            if idx[p] < nc {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Near-deterministic MEP outcome on the side's (first, last) neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetOutcome {
    pub kraus: DiagOp2,
    pub success: bool,
    pub registers: EdgeRegisters,
}

/// Registers of a near-deterministic CZ edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize)]
pub struct EdgeRegisters {
    /// Index of the selected line (first CZ success), if any.
    pub line: Option<u32>,
    pub left: SideRegisters,
    pub right: SideRegisters,
    /// Z = −1 counts from detaching unselected lines at T_L / T_R.
    pub nz_big_l: u32,
    pub nz_big_r: u32,
    pub b_l: u8,
    pub b_r: u8,
    pub b_p: u8,
}

impl EdgeRegisters {
    /// X_n index of the e1 measurement: n^z_{r,l} + (n_l + 1)/2.
    pub fn e1_index(&self) -> f64 {
        self.left.nz_r as f64 + (self.left.n as f64 + 1.0) / 2.0
    }

    /// X_n index of the e2 measurement: n^z_{l,r} + (n_r + 1)/2.
    pub fn e2_index(&self) -> f64 {
        self.right.nz_l as f64 + (self.right.n as f64 + 1.0) / 2.0
    }

    pub fn frame(&self, phi: f64) -> ByproductFrame {
        let n_l = self.left.nz_l as f64 + self.nz_big_l as f64 + self.left.n as f64 / 2.0;
        let n_r = self.right.nz_r as f64 + self.nz_big_r as f64 + self.right.n as f64 / 2.0;
        ByproductFrame {
            z_l: ((self.left.ns + self.b_l as u32 + self.b_p as u32) % 2) as u8,
            z_r: ((self.right.ns + self.b_r as u32 + self.b_p as u32) % 2) as u8,
            rz_l: n_l * phi + FRAC_PI_2,
            rz_r: n_r * phi - FRAC_PI_2,
        }
    }
}

/// (Z^{z_l} R_z(rz_l)) ⊗ (Z^{z_r} R_z(rz_r)) to be undone on the targets.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ByproductFrame {
    pub z_l: u8,
    pub z_r: u8,
    pub rz_l: f64,
    pub rz_r: f64,
}

impl ByproductFrame {
    pub fn left(&self) -> SingleQubitDiag {
        rz_real(self.rz_l).pow_z(self.z_l as i64)
    }

    pub fn right(&self) -> SingleQubitDiag {
        rz_real(self.rz_r).pow_z(self.z_r as i64)
    }

    pub fn op(&self) -> DiagOp2 {
        self.left().kron(&self.right())
    }

    /// Apply the inverse frame to a Kraus operator.
    pub fn undo(&self, k: &DiagOp2) -> DiagOp2 {
        let inv = |s: SingleQubitDiag| SingleQubitDiag::new(s.d[0].inv(), s.d[1].inv());
        inv(self.left()).kron(&inv(self.right())).mul(k)
    }
}

/// Exhaustive near-deterministic MEP enumeration for one side.
pub fn near_det_mep(phi: f64, k: usize) -> Result<Vec<GadgetOutcome>> {
    let model = PartModel::new(phi)?;
    let side = enumerate_side(&model, k)?;
    Ok(side
        .success
        .into_iter()
        .map(|(reg, op)| GadgetOutcome { kraus: op, success: true, registers: EdgeRegisters { left: reg, ..Default::default() } })
        .collect())
}

/// Precomputed tables shared by exhaustive enumeration and sampling of one edge.
#[derive(Debug, Clone)]
pub struct NearDetModel {
    pub phi: f64,
    pub k: usize,
    pub m: usize,
    pub part: PartModel,
    /// The 8 CZ_+ branches (Kraus on e1, e2); index 0 is the success.
    pub cz: Instrument,
}

impl NearDetModel {
    pub fn new(phi: f64, k: usize, m: usize) -> Result<Self> {
        check_phi(phi)?;
        if k == 0 {
            return Err(WgsError::InvalidK(k));
        }
        if m == 0 {
            return Err(WgsError::InvalidParams("m must be at least 1".into()));
        }
        Ok(NearDetModel { phi, k, m, part: PartModel::new(phi)?, cz: cz_gadget(1, phi)? })
    }

    /// Final-step Kraus on (T_L, T_R) for given side ops and final outcome bits.
    pub fn final_kraus(&self, left: &DiagOp2, right: &DiagOp2, regs: &EdgeRegisters, bits: (u8, u8)) -> DiagOp2 {
        let g = self.cz.branches[0].kraus;
        let b1 = step_observables(StepObservable::X(regs.e1_index()), self.phi);
        let b2 = step_observables(StepObservable::X(regs.e2_index()), self.phi);
        let inner = compose(left, &g, &b1.ket(bits.0 as usize));
        compose(&inner, right, &b2.ket(bits.1 as usize))
    }

    /// Detach factor for unselected lines: (1/√2)^{count}·diag(1, e^{iφ n^z}).
    fn detach_factor(&self, nz: u32, count: u32) -> SingleQubitDiag {
        let s = 0.5f64.powf(count as f64 / 2.0);
        SingleQubitDiag::new(Complex64::new(s, 0.0), Complex64::from_polar(s, self.phi * nz as f64))
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Result of the exhaustive near-deterministic CZ enumeration.
#[derive(Debug, Clone)]
pub struct NearDetEnumeration {
    /// Per-entry success weight over (e1, e2) bits of m lines: 1 − (1 − p_cz)^m.
    pub e_m: f64,
    pub e_m_spread: f64,
    pub d_k_left: [f64; 4],
    pub d_k_right: [f64; 4],
    /// Success branches with their multiplicity-weighted Kraus on (T_L, T_R).
    pub success: Vec<GadgetOutcome>,
    pub success_weight: [f64; 4],
}

/// Exhaustive enumeration of the near-deterministic CZ edge for small k, m.
pub fn near_det_cz(phi: f64, k: usize, m: usize) -> Result<NearDetEnumeration> {
    let model = NearDetModel::new(phi, k, m)?;
    if m > 4 || k > 3 {
        return Err(WgsError::InvalidParams("exhaustive enumeration limited to k <= 3, m <= 4".into()));
    }
    // line selection over all 8^m CZ outcomes, for every assignment of the 2m e-bits
    let cz_w: Vec<[f64; 4]> = model.cz.branches.iter().map(|b| b.kraus.weights()).collect();
    let mut first_success = vec![0.0; m];
    let (mut e_lo, mut e_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ebits in 0..(1usize << (2 * m)) {
        let mut sel = vec![0.0; m];
        let mut total = 0.0;
        for combo in 0..(8usize.pow(m as u32)) {
            let mut w = 1.0;
            let mut first = None;
            for l in 0..m {
                let b = (combo / 8usize.pow(l as u32)) % 8;
                let entry = (ebits >> (2 * l)) & 3;
                w *= cz_w[b][entry];
                if b == 0 && first.is_none() {
                    first = Some(l);
                }
            }
            if let Some(l) = first {
                sel[l] += w;
                total += w;
            }
        }
        e_lo = e_lo.min(total);
        e_hi = e_hi.max(total);
        if ebits == 0 {
            first_success = sel;
        }
    }

    let side = enumerate_side(&model.part, k)?;
    let detach_n = ((m - 1) * k) as u32;
    let mut success = Vec::new();
    let mut success_weight = [0.0; 4];
    for (line, &w_line) in first_success.iter().enumerate() {
        // the success Kraus already carries √p_cz; rescale by the earlier failures
        let line_scale = (w_line / p_cz(phi)).sqrt();
        for (lreg, lop) in &side.success {
            for (rreg, rop) in &side.success {
                for bits in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                    let mut regs = EdgeRegisters {
                        line: Some(line as u32),
                        left: *lreg,
                        right: *rreg,
                        b_l: 1 - bits.0,
                        b_r: 1 - bits.1,
                        b_p: u8::from(lreg.sign != rreg.sign),
                        ..Default::default()
                    };
                    let core = model.final_kraus(lop, rop, &regs, bits).scale(Complex64::new(line_scale, 0.0));
                    for zl in 0..=detach_n {
                        for zr in 0..=detach_n {
                            regs.nz_big_l = zl;
                            regs.nz_big_r = zr;
                            let mult = (binom(detach_n, zl) * binom(detach_n, zr)).sqrt();
                            let fl = model.detach_factor(zl, detach_n);
                            let fr = model.detach_factor(zr, detach_n);
                            let kraus = fl.kron(&fr).mul(&core).scale(Complex64::new(mult, 0.0));
                            for (x, y) in success_weight.iter_mut().zip(kraus.weights()) {
                                *x += y;
                            }
                            success.push(GadgetOutcome { kraus, success: true, registers: regs });
                        }
                    }
                }
            }
        }
    }
    Ok(NearDetEnumeration {
        e_m: (e_lo + e_hi) / 2.0,
        e_m_spread: e_hi - e_lo,
        d_k_left: side.success_weight(),
        d_k_right: side.success_weight(),
        success,
        success_weight,
    })
}

/// Predicted success Kraus shape frame·CZ.
pub fn near_det_cz_shape(phi: f64, regs: &EdgeRegisters) -> DiagOp2 {
    regs.frame(phi).op().mul(&cz())
}

fn pick<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let total: f64 = weights.clone().sum();
    if total <= 0.0 {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = Some(i);
            if u < w {
                return Some(i);
            }
            u -= w;
        }
    }
    last
}

/// Sampling tables for one edge.
#[derive(Debug, Clone)]
pub struct EdgeSampler {
    pub model: NearDetModel,
    /// Class weights at each (a, c) entry.
    part_w: [Vec<f64>; 4],
    cz_w: [Vec<f64>; 4],
    /// Per-entry probability that one line's CZ gadget succeeds / one part satisfies (ii).
    cz_p: [f64; 4],
    ii_p: [f64; 4],
}

/// One sampled edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSample {
    pub success: bool,
    pub registers: EdgeRegisters,
    /// Exact Kraus of the sampled record on (T_L, T_R) up to scale, when successful.
    pub kraus: Option<DiagOp2>,
}

impl EdgeSampler {
    pub fn new(phi: f64, k: usize, m: usize) -> Result<Self> {
        let model = NearDetModel::new(phi, k, m)?;
        let part_w = [0, 1, 2, 3].map(|e| model.part.weights_at(e / 2, e % 2));
        let cz_w = [0, 1, 2, 3].map(|e| model.cz.branches.iter().map(|b| b.kraus.weights()[e]).collect());
        let ratio = |w: &Vec<f64>, hit: &dyn Fn(usize) -> bool| {
            w.iter().enumerate().filter(|(i, _)| hit(*i)).map(|(_, x)| x).sum::<f64>() / w.iter().sum::<f64>()
        };
        let cz_p = [0, 1, 2, 3].map(|e| ratio(&cz_w[e], &|i| i == 0));
        let classes = model.part.classes.clone();
        let ii_p = [0, 1, 2, 3].map(|e| ratio(&part_w[e], &|i| classes[i].0.cond_ii()));
        Ok(EdgeSampler { model, part_w, cz_w, cz_p, ii_p })
    }

    /// Success indicator only: the same hidden-bit model without tracking
    /// registers or the final measurement.
    pub fn sample_success<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let (k, m) = (self.model.k, self.model.m);
        let t_l = rng.random::<bool>() as usize;
        let t_r = rng.random::<bool>() as usize;
        let mut e_sel = None;
        for _ in 0..m {
            let e = (rng.random::<bool>() as usize, rng.random::<bool>() as usize);
            if rng.random::<f64>() < self.cz_p[2 * e.0 + e.1] {
                e_sel = Some(e);
                break;
            }
        }
        let Some((e1, e2)) = e_sel else { return false };
        let side = |rng: &mut R, p: f64| (0..k).fold(false, |hit, _| rng.random::<f64>() < p || hit);
        side(rng, self.ii_p[2 * t_l + e1]) && side(rng, self.ii_p[2 * e2 + t_r])
    }

    /// Sample one edge record. Targets and e-qubits enter as uniform hidden bits,
    /// which is exact because every pre-final instrument is diagonal in them.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EdgeSample {
        let (k, m) = (self.model.k, self.model.m);
        let t_l = rng.random::<bool>() as usize;
        let t_r = rng.random::<bool>() as usize;
        let mut line = None;
        let mut e_sel = (0, 0);
        for l in 0..m {
            let e1 = rng.random::<bool>() as usize;
            let e2 = rng.random::<bool>() as usize;
            let b = pick(rng, self.cz_w[2 * e1 + e2].iter().copied()).unwrap();
            if b == 0 {
                line = Some(l);
                e_sel = (e1, e2);
                break;
            }
        }
        let mut regs = EdgeRegisters::default();
        let Some(line) = line else {
            return EdgeSample { success: false, registers: regs, kraus: None };
        };
        regs.line = Some(line as u32);
        let classes = &self.model.part.classes;
        let mut lop = DiagOp2::identity();
        let mut rop = DiagOp2::identity();
        for _ in 0..k {
            let c = pick(rng, self.part_w[2 * t_l + e_sel.0].iter().copied()).unwrap();
            regs.left.push(&classes[c].0);
            lop = lop.mul(&classes[c].1);
        }
        for _ in 0..k {
            let c = pick(rng, self.part_w[2 * e_sel.1 + t_r].iter().copied()).unwrap();
            regs.right.push(&classes[c].0);
            rop = rop.mul(&classes[c].1);
        }
        if !(regs.left.success() && regs.right.success()) {
            return EdgeSample { success: false, registers: regs, kraus: None };
        }
        let detach_n = ((m - 1) * k) as u32;
        regs.nz_big_l = (0..detach_n).filter(|_| rng.random::<bool>()).count() as u32;
        regs.nz_big_r = (0..detach_n).filter(|_| rng.random::<bool>()).count() as u32;
        regs.b_p = u8::from(regs.left.sign != regs.right.sign);
        let outs = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
        let ks: Vec<DiagOp2> = outs.iter().map(|&b| self.model.final_kraus(&lop, &rop, &regs, b)).collect();
        let f = pick(rng, ks.iter().map(|kk| kk.entry(t_l, t_r).norm_sqr())).unwrap();
        regs.b_l = 1 - outs[f].0;
        regs.b_r = 1 - outs[f].1;
        let fl = self.model.detach_factor(regs.nz_big_l, detach_n);
        let fr = self.model.detach_factor(regs.nz_big_r, detach_n);
        EdgeSample { success: true, registers: regs, kraus: Some(fl.kron(&fr).mul(&ks[f])) }
    }
}

/// Kets for measuring a part end in X_1 or Z, by outcome bit.
pub fn x_ket(n: f64, phi: f64, bit: u8) -> Ket1 {
    if bit == 0 {
        ket_vw(0.0, n * phi)
    } else {
        ket_vw(PI, n * phi)
    }
}
