//! Dense state vectors with labelled qubits.

use num_complex::Complex64;
use wgs_core::basis::{Ket1, WeightedBasis};
use wgs_core::graph::ResourceGraph;
use wgs_core::operator::SingleQubitDiag;

use crate::{OracleError, Result};

pub const DEFAULT_QUBIT_CAP: usize = 22;

/// Amplitudes over the qubits in `labels`; `labels[0]` is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVec {
    pub amps: Vec<Complex64>,
    pub labels: Vec<u32>,
}

/// One outcome of a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub outcome: u8,
    pub probability: f64,
    pub state: StateVec,
}

impl StateVec {
    pub fn new(amps: Vec<Complex64>, labels: Vec<u32>) -> Result<Self> {
        if amps.len() != 1usize << labels.len() {
            return Err(OracleError::Shape(amps.len(), labels.len()));
        }
        Ok(StateVec { amps, labels })
    }

    /// |+⟩ on every label.
    pub fn plus(labels: Vec<u32>, cap: usize) -> Result<Self> {
        if labels.len() > cap {
            return Err(OracleError::TooManyQubits { qubits: labels.len(), cap });
        }
        let n = 1usize << labels.len();
        let a = (n as f64).sqrt().recip();
        Ok(StateVec { amps: vec![Complex64::new(a, 0.0); n], labels })
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut s = self.clone();
        if n > 0.0 {
            s.amps.iter_mut().for_each(|a| *a /= n);
        }
        s
    }

    pub fn position(&self, qubit: u32) -> Result<usize> {
        self.labels.iter().position(|&l| l == qubit).ok_or(OracleError::QubitAbsent(qubit))
    }

    /// Bit shift of a label position.
    fn shift(&self, pos: usize) -> usize {
        self.labels.len() - 1 - pos
    }

    /// ⟨ket|_qubit applied to the state, without renormalization; the qubit is removed.
    pub fn project(&self, qubit: u32, ket: &Ket1) -> Result<StateVec> {
        let pos = self.position(qubit)?;
        let s = self.shift(pos);
        let low = 1usize << s;
        let (k0, k1) = (ket.a[0].conj(), ket.a[1].conj());
        let mut out = Vec::with_capacity(self.amps.len() / 2);
        for hi in (0..self.amps.len()).step_by(low << 1) {
            for lo in 0..low {
                out.push(k0 * self.amps[hi + lo] + k1 * self.amps[hi + low + lo]);
            }
        }
        let mut labels = self.labels.clone();
        labels.remove(pos);
        Ok(StateVec { amps: out, labels })
    }

    /// Measure `qubit` in `basis`: both outcomes with probabilities relative to
    /// the current norm and renormalized post-measurement states.
    pub fn measure(&self, qubit: u32, basis: &WeightedBasis) -> Result<[BranchRecord; 2]> {
        let total = self.norm_sqr();
        let rec = |outcome: u8| -> Result<BranchRecord> {
            let st = self.project(qubit, &basis.ket(outcome as usize))?;
            let p = st.norm_sqr();
            Ok(BranchRecord { outcome, probability: if total > 0.0 { p / total } else { 0.0 }, state: st.normalized() })
        };
        Ok([rec(0)?, rec(1)?])
    }

    /// Apply a diagonal single-qubit operator.
    pub fn apply_diag(&mut self, qubit: u32, d: &SingleQubitDiag) -> Result<()> {
        let s = self.shift(self.position(qubit)?);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= d.d[(i >> s) & 1];
        }
        Ok(())
    }

    /// Apply CP(φ) between two qubits.
    pub fn apply_cp(&mut self, u: u32, v: u32, phi: f64) -> Result<()> {
        let (su, sv) = (self.shift(self.position(u)?), self.shift(self.position(v)?));
        let ph = Complex64::from_polar(1.0, phi);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> su) & 1 == 1 && (i >> sv) & 1 == 1 {
                *a *= ph;
            }
        }
        Ok(())
    }

    /// Reorder qubits to `labels` (a permutation of the current labels).
    pub fn permuted(&self, labels: &[u32]) -> Result<StateVec> {
        if labels.len() != self.labels.len() {
            return Err(OracleError::Shape(self.amps.len(), labels.len()));
        }
        let shifts: Vec<usize> = labels.iter().map(|&l| self.position(l).map(|p| self.shift(p))).collect::<Result<_>>()?;
        let q = labels.len();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (j, o) in out.iter_mut().enumerate() {
            let mut i = 0;
            for (p, &s) in shifts.iter().enumerate() {
                i |= ((j >> (q - 1 - p)) & 1) << s;
            }
            *o = self.amps[i];
        }
        Ok(StateVec { amps: out, labels: labels.to_vec() })
    }
}

/// |+⟩^{⊗q} with CP(sign·φ) on every edge, by phase counting:
/// the amplitude of x is 2^{−q/2} exp(iφ Σ sign·x_u x_v).
pub fn build_wgs(g: &ResourceGraph, cap: usize) -> Result<StateVec> {
    let q = g.num_qubits();
    if q > cap {
        return Err(OracleError::TooManyQubits { qubits: q, cap });
    }
    let labels: Vec<u32> = g.vertices.iter().map(|v| v.id).collect();
    let shift = |id: u32| q - 1 - labels.iter().position(|&l| l == id).unwrap();
    let pairs: Vec<(usize, usize, i64)> = g.edges.iter().map(|e| (shift(e.u), shift(e.v), e.sign as i64)).collect();
    let a = ((1usize << q) as f64).sqrt().recip();
    let span = 2 * pairs.len() + 1;
    let table: Vec<Complex64> =
        (0..span).map(|c| Complex64::from_polar(a, g.params.phi * (c as i64 - pairs.len() as i64) as f64)).collect();
    let amps = (0..1usize << q)
        .map(|x| {
            let c: i64 = pairs.iter().map(|&(su, sv, s)| s * (((x >> su) & (x >> sv) & 1) as i64)).sum();
            table[(c + pairs.len() as i64) as usize]
        })
        .collect();
    Ok(StateVec { amps, labels })
}

/// Reference construction: |+⟩^{⊗q} followed by sequential CP gates.
pub fn build_wgs_dense(g: &ResourceGraph, cap: usize) -> Result<StateVec> {
    let mut s = StateVec::plus(g.vertices.iter().map(|v| v.id).collect(), cap)?;
    for e in &g.edges {
        s.apply_cp(e.u, e.v, e.sign as f64 * g.params.phi)?;
    }
    Ok(s)
}

/// Graph state with CZ on the given pairs of `labels`.
pub fn graph_state(labels: Vec<u32>, pairs: &[(u32, u32)], cap: usize) -> Result<StateVec> {
    let mut s = StateVec::plus(labels, cap)?;
    for &(u, v) in pairs {
        s.apply_cp(u, v, std::f64::consts::PI)?;
    }
    Ok(s)
}

/// n×n cluster state on labels 0..n², row-major.
pub fn cluster_state(n: u32) -> Result<StateVec> {
    let mut pairs = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let id = r * n + c;
            if c + 1 < n {
                pairs.push((id, id + 1));
            }
            if r + 1 < n {
                pairs.push((id, id + n));
            }
        }
    }
    graph_state((0..n * n).collect(), &pairs, DEFAULT_QUBIT_CAP)
}

/// |⟨a|b⟩|² for normalized copies of a and b, after aligning b's labels to a's.
pub fn fidelity(a: &StateVec, b: &StateVec) -> Result<f64> {
    let b = b.permuted(&a.labels)?;
    let ip: Complex64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(ip.norm_sqr() / (a.norm_sqr() * b.norm_sqr()))
}
