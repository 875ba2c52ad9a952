//! Text and JSON output of the compose, bounds, graph and sweep commands.

use std::fmt::Write;

use num_complex::Complex64;
use serde::Serialize;
use wgs_core::basis::{BasisLabel, PairAngles};
use wgs_core::gadgets::{k_min, m_min, p_at, qubit_count};
use wgs_core::graph::{build_lattice, ResourceGraph};
use wgs_core::mbc::{compose, compose_closed_form, pair_basis, MbcCase};
use wgs_core::operator::{canonicalize, cp, DiagOp2};

use crate::{CliResult, Exit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComposeReport {
    pub phi1: f64,
    pub phi2: f64,
    pub theta: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub case: String,
    pub chi: f64,
    pub coefficient: f64,
    pub u_sign: [i8; 4],
    /// Diagonal entries as [re, im], order 00 01 10 11.
    pub closed_form: [[f64; 2]; 4],
    pub contraction: [[f64; 2]; 4],
    pub max_deviation: f64,
}

fn pairs(d: &DiagOp2) -> [[f64; 2]; 4] {
    d.d.map(|z| [z.re, z.im])
}

/// Closed-form composition of CP(φ1) and CP(φ2) at θ against direct contraction.
pub fn compose_report(phi1: f64, phi2: f64, theta: f64) -> CliResult<ComposeReport> {
    for (name, x) in [("phi1", phi1), ("phi2", phi2), ("theta", theta)] {
        if !x.is_finite() {
            return Err(Exit::Usage(format!("{name} must be finite")));
        }
    }
    let (o1, o2) = (cp(phi1), cp(phi2));
    let (f1, f2) = (canonicalize(&o1)?, canonicalize(&o2)?);
    let closed = compose_closed_form(&f1, &f2, theta)?;
    let basis = pair_basis(&f1, &f2, theta, BasisLabel::Custom(theta));
    let direct = compose(&o1, &o2, &basis.success);
    let op = closed.to_op();
    let a = PairAngles::new(phi1, phi2);
    Ok(ComposeReport {
        phi1,
        phi2,
        theta,
        phi_plus: a.phi_plus,
        phi_minus: a.phi_minus,
        case: match closed.case {
            MbcCase::I => "I".into(),
            MbcCase::II => "II".into(),
        },
        chi: closed.chi,
        coefficient: closed.coefficient,
        u_sign: closed.u_sign,
        closed_form: pairs(&op),
        contraction: pairs(&direct),
        max_deviation: op.max_diff(&direct),
    })
}

fn fmt_c(z: &[f64; 2]) -> String {
    let c = Complex64::new(z[0], z[1]);
    format!("{:+.12}{:+.12}i", c.re, c.im)
}

impl ComposeReport {
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "phi1 = {}  phi2 = {}  theta = {}", self.phi1, self.phi2, self.theta);
        let _ = writeln!(s, "phi+ = {:.12}  phi- = {:.12}  case {}", self.phi_plus, self.phi_minus, self.case);
        let _ = writeln!(s, "chi = {:.12}  C = {:.12}  U_sign = {:?}", self.chi, self.coefficient, self.u_sign);
        let row = |d: &[[f64; 2]; 4]| d.iter().map(fmt_c).collect::<Vec<_>>().join("  ");
        let _ = writeln!(s, "closed form  diag: {}", row(&self.closed_form));
        let _ = writeln!(s, "contraction  diag: {}", row(&self.contraction));
        let _ = writeln!(s, "max deviation: {:.3e}", self.max_deviation);
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub phi: f64,
    pub n: u32,
    pub delta: f64,
    pub k_min: u64,
    pub m_min: u64,
    pub n_qubits: u64,
    pub p: f64,
    pub holds: bool,
}

/// k_min, m_min, N and P(n, k_min, m_min) against 1 − δ.
pub fn bounds_report(phi: f64, n: u32, delta: f64) -> BoundsReport {
    let (k, m) = (k_min(phi, n, delta), m_min(phi, n, delta));
    let p = p_at(phi, n, k, m);
    BoundsReport {
        phi,
        n,
        delta,
        k_min: k,
        m_min: m,
        n_qubits: qubit_count(n as u64, k, m),
        p,
        holds: p >= 1.0 - delta,
    }
}

impl BoundsReport {
    pub fn text(&self) -> String {
        format!(
            "phi = {}  n = {}  delta = {}\nk_min = {}\nm_min = {}\nN = {}\nP(n, k_min, m_min) = {:.12}\nP >= 1 - delta: {}\n",
            self.phi, self.n, self.delta, self.k_min, self.m_min, self.n_qubits, self.p, self.holds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

/// The n×n lattice resource graph, refusing sizes that would not fit in memory.
pub fn lattice_graph(n: u32, k: u32, m: u32, phi: f64) -> CliResult<ResourceGraph> {
    let count = qubit_count(n as u64, k as u64, m as u64) + (n as u64) * (n as u64);
    if count > 5_000_000 {
        return Err(Exit::Usage(format!("{count} qubits is too large to export")));
    }
    Ok(build_lattice(n, k, m, phi)?)
}

pub fn export(g: &ResourceGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => g.to_json() + "\n",
        GraphFormat::Dot => g.to_dot(),
    }
}
