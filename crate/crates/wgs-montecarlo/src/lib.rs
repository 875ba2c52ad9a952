//! Seeded Monte Carlo estimates of edge and protocol success probabilities.
//!
//! Every (trial, edge) pair draws from its own ChaCha8 stream: the key is
//! derived from the seed, the stream number is `trial << 20 | edge`. Results
//! therefore do not depend on thread count or scheduling.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use wgs_core::gadgets::{d_k, e_m, edge_probability, overall_probability, qubit_count, EdgeSample, EdgeSampler};

#[derive(Debug, Error)]
pub enum McError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("empty grid")]
    EmptyGrid,
    #[error(transparent)]
    Core(#[from] wgs_core::WgsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, McError>;

pub const MAX_EDGES: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McReport {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    /// √(p̂(1−p̂)/trials).
    pub std_error: f64,
    pub analytic_value: f64,
    /// (estimate − analytic)/√(analytic(1−analytic)/trials).
    pub z_score: f64,
}

impl McReport {
    pub fn new(trials: u64, successes: u64, analytic: f64) -> Self {
        let t = trials as f64;
        let est = successes as f64 / t;
        let sd = (analytic * (1.0 - analytic) / t).sqrt();
        let z = if sd > 0.0 {
            (est - analytic) / sd
        } else if est == analytic {
            0.0
        } else {
            f64::INFINITY
        };
        McReport {
            trials,
            successes,
            estimate: est,
            std_error: (est * (1.0 - est) / t).sqrt(),
            analytic_value: analytic,
            z_score: z,
        }
    }
}

/// The generator for one (trial, edge) pair.
pub fn stream(seed: u64, trial: u64, edge: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial << 20 | (edge % MAX_EDGES));
    rng
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(McError::NoTrials);
    }
    Ok(())
}

/// Sample full edge records (registers and final outcomes) for trials 0..trials.
pub fn sample_edges(phi: f64, k: usize, m: usize, trials: u64, seed: u64) -> Result<Vec<EdgeSample>> {
    check_trials(trials)?;
    let s = EdgeSampler::new(phi, k, m)?;
    Ok((0..trials).into_par_iter().map(|t| s.sample(&mut stream(seed, t, 0))).collect())
}

/// Success rate of one near-deterministic CZ edge against D_k²E_m.
pub fn estimate_edge(phi: f64, k: usize, m: usize, trials: u64, seed: u64) -> Result<McReport> {
    check_trials(trials)?;
    let s = EdgeSampler::new(phi, k, m)?;
    let successes = (0..trials).into_par_iter().filter(|&t| s.sample(&mut stream(seed, t, 0)).success).count() as u64;
    Ok(McReport::new(trials, successes, edge_probability(phi, k as u32, m as u32)))
}

/// Success rate of all 2n(n−1) edges of an n×n lattice against P(n,k,m).
pub fn estimate_protocol(phi: f64, n: u32, k: usize, m: usize, trials: u64, seed: u64) -> Result<McReport> {
    check_trials(trials)?;
    if n < 2 {
        return Err(wgs_core::WgsError::InvalidParams(format!("n={n} must be at least 2")).into());
    }
    let s = EdgeSampler::new(phi, k, m)?;
    let edges = 2 * n as u64 * (n as u64 - 1);
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&t| (0..edges).all(|e| s.sample_success(&mut stream(seed, t, e))))
        .count() as u64;
    Ok(McReport::new(trials, successes, overall_probability(phi, n, k as u32, m as u32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub phi: f64,
    pub n: u32,
    pub k: u32,
    pub m: u32,
    #[serde(rename = "N")]
    pub qubits: u64,
    #[serde(rename = "Dk")]
    pub d_k: f64,
    #[serde(rename = "Em")]
    pub e_m: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z: f64,
}

/// One row per (φ, k, m), in grid order.
pub fn sweep(phis: &[f64], ks: &[u32], ms: &[u32], n: u32, trials: u64, seed: u64) -> Result<Vec<SweepRow>> {
    if phis.is_empty() || ks.is_empty() || ms.is_empty() {
        return Err(McError::EmptyGrid);
    }
    let mut rows = Vec::new();
    for &phi in phis {
        for &k in ks {
            for &m in ms {
                let r = estimate_protocol(phi, n, k as usize, m as usize, trials, seed)?;
                rows.push(SweepRow {
                    phi,
                    n,
                    k,
                    m,
                    qubits: qubit_count(n as u64, k as u64, m as u64),
                    d_k: d_k(phi, k),
                    e_m: e_m(phi, m),
                    p: r.analytic_value,
                    estimate: r.estimate,
                    stderr: r.std_error,
                    z: r.z_score,
                });
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "phi,n,k,m,N,Dk,Em,P,estimate,stderr,z";

pub fn write_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
