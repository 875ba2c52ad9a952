//! Executing measurement schedules on dense states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wgs_core::basis::BasisLabel;
use wgs_core::graph::{MeasurementSchedule, ResourceGraph};
use wgs_core::operator::DiagOp2;

use crate::state::{build_wgs, StateVec};
use crate::{OracleError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub qubit_cap: usize,
    /// Branches with probability below this are dropped.
    pub prune: f64,
    pub max_branches: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { qubit_cap: crate::state::DEFAULT_QUBIT_CAP, prune: 1e-14, max_branches: 1 << 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Exhaustive,
    Sample(u64),
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub qubit: u32,
    pub basis: BasisLabel,
    pub outcome: u8,
    pub probability: f64,
}

/// A complete outcome record with the unnormalized state of the unmeasured qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Outcome bit per qubit id (None for unmeasured qubits).
    pub outcomes: Vec<Option<u8>>,
    pub probability: f64,
    /// Unnormalized: its squared norm is `probability`.
    pub state: StateVec,
    pub trace: Vec<TraceEntry>,
}

impl Branch {
    pub fn outcome_string(&self) -> String {
        self.trace.iter().map(|t| char::from(b'0' + t.outcome)).collect()
    }

    pub fn trace_jsonl(&self) -> String {
        self.trace.iter().map(|t| serde_json::to_string(t).unwrap() + "\n").collect()
    }
}

/// Decide whether to keep exploring after `qubit` gave `bit`, given the record so far.
pub type Filter<'a> = &'a dyn Fn(u32, u8, &[Option<u8>]) -> bool;

/// Run `sched` on the graph's state. Exhaustive mode returns every branch above
/// the pruning threshold; sample mode one seeded trajectory.
pub fn run_schedule(g: &ResourceGraph, sched: &MeasurementSchedule, policy: Policy, cfg: &RunConfig) -> Result<Vec<Branch>> {
    run_schedule_filtered(g, sched, policy, cfg, &|_, _, _| true)
}

/// As [`run_schedule`], exploring only branches accepted by `keep`.
pub fn run_schedule_filtered(
    g: &ResourceGraph,
    sched: &MeasurementSchedule,
    policy: Policy,
    cfg: &RunConfig,
    keep: Filter,
) -> Result<Vec<Branch>> {
    sched.validate(g)?;
    let state = build_wgs(g, cfg.qubit_cap)?;
    let order: Vec<(usize, &wgs_core::graph::ScheduledMeasurement)> =
        sched.steps.iter().enumerate().flat_map(|(s, st)| st.iter().map(move |m| (s, m))).collect();
    let root = Branch { outcomes: vec![None; g.num_qubits()], probability: 1.0, state, trace: Vec::new() };
    match policy {
        Policy::Exhaustive => {
            let mut out = Vec::new();
            dfs(g, &order, 0, root, cfg, keep, &mut out)?;
            Ok(out)
        }
        Policy::Sample(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut b = root;
            for (i, &(step, m)) in order.iter().enumerate() {
                let basis = m.basis.resolve(g.params.phi, &b.outcomes)?;
                let kids = [0u8, 1].map(|o| b.state.project(m.qubit, &basis.ket(o as usize)));
                let [k0, k1] = kids;
                let (k0, k1) = (k0?, k1?);
                let p0 = k0.norm_sqr() / b.state.norm_sqr();
                let outcome = u8::from(rng.random::<f64>() >= p0);
                let chosen = if outcome == 0 { k0 } else { k1 };
                let p = chosen.norm_sqr();
                b.trace.push(TraceEntry { step, qubit: m.qubit, basis: basis.label, outcome, probability: p / b.probability });
                b.outcomes[m.qubit as usize] = Some(outcome);
                b.probability = p;
                b.state = chosen;
                if p == 0.0 {
                    return Err(OracleError::Degenerate(i));
                }
            }
            Ok(vec![b])
        }
    }
}

fn dfs(
    g: &ResourceGraph,
    order: &[(usize, &wgs_core::graph::ScheduledMeasurement)],
    i: usize,
    b: Branch,
    cfg: &RunConfig,
    keep: Filter,
    out: &mut Vec<Branch>,
) -> Result<()> {
    if i == order.len() {
        if out.len() >= cfg.max_branches {
            return Err(OracleError::BranchExplosion(cfg.max_branches));
        }
        out.push(b);
        return Ok(());
    }
    let (step, m) = order[i];
    let basis = m.basis.resolve(g.params.phi, &b.outcomes)?;
    for outcome in [0u8, 1] {
        let mut rec = b.outcomes.clone();
        rec[m.qubit as usize] = Some(outcome);
        if !keep(m.qubit, outcome, &rec) {
            continue;
        }
        let st = b.state.project(m.qubit, &basis.ket(outcome as usize))?;
        let p = st.norm_sqr();
        if p < cfg.prune {
            continue;
        }
        let mut trace = b.trace.clone();
        trace.push(TraceEntry { step, qubit: m.qubit, basis: basis.label, outcome, probability: p / b.probability });
        dfs(g, order, i + 1, Branch { outcomes: rec, probability: p, state: st, trace }, cfg, keep, out)?;
    }
    Ok(())
}

/// The diagonal Kraus operator a branch applied to two targets prepared in |+⟩|+⟩:
/// its entries are 2× the unnormalized amplitudes, ordered (t_l, t_r).
pub fn extract_kraus(b: &Branch, t_l: u32, t_r: u32) -> Result<DiagOp2> {
    let residue: Vec<u32> = b.state.labels.iter().copied().filter(|&l| l != t_l && l != t_r).collect();
    if !residue.is_empty() || b.state.labels.len() != 2 {
        return Err(OracleError::NonTargetResidue(residue));
    }
    let s = b.state.permuted(&[t_l, t_r])?;
    Ok(DiagOp2::new([s.amps[0] * 2.0, s.amps[1] * 2.0, s.amps[2] * 2.0, s.amps[3] * 2.0]))
}
