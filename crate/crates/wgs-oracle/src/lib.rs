//! Brute-force state-vector oracle.
//!
//! Builds weighted graph states by phase counting, measures qubits one at a
//! time (removing them), and reads off the diagonal Kraus operators that
//! schedules leave on pairs of target qubits.

pub mod run;
pub mod state;

use thiserror::Error;

pub use run::{extract_kraus, run_schedule, run_schedule_filtered, Branch, Policy, RunConfig, TraceEntry};
pub use state::{build_wgs, build_wgs_dense, cluster_state, fidelity, graph_state, BranchRecord, StateVec, DEFAULT_QUBIT_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{qubits} qubits exceed the cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },
    #[error("qubit {0} is not present")]
    QubitAbsent(u32),
    #[error("more than {0} branches")]
    BranchExplosion(usize),
    #[error("unmeasured non-target qubits remain: {0:?}")]
    NonTargetResidue(Vec<u32>),
    #[error("{0} amplitudes do not match {1} qubits")]
    Shape(usize, usize),
    #[error("sampled a zero-probability outcome at measurement {0}")]
    Degenerate(usize),
    #[error(transparent)]
    Core(#[from] wgs_core::WgsError),
}

pub type Result<T> = std::result::Result<T, OracleError>;
