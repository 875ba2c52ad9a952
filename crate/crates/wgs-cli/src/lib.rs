//! Library side of the `wgs` binary: flag resolution, reports and verification suites.

pub mod config;
pub mod report;
pub mod suites;

use std::f64::consts::PI;
use std::fmt;

/// How a command ended when it did not succeed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exit {
    /// Bad flags or parameters (status 2).
    Usage(String),
    /// A check or computation failed (status 1).
    Failure(String),
}

impl Exit {
    pub fn code(&self) -> i32 {
        match self {
            Exit::Usage(_) => 2,
            Exit::Failure(_) => 1,
        }
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exit::Usage(m) => write!(f, "usage error: {m}"),
            Exit::Failure(m) => write!(f, "failed: {m}"),
        }
    }
}

impl From<wgs_core::WgsError> for Exit {
    fn from(e: wgs_core::WgsError) -> Self {
        match e {
            wgs_core::WgsError::SingularAngle { .. } => Exit::Failure(format!("theta is in the excluded set |theta| = |phi_+| or |phi_-|: {e}")),
            wgs_core::WgsError::NotRepresentable => Exit::Failure(e.to_string()),
            _ => Exit::Usage(e.to_string()),
        }
    }
}

impl From<wgs_montecarlo::McError> for Exit {
    fn from(e: wgs_montecarlo::McError) -> Self {
        match e {
            wgs_montecarlo::McError::Core(c) => c.into(),
            wgs_montecarlo::McError::Io(_) | wgs_montecarlo::McError::Csv(_) => Exit::Failure(e.to_string()),
            _ => Exit::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Exit>;

/// `p/q` (or an integer `p`) as the angle pπ/q.
pub fn parse_phi_frac(s: &str) -> CliResult<f64> {
    let bad = || Exit::Usage(format!("--phi-frac expects p/q, got {s:?}"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(PI * p as f64 / q as f64)
}
