//! Run parameters: flags over an optional JSON config file over defaults.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Deserialize;

use crate::{parse_phi_frac, CliResult, Exit};

/// Values from `--config`. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub phi: Option<f64>,
    pub phi_frac: Option<String>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub qubit_cap: Option<usize>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub z_gate: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Exit::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&s).map_err(|e| Exit::Usage(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub phi: f64,
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub qubit_cap: usize,
    pub tolerance: f64,
    /// Random triples in the composition check.
    pub samples: usize,
    pub z_gate: f64,
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            phi: PI,
            n: 2,
            k: 3,
            m: 3,
            delta: 0.1,
            trials: 100_000,
            seed: 0,
            qubit_cap: wgs_oracle::DEFAULT_QUBIT_CAP,
            tolerance: 1e-9,
            samples: 10_000,
            z_gate: 4.0,
            out: None,
        }
    }
}

/// Flag values as parsed; `None` means not given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub phi: Option<f64>,
    pub phi_frac: Option<String>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub qubit_cap: Option<usize>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub z_gate: Option<f64>,
    pub out: Option<PathBuf>,
}

fn angle(value: Option<f64>, frac: Option<&str>) -> CliResult<Option<f64>> {
    match (value, frac) {
        (Some(_), Some(_)) => Err(Exit::Usage("give --phi or --phi-frac, not both".into())),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(f)) => parse_phi_frac(f).map(Some),
        (None, None) => Ok(None),
    }
}

/// The seed default: `WGS_SEED` when set.
pub fn env_seed() -> CliResult<Option<u64>> {
    match std::env::var("WGS_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Exit::Usage(format!("WGS_SEED is not an integer: {s:?}"))),
        Err(_) => Ok(None),
    }
}

impl Config {
    /// Flags, then the config file, then `WGS_SEED` for the seed, then defaults.
    pub fn resolve(flags: &Overrides, file: &FileConfig) -> CliResult<Config> {
        let d = Config::default();
        let phi = match angle(flags.phi, flags.phi_frac.as_deref())? {
            Some(p) => p,
            None => angle(file.phi, file.phi_frac.as_deref())?.unwrap_or(d.phi),
        };
        let seed = match flags.seed.or(file.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(d.seed),
        };
        let c = Config {
            phi,
            n: flags.n.or(file.n).unwrap_or(d.n),
            k: flags.k.or(file.k).unwrap_or(d.k),
            m: flags.m.or(file.m).unwrap_or(d.m),
            delta: flags.delta.or(file.delta).unwrap_or(d.delta),
            trials: flags.trials.or(file.trials).unwrap_or(d.trials),
            seed,
            qubit_cap: flags.qubit_cap.or(file.qubit_cap).unwrap_or(d.qubit_cap),
            tolerance: flags.tolerance.or(file.tolerance).unwrap_or(d.tolerance),
            samples: flags.samples.or(file.samples).unwrap_or(d.samples),
            z_gate: flags.z_gate.or(file.z_gate).unwrap_or(d.z_gate),
            out: flags.out.clone().or_else(|| file.out.clone()),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(Exit::Usage(m));
        if !self.phi.is_finite() || self.phi == 0.0 || self.phi.abs() > std::f64::consts::PI + 1e-12 {
            return bad(format!("phi={} must be nonzero and in [-pi, pi]", self.phi));
        }
        if self.n < 2 {
            return bad(format!("n={} must be at least 2", self.n));
        }
        if self.k == 0 || self.m == 0 {
            return bad(format!("k={} and m={} must be at least 1", self.k, self.m));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta={} must lie in (0, 1)", self.delta));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.tolerance > 0.0) || !(self.z_gate > 0.0) {
            return bad("tolerance and z gate must be positive".into());
        }
        Ok(())
    }
}
