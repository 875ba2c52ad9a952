use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wgs_cli::config::{Config, FileConfig, Overrides};
use wgs_cli::report::{bounds_report, compose_report, export, lattice_graph, GraphFormat};
use wgs_cli::suites::run_suite;
use wgs_cli::{parse_phi_frac, CliResult, Exit};

/// Weighted-graph-state gadgets: composition, verification, graphs, sweeps, bounds.
#[derive(Parser, Debug)]
#[command(name = "wgs", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with default parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Edge weight in radians.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Edge weight as p/q, meaning pπ/q.
    #[arg(long, allow_hyphen_values = true)]
    phi_frac: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Defaults to WGS_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    qubit_cap: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Random triples for the composition check.
    #[arg(long)]
    samples: Option<usize>,
    /// Largest accepted |z| for Monte Carlo checks.
    #[arg(long)]
    z_gate: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            phi: self.phi,
            phi_frac: self.phi_frac.clone(),
            n: self.n,
            k: self.k,
            m: self.m,
            delta: self.delta,
            trials: self.trials,
            seed: self.seed,
            qubit_cap: self.qubit_cap,
            tolerance: self.tolerance,
            samples: self.samples,
            z_gate: self.z_gate,
            out: self.out.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form composition of CP(phi1), CP(phi2) at theta against contraction.
    Compose {
        #[arg(long, allow_hyphen_values = true)]
        phi1: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi2: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run a verification suite: mbc, gadgets, nd, lattice, line, mc, bounds, all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Export the n×n lattice resource graph.
    Graph {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo sweep over (phi, k, m) grids as CSV.
    Sweep {
        /// Comma-separated weights in radians.
        #[arg(long = "phis", value_delimiter = ',', allow_hyphen_values = true)]
        phis: Vec<f64>,
        /// Comma-separated weights as p/q multiples of π.
        #[arg(long = "phi-fracs", value_delimiter = ',', allow_hyphen_values = true)]
        phi_fracs: Vec<String>,
        #[arg(long = "ks", value_delimiter = ',')]
        ks: Vec<u32>,
        #[arg(long = "ms", value_delimiter = ',')]
        ms: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// k_min, m_min, N and P(n, k_min, m_min) for a failure budget delta.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(common: &Common, file: &FileConfig) -> CliResult<Config> {
    Config::resolve(&common.overrides(), file)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Exit::Failure(format!("{}: {e}", p.display()))),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes()).and_then(|_| s.flush()).map_err(|e| Exit::Failure(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Exit::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Exit::Failure(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.cmd {
        Cmd::Compose { phi1, phi2, theta, json, tolerance } => {
            let tol = tolerance.or(file.tolerance).unwrap_or(1e-9);
            let r = compose_report(phi1, phi2, theta)?;
            emit(&None, &if json { r.json() + "\n" } else { r.text() })?;
            if r.max_deviation >= tol {
                return Err(Exit::Failure(format!("deviation {:.3e} exceeds {tol:.0e}", r.max_deviation)));
            }
            Ok(())
        }
        Cmd::Verify { suite, common } => {
            let cfg = resolve(&common, &file)?;
            let checks = run_suite(&suite, &cfg)?;
            let text: String = checks.iter().map(|c| c.line() + "\n").collect();
            emit(&cfg.out, &text)?;
            match checks.iter().find(|c| !c.pass) {
                Some(c) => Err(Exit::Failure(format!("check {:?} failed", c.name))),
                None => Ok(()),
            }
        }
        Cmd::Graph { format, common } => {
            let cfg = resolve(&common, &file)?;
            let g = lattice_graph(cfg.n, cfg.k, cfg.m, cfg.phi)?;
            let f = match format {
                Format::Json => GraphFormat::Json,
                Format::Dot => GraphFormat::Dot,
            };
            emit(&cfg.out, &export(&g, f))
        }
        Cmd::Sweep { phis, phi_fracs, ks, ms, common } => {
            let cfg = resolve(&common, &file)?;
            let mut grid = phis;
            for f in &phi_fracs {
                grid.push(parse_phi_frac(f)?);
            }
            if grid.is_empty() {
                grid.push(cfg.phi);
            }
            for &p in &grid {
                Config { phi: p, ..cfg.clone() }.validate()?;
            }
            let ks = if ks.is_empty() { vec![cfg.k] } else { ks };
            let ms = if ms.is_empty() { vec![cfg.m] } else { ms };
            if ks.iter().chain(&ms).any(|&x| x == 0) {
                return Err(Exit::Usage("k and m must be at least 1".into()));
            }
            let rows = wgs_montecarlo::sweep(&grid, &ks, &ms, cfg.n, cfg.trials, cfg.seed)?;
            let mut buf = Vec::new();
            wgs_montecarlo::write_csv(&rows, &mut buf)?;
            emit(&cfg.out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            match rows.iter().find(|r| !(r.z.abs() < cfg.z_gate)) {
                Some(r) => Err(Exit::Failure(format!("|z| = {:.3} exceeds {} at phi={} k={} m={}", r.z.abs(), cfg.z_gate, r.phi, r.k, r.m))),
                None => Ok(()),
            }
        }
        Cmd::Bounds { common } => {
            let cfg = resolve(&common, &file)?;
            let r = bounds_report(cfg.phi, cfg.n, cfg.delta);
            emit(&cfg.out, &r.text())?;
            if !r.holds {
                return Err(Exit::Failure(format!("P = {} is below 1 - delta", r.p)));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgs: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
