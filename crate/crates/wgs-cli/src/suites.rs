//! Verification suites behind `wgs verify`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgs_core::basis::{BasisLabel, PairAngles, WeightedBasis};
use wgs_core::gadgets::{
    alt_bases, alt_cz_gadget, cz_bases, cz_gadget, cz_locals, d_k, e_m, k_min, m_min, mep_bases, mep_gadget, near_det_cz,
    near_det_cz_shape, p_at, p_cz, p_cz_alt, p_p,
};
use wgs_core::graph::{
    build_custom, build_decorated_lattice, build_line, edge_registers, edge_success, schedule, BasisSpec, MeasurementSchedule,
    ResourceGraph, Role, ScheduledMeasurement,
};
use wgs_core::mbc::{compose, compose_closed_form, pair_basis, Instrument, Outcome};
use wgs_core::operator::{cz, equal_up_to_local_diag, CanonicalForm, ComplexAngle, SingleQubitDiag};
use wgs_core::scalar::wrap_angle;
use wgs_oracle::{cluster_state, extract_kraus, fidelity, run_schedule, run_schedule_filtered, Branch, Policy, RunConfig};

use crate::config::Config;
use crate::{CliResult, Exit};

pub const SUITES: [&str; 8] = ["mbc", "gadgets", "nd", "lattice", "line", "mc", "bounds", "all"];

/// One named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Run the named suite. Unknown names are usage errors.
pub fn run_suite(name: &str, cfg: &Config) -> CliResult<Vec<Check>> {
    match name {
        "mbc" => Ok(mbc(cfg)),
        "gadgets" => gadgets(cfg),
        "nd" => nd(cfg),
        "lattice" => lattice(cfg),
        "line" => line(cfg),
        "mc" => mc(cfg),
        "bounds" => Ok(bounds(cfg)),
        "all" => {
            let mut out = Vec::new();
            for s in &SUITES[..SUITES.len() - 1] {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
        _ => Err(Exit::Usage(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", ")))),
    }
}

fn oracle_cfg(cfg: &Config) -> RunConfig {
    RunConfig { qubit_cap: cfg.qubit_cap, ..RunConfig::default() }
}

fn oracle_err(e: wgs_oracle::OracleError) -> Exit {
    Exit::Failure(format!("oracle: {e}"))
}

/// Random CP-type pairs with random complex locals, closed form against contraction.
pub fn mbc(cfg: &Config) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = Instant::now();
    let (mut worst, mut done) = (0.0f64, 0usize);
    let local = |rng: &mut ChaCha8Rng| ComplexAngle::new(Complex64::new(rng.random_range(-PI..PI), rng.random_range(-0.5..0.5)));
    while done < cfg.samples {
        let (p1, p2, th) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let a = PairAngles::new(p1, p2);
        if p1.abs() < 1e-3 || p2.abs() < 1e-3 || (th.abs() - a.phi_plus.abs()).abs() < 1e-3 || (th.abs() - a.phi_minus.abs()).abs() < 1e-3 {
            continue;
        }
        let mk = |phi: f64, ca: ComplexAngle, cb: ComplexAngle, c: Complex64| CanonicalForm { c, c_a: ca, c_b: cb, phi, theta: PI / 2.0 };
        let f1 = mk(p1, local(&mut rng), local(&mut rng), Complex64::from_polar(1.0, rng.random_range(-PI..PI)));
        let f2 = mk(p2, local(&mut rng), local(&mut rng), Complex64::from_polar(1.0, rng.random_range(-PI..PI)));
        let closed = match compose_closed_form(&f1, &f2, th) {
            Ok(c) => c.to_op(),
            Err(e) => return vec![Check::new("mbc closed form", false, format!("({p1}, {p2}, {th}): {e}"))],
        };
        let b = pair_basis(&f1, &f2, th, BasisLabel::Custom(th));
        let direct = compose(&f1.to_op(), &f2.to_op(), &b.success);
        worst = worst.max(direct.max_diff(&closed));
        done += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    vec![Check::new(
        "mbc closed form",
        worst < cfg.tolerance,
        format!("{done} samples, max deviation {worst:.3e} (tol {:.0e}), {secs:.2} s", cfg.tolerance),
    )]
}

/// Path 0 − 2 − 3 − … − 1 with targets 0 and 1.
fn chain(len: usize, phi: f64) -> CliResult<ResourceGraph> {
    let mut roles = vec![Role::Target, Role::Target];
    roles.extend(std::iter::repeat_n(Role::Ancilla, len));
    let mut path = vec![0u32];
    path.extend(2..2 + len as u32);
    path.push(1);
    let edges: Vec<(u32, u32)> = path.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(build_custom(&roles, &edges, phi)?)
}

fn explicit_step(bases: &[WeightedBasis], first: u32) -> Vec<ScheduledMeasurement> {
    bases
        .iter()
        .enumerate()
        .map(|(i, b)| ScheduledMeasurement { qubit: first + i as u32, basis: BasisSpec::Explicit(*b) })
        .collect()
}

fn bits(b: &Branch) -> Vec<i64> {
    b.outcomes[2..].iter().map(|o| o.map_or(-1, i64::from)).collect()
}

/// Oracle branches against an instrument: worst Kraus deviation and success probability.
fn compare(ins: &Instrument, branches: &[Branch]) -> CliResult<(f64, f64, Option<wgs_core::operator::DiagOp2>)> {
    let mut worst = 0.0f64;
    let mut succ = 0.0;
    let mut succ_kraus = None;
    for b in branches {
        let k = extract_kraus(b, 0, 1).map_err(oracle_err)?;
        let Some(want) = ins.branches.iter().find(|x| x.register == bits(b)) else {
            return Err(Exit::Failure(format!("oracle record {:?} has no instrument branch", bits(b))));
        };
        worst = worst.max(k.max_diff(&want.kraus));
        if want.outcome == Outcome::Success {
            succ += b.probability;
            succ_kraus = Some(k);
        }
    }
    Ok((worst, succ, succ_kraus))
}

/// Success Kraus against CZ: a local witness exists and matches (R_z((φ+π)/2) ⊗ R_z((φ−π)/2)).
fn locals_check(name: &str, k: &wgs_core::operator::DiagOp2, phi: f64, p: f64, tol: f64) -> Check {
    let Some(w) = equal_up_to_local_diag(k, &cz(), tol) else {
        return Check::new(name, false, "no local witness against CZ");
    };
    let (l, r) = cz_locals(phi);
    let exact = l.kron(&r).mul(&cz());
    let (c, dev) = k.proportionality(&exact);
    let angle_dev = |got: Complex64, want: f64| wrap_angle(got.re - want).abs().max(got.im.abs());
    let la = angle_dev(w.left_angle, (phi + PI) / 2.0);
    let ra = angle_dev(w.right_angle, (phi - PI) / 2.0);
    let worst = dev.max(la).max(ra).max((c.norm_sqr() - p).abs());
    Check::new(name, worst < tol, format!("locals R_z({:.6}) x R_z({:.6}), deviation {worst:.3e}", w.left_angle.re, w.right_angle.re))
}

fn unit_diag(x: &SingleQubitDiag) -> bool {
    (x.d[0].norm() - 1.0).abs() < 1e-9 && (x.d[1].norm() - 1.0).abs() < 1e-9
}

/// Oracle runs of the CZ±, alternative CZ and MEP gadgets at the configured φ.
pub fn gadgets(cfg: &Config) -> CliResult<Vec<Check>> {
    let phi = cfg.phi;
    let tol = cfg.tolerance;
    let rc = oracle_cfg(cfg);
    let mut out = Vec::new();
    for sign in [1i8, -1] {
        let name = if sign > 0 { "cz+" } else { "cz-" };
        let sched = MeasurementSchedule { steps: vec![explicit_step(&cz_bases(sign, phi), 2)] };
        let branches = run_schedule(&chain(3, phi)?, &sched, Policy::Exhaustive, &rc).map_err(oracle_err)?;
        let (worst, p, k) = compare(&cz_gadget(sign, phi)?, &branches)?;
        out.push(Check::new(format!("{name} branches"), worst < tol, format!("max Kraus deviation {worst:.3e}")));
        out.push(Check::new(format!("{name} probability"), (p - p_cz(phi)).abs() < tol, format!("oracle {p:.15}, formula {:.15}", p_cz(phi))));
        if let Some(k) = k {
            out.push(locals_check(&format!("{name} up to locals"), &k, phi, p_cz(phi), tol));
        }
    }
    let sched = MeasurementSchedule { steps: vec![explicit_step(&alt_bases(phi), 2)] };
    let branches = run_schedule(&chain(4, phi)?, &sched, Policy::Exhaustive, &rc).map_err(oracle_err)?;
    let (worst, p, k) = compare(&alt_cz_gadget(phi)?, &branches)?;
    out.push(Check::new("alt branches", worst < tol, format!("max Kraus deviation {worst:.3e}")));
    out.push(Check::new("alt probability", (p - p_cz_alt(phi)).abs() < tol, format!("oracle {p:.15}, formula {:.15}", p_cz_alt(phi))));
    if let Some(k) = k {
        out.push(locals_check("alt up to locals", &k, phi, p_cz_alt(phi), tol));
    }
    let b0 = mep_bases(phi, 0);
    let sched = MeasurementSchedule {
        steps: vec![
            explicit_step(&b0[..4], 2),
            vec![ScheduledMeasurement { qubit: 6, basis: BasisSpec::MepLast { center: 4 } }],
        ],
    };
    let branches = run_schedule(&chain(5, phi)?, &sched, Policy::Exhaustive, &rc).map_err(oracle_err)?;
    let (worst, p, _) = compare(&mep_gadget(phi)?, &branches)?;
    out.push(Check::new("mep branches", worst < tol, format!("max Kraus deviation {worst:.3e}")));
    out.push(Check::new("mep probability", (p - p_p(phi)).abs() < tol, format!("oracle {p:.15}, formula {:.15}", p_p(phi))));
    Ok(out)
}

/// Exhaustive near-deterministic enumeration for k, m up to min(configured, 3).
pub fn nd(cfg: &Config) -> CliResult<Vec<Check>> {
    let phi = cfg.phi;
    let mut out = Vec::new();
    for k in 1..=cfg.k.min(3) {
        for m in 1..=cfg.m.min(3) {
            let e = near_det_cz(phi, k as usize, m as usize)?;
            let (dk, em) = (d_k(phi, k), e_m(phi, m));
            let dk_dev = e.d_k_left.iter().chain(&e.d_k_right).map(|x| (x - dk).abs()).fold(0.0, f64::max);
            let em_dev = (e.e_m - em).abs().max(e.e_m_spread);
            let mut shape_dev = 0.0f64;
            let mut frame_ok = true;
            for o in &e.success {
                shape_dev = shape_dev.max(o.kraus.proportionality(&near_det_cz_shape(phi, &o.registers)).1);
                frame_ok &= o.registers.frame(phi).undo(&o.kraus).proportional_to(&cz(), cfg.tolerance);
                frame_ok &= unit_diag(&o.registers.frame(phi).left()) && unit_diag(&o.registers.frame(phi).right());
            }
            let tag = format!("nd k={k} m={m}");
            out.push(Check::new(format!("{tag} D_k"), dk_dev < 1e-10, format!("D_k {dk:.15}, deviation {dk_dev:.3e}")));
            out.push(Check::new(format!("{tag} E_m"), em_dev < 1e-10, format!("E_m {em:.15}, deviation {em_dev:.3e}")));
            out.push(Check::new(
                format!("{tag} Kraus"),
                shape_dev < cfg.tolerance && frame_ok,
                format!("{} register classes, shape deviation {shape_dev:.3e}, frame undo gives CZ: {frame_ok}", e.success.len()),
            ));
        }
    }
    Ok(out)
}

fn inverse(s: SingleQubitDiag) -> SingleQubitDiag {
    SingleQubitDiag::new(s.d[0].inv(), s.d[1].inv())
}

/// Decorated n×n lattice: success-conditioned, frame-corrected fidelity with the cluster state.
pub fn lattice(cfg: &Config) -> CliResult<Vec<Check>> {
    let phi = cfg.phi;
    let g = build_decorated_lattice(cfg.n, phi)?;
    let sched = schedule(&g)?;
    let keep = |_: u32, bit: u8, _: &[Option<u8>]| bit == 0;
    let out = run_schedule_filtered(&g, &sched, Policy::Exhaustive, &oracle_cfg(cfg), &keep).map_err(oracle_err)?;
    let mut succ: Vec<&Branch> = Vec::new();
    for b in &out {
        let mut ok = true;
        for e in 0..g.layout.len() {
            ok &= edge_success(&g, e, &b.outcomes)?;
        }
        if ok {
            succ.push(b);
        }
    }
    if succ.len() != 1 {
        return Ok(vec![Check::new("lattice success record", false, format!("{} success records", succ.len()))]);
    }
    let (l, r) = cz_locals(phi);
    let mut s = succ[0].state.clone();
    for e in &g.layout {
        s.apply_diag(e.t_l, &inverse(l)).map_err(oracle_err)?;
        s.apply_diag(e.t_r, &inverse(r)).map_err(oracle_err)?;
    }
    let f = fidelity(&s, &cluster_state(cfg.n).map_err(oracle_err)?).map_err(oracle_err)?;
    let want = p_cz(phi).powi(g.layout.len() as i32);
    let p = succ[0].probability;
    Ok(vec![
        Check::new("lattice fidelity", f >= 1.0 - cfg.tolerance, format!("{} qubits, fidelity {f:.15}", g.num_qubits())),
        Check::new("lattice probability", (p - want).abs() < cfg.tolerance, format!("oracle {p:.15e}, p_cz^{} {want:.15e}", g.layout.len())),
    ])
}

/// Records that can still herald success on a k = 1 line.
fn line_filter(g: &ResourceGraph) -> impl Fn(u32, u8, &[Option<u8>]) -> bool + '_ {
    let l = &g.layout[0].lines[0];
    let mut must_zero: Vec<u32> = l.cz[1..4].to_vec();
    let mut pairs = Vec::new();
    for p in l.left.iter().chain(&l.right) {
        must_zero.extend([p[1], p[2], p[4], p[5]]);
        pairs.push((p[0], p[6]));
    }
    move |q, bit, rec| {
        if must_zero.contains(&q) {
            return bit == 0;
        }
        for &(a, b) in &pairs {
            if q == b {
                return rec[a as usize] == Some(bit);
            }
        }
        true
    }
}

/// Single line with k = 1 (21 qubits) against the near-deterministic CZ prediction.
pub fn line(cfg: &Config) -> CliResult<Vec<Check>> {
    let phi = cfg.phi;
    let tol = cfg.tolerance;
    let g = build_line(1, phi)?;
    let sched = schedule(&g)?;
    let keep = line_filter(&g);
    let out = run_schedule_filtered(&g, &sched, Policy::Exhaustive, &oracle_cfg(cfg), &keep).map_err(oracle_err)?;
    let en = near_det_cz(phi, 1, 1)?;
    let (t_l, t_r) = (g.layout[0].t_l, g.layout[0].t_r);
    let mut total = 0.0;
    let mut shape_dev = 0.0f64;
    let mut grouped: BTreeMap<String, (wgs_core::gadgets::EdgeRegisters, [f64; 4])> = BTreeMap::new();
    for b in &out {
        if !edge_success(&g, 0, &b.outcomes)? {
            continue;
        }
        let regs = edge_registers(&g, 0, &b.outcomes)?;
        let k = extract_kraus(b, t_l, t_r).map_err(oracle_err)?;
        shape_dev = shape_dev.max(k.proportionality(&near_det_cz_shape(phi, &regs)).1);
        let slot = grouped.entry(format!("{regs:?}")).or_insert((regs, [0.0; 4]));
        for (x, y) in slot.1.iter_mut().zip(k.weights()) {
            *x += y;
        }
        total += b.probability;
    }
    let mut class_dev = 0.0f64;
    let mut missing = 0;
    for (regs, w) in grouped.values() {
        match en.success.iter().find(|o| o.registers == *regs) {
            Some(pred) => {
                for (x, y) in w.iter().zip(pred.kraus.weights()) {
                    class_dev = class_dev.max((x - y).abs());
                }
            }
            None => missing += 1,
        }
    }
    let want = d_k(phi, 1).powi(2) * e_m(phi, 1);
    Ok(vec![
        Check::new("line Kraus shapes", shape_dev < tol, format!("{} qubits, shape deviation {shape_dev:.3e}", g.num_qubits())),
        Check::new(
            "line register classes",
            missing == 0 && grouped.len() == en.success.len() && class_dev < tol,
            format!("{} classes, {missing} unmatched, weight deviation {class_dev:.3e}", grouped.len()),
        ),
        Check::new("line probability", (total - want).abs() < tol, format!("oracle {total:.15e}, D_1^2 E_1 {want:.15e}")),
    ])
}

/// Monte Carlo edge and protocol estimates against the analytic values.
pub fn mc(cfg: &Config) -> CliResult<Vec<Check>> {
    let (k, m) = (cfg.k as usize, cfg.m as usize);
    let e = wgs_montecarlo::estimate_edge(cfg.phi, k, m, cfg.trials, cfg.seed)?;
    let p = wgs_montecarlo::estimate_protocol(cfg.phi, cfg.n, k, m, cfg.trials, cfg.seed)?;
    let line = |r: &wgs_montecarlo::McReport| {
        format!("{} trials, estimate {:.6e}, analytic {:.6e}, z {:.3}", r.trials, r.estimate, r.analytic_value, r.z_score)
    };
    Ok(vec![
        Check::new(format!("mc edge k={k} m={m}"), e.z_score.abs() < cfg.z_gate, line(&e)),
        Check::new(format!("mc protocol n={} k={k} m={m}", cfg.n), p.z_score.abs() < cfg.z_gate, line(&p)),
    ])
}

/// P(n, k_min, m_min) ≥ 1 − δ.
pub fn bounds(cfg: &Config) -> Vec<Check> {
    let (k, m) = (k_min(cfg.phi, cfg.n, cfg.delta), m_min(cfg.phi, cfg.n, cfg.delta));
    let p = p_at(cfg.phi, cfg.n, k, m);
    vec![Check::new(
        "bounds",
        p >= 1.0 - cfg.delta,
        format!("k_min {k}, m_min {m}, P {p:.12} vs 1 - delta {:.12}", 1.0 - cfg.delta),
    )]
}

