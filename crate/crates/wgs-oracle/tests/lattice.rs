use std::f64::consts::PI;

use num_complex::Complex64;
use wgs_core::gadgets::{cz_locals, d_k, e_m, near_det_cz, near_det_cz_shape, p_cz};
use wgs_core::graph::{build_decorated_lattice, build_line, edge_registers, edge_success, schedule, ResourceGraph};
use wgs_core::operator::SingleQubitDiag;
use wgs_oracle::{cluster_state, extract_kraus, fidelity, run_schedule, run_schedule_filtered, Branch, Policy, RunConfig};

fn inverse(s: SingleQubitDiag) -> SingleQubitDiag {
    SingleQubitDiag::new(s.d[0].inv(), s.d[1].inv())
}

/// Undo the per-edge local rotations of every heralded CZ.
fn frame_correct(g: &ResourceGraph, b: &Branch) -> wgs_oracle::StateVec {
    let (l, r) = cz_locals(g.params.phi);
    let mut s = b.state.clone();
    for e in &g.layout {
        s.apply_diag(e.t_l, &inverse(l)).unwrap();
        s.apply_diag(e.t_r, &inverse(r)).unwrap();
    }
    s
}

#[test]
fn decorated_lattice_end_to_end() {
    for phi in [PI, PI / 2.0, 1.0, -2.2] {
        let g = build_decorated_lattice(2, phi).unwrap();
        assert_eq!(g.num_qubits(), 16);
        let sched = schedule(&g).unwrap();
        let all = run_schedule(&g, &sched, Policy::Exhaustive, &RunConfig::default()).unwrap();
        let total: f64 = all.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        let succ: Vec<&Branch> = all.iter().filter(|b| (0..g.layout.len()).all(|e| edge_success(&g, e, &b.outcomes).unwrap())).collect();
        assert_eq!(succ.len(), 1);
        assert!((succ[0].probability - p_cz(phi).powi(4)).abs() < 1e-9);
        let f = fidelity(&frame_correct(&g, succ[0]), &cluster_state(2).unwrap()).unwrap();
        assert!(f >= 1.0 - 1e-9, "phi {phi}: fidelity {f}");
    }
}

#[test]
fn decorated_success_only_filter() {
    let g = build_decorated_lattice(2, 0.7).unwrap();
    let keep = |_: u32, bit: u8, _: &[Option<u8>]| bit == 0;
    let out = run_schedule_filtered(&g, &schedule(&g).unwrap(), Policy::Exhaustive, &RunConfig::default(), &keep).unwrap();
    assert_eq!(out.len(), 1);
    assert!((out[0].probability - p_cz(0.7).powi(4)).abs() < 1e-12);
}

/// Keeps only records that can still herald success on a k = 1 line.
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

#[test]
fn single_line_k1_matches_near_deterministic_cz() {
    for phi in [PI, PI / 2.0] {
        let g = build_line(1, phi).unwrap();
        assert_eq!(g.num_qubits(), 21);
        let sched = schedule(&g).unwrap();
        let keep = line_filter(&g);
        let out = run_schedule_filtered(&g, &sched, Policy::Exhaustive, &RunConfig::default(), &keep).unwrap();
        let en = near_det_cz(phi, 1, 1).unwrap();
        let (t_l, t_r) = (g.layout[0].t_l, g.layout[0].t_r);
        let mut total = 0.0;
        let mut grouped: std::collections::BTreeMap<String, (wgs_core::gadgets::EdgeRegisters, [f64; 4])> = Default::default();
        for b in &out {
            assert!(edge_success(&g, 0, &b.outcomes).unwrap());
            let regs = edge_registers(&g, 0, &b.outcomes).unwrap();
            let k = extract_kraus(b, t_l, t_r).unwrap();
            assert!(k.proportional_to(&near_det_cz_shape(phi, &regs), 1e-9), "{regs:?}");
            let slot = grouped.entry(format!("{regs:?}")).or_insert((regs, [0.0; 4]));
            for (x, y) in slot.1.iter_mut().zip(k.weights()) {
                *x += y;
            }
            total += b.probability;
        }
        // records sharing a register tuple add up to the enumerated class weight
        assert_eq!(grouped.len(), en.success.len());
        for (regs, w) in grouped.values() {
            let pred = en.success.iter().find(|o| o.registers == *regs).expect("register tuple enumerated");
            for (x, y) in w.iter().zip(pred.kraus.weights()) {
                assert!((x - y).abs() < 1e-9 * y.max(1e-6), "{regs:?}");
            }
        }
        let want = d_k(phi, 1).powi(2) * e_m(phi, 1);
        assert!((total - want).abs() < 1e-9 * want.max(1e-3), "{total} vs {want}");
    }
}

#[test]
fn sampled_trajectory_is_seeded() {
    let g = build_decorated_lattice(2, 1.2).unwrap();
    let s = schedule(&g).unwrap();
    let a = run_schedule(&g, &s, Policy::Sample(7), &RunConfig::default()).unwrap();
    let b = run_schedule(&g, &s, Policy::Sample(7), &RunConfig::default()).unwrap();
    assert_eq!(a[0].outcomes, b[0].outcomes);
    assert_eq!(a[0].trace.len(), 12);
    assert!(a[0].trace_jsonl().lines().count() == 12);
    let norm: f64 = a[0].state.norm_sqr();
    assert!((norm - a[0].probability).abs() < 1e-15);
    let _ = Complex64::new(0.0, 0.0);
}
