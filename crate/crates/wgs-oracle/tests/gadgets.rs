use std::f64::consts::PI;

use wgs_core::basis::{StepObservable, WeightedBasis};
use wgs_core::gadgets::{alt_bases, alt_cz_gadget, cz_bases, cz_gadget, mep_bases, mep_gadget, p_cz, p_cz_alt, p_p};
use wgs_core::graph::{build_custom, BasisSpec, MeasurementSchedule, ResourceGraph, Role, ScheduledMeasurement};
use wgs_core::mbc::{instrument, Instrument, Outcome};
use wgs_core::operator::cp;
use wgs_oracle::{extract_kraus, run_schedule, Branch, Policy, RunConfig};

/// Path 0 − 2 − 3 − … − 1 with targets 0 and 1.
fn chain(len: usize, phi: f64) -> ResourceGraph {
    let mut roles = vec![Role::Target, Role::Target];
    roles.extend(std::iter::repeat_n(Role::Ancilla, len));
    let mut path = vec![0u32];
    path.extend(2..2 + len as u32);
    path.push(1);
    let edges: Vec<(u32, u32)> = path.windows(2).map(|w| (w[0], w[1])).collect();
    build_custom(&roles, &edges, phi).unwrap()
}

fn fixed_schedule(bases: &[WeightedBasis]) -> MeasurementSchedule {
    let step = bases
        .iter()
        .enumerate()
        .map(|(i, b)| ScheduledMeasurement { qubit: 2 + i as u32, basis: BasisSpec::Explicit(*b) })
        .collect();
    MeasurementSchedule { steps: vec![step] }
}

fn bits(b: &Branch) -> Vec<i64> {
    b.outcomes[2..].iter().map(|o| o.unwrap() as i64).collect()
}

/// Every oracle branch equals the matching instrument branch entrywise.
fn check_against(ins: &Instrument, branches: &[Branch], tol: f64) {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    assert!((total - 1.0).abs() < 1e-9, "total {total}");
    for b in branches {
        let k = extract_kraus(b, 0, 1).unwrap();
        let want = ins.branches.iter().find(|x| x.register == bits(b)).unwrap();
        assert!(k.max_diff(&want.kraus) < tol, "{:?}", bits(b));
    }
}

fn success_probability(ins: &Instrument, branches: &[Branch]) -> f64 {
    branches
        .iter()
        .filter(|b| ins.branches.iter().any(|x| x.register == bits(b) && x.outcome == Outcome::Success))
        .map(|b| b.probability)
        .sum()
}

fn phi_grid() -> Vec<f64> {
    (1..=9).map(|i| PI / 8.0 + (i - 1) as f64 * (PI - PI / 8.0) / 8.0).collect()
}

#[test]
fn three_qubit_chain_matches_instrument() {
    for phi in [PI, 1.3, -0.6] {
        let g = chain(1, phi);
        let basis = WeightedBasis::from_vw(0.4, 0.9, wgs_core::basis::BasisLabel::Custom(0.0));
        let out = run_schedule(&g, &fixed_schedule(&[basis]), Policy::Exhaustive, &RunConfig::default()).unwrap();
        let ins = instrument(&cp(phi), &cp(phi), &basis);
        assert_eq!(out.len(), 2);
        for b in &out {
            let want = &ins.branches[b.outcomes[2].unwrap() as usize].kraus;
            assert!(extract_kraus(b, 0, 1).unwrap().max_diff(want) < 1e-12);
        }
    }
}

#[test]
fn cz_gadget_oracle() {
    for phi in phi_grid().into_iter().chain([-1.1]) {
        for sign in [1i8, -1] {
            let ins = cz_gadget(sign, phi).unwrap();
            let out = run_schedule(&chain(3, phi), &fixed_schedule(&cz_bases(sign, phi)), Policy::Exhaustive, &RunConfig::default())
                .unwrap();
            check_against(&ins, &out, 1e-9);
            assert!((success_probability(&ins, &out) - p_cz(phi)).abs() < 1e-9);
        }
    }
}

#[test]
fn alt_cz_gadget_oracle() {
    for phi in phi_grid() {
        let ins = alt_cz_gadget(phi).unwrap();
        let out = run_schedule(&chain(4, phi), &fixed_schedule(&alt_bases(phi)), Policy::Exhaustive, &RunConfig::default()).unwrap();
        check_against(&ins, &out, 1e-9);
        assert!((success_probability(&ins, &out) - p_cz_alt(phi)).abs() < 1e-9);
    }
}

#[test]
fn mep_gadget_oracle() {
    for phi in phi_grid() {
        let g = chain(5, phi);
        let b0 = mep_bases(phi, 0);
        let mut steps = vec![(0..4)
            .map(|i| ScheduledMeasurement { qubit: 2 + i as u32, basis: BasisSpec::Explicit(b0[i]) })
            .collect::<Vec<_>>()];
        steps.push(vec![ScheduledMeasurement { qubit: 6, basis: BasisSpec::MepLast { center: 4 } }]);
        let out = run_schedule(&g, &MeasurementSchedule { steps }, Policy::Exhaustive, &RunConfig::default()).unwrap();
        let ins = mep_gadget(phi).unwrap();
        check_against(&ins, &out, 1e-9);
        assert!((success_probability(&ins, &out) - p_p(phi)).abs() < 1e-9);
    }
}

#[test]
fn values_at_pi() {
    let ins = cz_gadget(1, PI).unwrap();
    let out = run_schedule(&chain(3, PI), &fixed_schedule(&cz_bases(1, PI)), Policy::Exhaustive, &RunConfig::default()).unwrap();
    assert!((success_probability(&ins, &out) - 0.125).abs() < 1e-12);
    let ins = alt_cz_gadget(PI).unwrap();
    let out = run_schedule(&chain(4, PI), &fixed_schedule(&alt_bases(PI)), Policy::Exhaustive, &RunConfig::default()).unwrap();
    assert!((success_probability(&ins, &out) - 1.0 / 64.0).abs() < 1e-12);
}

#[test]
fn step_observable_schedule_matches_explicit() {
    let phi = 0.8;
    let g = chain(3, phi);
    let obs = [StepObservable::XEta(-1, 1), StepObservable::Y(1), StepObservable::XEta(-1, -1)];
    let step = obs.iter().enumerate().map(|(i, o)| ScheduledMeasurement { qubit: 2 + i as u32, basis: BasisSpec::Fixed(*o) }).collect();
    let a = run_schedule(&g, &MeasurementSchedule { steps: vec![step] }, Policy::Exhaustive, &RunConfig::default()).unwrap();
    let b = run_schedule(&g, &fixed_schedule(&cz_bases(1, phi)), Policy::Exhaustive, &RunConfig::default()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.outcomes, y.outcomes);
        assert!(x.state.amps.iter().zip(&y.state.amps).all(|(p, q)| (p - q).norm() < 1e-15));
    }
}
