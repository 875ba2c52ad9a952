use std::f64::consts::PI;

use proptest::prelude::*;
use wgs_cli::config::{Config, FileConfig, Overrides};
use wgs_cli::{parse_phi_frac, Exit};

#[test]
fn phi_frac_examples() {
    assert_eq!(parse_phi_frac("1/1").unwrap(), PI);
    assert_eq!(parse_phi_frac("1").unwrap(), PI);
    assert_eq!(parse_phi_frac("-1/4").unwrap(), -PI / 4.0);
    assert!(matches!(parse_phi_frac("1/0"), Err(Exit::Usage(_))));
    assert!(matches!(parse_phi_frac("pi/2"), Err(Exit::Usage(_))));
}

#[test]
fn flags_override_file() {
    let file = FileConfig { k: Some(5), m: Some(6), seed: Some(9), phi_frac: Some("1/2".into()), ..Default::default() };
    let flags = Overrides { k: Some(2), ..Default::default() };
    let c = Config::resolve(&flags, &file).unwrap();
    assert_eq!((c.k, c.m, c.seed), (2, 6, 9));
    assert_eq!(c.phi, PI / 2.0);
    let flags = Overrides { phi: Some(1.0), ..Default::default() };
    assert_eq!(Config::resolve(&flags, &file).unwrap().phi, 1.0);
}

#[test]
fn invalid_params_are_usage_errors() {
    let f = FileConfig::default();
    for o in [
        Overrides { n: Some(1), ..Default::default() },
        Overrides { delta: Some(1.5), ..Default::default() },
        Overrides { trials: Some(0), ..Default::default() },
        Overrides { phi: Some(4.0), ..Default::default() },
        Overrides { phi: Some(0.0), ..Default::default() },
    ] {
        assert!(matches!(Config::resolve(&o, &f), Err(Exit::Usage(_))), "{o:?}");
    }
}

proptest! {
    #[test]
    fn phi_frac_matches_ratio(p in -64i64..64, q in 1i64..64) {
        let x = parse_phi_frac(&format!("{p}/{q}")).unwrap();
        prop_assert!((x - PI * p as f64 / q as f64).abs() < 1e-15);
    }
}
