use std::f64::consts::{LN_2, TAU};

use sympcalc_wasm::{divergence_curve, flow_grid_lines, hodge_split, shear_profile};

#[test]
fn profile_vanishes_near_zero_and_closes() {
    let h = shear_profile("reciprocal", 8, 400).unwrap();
    assert_eq!(h.len(), 400);
    assert_eq!(h[0], 0.0);
    assert!(h[399].abs() < 1e-3);
    assert!(h.iter().all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn divergence_curve_grows_by_doubling_increment() {
    let c = divergence_curve("reciprocal", 8).unwrap();
    assert_eq!(c.len(), 16);
    for k in (4..c.len()).step_by(2) {
        assert!((c[k + 1] - c[k - 1] - TAU * LN_2).abs() < 1e-6);
    }
}

#[test]
fn zero_speed_flow_returns_straight_lines() {
    let d = flow_grid_lines(3, 0.0, 1.0, 2, 5).unwrap();
    assert_eq!(d.len(), 4 * (1 + 2 * 5));
    assert_eq!(d[0], 5.0);
    for s in 0..5 {
        assert!((d[2 + 2 * s] - 0.0).abs() < 1e-12);
    }
}

#[test]
fn split_recovers_class() {
    let out = hodge_split(0.7, -0.2, 1.5, 32).unwrap();
    assert!((out[0] - 0.7).abs() < 1e-10);
    assert!((out[1] + 0.2).abs() < 1e-10);
    assert_eq!(out.len(), 2 + 32 * 32);
}
