//! Browser bindings for a few sympcalc operations.
//!
//! Every export returns a flat `Float64Array`; layouts are documented per
//! function. Errors surface as JS exceptions carrying the error message.

use std::f64::consts::{PI, TAU};

use sympcalc::experiments::{ProfileFamily, ShearProfileSpec};
use sympcalc::generators::{Generator, IntegratorConfig, Isotopy};
use sympcalc::hodge::{split, DEFAULT_CLOSED_TOL};
use sympcalc::torus::{GridSpec, Lift, OneFormField, AREA};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn family(name: &str) -> Result<ProfileFamily, JsError> {
    match name {
        "reciprocal" => Ok(ProfileFamily::Reciprocal),
        "log_reciprocal" => Ok(ProfileFamily::LogReciprocal),
        "constant" => Ok(ProfileFamily::Constant),
        other => Err(JsError::new(&format!("unknown family {other:?}"))),
    }
}

/// Samples `h_i` at `samples` evenly spaced points of `[0, 2π)`.
#[wasm_bindgen]
pub fn shear_profile(family_name: &str, i: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    let spec = ShearProfileSpec::new(family(family_name)?, i.max(1));
    let n = samples.max(2);
    Ok((0..n).map(|k| spec.eval(TAU * k as f64 / n as f64)).collect())
}

/// Closed-form `Δ̃(φ_i, dθ₁)` at basepoint `(0, π)` for `i = 2, 4, …, 2^max_pow`.
///
/// Layout: `[i₀, Δ̃₀, i₁, Δ̃₁, …]`.
#[wasm_bindgen]
pub fn divergence_curve(family_name: &str, max_pow: u32) -> Result<Vec<f64>, JsError> {
    let fam = family(family_name)?;
    let mut out = Vec::new();
    for p in 1..=max_pow.min(20) {
        let spec = ShearProfileSpec::new(fam, 1 << p);
        out.push((1u64 << p) as f64);
        out.push(TAU * spec.integral() - AREA * spec.eval(PI));
    }
    Ok(out)
}

/// Images of `lines` horizontal and `lines` vertical grid lines under the
/// time-`t` map of a random band-limited Hamiltonian flow.
///
/// Layout: `[count, x₀, y₀, x₁, y₁, …]` repeated per polyline, lifted
/// coordinates (not reduced mod 2π) so the lines stay continuous.
#[wasm_bindgen]
pub fn flow_grid_lines(seed: u64, max_speed: f64, t: f64, lines: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    let grid = GridSpec::new(32).map_err(js_err)?;
    let g = Generator::random_band_limited(grid, 8, seed, 2, max_speed);
    let iso = Isotopy::new(g, IntegratorConfig::accurate(1)).map_err(js_err)?;
    let t = t.clamp(0.0, 1.0);
    let lines = lines.clamp(1, 64);
    let samples = samples.clamp(2, 512);
    let mut out = Vec::new();
    for l in 0..lines {
        let c = TAU * l as f64 / lines as f64;
        for horizontal in [true, false] {
            out.push(samples as f64);
            for s in 0..samples {
                let u = TAU * s as f64 / (samples - 1) as f64;
                let p = if horizontal { Lift::new(u, c) } else { Lift::new(c, u) };
                let q = iso.flow(p, t).map_err(js_err)?;
                out.push(q.theta1);
                out.push(q.theta2);
            }
        }
    }
    Ok(out)
}

/// Splits `α = c1 dθ₁ + c2 dθ₂ + amp·dG` on an `n × n` grid, with
/// `G = sin θ₁ cos 2θ₂ + ½ cos(θ₁ − θ₂)`.
///
/// Layout: `[c1, c2, F(0,0), F(0,1), …]`, potential row-major in `θ₁`.
#[wasm_bindgen]
pub fn hodge_split(c1: f64, c2: f64, amp: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let grid = GridSpec::new(n.clamp(4, 256)).map_err(js_err)?;
    let alpha = OneFormField::from_fns(
        grid,
        |a, b| c1 + amp * (a.cos() * (2.0 * b).cos() - 0.5 * (a - b).sin()),
        |a, b| c2 + amp * (-2.0 * a.sin() * (2.0 * b).sin() + 0.5 * (a - b).sin()),
    );
    let s = split(&alpha, DEFAULT_CLOSED_TOL).map_err(js_err)?;
    let mut out = vec![s.harmonic.c1, s.harmonic.c2];
    out.extend_from_slice(s.potential.values());
    Ok(out)
}
