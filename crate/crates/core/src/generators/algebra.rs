//! Group law on generators.
//!
//! For `ρ^t = φ^t∘ψ^t` with generators `(U, H)` and `(V, K)`:
//! `ι_{ρ̇}ω = dU + H + (φ^t)⁻¹*(dV + K)`, and for constant `K`
//! `(φ⁻¹)*K − K = d(K·(φ⁻¹(x) − x))`. The inverse and conjugation rules
//! follow the same way.

use super::calibrator::calibrator_field;
use super::flow::{DiscreteMap, IntegratorConfig, Isotopy};
use super::Generator;
use crate::error::Result;
use crate::hodge::HarmonicForm;
use crate::torus::{FourierInterpolant, Interp, ScalarField, Stencil};

/// `f∘m` sampled on the grid.
pub fn compose_scalar(f: &ScalarField, m: &DiscreteMap, interp: Interp) -> Result<ScalarField> {
    f.grid().ensure_same(&m.grid())?;
    let grid = f.grid();
    let values = match interp {
        Interp::Fourier => {
            let fi = FourierInterpolant::new(f);
            m.images().iter().map(|&p| fi.eval(p)).collect()
        }
        _ => m
            .images()
            .iter()
            .map(|&p| Stencil::new(grid, interp, p).apply(f))
            .collect(),
    };
    ScalarField::new(grid, values)
}

/// `h·(m(x) − x)` minus its mean: the normalized calibrator of a constant
/// harmonic form along a map, in closed form.
pub fn harmonic_calibrator_potential(m: &DiscreteMap, h: HarmonicForm) -> ScalarField {
    let (d1, d2) = m.displacement();
    d1.scale(h.c1)
        .add_scaled(h.c2, &d2)
        .expect("same grid")
        .recentered()
}

/// `F̃^h(t)`: calibrator field of the constant form `h` at time `t`,
/// integrated along trajectories, with its mean removed.
pub fn normalized_calibrator(iso: &Isotopy, h: HarmonicForm, t: f64) -> Result<ScalarField> {
    let alpha = h.to_field(iso.grid());
    Ok(calibrator_field(iso, &alpha, t)?.recentered())
}

/// Generator of `t ↦ φ₁^t∘φ₂^t`.
pub fn product(g1: &Generator, g2: &Generator, config: IntegratorConfig) -> Result<Generator> {
    g1.ensure_compatible(g2)?;
    let iso1 = Isotopy::new(g1.clone(), config)?;
    let inv = iso1.inverse_maps()?;
    let mut u = Vec::with_capacity(g1.steps() + 1);
    let mut h = Vec::with_capacity(g1.steps() + 1);
    for (k, m) in inv.iter().enumerate() {
        let k2 = g2.h()[k];
        let pulled = compose_scalar(&g2.u()[k], m, config.interp)?;
        let slice = g1.u()[k]
            .add_scaled(1.0, &pulled)?
            .add_scaled(1.0, &harmonic_calibrator_potential(m, k2))?;
        u.push(slice);
        h.push(g1.h()[k] + k2);
    }
    Generator::new(u, h)
}

/// Generator of `t ↦ (φ^t)⁻¹`.
pub fn inverse(g: &Generator, config: IntegratorConfig) -> Result<Generator> {
    let iso = Isotopy::new(g.clone(), config)?;
    let fwd = iso.forward_maps()?;
    let mut u = Vec::with_capacity(g.steps() + 1);
    let mut h = Vec::with_capacity(g.steps() + 1);
    for (k, m) in fwd.iter().enumerate() {
        let hk = g.h()[k];
        let slice = compose_scalar(&g.u()[k], m, config.interp)?
            .add_scaled(1.0, &harmonic_calibrator_potential(m, hk))?
            .scale(-1.0);
        u.push(slice);
        h.push(-hk);
    }
    Generator::new(u, h)
}

/// Generator of `t ↦ ψ⁻¹∘φ^t∘ψ` for a fixed symplectic map `ψ`:
/// `(U∘ψ + H·(ψ(x) − x) − mean, H)`.
pub fn conjugate(g: &Generator, psi: &DiscreteMap, interp: Interp) -> Result<Generator> {
    g.grid().ensure_same(&psi.grid())?;
    let mut u = Vec::with_capacity(g.steps() + 1);
    for (f, &hk) in g.u().iter().zip(g.h()) {
        u.push(compose_scalar(f, psi, interp)?.add_scaled(1.0, &harmonic_calibrator_potential(psi, hk))?);
    }
    Generator::new(u, g.h().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{lift_distance, GridSpec};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::accurate(1)
    }

    fn sup_dist(a: &DiscreteMap, b: &DiscreteMap) -> f64 {
        a.images()
            .iter()
            .zip(b.images())
            .map(|(p, q)| lift_distance(*p, *q))
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_element() {
        let grid = GridSpec::new(32).unwrap();
        let g = Generator::random_band_limited(grid, 8, 2, 2, 1.0);
        let z = Generator::zero(grid, 8);
        assert!(product(&g, &z, cfg()).unwrap().max_slice_diff(&g).unwrap() < 1e-9);
        assert!(product(&z, &g, cfg()).unwrap().max_slice_diff(&g).unwrap() < 1e-9);
    }

    #[test]
    fn inverse_examples() {
        let grid = GridSpec::new(32).unwrap();
        let z = Generator::zero(grid, 4);
        assert!(inverse(&z, cfg()).unwrap().max_slice_diff(&z).unwrap() == 0.0);
        let tr = Generator::translation(grid, 4, HarmonicForm::new(0.0, 1.0));
        let inv = inverse(&tr, cfg()).unwrap();
        assert!(inv.h().iter().all(|&h| h == HarmonicForm::new(0.0, -1.0)));
        assert!(inv.u().iter().all(|u| u.sup_norm() < 1e-12));
    }

    #[test]
    fn inverse_is_an_involution() {
        // slices are linear in time, so the error is O(T⁻²) plus interpolation
        let grid = GridSpec::new(64).unwrap();
        let g = Generator::random_band_limited(grid, 160, 9, 2, 0.5);
        let back = inverse(&inverse(&g, cfg()).unwrap(), cfg()).unwrap();
        let d = back.max_slice_diff(&g).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn product_flows_compose() {
        let grid = GridSpec::new(64).unwrap();
        let g1 = Generator::random_band_limited(grid, 100, 1, 2, 1.0);
        let g2 = Generator::random_band_limited(grid, 100, 2, 2, 1.0);
        let p = product(&g1, &g2, cfg()).unwrap();
        let m = Isotopy::new(p, cfg()).unwrap().time_one_map().unwrap();
        let m1 = Isotopy::new(g1, cfg()).unwrap().time_one_map().unwrap();
        let m2 = Isotopy::new(g2, cfg()).unwrap().time_one_map().unwrap();
        let composed = m1.compose(&m2, Interp::Quintic).unwrap();
        let d = sup_dist(&m, &composed);
        assert!(d < 1e-3, "{d}");
    }

    #[test]
    fn product_with_inverse_is_identity() {
        let grid = GridSpec::new(32).unwrap();
        let g = Generator::random_band_limited(grid, 50, 4, 2, 1.0);
        let p = product(&g, &inverse(&g, cfg()).unwrap(), cfg()).unwrap();
        let m = Isotopy::new(p, cfg()).unwrap().time_one_map().unwrap();
        let d = sup_dist(&m, &DiscreteMap::identity(grid));
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn integrated_and_closed_form_calibrators_agree() {
        let grid = GridSpec::new(32).unwrap();
        let g = Generator::random_band_limited(grid, 20, 6, 2, 1.0);
        let iso = Isotopy::new(g, IntegratorConfig::accurate(2)).unwrap();
        let h = HarmonicForm::new(0.3, -0.7);
        let a = normalized_calibrator(&iso, h, 1.0).unwrap();
        let b = harmonic_calibrator_potential(&iso.time_one_map().unwrap(), h);
        assert!(a.max_abs_diff(&b).unwrap() < 1e-8);
        assert!(a.mean().abs() < 1e-12);
        let tr = Isotopy::new(Generator::translation(grid, 2, HarmonicForm::new(0.0, 1.0)), cfg()).unwrap();
        assert!(normalized_calibrator(&tr, HarmonicForm::new(0.0, 1.0), 1.0).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn conjugation_by_identity_is_trivial() {
        let grid = GridSpec::new(16).unwrap();
        let g = Generator::random_band_limited(grid, 4, 3, 2, 1.0);
        let c = conjugate(&g, &DiscreteMap::identity(grid), Interp::Quintic).unwrap();
        assert!(c.max_slice_diff(&g).unwrap() < 1e-12);
    }
}
