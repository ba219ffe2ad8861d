//! Flux, the calibration invariant Δ in two assemblies, the sampled
//! `‖·‖^∞` norm and the cocycle identity.
//!
//! `Δ̃(φ, α)_x = ⟨[α], flux⟩ − Vol·F^α(1)(x)` and `Δ = Δ̃/‖α‖_{L²}`, with
//! `Vol = (2π)²` carried explicitly.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::calibrator::FormEval;
use crate::generators::{
    calibrator, calibrator_field, harmonic_calibrator_potential, inverse, product, DiscreteMap,
    Generator, IntegratorConfig, Isotopy,
};
use crate::hodge::{ensure_closed, HarmonicForm, DEFAULT_CLOSED_TOL};
use crate::metrics::trapezoid;
use crate::torus::spectral::{d_theta1, d_theta2, Periodic1d};
use crate::torus::{integrate_scalar, Interp, Lift, OneFormField, Point, ScalarField, AREA};

/// Coefficients of the flux class in the basis `[dθ₁], [dθ₂]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxClass {
    pub c1: f64,
    pub c2: f64,
}

impl FluxClass {
    pub fn as_harmonic(&self) -> HarmonicForm {
        HarmonicForm::new(self.c1, self.c2)
    }
}

/// `∫₀¹ [H^t] dt` by the trapezoid rule.
pub fn flux(g: &Generator) -> FluxClass {
    let c1: Vec<f64> = g.h().iter().map(|h| h.c1).collect();
    let c2: Vec<f64> = g.h().iter().map(|h| h.c2).collect();
    FluxClass {
        c1: trapezoid(&c1),
        c2: trapezoid(&c2),
    }
}

/// `∫ α ∧ (c₁dθ₁ + c₂dθ₂) = ∫ (a₁c₂ − a₂c₁) dA`.
pub fn pair_flux(alpha: &OneFormField, fl: FluxClass, tol: f64) -> Result<f64> {
    ensure_closed(alpha, tol)?;
    Ok(pairing(alpha, fl))
}

fn pairing(alpha: &OneFormField, fl: FluxClass) -> f64 {
    integrate_scalar(alpha.a1()) * fl.c2 - integrate_scalar(alpha.a2()) * fl.c1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub flux_pairing: f64,
    /// `F^α(1)(x)`.
    pub calibrator_term: f64,
    pub value: f64,
    pub alpha_l2: f64,
    pub basepoint: [f64; 2],
}

impl DeltaReport {
    /// `Δ̃ = ‖α‖·Δ`.
    pub fn tilde(&self) -> f64 {
        self.flux_pairing - AREA * self.calibrator_term
    }
}

fn alpha_norm(alpha: &OneFormField) -> Result<f64> {
    let n = alpha.l2_norm();
    if n == 0.0 {
        return Err(Error::ZeroForm);
    }
    Ok(n)
}

/// Δ at `x` from the flux pairing and the trajectory calibrator.
pub fn delta(iso: &Isotopy, alpha: &OneFormField, x: Point) -> Result<DeltaReport> {
    let alpha_l2 = alpha_norm(alpha)?;
    let flux_pairing = pair_flux(alpha, flux(iso.generator()), DEFAULT_CLOSED_TOL)?;
    let calibrator_term = calibrator(iso, alpha, 1.0, x.lift())?;
    Ok(DeltaReport {
        flux_pairing,
        calibrator_term,
        value: (flux_pairing - AREA * calibrator_term) / alpha_l2,
        alpha_l2,
        basepoint: [x.theta1(), x.theta2()],
    })
}

/// `Δ̃` at every grid node.
pub fn delta_tilde_field(iso: &Isotopy, alpha: &OneFormField) -> Result<ScalarField> {
    let p = pair_flux(alpha, flux(iso.generator()), DEFAULT_CLOSED_TOL)?;
    Ok(calibrator_field(iso, alpha, 1.0)?.map(|f| p - AREA * f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDelta {
    pub value: f64,
    pub tilde: f64,
    pub alpha_l2: f64,
    /// `false` when finite-difference and spectral Jacobians disagree,
    /// i.e. the map is not resolved by the grid.
    pub smooth: bool,
    pub jacobian_mismatch: f64,
}

/// Relative Jacobian mismatch above which a map is flagged as not smooth.
pub const SPIKE_TOL: f64 = 0.05;

/// Δ from `(1/‖α‖) ∫_M ∫_{γ_y} (φ*α − α) dA(y)`, with `γ_y` the two-segment
/// path from `x` along θ₁ then θ₂. The pullback uses spectral derivatives
/// of the displacement; line integrals use spectral antiderivatives.
pub fn delta_path(m: &DiscreteMap, alpha: &OneFormField, x: Point, interp: Interp) -> Result<PathDelta> {
    ensure_closed(alpha, DEFAULT_CLOSED_TOL)?;
    let alpha_l2 = alpha_norm(alpha)?;
    let grid = m.grid();
    grid.ensure_same(&alpha.grid())?;
    let n = grid.n();

    let (d1, d2) = m.displacement();
    let (j11, j12) = (d_theta1(&d1), d_theta2(&d1));
    let (j21, j22) = (d_theta1(&d2), d_theta2(&d2));
    let ev = FormEval::new(alpha, interp);
    let mut b1 = Vec::with_capacity(grid.len());
    let mut b2 = Vec::with_capacity(grid.len());
    for (i, &p) in m.images().iter().enumerate() {
        let (a1, a2) = ev.eval(p);
        // (φ*α)_i = Σ_j α_j(φ) ∂_i φ^j
        b1.push(a1 * (1.0 + j11.values()[i]) + a2 * j21.values()[i] - alpha.a1().values()[i]);
        b2.push(a1 * j12.values()[i] + a2 * (1.0 + j22.values()[i]) - alpha.a2().values()[i]);
    }

    // θ₁-segment at height x₂, then θ₂-segments up each column
    let row: Vec<f64> = (0..n)
        .map(|j| Periodic1d::new(&b1[j * n..(j + 1) * n]).eval(x.theta2()))
        .collect();
    let horiz = Periodic1d::new(&row).cumulative_from(x.theta1());
    let mut total = 0.0;
    for (j, h) in horiz.iter().enumerate() {
        let vert = Periodic1d::new(&b2[j * n..(j + 1) * n]).cumulative_from(x.theta2());
        total += vert.iter().map(|v| h + v).sum::<f64>();
    }
    let tilde = total * grid.cell_area();

    let jacobian_mismatch = fd_jacobian_mismatch(&d1, &d2, [&j11, &j12, &j21, &j22]);
    Ok(PathDelta {
        value: tilde / alpha_l2,
        tilde,
        alpha_l2,
        smooth: jacobian_mismatch <= SPIKE_TOL,
        jacobian_mismatch,
    })
}

/// `max |J_fd − J_spec| / (1 + max |J_spec|)` with central differences.
fn fd_jacobian_mismatch(d1: &ScalarField, d2: &ScalarField, spec: [&ScalarField; 4]) -> f64 {
    let grid = d1.grid();
    let n = grid.n() as isize;
    let h2 = 2.0 * grid.spacing();
    let scale = 1.0 + spec.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let i = grid.index(j as usize, k as usize);
            let fd = [
                (d1.get_wrapped(j + 1, k) - d1.get_wrapped(j - 1, k)) / h2,
                (d1.get_wrapped(j, k + 1) - d1.get_wrapped(j, k - 1)) / h2,
                (d2.get_wrapped(j + 1, k) - d2.get_wrapped(j - 1, k)) / h2,
                (d2.get_wrapped(j, k + 1) - d2.get_wrapped(j, k - 1)) / h2,
            ];
            for (f, s) in fd.iter().zip(spec) {
                worst = worst.max((f - s.values()[i]).abs());
            }
        }
    }
    worst / scale
}

/// Unit-L² harmonic dictionary element `(cos(πk/K) dθ₁ + sin(πk/K) dθ₂)/2π`.
pub fn dictionary_direction(k: usize, directions: usize) -> HarmonicForm {
    let a = PI * k as f64 / directions as f64;
    HarmonicForm::new(a.cos() / TAU, a.sin() / TAU)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormInftyReport {
    /// `max_k max_x |Δ(g, α_k)_x|`; a lower bound for the sup over the unit ball.
    pub value: f64,
    /// `max_k |Δ(g, α_k)_{x₀}|` at the fixed basepoint.
    pub value_at_basepoint: f64,
    pub basepoint: [f64; 2],
    pub per_direction: Vec<f64>,
    pub sampled: bool,
}

/// Sampled `‖·‖^∞`. With `perturbation = Some(ε)`, each direction also gets
/// `α_k ± ε·dG` for `G = sin(θ₁ + θ₂)`, normalized to unit L².
pub fn norm_infty_sampled(
    g: &Generator,
    directions: usize,
    basepoint: Point,
    perturbation: Option<f64>,
    config: IntegratorConfig,
) -> Result<NormInftyReport> {
    if directions < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 directions, got {directions}")));
    }
    let iso = Isotopy::new(g.clone(), config)?;
    let map = iso.time_one_map()?;
    let fl = flux(g);
    let grid = g.grid();
    let x0 = nearest_node(grid, basepoint);

    let gfun = |p: Lift| (p.theta1 + p.theta2).sin();
    let g_before = ScalarField::from_fn(grid, |a, b| (a + b).sin());
    let g_after = ScalarField::new(grid, map.images().iter().map(|&p| gfun(p)).collect())?;
    let dg_shift = g_after.add_scaled(-1.0, &g_before)?;
    // ‖dG‖² = ∫ 2cos²(θ₁+θ₂) dA = Vol; dG ⟂ harmonic forms in L²
    let dg_norm2 = AREA;

    let mut per_direction = Vec::with_capacity(directions);
    let mut at_base: f64 = 0.0;
    for k in 0..directions {
        let h = dictionary_direction(k, directions);
        let pairing = AREA * (h.c1 * fl.c2 - h.c2 * fl.c1);
        let (d1, d2) = map.displacement();
        let cal = d1.scale(h.c1).add_scaled(h.c2, &d2)?;
        let mut variants = vec![(cal, 1.0)];
        if let Some(eps) = perturbation {
            let norm = (1.0 + eps * eps * dg_norm2).sqrt();
            for s in [eps, -eps] {
                variants.push((variants[0].0.add_scaled(s, &dg_shift)?, norm));
            }
        }
        let mut best: f64 = 0.0;
        for (cal, norm) in &variants {
            let field = cal.map(|f| (pairing - AREA * f).abs() / norm);
            best = best.max(field.max());
            at_base = at_base.max(field.values()[x0]);
        }
        per_direction.push(best);
    }
    Ok(NormInftyReport {
        value: per_direction.iter().copied().fold(0.0, f64::max),
        value_at_basepoint: at_base,
        basepoint: [basepoint.theta1(), basepoint.theta2()],
        per_direction,
        sampled: true,
    })
}

fn nearest_node(grid: crate::torus::GridSpec, p: Point) -> usize {
    let n = grid.n();
    let h = grid.spacing();
    let j = ((p.theta1() / h).round() as usize) % n;
    let k = ((p.theta2() / h).round() as usize) % n;
    grid.index(j, k)
}

/// `Δ̃` for a constant form on all nodes, from the time-one map in closed form.
pub fn harmonic_delta_tilde(map: &DiscreteMap, fl: FluxClass, h: HarmonicForm) -> ScalarField {
    let pairing = AREA * (h.c1 * fl.c2 - h.c2 * fl.c1);
    let cal = harmonic_calibrator_potential(map, h);
    // harmonic_calibrator_potential is mean-free; restore the mean
    let (d1, d2) = map.displacement();
    let mean = h.c1 * d1.mean() + h.c2 * d2.mean();
    cal.map(|f| pairing - AREA * (f + mean))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    /// `Δ(φ₁¹∘(ψ¹)⁻¹, α)_y`.
    pub lhs: f64,
    /// `Δ(φ₂¹∘(ψ¹)⁻¹, α)_y`.
    pub rhs_first: f64,
    /// `Δ(φ₁¹∘(φ₂¹)⁻¹, α)` at `φ₂¹∘(ψ¹)⁻¹(y)`.
    pub rhs_second: f64,
    pub residual: f64,
}

/// Evaluates both sides of
/// `Δ(φ₁∘ψ⁻¹)_y = Δ(φ₂∘ψ⁻¹)_y + Δ(φ₁∘φ₂⁻¹)_{φ₂∘ψ⁻¹(y)}`
/// with every composite built by the generator calculus.
pub fn cocycle_check(
    g1: &Generator,
    g2: &Generator,
    g_psi: &Generator,
    alpha: &OneFormField,
    y: Point,
    config: IntegratorConfig,
) -> Result<CocycleReport> {
    let psi_inv = inverse(g_psi, config)?;
    let a = Isotopy::new(product(g1, &psi_inv, config)?, config)?;
    let b = Isotopy::new(product(g2, &psi_inv, config)?, config)?;
    // φ∘φ⁻¹ is exactly the identity; skip the round trip through the grid
    let c = if g1.max_slice_diff(g2)? == 0.0 {
        Generator::zero(g1.grid(), g1.steps())
    } else {
        product(g1, &inverse(g2, config)?, config)?
    };
    let c = Isotopy::new(c, config)?;
    let lhs = delta(&a, alpha, y)?.value;
    let rhs_first = delta(&b, alpha, y)?.value;
    let by = b.flow(y.lift(), 1.0)?.reduce();
    let rhs_second = delta(&c, alpha, by)?.value;
    Ok(CocycleReport {
        lhs,
        rhs_first,
        rhs_second,
        residual: (lhs - rhs_first - rhs_second).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::product;
    use crate::torus::spectral::spectral_gradient;
    use crate::torus::GridSpec;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    fn dtheta1(g: GridSpec) -> OneFormField {
        OneFormField::constant(g, 1.0, 0.0)
    }

    #[test]
    fn flux_examples() {
        let g = grid(16);
        let ham = Generator::autonomous(ScalarField::from_fn(g, |a, _| a.sin()), HarmonicForm::ZERO, 3);
        assert_eq!(flux(&ham), FluxClass::default());
        let h = Generator::from_fn(g, 4, |t| (ScalarField::zeros(g), HarmonicForm::new(t, 1.0))).unwrap();
        assert_close!(flux(&h).c1, 0.5, 1e-15);
        assert_close!(flux(&h).c2, 1.0, 1e-15);
        let cfg = IntegratorConfig::accurate(1);
        let a = Generator::random_band_limited(g, 4, 1, 2, 1.0);
        let b = Generator::random_band_limited(g, 4, 2, 2, 1.0);
        let p = flux(&product(&a, &b, cfg).unwrap());
        assert_close!(p.c1, flux(&a).c1 + flux(&b).c1, 1e-10);
        assert_close!(p.c2, flux(&a).c2 + flux(&b).c2, 1e-10);
    }

    #[test]
    fn pair_flux_examples() {
        let g = grid(16);
        let a = dtheta1(g);
        assert_close!(pair_flux(&a, FluxClass { c1: 0.0, c2: 1.0 }, 1e-8).unwrap(), AREA, 1e-12);
        assert_eq!(pair_flux(&a, FluxClass { c1: 1.0, c2: 0.0 }, 1e-8).unwrap(), 0.0);
        let exact = spectral_gradient(&ScalarField::from_fn(g, |x, y| (x - 2.0 * y).cos()));
        assert!(pair_flux(&exact, FluxClass { c1: 0.3, c2: -2.0 }, 1e-8).unwrap().abs() < 1e-9);
        let open = OneFormField::from_fns(g, |_, b| b.sin(), |_, _| 0.0);
        assert!(matches!(pair_flux(&open, FluxClass::default(), 1e-6), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn delta_examples() {
        let g = grid(32);
        let cfg = IntegratorConfig::accurate(1);
        let zero = Isotopy::new(Generator::zero(g, 2), cfg).unwrap();
        let x = Point::new(0.0, 0.0);
        assert_eq!(delta(&zero, &dtheta1(g), x).unwrap().value, 0.0);
        // constant shear h ≡ 0.7: Δ̃ = 0.7·Vol − Vol·0.7
        let shear = Isotopy::new(Generator::translation(g, 1, HarmonicForm::new(0.0, 0.7)), cfg).unwrap();
        let r = delta(&shear, &dtheta1(g), Point::new(1.0, 2.0)).unwrap();
        assert!(r.tilde().abs() < 1e-12);
        assert_close!(r.alpha_l2, TAU, 1e-12);
        let zero_form = OneFormField::constant(g, 0.0, 0.0);
        assert!(matches!(delta(&zero, &zero_form, x), Err(Error::ZeroForm)));
    }

    #[test]
    fn delta_path_examples() {
        let g = grid(32);
        let x = Point::new(0.0, 0.0);
        let id = DiscreteMap::identity(g);
        assert!(delta_path(&id, &dtheta1(g), x, Interp::Quintic).unwrap().value.abs() < 1e-14);
        // translation by (1, 0) pulls dθ₁ back to itself
        let tr = DiscreteMap::from_displacement(g, |_, _| (1.0, 0.0));
        assert!(delta_path(&tr, &dtheta1(g), x, Interp::Quintic).unwrap().tilde.abs() < 1e-12);
        let cfg = IntegratorConfig::accurate(1);
        let iso = Isotopy::new(Generator::translation(g, 1, HarmonicForm::new(0.0, 1.0)), cfg).unwrap();
        let r = delta(&iso, &dtheta1(g), x).unwrap();
        assert_close!(r.flux_pairing, AREA, 1e-12);
        assert_close!(r.calibrator_term, 1.0, 1e-12);
        assert_close!(r.value, 0.0, 1e-12);
    }

    #[test]
    fn delta_and_delta_path_agree_on_smooth_generator() {
        let g = grid(64);
        let cfg = IntegratorConfig::accurate(2);
        let gen = Generator::random_band_limited(g, 20, 31, 2, 1.0);
        let iso = Isotopy::new(gen, cfg).unwrap();
        let map = iso.time_one_map().unwrap();
        let alpha = OneFormField::from_fns(g, |a, b| 1.0 + 0.5 * (a + b).cos(), |a, b| 0.3 + 0.5 * (a + b).cos());
        for x in [Point::new(0.0, 0.0), Point::new(2.0, 4.5)] {
            let a = delta(&iso, &alpha, x).unwrap();
            let b = delta_path(&map, &alpha, x, Interp::Quintic).unwrap();
            assert!(b.smooth);
            let scale = a.value.abs().max(1.0);
            assert!((a.value - b.value).abs() < 1e-5 * scale, "{} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn delta_tilde_is_linear_in_alpha() {
        let g = grid(32);
        let iso = Isotopy::new(Generator::random_band_limited(g, 10, 8, 2, 1.0), IntegratorConfig::accurate(1)).unwrap();
        let a = OneFormField::from_fns(g, |a, _| a.cos(), |_, _| 1.0);
        let b = OneFormField::constant(g, 0.5, -0.25);
        let combo = a.scale(2.0).add_scaled(-3.0, &b).unwrap();
        let x = Point::new(1.0, 1.0);
        let lhs = delta(&iso, &combo, x).unwrap().tilde();
        let rhs = 2.0 * delta(&iso, &a, x).unwrap().tilde() - 3.0 * delta(&iso, &b, x).unwrap().tilde();
        assert_close!(lhs, rhs, 1e-8);
    }

    #[test]
    fn harmonic_closed_form_matches_trajectory_integration() {
        let g = grid(32);
        let iso = Isotopy::new(Generator::random_band_limited(g, 10, 12, 2, 1.0), IntegratorConfig::accurate(2)).unwrap();
        let h = HarmonicForm::new(0.2, 0.9);
        let closed = harmonic_delta_tilde(&iso.time_one_map().unwrap(), flux(iso.generator()), h);
        let integrated = delta_tilde_field(&iso, &h.to_field(g)).unwrap();
        assert!(closed.max_abs_diff(&integrated).unwrap() < 1e-8);
    }

    #[test]
    fn norm_infty_examples() {
        let g = grid(32);
        let cfg = IntegratorConfig::accurate(1);
        let x = Point::new(0.0, 0.0);
        let z = norm_infty_sampled(&Generator::zero(g, 2), 4, x, None, cfg).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.sampled);
        let gen = Generator::random_band_limited(g, 8, 2, 2, 1.0);
        let v4 = norm_infty_sampled(&gen, 4, x, None, cfg).unwrap();
        let v8 = norm_infty_sampled(&gen, 8, x, None, cfg).unwrap();
        assert!(v8.value >= v4.value);
        assert!(v4.value >= v4.value_at_basepoint);
        let p = norm_infty_sampled(&gen, 4, x, Some(0.1), cfg).unwrap();
        assert!(p.value >= v4.value / (1.0 + 0.01 * AREA).sqrt() - 1e-12);
        assert!(norm_infty_sampled(&gen, 3, x, None, cfg).is_err());
    }

    #[test]
    fn cocycle_examples() {
        let g = grid(32);
        let cfg = IntegratorConfig::accurate(1);
        let alpha = OneFormField::from_fns(g, |a, _| 1.0 + 0.3 * a.sin(), |_, _| 0.5);
        let g1 = Generator::random_band_limited(g, 20, 1, 2, 0.8);
        let psi = Generator::random_band_limited(g, 20, 3, 2, 0.8);
        let y = Point::new(1.0, 2.0);
        let same = cocycle_check(&g1, &g1, &psi, &alpha, y, cfg).unwrap();
        assert!(same.rhs_second.abs() < 1e-6, "{same:?}");
        assert!(same.residual < 1e-6);
    }

    #[test]
    fn cocycle_on_random_triple() {
        let g = grid(64);
        let alpha = OneFormField::from_fns(g, |a, _| 1.0 + 0.3 * a.sin(), |_, _| 0.5);
        // composite slices are only linear in time; T = 80 keeps that error small
        let [g1, g2, psi] = [1, 2, 3].map(|s| Generator::random_band_limited(g, 80, s, 2, 0.8));
        let (y, cfg) = (Point::new(1.0, 2.0), IntegratorConfig::accurate(1));
        let r = cocycle_check(&g1, &g2, &Generator::zero(g, 80), &alpha, y, cfg).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let r = cocycle_check(&g1, &g2, &psi, &alpha, y, cfg).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
    }
}
