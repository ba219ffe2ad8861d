//! Lengths, generator-space metrics and C⁰ distances.
//!
//! Every quantity that the theory defines as an infimum over isotopies is
//! evaluated on the presented generator only, so it is an upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{inverse, DiscreteMap, Generator, IntegratorConfig, Isotopy};
use crate::hodge::{l2_norm, HarmonicForm};
use crate::torus::spectral::spectral_gradient;
use crate::torus::{lift_distance, ScalarField};

/// Default weight of the harmonic part.
pub const DEFAULT_KAPPA: f64 = 1.0;

/// `max − min` over the grid.
pub fn osc(f: &ScalarField) -> f64 {
    f.max() - f.min()
}

/// Norm applied to the exact part `dU^t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuB {
    #[default]
    Oscillation,
    /// `sup |∇U|`.
    SupGradient,
}

impl NuB {
    pub fn eval(&self, u: &ScalarField) -> f64 {
        match self {
            NuB::Oscillation => osc(u),
            NuB::SupGradient => {
                let g = spectral_gradient(u);
                g.a1()
                    .values()
                    .iter()
                    .zip(g.a2().values())
                    .map(|(a, b)| a.hypot(*b))
                    .fold(0.0, f64::max)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub hamiltonian_part: f64,
    pub harmonic_part: f64,
    pub kappa: f64,
    pub total: f64,
}

/// Trapezoid rule on `[0, 1]` for samples at `k/T`.
pub(crate) fn trapezoid(samples: &[f64]) -> f64 {
    let t = (samples.len() - 1) as f64;
    let inner: f64 = samples[1..samples.len() - 1].iter().sum();
    (inner + 0.5 * (samples[0] + samples[samples.len() - 1])) / t
}

/// `∫₀¹ (osc U^t + κ‖H^t‖_{L²}) dt`. Requires `kappa > 0`.
pub fn length(g: &Generator, kappa: f64) -> LengthReport {
    length_with(g, kappa, NuB::Oscillation)
}

pub fn length_with(g: &Generator, kappa: f64, nu: NuB) -> LengthReport {
    let ham: Vec<f64> = g.u().iter().map(|u| nu.eval(u)).collect();
    let harm: Vec<f64> = g.h().iter().map(|&h| l2_norm(h)).collect();
    let hamiltonian_part = trapezoid(&ham);
    let harmonic_part = trapezoid(&harm);
    LengthReport {
        hamiltonian_part,
        harmonic_part,
        kappa,
        total: hamiltonian_part + kappa * harmonic_part,
    }
}

/// `D₀ = ∫₀¹ (osc(U^t − V^t) + κ‖H^t − K^t‖_{L²}) dt`.
pub fn generator_d0(g1: &Generator, g2: &Generator, kappa: f64) -> Result<f64> {
    g1.ensure_compatible(g2)?;
    let mut samples = Vec::with_capacity(g1.steps() + 1);
    for k in 0..=g1.steps() {
        let du = g1.u()[k].zip_map(&g2.u()[k], |a, b| a - b)?;
        let dh: HarmonicForm = g1.h()[k] - g2.h()[k];
        samples.push(osc(&du) + kappa * l2_norm(dh));
    }
    Ok(trapezoid(&samples))
}

/// `D¹`: mean of `D₀` on the pair and on the pair of inverses.
pub fn generator_d1(g1: &Generator, g2: &Generator, kappa: f64, config: IntegratorConfig) -> Result<f64> {
    let direct = generator_d0(g1, g2, kappa)?;
    let inv = generator_d0(&inverse(g1, config)?, &inverse(g2, config)?, kappa)?;
    Ok(0.5 * (direct + inv))
}

/// `(length(g) + length(ḡ))/2`: an upper bound for the Hofer-like norm of
/// the time-one map.
pub fn hofer_like_norm_upper(g: &Generator, kappa: f64, config: IntegratorConfig) -> Result<f64> {
    let inv = inverse(g, config)?;
    Ok(0.5 * (length(g, kappa).total + length(&inv, kappa).total))
}

/// Finite-sequence stand-in for the liminf norm on limits of time-one maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProxy {
    pub value: f64,
    pub argmin: usize,
    pub per_generator: Vec<f64>,
    pub warnings: Vec<String>,
    /// Always `true`: this is not the liminf itself.
    pub proxy: bool,
}

/// Minimum of `hofer_like_norm_upper` over the list. Warns when the
/// time-one maps do not approach the last one monotonically in `dC0`.
pub fn fshomeo_norm_proxy(gs: &[Generator], kappa: f64, config: IntegratorConfig) -> Result<NormProxy> {
    let last = gs.last().ok_or(Error::EmptyList)?;
    let per_generator = gs
        .iter()
        .map(|g| hofer_like_norm_upper(g, kappa, config))
        .collect::<Result<Vec<_>>>()?;
    let (argmin, value) = per_generator
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let mut warnings = Vec::new();
    if gs.len() > 2 {
        let target = Isotopy::new(last.clone(), config)?.time_one_map()?;
        let mut prev = f64::INFINITY;
        for (i, g) in gs[..gs.len() - 1].iter().enumerate() {
            let d = d_c0(&Isotopy::new(g.clone(), config)?.time_one_map()?, &target)?;
            if d > prev {
                warnings.push(format!("dC0 to the last map increases at index {i}: {d:.3e} > {prev:.3e}"));
            }
            prev = d;
        }
    }
    Ok(NormProxy {
        value,
        argmin,
        per_generator,
        warnings,
        proxy: true,
    })
}

/// `sup_x d(m₁(x), m₂(x))` over grid nodes.
pub fn d_c0(m1: &DiscreteMap, m2: &DiscreteMap) -> Result<f64> {
    m1.grid().ensure_same(&m2.grid())?;
    Ok(m1
        .images()
        .iter()
        .zip(m2.images())
        .map(|(p, q)| lift_distance(*p, *q))
        .fold(0.0, f64::max))
}

/// `max(dC0(f, h), dC0(f⁻¹, h⁻¹))`.
pub fn d0(
    f: &DiscreteMap,
    f_inv: Option<&DiscreteMap>,
    h: &DiscreteMap,
    h_inv: Option<&DiscreteMap>,
) -> Result<f64> {
    let (fi, hi) = f_inv.zip(h_inv).ok_or(Error::MissingInverse)?;
    Ok(d_c0(f, h)?.max(d_c0(fi, hi)?))
}

/// A path of maps sampled at the slice times, with inverses.
#[derive(Clone, Debug)]
pub struct MapPath {
    pub forward: Vec<DiscreteMap>,
    pub inverse: Vec<DiscreteMap>,
}

impl MapPath {
    pub fn from_isotopy(iso: &Isotopy) -> Result<Self> {
        Ok(Self {
            forward: iso.forward_maps()?,
            inverse: iso.inverse_maps()?,
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// `max_k d0(λ(t_k), μ(t_k))` over the stored slices; a lower bound for the
/// continuous-time sup.
pub fn dbar(a: &MapPath, b: &MapPath) -> Result<f64> {
    if a.len() != b.len() || a.inverse.len() != a.len() || b.inverse.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("paths with {} and {} slices", a.len(), b.len())));
    }
    let mut m: f64 = 0.0;
    for k in 0..a.len() {
        m = m.max(d0(&a.forward[k], Some(&a.inverse[k]), &b.forward[k], Some(&b.inverse[k]))?);
    }
    Ok(m)
}
