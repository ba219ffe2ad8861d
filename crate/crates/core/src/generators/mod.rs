//! Generators `(U, H)` of symplectic isotopies, their flows, group law and
//! calibrator functionals.
//!
//! Sign convention, fixed crate-wide: with `ω = dθ₁∧dθ₂`,
//! `ι_X ω = X¹ dθ₂ − X² dθ₁`, so `ι_X ω = dU + c₁dθ₁ + c₂dθ₂` gives
//! `X¹ = ∂₂U + c₂` and `X² = −∂₁U − c₁`.

mod algebra;
pub(crate) mod calibrator;
pub(crate) mod flow;
pub mod recipe;

pub use algebra::{
    compose_scalar, conjugate, harmonic_calibrator_potential, inverse, normalized_calibrator,
    product,
};
pub use calibrator::{calibrator, calibrator_field, calibrator_slices};
pub use flow::{vector_field, DiscreteMap, IntegratorConfig, Isotopy, TimeInterp};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodge::HarmonicForm;
use crate::torus::spectral::{d_theta1, d_theta2};
use crate::torus::{GridSpec, ScalarField};

/// Time-sampled generator: `U^t` and `H^t` at `t = k/T`, `k = 0..=T`,
/// linearly interpolated in between.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    grid: GridSpec,
    u: Vec<ScalarField>,
    h: Vec<HarmonicForm>,
}

impl Generator {
    /// Builds a generator from `T + 1` slices. Every `U^t` is re-centered to
    /// zero grid mean.
    pub fn new(u: Vec<ScalarField>, h: Vec<HarmonicForm>) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::ShapeMismatch(format!("need at least 2 time slices, got {}", u.len())));
        }
        if u.len() != h.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} U slices but {} H slices",
                u.len(),
                h.len()
            )));
        }
        let grid = u[0].grid();
        for f in &u {
            grid.ensure_same(&f.grid())?;
        }
        if h.iter().any(|c| !c.c1.is_finite() || !c.c2.is_finite()) {
            return Err(Error::NonFinite);
        }
        let u = u.into_iter().map(|f| f.recentered()).collect();
        Ok(Self { grid, u, h })
    }

    pub fn zero(grid: GridSpec, steps: usize) -> Self {
        Self::translation(grid, steps, HarmonicForm::ZERO)
    }

    /// `U ≡ 0`, constant harmonic part: a linear flow with velocity `(c₂, −c₁)`.
    pub fn translation(grid: GridSpec, steps: usize, h: HarmonicForm) -> Self {
        let steps = steps.max(1);
        Self {
            grid,
            u: vec![ScalarField::zeros(grid); steps + 1],
            h: vec![h; steps + 1],
        }
    }

    /// Time-independent generator.
    pub fn autonomous(u: ScalarField, h: HarmonicForm, steps: usize) -> Self {
        let steps = steps.max(1);
        let u = u.recentered();
        Self {
            grid: u.grid(),
            u: vec![u; steps + 1],
            h: vec![h; steps + 1],
        }
    }

    /// Samples `slice(t)` at every `t = k/T`.
    pub fn from_fn(
        grid: GridSpec,
        steps: usize,
        slice: impl Fn(f64) -> (ScalarField, HarmonicForm),
    ) -> Result<Self> {
        let steps = steps.max(1);
        let (u, h) = (0..=steps).map(|k| slice(k as f64 / steps as f64)).unzip();
        let g = Self::new(u, h)?;
        grid.ensure_same(&g.grid)?;
        Ok(g)
    }

    /// Random smooth generator: `U^t` and `H^t` interpolate linearly between
    /// two random trigonometric polynomials with modes `|m|, |k| ≤ modes`,
    /// scaled so the sup of the velocity field over all slices equals
    /// `max_speed`.
    pub fn random_band_limited(
        grid: GridSpec,
        steps: usize,
        seed: u64,
        modes: usize,
        max_speed: f64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut endpoint = || {
            let mut terms = Vec::new();
            for m in 0..=modes as i32 {
                for k in -(modes as i32)..=modes as i32 {
                    if m == 0 && k <= 0 {
                        continue;
                    }
                    let decay = 1.0 / (1.0 + (m * m + k * k) as f64);
                    let a: f64 = rng.random_range(-1.0..1.0) * decay;
                    let b: f64 = rng.random_range(-1.0..1.0) * decay;
                    terms.push((m as f64, k as f64, a, b));
                }
            }
            let u = ScalarField::from_fn(grid, |x, y| {
                terms
                    .iter()
                    .map(|&(m, k, a, b)| {
                        let (s, c) = (m * x + k * y).sin_cos();
                        a * c + b * s
                    })
                    .sum()
            });
            let h = HarmonicForm::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            (u, h)
        };
        let (u0, h0) = endpoint();
        let (u1, h1) = endpoint();
        let steps = steps.max(1);
        let raw = Self::from_fn(grid, steps, |t| {
            (u0.scale(1.0 - t).add_scaled(t, &u1).expect("same grid"), h0.lerp(&h1, t))
        })
        .expect("consistent slices");
        let speed = raw.max_speed();
        if speed == 0.0 {
            return raw;
        }
        raw.scaled(max_speed / speed)
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of time intervals `T`.
    #[inline]
    pub fn steps(&self) -> usize {
        self.u.len() - 1
    }

    pub fn u(&self) -> &[ScalarField] {
        &self.u
    }

    pub fn h(&self) -> &[HarmonicForm] {
        &self.h
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.steps() as f64
    }

    /// Linear interpolation of the harmonic path at time `t`.
    pub fn harmonic_at(&self, t: f64) -> HarmonicForm {
        let (k, w) = slice_weight(t, self.steps());
        if w == 0.0 {
            self.h[k]
        } else {
            self.h[k].lerp(&self.h[k + 1], w)
        }
    }

    /// Both generators live on the same grid with the same number of slices.
    pub fn ensure_compatible(&self, other: &Generator) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.steps() != other.steps() {
            return Err(Error::ShapeMismatch(format!(
                "T = {} vs T = {}",
                self.steps(),
                other.steps()
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().map(|f| f.scale(s)).collect(),
            h: self.h.iter().map(|&c| s * c).collect(),
        }
    }

    /// Generator of `t ↦ φ^{1−t}∘(φ¹)⁻¹`: slices reversed and negated.
    pub fn reversed(&self) -> Self {
        Self {
            grid: self.grid,
            u: self.u.iter().rev().map(|f| -f).collect(),
            h: self.h.iter().rev().map(|&c| -c).collect(),
        }
    }

    /// `true` when every harmonic slice is zero.
    pub fn is_hamiltonian(&self) -> bool {
        self.h.iter().all(|c| c.c1 == 0.0 && c.c2 == 0.0)
    }

    /// Largest `|U^t|` grid mean over all slices (zero up to rounding).
    pub fn max_slice_mean(&self) -> f64 {
        self.u.iter().map(|f| f.mean().abs()).fold(0.0, f64::max)
    }

    /// Sup over slices and nodes of the Euclidean velocity `|X|`.
    pub fn max_speed(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.h)
            .map(|(u, c)| {
                let x1 = d_theta2(u);
                let x2 = d_theta1(u);
                x1.values()
                    .iter()
                    .zip(x2.values())
                    .map(|(a, b)| (a + c.c2).hypot(b + c.c1))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest slice-wise difference `max_k (sup|U₁ − U₂|, |H₁ − H₂|∞)`.
    pub fn max_slice_diff(&self, other: &Generator) -> Result<f64> {
        self.ensure_compatible(other)?;
        let mut m: f64 = 0.0;
        for k in 0..=self.steps() {
            m = m.max(self.u[k].max_abs_diff(&other.u[k])?);
            let d = self.h[k] - other.h[k];
            m = m.max(d.c1.abs()).max(d.c2.abs());
        }
        Ok(m)
    }
}

/// Slice index `k ∈ [0, T−1]` and weight `w ∈ [0, 1]` with `t = (k + w)/T`.
#[inline]
pub(crate) fn slice_weight(t: f64, steps: usize) -> (usize, f64) {
    let u = (t * steps as f64).clamp(0.0, steps as f64);
    let k = (u.floor() as usize).min(steps - 1);
    (k, u - k as f64)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorJson {
    #[serde(rename = "T")]
    steps: usize,
    grid: GridSpec,
    #[serde(rename = "U")]
    u: Vec<ScalarField>,
    #[serde(rename = "H")]
    h: Vec<HarmonicForm>,
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GeneratorJson {
            steps: self.steps(),
            grid: self.grid,
            u: self.u.clone(),
            h: self.h.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = GeneratorJson::deserialize(d)?;
        if j.u.len() != j.steps + 1 {
            return Err(D::Error::custom(format!(
                "T = {} requires {} U slices, got {}",
                j.steps,
                j.steps + 1,
                j.u.len()
            )));
        }
        let g = Generator::new(j.u, j.h).map_err(D::Error::custom)?;
        j.grid.ensure_same(&g.grid).map_err(D::Error::custom)?;
        Ok(g)
    }
}
