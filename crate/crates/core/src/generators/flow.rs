use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{slice_weight, Generator};
use crate::error::{Error, Result};
use crate::torus::spectral::{d_theta1, d_theta2};
use crate::torus::{FourierInterpolant, GridSpec, Interp, Lift, ScalarField, Stencil};

/// Rule for the velocity between stored time slices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeInterp {
    /// Piecewise linear; second order in `1/T` for generators that are not
    /// themselves linear in time.
    #[default]
    Linear,
    /// Four-slice Lagrange, fourth order; linear when `T < 3`. Exact on
    /// generators that are linear in time.
    Cubic,
}

/// Fixed-step RK4 configuration; steps are aligned with the generator's
/// time slices, `substeps` per slice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub substeps: usize,
    pub interp: Interp,
    pub time: TimeInterp,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            substeps: 1,
            interp: Interp::Bilinear,
            time: TimeInterp::Linear,
        }
    }
}

impl IntegratorConfig {
    /// Sixth-order spatial and fourth-order temporal interpolation; what the
    /// experiment drivers use.
    pub fn accurate(substeps: usize) -> Self {
        Self {
            substeps,
            interp: Interp::Quintic,
            time: TimeInterp::Cubic,
        }
    }
}

/// Slice indices and weights for the velocity at `t`.
fn time_weights(t: f64, steps: usize, rule: TimeInterp) -> ([(usize, f64); 4], usize) {
    let mut out = [(0, 0.0); 4];
    if rule == TimeInterp::Cubic && steps >= 3 {
        let u = (t * steps as f64).clamp(0.0, steps as f64);
        let base = (u.floor() as usize).saturating_sub(1).min(steps - 3);
        let s = u - base as f64;
        for (m, slot) in out.iter_mut().enumerate() {
            let mut w = 1.0;
            for l in 0..4 {
                if l != m {
                    w *= (s - l as f64) / (m as f64 - l as f64);
                }
            }
            *slot = (base + m, w);
        }
        return (out, 4);
    }
    let (k, w) = slice_weight(t, steps);
    if w == 0.0 {
        out[0] = (k, 1.0);
        return (out, 1);
    }
    out[0] = (k, 1.0 - w);
    out[1] = (k + 1, w);
    (out, 2)
}

/// Largest stage table, in grid values per component, that `Isotopy` keeps.
const STAGE_TABLE_BUDGET: usize = 1 << 22;

/// Velocity components `(X¹, X²)` of one slice on the grid.
#[derive(Clone, Debug)]
struct VelocitySlice {
    x1: ScalarField,
    x2: ScalarField,
    fourier: Option<(FourierInterpolant, FourierInterpolant)>,
}

/// `X¹ = ∂₂U + c₂`, `X² = −∂₁U − c₁` on the grid, linear in time between
/// stored slices.
pub fn vector_field(g: &Generator, t: f64) -> Result<(ScalarField, ScalarField)> {
    check_time(t)?;
    let (k, w) = slice_weight(t, g.steps());
    let (a1, a2) = slice_velocity(g, k);
    if w == 0.0 {
        return Ok((a1, a2));
    }
    let (b1, b2) = slice_velocity(g, k + 1);
    Ok((
        a1.scale(1.0 - w).add_scaled(w, &b1)?,
        a2.scale(1.0 - w).add_scaled(w, &b2)?,
    ))
}

fn slice_velocity(g: &Generator, k: usize) -> (ScalarField, ScalarField) {
    let u = &g.u()[k];
    let c = g.h()[k];
    (d_theta2(u).map(|v| v + c.c2), d_theta1(u).map(|v| -v - c.c1))
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TimeOutOfRange(t));
    }
    Ok(())
}

/// A generator bound to an integrator: evaluates `φ^t(x)` and discrete maps.
#[derive(Clone, Debug)]
pub struct Isotopy {
    generator: Generator,
    config: IntegratorConfig,
    slices: Vec<VelocitySlice>,
    /// Velocity at every RK4 stage time `j/(2·substeps·T)` when it fits the
    /// budget; one stencil pass per stage instead of one per slice.
    stages: Option<Vec<(ScalarField, ScalarField)>>,
    autonomous: bool,
}

impl Isotopy {
    pub fn new(generator: Generator, config: IntegratorConfig) -> Result<Self> {
        if config.substeps == 0 {
            return Err(Error::InvalidParameter("substeps must be at least 1".into()));
        }
        let slices = (0..=generator.steps())
            .map(|k| {
                let (x1, x2) = slice_velocity(&generator, k);
                let fourier = (config.interp == Interp::Fourier)
                    .then(|| (FourierInterpolant::new(&x1), FourierInterpolant::new(&x2)));
                VelocitySlice { x1, x2, fourier }
            })
            .collect::<Vec<_>>();
        let autonomous = generator.u().windows(2).all(|w| w[0] == w[1])
            && generator.h().windows(2).all(|w| w[0] == w[1]);
        let count = 2 * config.substeps * generator.steps();
        let stages = (!autonomous
            && config.interp != Interp::Fourier
            && (count + 1) * generator.grid().len() <= STAGE_TABLE_BUDGET)
            .then(|| {
                (0..=count)
                    .map(|j| {
                        let (w, len) = time_weights(j as f64 / count as f64, generator.steps(), config.time);
                        let mut x1 = slices[w[0].0].x1.scale(w[0].1);
                        let mut x2 = slices[w[0].0].x2.scale(w[0].1);
                        for &(k, c) in &w[1..len] {
                            x1 = x1.add_scaled(c, &slices[k].x1).expect("same grid");
                            x2 = x2.add_scaled(c, &slices[k].x2).expect("same grid");
                        }
                        (x1, x2)
                    })
                    .collect()
            });
        Ok(Self {
            generator,
            config,
            slices,
            stages,
            autonomous,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn config(&self) -> IntegratorConfig {
        self.config
    }

    pub fn grid(&self) -> GridSpec {
        self.generator.grid()
    }

    fn slice_at(&self, k: usize, p: Lift, st: Option<&Stencil>) -> (f64, f64) {
        let s = &self.slices[k];
        match (st, &s.fourier) {
            (Some(st), _) => st.apply_pair(&s.x1, &s.x2),
            (None, Some((f1, f2))) => (f1.eval(p), f2.eval(p)),
            (None, None) => unreachable!("fourier slices are built for Fourier interpolation"),
        }
    }

    /// Velocity at an arbitrary point and time.
    pub fn velocity(&self, p: Lift, t: f64) -> (f64, f64) {
        let st = (self.config.interp != Interp::Fourier)
            .then(|| Stencil::new(self.grid(), self.config.interp, p));
        if self.autonomous {
            return self.slice_at(0, p, st.as_ref());
        }
        if let (Some(stages), Some(st)) = (&self.stages, &st) {
            let u = t * (stages.len() - 1) as f64;
            let j = u.round();
            if (u - j).abs() < 1e-9 {
                let (x1, x2) = &stages[j as usize];
                return st.apply_pair(x1, x2);
            }
        }
        let (w, len) = time_weights(t, self.generator.steps(), self.config.time);
        let mut v = (0.0, 0.0);
        for &(k, c) in &w[..len] {
            let a = self.slice_at(k, p, st.as_ref());
            v = (v.0 + c * a.0, v.1 + c * a.1);
        }
        v
    }

    /// One classical RK4 step. When `alpha` is given, also integrates
    /// `α(X)` along the step with the same stages.
    pub(crate) fn rk4_step(
        &self,
        p: Lift,
        t: f64,
        dt: f64,
        alpha: Option<&dyn Fn(Lift) -> (f64, f64)>,
    ) -> Result<(Lift, f64)> {
        let k1 = self.velocity(p, t);
        let p2 = p.offset(0.5 * dt * k1.0, 0.5 * dt * k1.1);
        let k2 = self.velocity(p2, t + 0.5 * dt);
        let p3 = p.offset(0.5 * dt * k2.0, 0.5 * dt * k2.1);
        let k3 = self.velocity(p3, t + 0.5 * dt);
        let p4 = p.offset(dt * k3.0, dt * k3.1);
        let k4 = self.velocity(p4, t + dt);
        let d1 = dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let d2 = dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(d1.abs() <= PI && d2.abs() <= PI) {
            return Err(Error::StepTooCoarse(d1.abs().max(d2.abs())));
        }
        let gain = match alpha {
            None => 0.0,
            Some(a) => {
                let dot = |q: Lift, v: (f64, f64)| {
                    let (a1, a2) = a(q);
                    a1 * v.0 + a2 * v.1
                };
                dt / 6.0 * (dot(p, k1) + 2.0 * dot(p2, k2) + 2.0 * dot(p3, k3) + dot(p4, k4))
            }
        };
        Ok((p.offset(d1, d2), gain))
    }

    /// Integrates from `t0` to `t1` (either direction) with steps aligned to
    /// the slice grid; returns the end point and `∫ α(X) ds` when requested.
    pub(crate) fn integrate(
        &self,
        x: Lift,
        t0: f64,
        t1: f64,
        alpha: Option<&dyn Fn(Lift) -> (f64, f64)>,
    ) -> Result<(Lift, f64)> {
        check_time(t0)?;
        check_time(t1)?;
        let m = (self.generator.steps() * self.config.substeps) as f64;
        let (mut s, end) = (t0 * m, t1 * m);
        let mut p = x;
        let mut acc = 0.0;
        const EPS: f64 = 1e-9;
        if end > s {
            while end - s > EPS {
                let next = ((s + EPS).floor() + 1.0).min(end);
                let (q, gain) = self.rk4_step(p, s / m, (next - s) / m, alpha)?;
                p = q;
                acc += gain;
                s = next;
            }
        } else {
            while s - end > EPS {
                let next = ((s - EPS).ceil() - 1.0).max(end);
                let (q, gain) = self.rk4_step(p, s / m, (next - s) / m, alpha)?;
                p = q;
                acc += gain;
                s = next;
            }
        }
        Ok((p, acc))
    }

    /// `φ^t(x)` in lifted coordinates.
    pub fn flow(&self, x: Lift, t: f64) -> Result<Lift> {
        Ok(self.integrate(x, 0.0, t, None)?.0)
    }

    /// Transport from time `t0` to `t1`, i.e. `φ^{t1}∘(φ^{t0})⁻¹(x)`.
    pub fn flow_between(&self, x: Lift, t0: f64, t1: f64) -> Result<Lift> {
        Ok(self.integrate(x, t0, t1, None)?.0)
    }

    /// `φ^t` on every grid node.
    pub fn map_at(&self, t: f64) -> Result<DiscreteMap> {
        check_time(t)?;
        let grid = self.grid();
        let images = map_nodes(grid, |x| self.flow(x, t))?;
        Ok(DiscreteMap { grid, images })
    }

    pub fn time_one_map(&self) -> Result<DiscreteMap> {
        self.map_at(1.0)
    }

    /// `(φ^t)⁻¹` on every grid node by a single backward integration.
    pub fn inverse_map_at(&self, t: f64) -> Result<DiscreteMap> {
        check_time(t)?;
        let grid = self.grid();
        let images = map_nodes(grid, |x| self.flow_between(x, t, 0.0))?;
        Ok(DiscreteMap { grid, images })
    }

    /// `φ^{t_k}` at every slice time `t_k = k/T`, from one forward sweep per node.
    pub fn forward_maps(&self) -> Result<Vec<DiscreteMap>> {
        let grid = self.grid();
        let steps = self.generator.steps();
        let trajectories = map_nodes(grid, |x| {
            let mut out = Vec::with_capacity(steps + 1);
            out.push(x);
            let mut p = x;
            for k in 0..steps {
                p = self.flow_between(p, self.generator.time(k), self.generator.time(k + 1))?;
                out.push(p);
            }
            Ok(out)
        })?;
        Ok((0..=steps)
            .map(|k| DiscreteMap {
                grid,
                images: trajectories.iter().map(|tr| tr[k]).collect(),
            })
            .collect())
    }

    /// `(φ^{t_k})⁻¹` at every slice time, built incrementally:
    /// `(φ^{t_k})⁻¹ = (φ^{t_{k−1}})⁻¹ ∘ (one-slice backward transport)`.
    pub fn inverse_maps(&self) -> Result<Vec<DiscreteMap>> {
        let grid = self.grid();
        let steps = self.generator.steps();
        let mut maps = Vec::with_capacity(steps + 1);
        maps.push(DiscreteMap::identity(grid));
        for k in 1..=steps {
            let (t0, t1) = (self.generator.time(k - 1), self.generator.time(k));
            let prev: &DiscreteMap = &maps[k - 1];
            let (d1, d2) = prev.displacement();
            let interp = self.config.interp;
            let images = map_nodes(grid, |x| {
                let y = self.flow_between(x, t1, t0)?;
                Ok(match interp {
                    Interp::Fourier => y.offset(d1.eval(y, interp), d2.eval(y, interp)),
                    _ => {
                        let st = Stencil::new(grid, interp, y);
                        y.offset(st.apply(&d1), st.apply(&d2))
                    }
                })
            })?;
            maps.push(DiscreteMap { grid, images });
        }
        Ok(maps)
    }
}

/// Evaluates `f` at every grid node, in parallel when enabled; output is in
/// node order regardless of scheduling.
pub(crate) fn map_nodes<T: Send>(
    grid: GridSpec,
    f: impl Fn(Lift) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.node_at(i)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..grid.len()).map(|i| f(grid.node_at(i))).collect()
    }
}

/// Images of all grid nodes under a map, in lifted coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMap {
    grid: GridSpec,
    images: Vec<Lift>,
}

impl DiscreteMap {
    pub fn new(grid: GridSpec, images: Vec<Lift>) -> Result<Self> {
        if images.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: images.len(),
            });
        }
        if images.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, images })
    }

    pub fn identity(grid: GridSpec) -> Self {
        Self {
            grid,
            images: (0..grid.len()).map(|i| grid.node_at(i)).collect(),
        }
    }

    /// Map `x ↦ x + displacement(x)` sampled on the grid.
    pub fn from_displacement(grid: GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self {
            grid,
            images: (0..grid.len())
                .map(|i| {
                    let x = grid.node_at(i);
                    let (d1, d2) = f(x.theta1, x.theta2);
                    x.offset(d1, d2)
                })
                .collect(),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn images(&self) -> &[Lift] {
        &self.images
    }

    pub fn image(&self, j: usize, k: usize) -> Lift {
        self.images[self.grid.index(j, k)]
    }

    /// `image − node` per component; periodic for maps isotopic to the identity.
    pub fn displacement(&self) -> (ScalarField, ScalarField) {
        let g = self.grid;
        let d1 = self
            .images
            .iter()
            .enumerate()
            .map(|(i, p)| p.theta1 - g.node_at(i).theta1)
            .collect();
        let d2 = self
            .images
            .iter()
            .enumerate()
            .map(|(i, p)| p.theta2 - g.node_at(i).theta2)
            .collect();
        (ScalarField::from_vec(g, d1), ScalarField::from_vec(g, d2))
    }

    /// Evaluates the map off-grid by interpolating its displacement.
    pub fn eval(&self, p: Lift, interp: Interp) -> Lift {
        let (d1, d2) = self.displacement();
        p.offset(d1.eval(p, interp), d2.eval(p, interp))
    }

    /// `self ∘ inner` on the grid.
    pub fn compose(&self, inner: &DiscreteMap, interp: Interp) -> Result<DiscreteMap> {
        self.grid.ensure_same(&inner.grid)?;
        let (d1, d2) = self.displacement();
        let (f1, f2) = if interp == Interp::Fourier {
            (Some(FourierInterpolant::new(&d1)), Some(FourierInterpolant::new(&d2)))
        } else {
            (None, None)
        };
        let images = inner
            .images
            .iter()
            .map(|&y| match (&f1, &f2) {
                (Some(f1), Some(f2)) => y.offset(f1.eval(y), f2.eval(y)),
                _ => {
                    let st = Stencil::new(self.grid, interp, y);
                    y.offset(st.apply(&d1), st.apply(&d2))
                }
            })
            .collect();
        Ok(DiscreteMap {
            grid: self.grid,
            images,
        })
    }

    /// Jacobian determinant from spectral derivatives of the displacement.
    pub fn jacobian_det(&self) -> ScalarField {
        let (d1, d2) = self.displacement();
        let (a, b) = (d_theta1(&d1), d_theta2(&d1));
        let (c, d) = (d_theta1(&d2), d_theta2(&d2));
        let vals = (0..self.grid.len())
            .map(|i| {
                (1.0 + a.values()[i]) * (1.0 + d.values()[i]) - b.values()[i] * c.values()[i]
            })
            .collect();
        ScalarField::from_vec(self.grid, vals)
    }

    /// Max over nodes of `|det Dφ − 1|`.
    pub fn max_det_defect(&self) -> f64 {
        self.jacobian_det().values().iter().fold(0.0, |m, v| m.max((v - 1.0).abs()))
    }
}
