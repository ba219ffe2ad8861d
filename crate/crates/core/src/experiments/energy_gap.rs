use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{Check, ResultTable};
use crate::error::{Error, Result};
use crate::generators::recipe::Recipe;
use crate::generators::{calibrator_slices, inverse, product, Generator, IntegratorConfig, Isotopy};
use crate::hodge::HarmonicForm;
use crate::invariants::delta_tilde_field;
use crate::metrics::{dbar, length, osc, MapPath};
use crate::torus::{lift_distance, torus_distance, GridSpec, OneFormField, Point, ScalarField};

/// Sign of the bump offset `c` in `K₁ = (a(t) + c)β`, `K₂ = (b(t) − c)β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `c = (ε − 3CE)/2`.
    AsStated,
    /// `c = (3CE − ε)/2`.
    Flipped,
}

impl SignConvention {
    pub fn offset(&self, c: f64, e: f64, eps: f64) -> f64 {
        match self {
            SignConvention::AsStated => 0.5 * (eps - 3.0 * c * e),
            SignConvention::Flipped => 0.5 * (3.0 * c * e - eps),
        }
    }

    fn code(&self) -> f64 {
        match self {
            SignConvention::AsStated => 0.0,
            SignConvention::Flipped => 1.0,
        }
    }
}

fn d_steps() -> usize {
    8
}
fn d_substeps() -> usize {
    2
}
fn d_energy() -> f64 {
    1.0
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_center() -> [f64; 2] {
    [PI, PI]
}
fn d_alpha() -> [f64; 2] {
    [1.0, 0.0]
}
fn d_kappa() -> f64 {
    1.0
}
fn d_directions() -> usize {
    64
}
fn d_conventions() -> Vec<SignConvention> {
    vec![SignConvention::AsStated, SignConvention::Flipped]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyGapSpec {
    pub grid: GridSpec,
    /// Base isotopy `Φ`.
    pub base: Recipe,
    /// Rescales the base generator to this length when set.
    #[serde(default)]
    pub base_length: Option<f64>,
    /// Probe `ψ`; identity when absent.
    #[serde(default)]
    pub probe: Option<Recipe>,
    #[serde(default = "d_steps")]
    pub steps: usize,
    #[serde(default = "d_substeps")]
    pub substeps: usize,
    #[serde(default = "d_energy")]
    pub energy: f64,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    #[serde(default = "d_center")]
    pub center: [f64; 2],
    /// Disc radius; defaults to `epsilon`.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Peak of the bump `β`; defaults to `1e-3`, capped by
    /// `osc(β) ≤ ε/(CE + ε)`. Larger peaks push `d̄(Φ_k, Φ)` past `ε/2`.
    #[serde(default)]
    pub bump_amplitude: Option<f64>,
    /// Constant coefficients of the closed form `α`.
    #[serde(default = "d_alpha")]
    pub alpha: [f64; 2],
    #[serde(default = "d_kappa")]
    pub kappa: f64,
    /// Harmonic directions used to estimate `C(α)`.
    #[serde(default = "d_directions")]
    pub directions: usize,
    #[serde(default = "d_conventions")]
    pub conventions: Vec<SignConvention>,
}

impl EnergyGapSpec {
    /// Reciprocal shear base of the given length on `grid`, identity probe.
    pub fn with_shear_base(grid: GridSpec, i: usize, base_length: f64) -> Self {
        Self {
            grid,
            base: Recipe::Shear {
                grid,
                steps: d_steps(),
                family: super::ProfileFamily::Reciprocal,
                i,
                scale: 1.0,
            },
            base_length: Some(base_length),
            probe: None,
            steps: d_steps(),
            substeps: d_substeps(),
            energy: d_energy(),
            epsilon: d_epsilon(),
            center: d_center(),
            radius: None,
            bump_amplitude: None,
            alpha: d_alpha(),
            kappa: d_kappa(),
            directions: d_directions(),
            conventions: d_conventions(),
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or(self.epsilon)
    }
}

const DEFAULT_BUMP_AMPLITUDE: f64 = 1e-3;

/// `amplitude · exp(1 − 1/(1 − ρ²/r²))` inside the disc, zero outside.
pub fn bump(grid: GridSpec, center: Point, radius: f64, amplitude: f64) -> ScalarField {
    ScalarField::from_fn(grid, |a, b| {
        let rho = torus_distance(Point::new(a, b), center) / radius;
        if rho >= 1.0 {
            0.0
        } else {
            amplitude * (1.0 - 1.0 / (1.0 - rho * rho)).exp()
        }
    })
}

/// Position of `z` and its image `w` relative to a disc.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportCase {
    BothInside,
    LeavesDisc,
    EntersDisc,
    BothOutside,
}

/// Classifies `(z, w)` and returns `f(w) − f(z)` for a function `f`
/// supported in the disc: only the terms from points inside survive.
pub fn support_case(center: Point, radius: f64, z: Point, w: Point, f: impl Fn(Point) -> f64) -> (SupportCase, f64) {
    let zin = torus_distance(z, center) < radius;
    let win = torus_distance(w, center) < radius;
    match (zin, win) {
        (true, true) => (SupportCase::BothInside, f(w) - f(z)),
        (true, false) => (SupportCase::LeavesDisc, -f(z)),
        (false, true) => (SupportCase::EntersDisc, f(w)),
        (false, false) => (SupportCase::BothOutside, 0.0),
    }
}

/// `C(α) = max |α(X)|/‖ι_Xω‖_{L²}` over unit harmonic `X`; `‖ι_Xω‖ = 2π|X|`.
fn c_alpha(alpha: [f64; 2], directions: usize) -> f64 {
    (0..directions.max(1))
        .map(|k| {
            let a = TAU * k as f64 / directions.max(1) as f64;
            (alpha[0] * a.cos() + alpha[1] * a.sin()).abs() / TAU
        })
        .fold(0.0, f64::max)
}

pub const COLUMNS: [&str; 12] = [
    "convention",
    "k",
    "offset",
    "length",
    "length_budget",
    "dbar_to_base",
    "delta_max",
    "delta_min",
    "delta_at_center",
    "threshold_ce",
    "threshold_2ce",
    "bump_osc",
];

/// One stage of the energy-gap construction: bump Hamiltonians `K₁, K₂`
/// riding on the calibrator extremes over the disc, composed with the base,
/// with distances, lengths and the Δ dichotomy against the probe.
pub fn energy_gap_experiment(spec: &EnergyGapSpec) -> Result<ResultTable> {
    let grid = spec.grid;
    let (e, eps, r) = (spec.energy, spec.epsilon, spec.radius());
    if !(e > 0.0 && eps > 0.0 && r > 0.0 && r < PI) {
        return Err(Error::InvalidParameter("energy, epsilon and radius must be positive, radius below pi".into()));
    }
    let integrator = IntegratorConfig::accurate(spec.substeps);
    let mut base = spec.base.build()?;
    grid.ensure_same(&base.grid())?;
    if base.steps() != spec.steps {
        return Err(Error::ShapeMismatch(format!(
            "base has T = {}, spec asks for T = {}",
            base.steps(),
            spec.steps
        )));
    }
    if let Some(target) = spec.base_length {
        let l = length(&base, spec.kappa).total;
        if l > 0.0 {
            base = base.scaled(target / l);
        }
    }
    let base_len = length(&base, spec.kappa).total;
    if base_len >= e {
        return Err(Error::LengthBudgetExceeded { length: base_len, budget: e });
    }

    let c_a = c_alpha(spec.alpha, spec.directions);
    let c = 2.0 * c_a.max(2.0);
    let amp = spec.bump_amplitude.unwrap_or((eps / (c * e + eps)).min(DEFAULT_BUMP_AMPLITUDE));
    let center = Point::new(spec.center[0], spec.center[1]);
    let beta = bump(grid, center, r, amp);
    let beta_osc = osc(&beta);

    let alpha = OneFormField::constant(grid, spec.alpha[0], spec.alpha[1]);
    let alpha_l2 = alpha.l2_norm();
    if alpha_l2 == 0.0 {
        return Err(Error::ZeroForm);
    }
    let base_iso = Isotopy::new(base.clone(), integrator)?;
    let cal = calibrator_slices(&base_iso, &alpha)?;
    let disc: Vec<usize> = (0..grid.len())
        .filter(|&i| lift_distance(grid.node_at(i), center.lift()) < r)
        .collect();
    if disc.is_empty() {
        return Err(Error::InvalidParameter("disc contains no grid node".into()));
    }
    let a_t: Vec<f64> = cal.iter().map(|f| disc.iter().map(|&i| f.values()[i]).fold(f64::MIN, f64::max)).collect();
    let b_t: Vec<f64> = cal.iter().map(|f| disc.iter().map(|&i| f.values()[i]).fold(f64::MAX, f64::min)).collect();

    let probe = match &spec.probe {
        Some(r) => r.build()?,
        None => Generator::zero(grid, spec.steps),
    };
    let probe_inv = inverse(&probe, integrator)?;
    let base_path = MapPath::from_isotopy(&base_iso)?;
    let center_node = nearest(grid, center);

    let mut table = ResultTable::new("energy_gap", spec, grid.n(), spec.steps, None, &COLUMNS)?;
    let thr_ce = c * e - eps;
    let thr_2ce = 2.0 * c * e - eps;
    for conv in &spec.conventions {
        let off = conv.offset(c, e, eps);
        let k1 = Generator::from_fn(grid, spec.steps, |t| {
            let k = (t * spec.steps as f64).round() as usize;
            (beta.scale(a_t[k] + off), HarmonicForm::ZERO)
        })?;
        let k2 = Generator::from_fn(grid, spec.steps, |t| {
            let k = (t * spec.steps as f64).round() as usize;
            (beta.scale(b_t[k] - off), HarmonicForm::ZERO)
        })?;
        let mut extremes = [(0.0, 0.0, 0.0); 2];
        for (idx, kgen) in [k1, k2].iter().enumerate() {
            let phi_k = product(kgen, &base, integrator)?;
            let len = length(&phi_k, spec.kappa).total;
            let iso_k = Isotopy::new(phi_k.clone(), integrator)?;
            let dist = dbar(&MapPath::from_isotopy(&iso_k)?, &base_path)?;
            let probed = Isotopy::new(product(&phi_k, &probe_inv, integrator)?, integrator)?;
            let d = delta_tilde_field(&probed, &alpha)?.scale(1.0 / alpha_l2);
            extremes[idx] = (d.max(), d.min(), d.values()[center_node]);
            table.push(vec![
                conv.code(),
                (idx + 1) as f64,
                off,
                len,
                e + eps,
                dist,
                d.max(),
                d.min(),
                d.values()[center_node],
                thr_ce,
                thr_2ce,
                beta_osc,
            ]);
        }
        let gap = extremes[1].0.max(-extremes[0].1);
        let tag = match conv {
            SignConvention::AsStated => "as_stated",
            SignConvention::Flipped => "flipped",
        };
        table.checks.push(Check::new(
            &format!("dichotomy_ce_{tag}"),
            gap >= thr_ce,
            format!("max(Δ₂, −Δ₁) = {gap:.4} vs CE − ε = {thr_ce:.4}"),
        ));
        table.checks.push(Check::new(
            &format!("dichotomy_2ce_{tag}"),
            gap >= thr_2ce,
            format!("max(Δ₂, −Δ₁) = {gap:.4} vs 2CE − ε = {thr_2ce:.4}"),
        ));
    }
    let lengths = table.column("length").expect("column");
    table.checks.push(Check::new(
        "lengths_within_budget",
        lengths.iter().all(|&l| l <= e + eps + 1e-6),
        format!("{lengths:?} vs {}", e + eps),
    ));
    let dists = table.column("dbar_to_base").expect("column");
    table.checks.push(Check::new(
        "dbar_within_half_epsilon",
        dists.iter().all(|&d| d <= 0.5 * eps),
        format!("{dists:?}"),
    ));
    table.checks.push(Check::new(
        "bump_osc_within_bound",
        beta_osc <= eps / (c * e + eps) + 1e-15,
        format!("osc β = {beta_osc:.3e}"),
    ));

    let x = &mut table.metadata.extra;
    x.insert("working_c".into(), c);
    x.insert("c_alpha".into(), c_a);
    x.insert("base_length".into(), base_len);
    x.insert("radius".into(), r);
    x.insert("bump_amplitude".into(), amp);
    x.insert("a_max".into(), a_t.iter().copied().fold(f64::MIN, f64::max));
    x.insert("b_min".into(), b_t.iter().copied().fold(f64::MAX, f64::min));
    x.insert("disc_nodes".into(), disc.len() as f64);
    Ok(table)
}

fn nearest(grid: GridSpec, p: Point) -> usize {
    let h = grid.spacing();
    let n = grid.n();
    grid.index(((p.theta1() / h).round() as usize) % n, ((p.theta2() / h).round() as usize) % n)
}
