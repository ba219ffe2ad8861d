use std::f64::consts::{LN_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{build_shear, strictly_increasing, Check, ProfileFamily, ResultTable, ShearProfileSpec};
use crate::error::{Error, Result};
use crate::generators::{IntegratorConfig, Isotopy};
use crate::invariants::delta;
use crate::metrics::{d_c0, length};
use crate::torus::{GridSpec, Interp, OneFormField, Point, AREA};

fn default_substeps() -> usize {
    2
}

fn default_kappa() -> f64 {
    1.0
}

fn default_basepoint() -> [f64; 2] {
    [0.0, PI]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub family: ProfileFamily,
    pub i_list: Vec<usize>,
    pub grid: GridSpec,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_basepoint")]
    pub basepoint: [f64; 2],
    #[serde(default)]
    pub interp: Option<Interp>,
}

impl DivergenceConfig {
    pub fn new(family: ProfileFamily, i_list: Vec<usize>, grid: GridSpec) -> Self {
        Self {
            family,
            i_list,
            grid,
            substeps: default_substeps(),
            kappa: default_kappa(),
            basepoint: default_basepoint(),
            interp: None,
        }
    }
}

/// Columns of the divergence table.
pub const COLUMNS: [&str; 8] = [
    "i",
    "delta_tilde",
    "delta_tilde_closed_form",
    "rel_discrepancy",
    "length",
    "dc0_to_finest",
    "profile_integral",
    "det_defect",
];

/// Δ̃(φ_i, dθ₁) along a cutoff family, by trajectory integration and by the
/// closed form `∫h_i dA − Vol·h_i(x₂)`, plus lengths and C⁰ distances to the
/// finest map.
pub fn divergence_experiment(config: &DivergenceConfig) -> Result<ResultTable> {
    if config.i_list.is_empty() {
        return Err(Error::EmptyList);
    }
    if !config.i_list.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("i_list must be strictly increasing".into()));
    }
    let grid = config.grid;
    let integrator = IntegratorConfig {
        interp: config.interp.unwrap_or(Interp::Quintic),
        ..IntegratorConfig::accurate(config.substeps)
    };
    let x = Point::new(config.basepoint[0], config.basepoint[1]);
    let alpha = OneFormField::constant(grid, 1.0, 0.0);

    let mut isos = Vec::with_capacity(config.i_list.len());
    let mut specs = Vec::with_capacity(config.i_list.len());
    for &i in &config.i_list {
        let spec = ShearProfileSpec::new(config.family, i);
        let g = build_shear(&spec, grid, 1)?;
        // keep every RK4 step below half a unit of displacement
        let substeps = integrator.substeps.max((2.0 * g.max_speed()).ceil() as usize);
        isos.push(Isotopy::new(g, IntegratorConfig { substeps, ..integrator })?);
        specs.push(spec);
    }
    let maps = isos.iter().map(|iso| iso.time_one_map()).collect::<Result<Vec<_>>>()?;
    let finest = maps.last().expect("nonempty");

    let mut table = ResultTable::new("divergence", config, grid.n(), 1, None, &COLUMNS)?;
    for (k, (&i, (iso, spec))) in config.i_list.iter().zip(isos.iter().zip(&specs)).enumerate() {
        let report = delta(iso, &alpha, x)?;
        let tilde = report.tilde();
        let integral = spec.integral();
        let closed = TAU * integral - AREA * spec.eval(x.theta2());
        let rel = (tilde - closed).abs() / closed.abs().max(f64::MIN_POSITIVE);
        table.push(vec![
            i as f64,
            tilde,
            closed,
            rel,
            length(iso.generator(), config.kappa).total,
            d_c0(&maps[k], finest)?,
            integral,
            maps[k].max_det_defect(),
        ]);
    }

    let tilde = table.column("delta_tilde").expect("column");
    let rel = table.column("rel_discrepancy").expect("column");
    let dc0 = table.column("dc0_to_finest").expect("column");
    let increasing = strictly_increasing(&tilde);
    table.checks.push(Check::new(
        "delta_tilde_strictly_increasing",
        increasing || config.family == ProfileFamily::Constant,
        format!("{tilde:?}"),
    ));
    let worst = rel.iter().copied().fold(0.0, f64::max);
    table.checks.push(Check::new(
        "closed_form_agreement",
        worst <= 1e-3 || config.family == ProfileFamily::Constant,
        format!("max relative discrepancy {worst:.3e}"),
    ));
    let dc0_prefix = &dc0[..dc0.len().saturating_sub(1)];
    table.checks.push(Check::new(
        "dc0_nonincreasing",
        dc0_prefix.windows(2).all(|w| w[1] <= w[0]),
        format!("{dc0:?}"),
    ));
    table.metadata.extra.insert("doubling_floor".into(), 0.5 * AREA * LN_2);
    table.metadata.extra.insert("ideal_doubling_increment".into(), TAU * LN_2);
    Ok(table)
}

/// `Δ̃(2i) − Δ̃(i)` for consecutive entries whose indices double.
pub fn doubling_increments(table: &ResultTable) -> Vec<(usize, f64)> {
    let i = table.column("i").unwrap_or_default();
    let d = table.column("delta_tilde").unwrap_or_default();
    (1..i.len())
        .filter(|&k| i[k] == 2.0 * i[k - 1])
        .map(|k| (i[k - 1] as usize, d[k] - d[k - 1]))
        .collect()
}
