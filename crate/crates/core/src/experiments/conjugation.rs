use serde::{Deserialize, Serialize};

use super::{build_shear, Check, ProfileFamily, ResultTable, ShearProfileSpec};
use crate::error::{Error, Result};
use crate::generators::recipe::Recipe;
use crate::generators::{conjugate, harmonic_calibrator_potential, Generator, IntegratorConfig, Isotopy};
use crate::hodge::{l2_norm, HarmonicForm};
use crate::invariants::dictionary_direction;
use crate::metrics::{length, osc};
use crate::torus::GridSpec;

fn default_substeps() -> usize {
    2
}

fn default_kappa() -> f64 {
    1.0
}

fn default_directions() -> usize {
    16
}

fn default_probe_steps() -> usize {
    10
}

/// Probe maps `ψ` are time-one maps of random smooth generators (one per
/// seed) unless explicit recipes are given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugationConfig {
    pub grid: GridSpec,
    pub family: ProfileFamily,
    pub i_list: Vec<usize>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub probe_seeds: Vec<u64>,
    #[serde(default)]
    pub probes: Vec<Recipe>,
    #[serde(default = "default_probe_steps")]
    pub probe_steps: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

impl ConjugationConfig {
    pub fn new(grid: GridSpec, family: ProfileFamily, i_list: Vec<usize>, probe_seeds: Vec<u64>) -> Self {
        Self {
            grid,
            family,
            i_list,
            scale: None,
            probe_seeds,
            probes: Vec::new(),
            probe_steps: default_probe_steps(),
            directions: default_directions(),
            substeps: default_substeps(),
            kappa: default_kappa(),
        }
    }

    fn probe_generators(&self) -> Result<Vec<Generator>> {
        let mut out: Vec<Generator> = self
            .probe_seeds
            .iter()
            .map(|&s| Generator::random_band_limited(self.grid, self.probe_steps, s, 2, 1.0))
            .collect();
        for r in &self.probes {
            out.push(r.build()?);
        }
        if out.is_empty() {
            return Err(Error::EmptyList);
        }
        Ok(out)
    }
}

pub const COLUMNS: [&str; 7] = [
    "i",
    "probe",
    "length",
    "conjugated_length",
    "bound",
    "ratio",
    "probe_b_hat",
];

/// Lengths of `ψ⁻¹∘φ_i∘ψ` against `2(B̂ + 1)·length(φ_i)`, with
/// `B̂ = max osc(F̃^K_ψ)/‖K‖_{L²}` over a harmonic dictionary, the
/// harmonic parts of the family, and all probes.
pub fn conjugation_experiment(config: &ConjugationConfig) -> Result<ResultTable> {
    let grid = config.grid;
    let integrator = IntegratorConfig::accurate(config.substeps);
    let gs = config
        .i_list
        .iter()
        .map(|&i| {
            let spec = ShearProfileSpec {
                family: config.family,
                i,
                scale: config.scale.unwrap_or(1.0),
            };
            build_shear(&spec, grid, 1)
        })
        .collect::<Result<Vec<_>>>()?;
    if gs.is_empty() {
        return Err(Error::EmptyList);
    }
    let probes = config.probe_generators()?;
    let psi_maps = probes
        .iter()
        .map(|p| Isotopy::new(p.clone(), integrator)?.time_one_map())
        .collect::<Result<Vec<_>>>()?;

    let mut dirs: Vec<HarmonicForm> = (0..config.directions.max(1))
        .map(|k| dictionary_direction(k, config.directions.max(1)))
        .collect();
    dirs.extend(gs.iter().flat_map(|g| g.h().iter().copied()).filter(|h| l2_norm(*h) > 0.0));
    let probe_b: Vec<f64> = psi_maps
        .iter()
        .map(|m| {
            dirs.iter()
                .map(|&k| osc(&harmonic_calibrator_potential(m, k)) / l2_norm(k))
                .fold(0.0, f64::max)
        })
        .collect();
    let b_hat = probe_b.iter().copied().fold(0.0, f64::max);

    let mut table = ResultTable::new("conjugation", config, grid.n(), 1, None, &COLUMNS)?;
    table.metadata.extra.insert("b_hat".into(), b_hat);
    let mut violations = 0;
    for (&i, g) in config.i_list.iter().zip(&gs) {
        let base = length(g, config.kappa).total;
        let bound = 2.0 * (b_hat + 1.0) * base;
        for (p, m) in psi_maps.iter().enumerate() {
            let conj = length(&conjugate(g, m, integrator.interp)?, config.kappa).total;
            if conj > bound {
                violations += 1;
            }
            let ratio = if base > 0.0 { conj / base } else { 0.0 };
            table.push(vec![i as f64, p as f64, base, conj, bound, ratio, probe_b[p]]);
        }
    }
    table.checks.push(Check::new(
        "conjugated_length_within_bound",
        violations == 0,
        format!("{violations} violating rows, B̂ = {b_hat:.6}"),
    ));
    Ok(table)
}
