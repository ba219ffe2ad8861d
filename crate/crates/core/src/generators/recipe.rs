//! JSON recipes for named generator families.
//!
//! ```json
//! {"recipe": "random", "grid": 64, "steps": 50, "seed": 7}
//! {"recipe": "shear", "grid": 256, "family": "reciprocal", "i": 8}
//! {"recipe": "translation", "grid": 32, "h": [0.0, 1.0]}
//! ```

use serde::{Deserialize, Serialize};

use super::Generator;
use crate::error::{Error, Result};
use crate::experiments::{build_shear, ProfileFamily, ShearProfileSpec};
use crate::hodge::HarmonicForm;
use crate::torus::GridSpec;

fn one() -> usize {
    1
}

fn two() -> usize {
    2
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    Zero {
        grid: GridSpec,
        #[serde(default = "one")]
        steps: usize,
    },
    Translation {
        grid: GridSpec,
        #[serde(default = "one")]
        steps: usize,
        h: HarmonicForm,
    },
    Random {
        grid: GridSpec,
        #[serde(default = "one")]
        steps: usize,
        seed: u64,
        #[serde(default = "two")]
        modes: usize,
        #[serde(default = "unit")]
        max_speed: f64,
    },
    Shear {
        grid: GridSpec,
        #[serde(default = "one")]
        steps: usize,
        family: ProfileFamily,
        i: usize,
        #[serde(default = "unit")]
        scale: f64,
    },
}

impl Recipe {
    pub fn build(&self) -> Result<Generator> {
        match *self {
            Recipe::Zero { grid, steps } => Ok(Generator::zero(grid, steps)),
            Recipe::Translation { grid, steps, h } => Ok(Generator::translation(grid, steps, h)),
            Recipe::Random {
                grid,
                steps,
                seed,
                modes,
                max_speed,
            } => {
                if modes == 0 || 2 * modes >= grid.n() / 2 {
                    return Err(Error::InvalidParameter(format!(
                        "modes = {modes} does not fit a {}-grid",
                        grid.n()
                    )));
                }
                Ok(Generator::random_band_limited(grid, steps, seed, modes, max_speed))
            }
            Recipe::Shear {
                grid,
                steps,
                family,
                i,
                scale,
            } => build_shear(&ShearProfileSpec { family, i, scale }, grid, steps),
        }
    }
}

/// Reads either a recipe (object with a `"recipe"` key) or a serialized
/// generator.
pub fn load_generator(json: &str) -> Result<Generator> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if value.get("recipe").is_some() {
        let r: Recipe = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        r.build()
    } else {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }
}
