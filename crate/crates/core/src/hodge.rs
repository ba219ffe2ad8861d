//! Splitting of closed 1-forms into a harmonic class representative plus an
//! exact part `dF`, with `F` found by a spectral Poisson solve.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::spectral::{exterior_derivative, potential, spectral_gradient};
use crate::torus::{OneFormField, ScalarField};

/// Default closedness tolerance for `sup |dα|`.
pub const DEFAULT_CLOSED_TOL: f64 = 1e-8;

/// Constant-coefficient form `c1 dθ₁ + c2 dθ₂`, the harmonic representative
/// of a de Rham class on the flat torus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct HarmonicForm {
    pub c1: f64,
    pub c2: f64,
}

impl HarmonicForm {
    pub const ZERO: HarmonicForm = HarmonicForm { c1: 0.0, c2: 0.0 };

    pub const fn new(c1: f64, c2: f64) -> Self {
        Self { c1, c2 }
    }

    /// `‖h‖_{L²} = 2π·sqrt(c1² + c2²)` on the 2π-torus.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(*self)
    }

    /// `h(v) = c1 v1 + c2 v2`.
    #[inline]
    pub fn apply(&self, v1: f64, v2: f64) -> f64 {
        self.c1 * v1 + self.c2 * v2
    }

    pub fn to_field(&self, grid: crate::torus::GridSpec) -> OneFormField {
        OneFormField::constant(grid, self.c1, self.c2)
    }

    pub fn lerp(&self, other: &HarmonicForm, w: f64) -> HarmonicForm {
        HarmonicForm::new(self.c1 + w * (other.c1 - self.c1), self.c2 + w * (other.c2 - self.c2))
    }
}

impl From<[f64; 2]> for HarmonicForm {
    fn from(c: [f64; 2]) -> Self {
        Self::new(c[0], c[1])
    }
}

impl From<HarmonicForm> for [f64; 2] {
    fn from(h: HarmonicForm) -> Self {
        [h.c1, h.c2]
    }
}

impl Add for HarmonicForm {
    type Output = HarmonicForm;
    fn add(self, o: HarmonicForm) -> HarmonicForm {
        HarmonicForm::new(self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl Sub for HarmonicForm {
    type Output = HarmonicForm;
    fn sub(self, o: HarmonicForm) -> HarmonicForm {
        HarmonicForm::new(self.c1 - o.c1, self.c2 - o.c2)
    }
}

impl Neg for HarmonicForm {
    type Output = HarmonicForm;
    fn neg(self) -> HarmonicForm {
        HarmonicForm::new(-self.c1, -self.c2)
    }
}

impl Mul<HarmonicForm> for f64 {
    type Output = HarmonicForm;
    fn mul(self, h: HarmonicForm) -> HarmonicForm {
        HarmonicForm::new(self * h.c1, self * h.c2)
    }
}

/// `‖h‖_{L²} = sqrt(∫ (c1² + c2²) dA)`.
pub fn l2_norm(h: HarmonicForm) -> f64 {
    TAU * h.c1.hypot(h.c2)
}

/// Linear section `H¹ → Z¹` used to pick class representatives.
///
/// `Harmonic` is the flat Hodge section. `Offset` adds a fixed exact form per
/// basis class: `S([dθ_i]) = dθ_i + dg_i`.
#[derive(Clone, Debug, Default)]
pub enum Section {
    #[default]
    Harmonic,
    Offset { g1: ScalarField, g2: ScalarField },
}

impl Section {
    /// Potential of the exact offset of `S(class) − harmonic(class)`.
    fn offset_potential(&self, class: HarmonicForm) -> Option<ScalarField> {
        match self {
            Section::Harmonic => None,
            Section::Offset { g1, g2 } => Some(
                g1.scale(class.c1)
                    .add_scaled(class.c2, g2)
                    .expect("section offsets share a grid")
                    .recentered(),
            ),
        }
    }
}

/// Result of splitting a closed form: `α = S(class) + dF`.
///
/// JSON form: `{"c1": .., "c2": .., "potential": <field envelope>}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SplitFormJson", into = "SplitFormJson")]
pub struct SplitForm {
    pub harmonic: HarmonicForm,
    pub potential: ScalarField,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitFormJson {
    c1: f64,
    c2: f64,
    potential: ScalarField,
}

impl From<SplitFormJson> for SplitForm {
    fn from(j: SplitFormJson) -> Self {
        Self {
            harmonic: HarmonicForm::new(j.c1, j.c2),
            potential: j.potential,
        }
    }
}

impl From<SplitForm> for SplitFormJson {
    fn from(s: SplitForm) -> Self {
        Self {
            c1: s.harmonic.c1,
            c2: s.harmonic.c2,
            potential: s.potential,
        }
    }
}

impl SplitForm {
    /// `harmonic + dF` on the grid.
    pub fn reconstruct(&self) -> OneFormField {
        let df = spectral_gradient(&self.potential);
        df.add_scaled(1.0, &self.harmonic.to_field(self.potential.grid()))
            .expect("same grid")
    }
}

/// `true` iff `sup |dα| ≤ tol`.
pub fn is_closed(alpha: &OneFormField, tol: f64) -> bool {
    exterior_derivative(alpha).sup_norm() <= tol
}

/// Returns `Err(NotClosed)` when `sup |dα| > tol`.
pub fn ensure_closed(alpha: &OneFormField, tol: f64) -> Result<()> {
    let defect = exterior_derivative(alpha).sup_norm();
    if defect > tol {
        return Err(Error::NotClosed { defect, tol });
    }
    Ok(())
}

/// Hodge split with the harmonic section.
pub fn split(alpha: &OneFormField, tol: f64) -> Result<SplitForm> {
    split_with(&Section::Harmonic, alpha, tol)
}

/// Split against an arbitrary section. The harmonic coefficients are the
/// component means; the potential is the zero-mean solution of
/// `ΔF = div(α)`, shifted by the section's offset.
pub fn split_with(section: &Section, alpha: &OneFormField, tol: f64) -> Result<SplitForm> {
    ensure_closed(alpha, tol)?;
    let harmonic = HarmonicForm::new(alpha.a1().mean(), alpha.a2().mean());
    let f = potential(alpha);
    let residual = spectral_gradient(&f)
        .add_scaled(1.0, &harmonic.to_field(alpha.grid()))?
        .max_abs_diff(alpha)?;
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tol });
    }
    let potential = match section.offset_potential(harmonic) {
        Some(off) => &f - &off,
        None => f,
    };
    Ok(SplitForm { harmonic, potential })
}
