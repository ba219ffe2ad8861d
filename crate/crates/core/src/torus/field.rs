use std::io::{Read, Write};
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};

/// Periodic samples of a real function on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_vec(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            let a = grid.coord(j);
            for k in 0..n {
                values.push(f(a, grid.coord(k)));
            }
        }
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(j, k)]
    }

    /// Value at integer indices taken modulo `n`.
    #[inline]
    pub(crate) fn get_wrapped(&self, j: isize, k: isize) -> f64 {
        let n = self.grid.n() as isize;
        let j = j.rem_euclid(n) as usize;
        let k = k.rem_euclid(n) as usize;
        self.values[j * n as usize + k]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Grid average; this is the ω-mean `∫f ω / ∫ω` under grid quadrature.
    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_vec(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + s * b)
    }

    /// Copy with the grid mean subtracted.
    pub fn recentered(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Row-major CSV: `n` lines of `n` comma-separated values, line `j`
    /// holding θ₁ index `j`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for row in self.values.chunks(self.grid.n()) {
            wr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut values = Vec::new();
        let mut rows = 0;
        for rec in rd.records() {
            let rec = rec?;
            for cell in rec.iter() {
                let v: f64 = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad csv value `{cell}`")))?;
                values.push(v);
            }
            rows += 1;
        }
        let grid = GridSpec::new(rows)?;
        Self::new(grid, values)
    }

    pub fn to_envelope(&self) -> FieldEnvelope {
        FieldEnvelope::Scalar {
            grid: self.grid.n(),
            data: self.values.clone(),
        }
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;

    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b).expect("grid mismatch in field addition")
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;

    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b).expect("grid mismatch in field subtraction")
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;

    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// A 1-form `a1 dθ₁ + a2 dθ₂` sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    a1: ScalarField,
    a2: ScalarField,
}

impl OneFormField {
    pub fn new(a1: ScalarField, a2: ScalarField) -> Result<Self> {
        a1.grid.ensure_same(&a2.grid)?;
        Ok(Self { a1, a2 })
    }

    pub fn from_fns(
        grid: GridSpec,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            a1: ScalarField::from_fn(grid, f1),
            a2: ScalarField::from_fn(grid, f2),
        }
    }

    /// Constant-coefficient form `c1 dθ₁ + c2 dθ₂`.
    pub fn constant(grid: GridSpec, c1: f64, c2: f64) -> Self {
        Self {
            a1: ScalarField::constant(grid, c1),
            a2: ScalarField::constant(grid, c2),
        }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.a1.grid
    }

    #[inline]
    pub fn a1(&self) -> &ScalarField {
        &self.a1
    }

    #[inline]
    pub fn a2(&self) -> &ScalarField {
        &self.a2
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.a1, self.a2)
    }

    pub fn sup_norm(&self) -> f64 {
        self.a1.sup_norm().max(self.a2.sup_norm())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a1: self.a1.scale(s),
            a2: self.a2.scale(s),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &OneFormField) -> Result<Self> {
        Ok(Self {
            a1: self.a1.add_scaled(s, &other.a1)?,
            a2: self.a2.add_scaled(s, &other.a2)?,
        })
    }

    pub fn max_abs_diff(&self, other: &OneFormField) -> Result<f64> {
        Ok(self
            .a1
            .max_abs_diff(&other.a1)?
            .max(self.a2.max_abs_diff(&other.a2)?))
    }

    /// Pointwise L² norm `sqrt(∫ (a1² + a2²) dA)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .a1
            .values
            .iter()
            .zip(&self.a2.values)
            .map(|(a, b)| a * a + b * b)
            .sum();
        (s * self.grid().cell_area()).sqrt()
    }

    pub fn to_envelope(&self) -> FieldEnvelope {
        FieldEnvelope::OneForm {
            grid: self.grid().n(),
            data: [self.a1.values.clone(), self.a2.values.clone()],
        }
    }
}

/// Self-describing JSON form of a field: `{"kind": ..., "grid": N, "data": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldEnvelope {
    Scalar { grid: usize, data: Vec<f64> },
    OneForm { grid: usize, data: [Vec<f64>; 2] },
}

impl FieldEnvelope {
    pub fn into_scalar(self) -> Result<ScalarField> {
        match self {
            FieldEnvelope::Scalar { grid, data } => ScalarField::new(GridSpec::new(grid)?, data),
            FieldEnvelope::OneForm { .. } => {
                Err(Error::Config("expected kind `scalar`, found `one_form`".into()))
            }
        }
    }

    pub fn into_one_form(self) -> Result<OneFormField> {
        match self {
            FieldEnvelope::OneForm { grid, data } => {
                let g = GridSpec::new(grid)?;
                let [a1, a2] = data;
                OneFormField::new(ScalarField::new(g, a1)?, ScalarField::new(g, a2)?)
            }
            FieldEnvelope::Scalar { .. } => {
                Err(Error::Config("expected kind `one_form`, found `scalar`".into()))
            }
        }
    }
}

impl Serialize for ScalarField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_envelope().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FieldEnvelope::deserialize(d)?
            .into_scalar()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for OneFormField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_envelope().serialize(s)
    }
}

impl<'de> Deserialize<'de> for OneFormField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FieldEnvelope::deserialize(d)?
            .into_one_form()
            .map_err(serde::de::Error::custom)
    }
}
