//! Discretization of the flat torus `[0, 2π)²`: grids, points, fields,
//! curves, quadrature and spectral calculus.
//!
//! Field values are stored row-major with the first index running along
//! θ₁ and the second along θ₂, so `values[j * n + k] ≈ f(2πj/n, 2πk/n)`.

mod curve;
mod field;
mod interp;
pub mod spectral;

pub use curve::{line_integral, line_integral_with, Curve};
pub use field::{FieldEnvelope, OneFormField, ScalarField};
pub use interp::{FourierInterpolant, Interp, Stencil};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Period of each axis.
pub const PERIOD: f64 = TAU;

/// Area of the flat torus `[0, 2π)²` with ω = dθ₁∧dθ₂.
pub const AREA: f64 = TAU * TAU;

/// Uniform periodic grid with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n²`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        PERIOD / self.n as f64
    }

    /// Coordinate of grid index `j` along either axis.
    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n + k
    }

    /// Grid node `(j, k)` as a lifted point.
    #[inline]
    pub fn node(&self, j: usize, k: usize) -> Lift {
        Lift::new(self.coord(j), self.coord(k))
    }

    /// Node for flat index `idx`.
    #[inline]
    pub fn node_at(&self, idx: usize) -> Lift {
        self.node(idx / self.n, idx % self.n)
    }

    /// Area element of one cell, `(2π/n)²`.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}

impl TryFrom<usize> for GridSpec {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        GridSpec::new(n)
    }
}

impl From<GridSpec> for usize {
    fn from(g: GridSpec) -> usize {
        g.n
    }
}

/// Reduce an angle into `[0, 2π)`.
#[inline]
pub fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(PERIOD);
    // rem_euclid can round up to exactly PERIOD for tiny negative inputs
    if r >= PERIOD {
        0.0
    } else {
        r
    }
}

/// Shortest signed representative of an angle difference, in `[-π, π)`.
#[inline]
pub fn wrap_signed(delta: f64) -> f64 {
    wrap(delta + PI) - PI
}

/// A point of the torus, coordinates reduced mod 2π.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    theta1: f64,
    theta2: f64,
}

impl Point {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self {
            theta1: wrap(theta1),
            theta2: wrap(theta2),
        }
    }

    #[inline]
    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    #[inline]
    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    #[inline]
    pub fn lift(&self) -> Lift {
        Lift::new(self.theta1, self.theta2)
    }
}

/// Unreduced coordinates in the universal cover ℝ². Flows return lifts so
/// that winding information survives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub theta1: f64,
    pub theta2: f64,
}

impl Lift {
    #[inline]
    pub const fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }

    #[inline]
    pub fn reduce(&self) -> Point {
        Point::new(self.theta1, self.theta2)
    }

    #[inline]
    pub fn offset(&self, d1: f64, d2: f64) -> Lift {
        Lift::new(self.theta1 + d1, self.theta2 + d2)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.theta1.is_finite() && self.theta2.is_finite()
    }
}

impl From<Point> for Lift {
    fn from(p: Point) -> Self {
        p.lift()
    }
}

/// Flat distance on the torus with wrap-around in each coordinate.
pub fn torus_distance(p: Point, q: Point) -> f64 {
    lift_distance(p.lift(), q.lift())
}

/// `torus_distance` for lifted inputs; the lifts are reduced first.
#[inline]
pub fn lift_distance(p: Lift, q: Lift) -> f64 {
    circle_gap(p.theta1, q.theta1).hypot(circle_gap(p.theta2, q.theta2))
}

// Computed from |a − b| so the result is exactly symmetric in its arguments.
#[inline]
fn circle_gap(a: f64, b: f64) -> f64 {
    let r = (a - b).abs() % TAU;
    r.min(TAU - r)
}

/// Grid quadrature of `∫_{T²} f dA`; exact for trigonometric polynomials of
/// degree below `n`.
pub fn integrate_scalar(f: &ScalarField) -> f64 {
    f.sum() * f.grid().cell_area()
}
