//! Numerical calculus of symplectic isotopies on the flat 2-torus.
//!
//! An isotopy is presented by its generator `(U, H)`: a path of zero-mean
//! functions `U^t` and a path of harmonic 1-forms `H^t` with
//! `ι_{φ̇^t} ω = dU^t + H^t` for `ω = dθ₁∧dθ₂`. On top of that the crate
//! provides the group law on generators, Hofer-like lengths and metrics,
//! the flux homomorphism, the calibration invariant Δ in two independent
//! assemblies, and experiment drivers built from torus shears.

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
        assert!((a - b).abs() <= tol, "{} vs {} (diff {:e}, tol {:e})", a, b, (a - b).abs(), tol);
    }};
}

pub mod cli;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod hodge;
pub mod invariants;
pub mod metrics;
pub mod torus;

pub use error::{Error, Result};
