use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::hodge::HarmonicForm;
use crate::torus::{wrap, GridSpec, ScalarField};

/// Base profile before cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    /// `h(θ₂) = 1/θ₂`.
    Reciprocal,
    /// `h(θ₂) = 1/(θ₂(1 + |ln θ₂|))`.
    LogReciprocal,
    /// `h ≡ 1`; the degenerate profile, a pure translation.
    Constant,
}

fn unit() -> f64 {
    1.0
}

/// Cutoff profile `h_i = scale · s_i · w · h`: `s_i` blends from 0 to 1 on
/// `[1/i, 2/i]`, `w` closes the profile from 1 to 0 on `[3π/2, 2π]` so that
/// `h_i` is continuous on the circle. Both blends are cubic smoothsteps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShearProfileSpec {
    pub family: ProfileFamily,
    pub i: usize,
    #[serde(default = "unit")]
    pub scale: f64,
}

/// Start of the closing window.
pub const CLOSING_START: f64 = 1.5 * PI;

/// `3x² − 2x³` clamped to `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

impl ShearProfileSpec {
    pub fn new(family: ProfileFamily, i: usize) -> Self {
        Self { family, i, scale: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.family != ProfileFamily::Constant && self.i == 0 {
            return Err(Error::InvalidParameter("cutoff index i must be positive".into()));
        }
        if !self.scale.is_finite() {
            return Err(Error::InvalidParameter("profile scale must be finite".into()));
        }
        Ok(())
    }

    /// `h_i(θ₂)` for any real `θ₂` (reduced mod 2π).
    pub fn eval(&self, theta2: f64) -> f64 {
        let x = wrap(theta2);
        let inv = 1.0 / self.i.max(1) as f64;
        self.scale
            * match self.family {
                ProfileFamily::Constant => 1.0,
                ProfileFamily::Reciprocal | ProfileFamily::LogReciprocal => {
                    if x <= inv {
                        return 0.0;
                    }
                    let base = match self.family {
                        ProfileFamily::Reciprocal => 1.0 / x,
                        _ => 1.0 / (x * (1.0 + x.ln().abs())),
                    };
                    smoothstep((x - inv) / inv) * (1.0 - smoothstep((x - CLOSING_START) / (TAU - CLOSING_START))) * base
                }
            }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            ProfileFamily::Constant => vec![0.0, TAU],
            _ => {
                let inv = 1.0 / self.i as f64;
                let mut b = vec![0.0, inv, 2.0 * inv, 1.0, CLOSING_START, TAU];
                b.sort_by(f64::total_cmp);
                b.dedup();
                b
            }
        }
    }

    /// `∫_a^b h_i` for `0 ≤ a ≤ b ≤ 2π`, adaptive Simpson on smooth pieces.
    pub fn integral_between(&self, a: f64, b: f64) -> f64 {
        let f = |x: f64| self.eval(x.min(TAU - 1e-300));
        let mut total = 0.0;
        let mut lo = a;
        for &bp in self.breakpoints().iter().filter(|&&bp| bp > a && bp < b) {
            total += adaptive_simpson(&f, lo, bp, 1e-14);
            lo = bp;
        }
        total + adaptive_simpson(&f, lo, b, 1e-14)
    }

    /// `∫₀^{2π} h_i dθ₂`.
    pub fn integral(&self) -> f64 {
        self.integral_between(0.0, TAU)
    }

    /// Harmonic coefficient `mean(h_i)`.
    pub fn mean(&self) -> f64 {
        self.integral() / TAU
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Shear generator `(U, (0, mean h_i))` with `∂₂U = h_i − mean h_i`,
/// constant in time, so that `φ^t(θ₁, θ₂) = (θ₁ + t·h_i(θ₂), θ₂)`.
///
/// `U` is the exact antiderivative sampled at the nodes and the harmonic
/// coefficient comes from adaptive quadrature, not from grid sums.
pub fn build_shear(spec: &ShearProfileSpec, grid: GridSpec, steps: usize) -> Result<Generator> {
    spec.validate()?;
    let n = grid.n();
    let m = spec.mean();
    if spec.family == ProfileFamily::Constant {
        return Ok(Generator::translation(grid, steps, HarmonicForm::new(0.0, m)));
    }
    if n < 8 * spec.i {
        return Err(Error::ResolutionTooCoarse { n, i: spec.i });
    }
    let h = grid.spacing();
    let mut column = Vec::with_capacity(n);
    let mut acc = 0.0;
    column.push(0.0);
    for k in 1..n {
        acc += spec.integral_between((k - 1) as f64 * h, k as f64 * h);
        column.push(acc - m * k as f64 * h);
    }
    let u = ScalarField::from_fn(grid, |_, b| column[((b / h).round() as usize) % n]);
    Ok(Generator::autonomous(u, HarmonicForm::new(0.0, m), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{vector_field, IntegratorConfig, Isotopy};
    use crate::torus::Lift;

    #[test]
    fn profile_shape() {
        let s = ShearProfileSpec::new(ProfileFamily::Reciprocal, 8);
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(0.1), 0.0);
        assert_close!(s.eval(0.3), 1.0 / 0.3, 1e-15);
        assert_close!(s.eval(PI), 1.0 / PI, 1e-15);
        assert!(s.eval(TAU - 1e-9).abs() < 1e-12);
        // monotone in i
        let t = ShearProfileSpec::new(ProfileFamily::Reciprocal, 9);
        for k in 0..1000 {
            let x = k as f64 * TAU / 1000.0;
            assert!(t.eval(x) >= s.eval(x));
        }
    }

    #[test]
    fn integral_matches_one_dimensional_oracle() {
        // midpoint rule with 2·10⁶ cells as the oracle
        let s = ShearProfileSpec::new(ProfileFamily::Reciprocal, 8);
        let m = 2_000_000;
        let dx = TAU / m as f64;
        let oracle: f64 = (0..m).map(|k| s.eval((k as f64 + 0.5) * dx)).sum::<f64>() * dx;
        assert_close!(s.integral(), oracle, 1e-8);
        // ln(2π·8) + O(1)
        let main = (TAU * 8.0).ln();
        assert!((s.integral() - main).abs() < 2.0);
    }

    #[test]
    fn constant_profile_is_a_translation() {
        let grid = GridSpec::new(16).unwrap();
        let spec = ShearProfileSpec { family: ProfileFamily::Constant, i: 4, scale: 0.5 };
        let g = build_shear(&spec, grid, 1).unwrap();
        assert!(g.u().iter().all(|u| u.sup_norm() == 0.0));
        assert_close!(g.h()[0].c2, 0.5, 1e-14);
        assert_eq!(g.h()[0].c1, 0.0);
    }

    #[test]
    fn resolution_is_checked() {
        let grid = GridSpec::new(64).unwrap();
        let spec = ShearProfileSpec::new(ProfileFamily::Reciprocal, 16);
        assert!(matches!(build_shear(&spec, grid, 1), Err(Error::ResolutionTooCoarse { n: 64, i: 16 })));
    }

    #[test]
    fn shear_velocity_is_the_profile() {
        let grid = GridSpec::new(256).unwrap();
        let spec = ShearProfileSpec::new(ProfileFamily::LogReciprocal, 4);
        let g = build_shear(&spec, grid, 1).unwrap();
        let (x1, x2) = vector_field(&g, 0.5).unwrap();
        assert!(x2.sup_norm() < 1e-10);
        let err = (0..grid.n())
            .map(|k| (x1.get(0, k) - spec.eval(grid.coord(k))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn flow_reproduces_closed_form_map() {
        let grid = GridSpec::new(128).unwrap();
        let spec = ShearProfileSpec { family: ProfileFamily::Reciprocal, i: 4, scale: 0.25 };
        let g = build_shear(&spec, grid, 1).unwrap();
        let iso = Isotopy::new(g, IntegratorConfig::accurate(2)).unwrap();
        // the profile is only C¹, so the spectral velocity rings near the
        // cutoff kinks and carries a small global error elsewhere
        for (k, tol) in [(5usize, 1e-2), (40, 1e-4), (64, 1e-4), (100, 1e-4)] {
            let x = grid.node(3, k);
            let y = iso.flow(x, 1.0).unwrap();
            let want = Lift::new(x.theta1 + spec.eval(x.theta2), x.theta2);
            assert!((y.theta1 - want.theta1).abs() < tol * (1.0 + want.theta1.abs()), "{k}: {y:?} vs {want:?}");
            assert!((y.theta2 - want.theta2).abs() < 1e-12);
        }
    }
}
