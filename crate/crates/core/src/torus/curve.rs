use std::f64::consts::PI;

use super::{FourierInterpolant, Interp, Lift, OneFormField, Stencil, PERIOD};
use crate::error::{Error, Result};

/// Polyline in lifted coordinates, uniformly parametrized over `[0, 1]`.
///
/// Consecutive samples must differ by less than π in each coordinate so the
/// winding of the underlying loop is unambiguous. As a rule of thumb use at
/// least `4n` samples per winding when integrating fields on an `n`-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    samples: Vec<Lift>,
}

impl Curve {
    pub fn new(samples: Vec<Lift>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DegenerateCurve(samples.len()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            let d1 = (w[1].theta1 - w[0].theta1).abs();
            let d2 = (w[1].theta2 - w[0].theta2).abs();
            if d1 >= PI || d2 >= PI || !w[1].is_finite() {
                return Err(Error::CurveAliasing(i, i + 1));
            }
        }
        Ok(Self { samples })
    }

    /// Straight segment from `a` to `b` with `count` samples.
    pub fn straight(a: Lift, b: Lift, count: usize) -> Result<Self> {
        Self::from_fn(|s| Lift::new(a.theta1 + s * (b.theta1 - a.theta1), a.theta2 + s * (b.theta2 - a.theta2)), count)
    }

    /// Samples `gamma(s)` at `count` uniform parameters in `[0, 1]`.
    pub fn from_fn(gamma: impl Fn(f64) -> Lift, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::DegenerateCurve(count));
        }
        let last = (count - 1) as f64;
        Self::new((0..count).map(|i| gamma(i as f64 / last)).collect())
    }

    pub fn samples(&self) -> &[Lift] {
        &self.samples
    }

    pub fn start(&self) -> Lift {
        self.samples[0]
    }

    pub fn end(&self) -> Lift {
        *self.samples.last().expect("nonempty")
    }

    /// Lifted displacement end − start divided by 2π; integers for closed loops.
    pub fn winding(&self) -> (f64, f64) {
        let (a, b) = (self.start(), self.end());
        ((b.theta1 - a.theta1) / PERIOD, (b.theta2 - a.theta2) / PERIOD)
    }
}

/// `∫_γ α` with Fourier evaluation of the form.
pub fn line_integral(alpha: &OneFormField, gamma: &Curve) -> f64 {
    line_integral_with(alpha, gamma, Interp::Fourier)
}

/// `∫_γ α` by Simpson's rule on each straight piece of the lifted polyline.
pub fn line_integral_with(alpha: &OneFormField, gamma: &Curve, interp: Interp) -> f64 {
    let eval: Box<dyn Fn(Lift) -> (f64, f64)> = match interp {
        Interp::Fourier => {
            let f1 = FourierInterpolant::new(alpha.a1());
            let f2 = FourierInterpolant::new(alpha.a2());
            Box::new(move |p| (f1.eval(p), f2.eval(p)))
        }
        _ => {
            let grid = alpha.grid();
            Box::new(move |p| {
                let st = Stencil::new(grid, interp, p);
                (st.apply(alpha.a1()), st.apply(alpha.a2()))
            })
        }
    };
    let mut total = 0.0;
    let mut prev = eval(gamma.samples[0]);
    for w in gamma.samples.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = Lift::new(0.5 * (a.theta1 + b.theta1), 0.5 * (a.theta2 + b.theta2));
        let vm = eval(mid);
        let vb = eval(b);
        let d1 = b.theta1 - a.theta1;
        let d2 = b.theta2 - a.theta2;
        total += (d1 * (prev.0 + 4.0 * vm.0 + vb.0) + d2 * (prev.1 + 4.0 * vm.1 + vb.1)) / 6.0;
        prev = vb;
    }
    total
}
