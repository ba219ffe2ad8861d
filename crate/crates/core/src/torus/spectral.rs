//! Fourier calculus on periodic grids.
//!
//! Derivatives multiply by `i·k`; the Nyquist mode `k = n/2` is dropped in
//! every differentiation and inversion so that real fields stay real.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{GridSpec, OneFormField, ScalarField, PERIOD};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Plans {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// Signed wavenumber of DFT index `j` on an `n`-point axis; the Nyquist
/// index maps to `+n/2`.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// Wavenumber with the Nyquist mode zeroed, as used for differentiation.
#[inline]
fn deriv_wavenumber(j: usize, n: usize) -> f64 {
    if j == n / 2 {
        0.0
    } else {
        wavenumber(j, n)
    }
}

fn transform2(data: &mut [Complex64], n: usize, inverse: bool) {
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    // along θ₂ (contiguous rows)
    for row in data.chunks_mut(n) {
        plan.process(row);
    }
    // along θ₁
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        for j in 0..n {
            col[j] = data[j * n + k];
        }
        plan.process(&mut col);
        for j in 0..n {
            data[j * n + k] = col[j];
        }
    }
}

/// Unnormalized forward 2-D DFT of a field.
pub fn fft2(f: &ScalarField) -> Vec<Complex64> {
    let n = f.grid().n();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform2(&mut data, n, false);
    data
}

/// Inverse of [`fft2`], keeping the real part.
pub fn ifft2_real(grid: GridSpec, mut spec: Vec<Complex64>) -> ScalarField {
    let n = grid.n();
    transform2(&mut spec, n, true);
    let scale = 1.0 / (n * n) as f64;
    ScalarField::from_vec(grid, spec.into_iter().map(|c| c.re * scale).collect())
}

fn apply_multiplier(f: &ScalarField, mult: impl Fn(f64, f64) -> Complex64) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let mut spec = fft2(f);
    for j in 0..n {
        let k1 = deriv_wavenumber(j, n);
        for k in 0..n {
            let k2 = deriv_wavenumber(k, n);
            spec[j * n + k] *= mult(k1, k2);
        }
    }
    ifft2_real(grid, spec)
}

/// `∂f/∂θ₁`.
pub fn d_theta1(f: &ScalarField) -> ScalarField {
    apply_multiplier(f, |k1, _| Complex64::new(0.0, k1))
}

/// `∂f/∂θ₂`.
pub fn d_theta2(f: &ScalarField) -> ScalarField {
    apply_multiplier(f, |_, k2| Complex64::new(0.0, k2))
}

/// `df = (∂₁f, ∂₂f)` by Fourier differentiation.
pub fn spectral_gradient(f: &ScalarField) -> OneFormField {
    OneFormField::new(d_theta1(f), d_theta2(f)).expect("same grid")
}

/// Coefficient of `dθ₁∧dθ₂` in `dα`, i.e. `∂₁a₂ − ∂₂a₁`.
pub fn exterior_derivative(alpha: &OneFormField) -> ScalarField {
    &d_theta1(alpha.a2()) - &d_theta2(alpha.a1())
}

/// `∂₁a₁ + ∂₂a₂`.
pub fn divergence(alpha: &OneFormField) -> ScalarField {
    &d_theta1(alpha.a1()) + &d_theta2(alpha.a2())
}

/// Zero-mean solution of `ΔF = rhs`; the mean of `rhs` and the Nyquist
/// modes are discarded.
pub fn poisson(rhs: &ScalarField) -> ScalarField {
    apply_multiplier(rhs, |k1, k2| {
        let k2sum = k1 * k1 + k2 * k2;
        if k2sum == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / k2sum, 0.0)
        }
    })
}

/// Zero-mean `F` minimizing `‖α − dF‖_{L²}`: the gradient projection of `α`.
pub fn potential(alpha: &OneFormField) -> ScalarField {
    let grid = alpha.grid();
    let n = grid.n();
    let s1 = fft2(alpha.a1());
    let s2 = fft2(alpha.a2());
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let k1 = deriv_wavenumber(j, n);
        for k in 0..n {
            let k2 = deriv_wavenumber(k, n);
            let ksq = k1 * k1 + k2 * k2;
            if ksq == 0.0 {
                continue;
            }
            let idx = j * n + k;
            // F̂ = -i (k1 â1 + k2 â2) / |k|²
            let num = s1[idx] * k1 + s2[idx] * k2;
            out[idx] = Complex64::new(num.im, -num.re) / ksq;
        }
    }
    ifft2_real(grid, out)
}

/// Forward DFT of a 1-D periodic sample vector.
pub fn fft1(values: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = plans(values.len());
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut data);
    data
}

/// Periodic 1-D trigonometric interpolant with spectral antiderivative.
///
/// For samples `g_j = g(2πj/n)` with mean `m`, `integral(a, b)` returns
/// `∫_a^b g` of the trigonometric interpolant, exact for band-limited `g`.
#[derive(Clone, Debug)]
pub struct Periodic1d {
    n: usize,
    mean: f64,
    coeffs: Vec<Complex64>,
}

impl Periodic1d {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut coeffs = fft1(values);
        let scale = 1.0 / n as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        let mean = coeffs[0].re;
        Self { n, mean, coeffs }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Interpolant value at `x`; the Nyquist mode contributes `c·cos(n x / 2)`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.n;
        let mut acc = self.mean;
        for j in 1..n {
            let c = self.coeffs[j];
            if j == n / 2 {
                acc += c.re * (0.5 * n as f64 * x).cos();
                continue;
            }
            if j > n / 2 {
                continue;
            }
            // conjugate pair j and n - j
            let k = j as f64;
            let (s, co) = (k * x).sin_cos();
            acc += 2.0 * (c.re * co - c.im * s);
        }
        acc
    }

    /// Zero-mean antiderivative of `g − mean` at `x`, Nyquist dropped.
    fn oscillatory_primitive(&self, x: f64) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for j in 1..n.div_ceil(2) {
            let c = self.coeffs[j];
            let k = j as f64;
            let (s, co) = (k * x).sin_cos();
            // ∫ 2 Re(c e^{ikx}) = 2 Re(c e^{ikx} / (ik))
            acc += 2.0 * (c.re * s + c.im * co) / k;
        }
        acc
    }

    /// `∫_a^b` of the interpolant (Nyquist mode excluded).
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.mean * (b - a) + self.oscillatory_primitive(b) - self.oscillatory_primitive(a)
    }

    /// `∫_0^{x_j}` at every grid abscissa `x_j = 2πj/n`, computed in one pass.
    pub fn cumulative_from(&self, a: f64) -> Vec<f64> {
        let n = self.n;
        let base = self.oscillatory_primitive(a);
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for j in 1..n {
            if j == n / 2 {
                continue;
            }
            let k = wavenumber(j, n);
            spec[j] = self.coeffs[j] / Complex64::new(0.0, k);
        }
        let (_, inv) = plans(n);
        inv.process(&mut spec);
        let h = PERIOD / n as f64;
        (0..n)
            .map(|j| self.mean * (j as f64 * h - a) + spec[j].re - base)
            .collect()
    }
}
