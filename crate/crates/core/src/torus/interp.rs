use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral::{fft2, wavenumber};
use super::{GridSpec, Lift, OneFormField, ScalarField};

/// Off-grid evaluation rule for periodic fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    /// Periodic bilinear, second order.
    #[default]
    Bilinear,
    /// Tensor 4-point Lagrange, fourth order.
    Cubic,
    /// Tensor 6-point Lagrange, sixth order.
    Quintic,
    /// Trigonometric interpolant; exact for band-limited fields, O(n²) per point.
    Fourier,
}

impl Interp {
    fn offsets(self) -> &'static [isize] {
        match self {
            Interp::Bilinear => &[0, 1],
            Interp::Cubic => &[-1, 0, 1, 2],
            Interp::Quintic => &[-2, -1, 0, 1, 2, 3],
            Interp::Fourier => &[],
        }
    }
}

/// Precomputed tensor Lagrange weights for one evaluation point; reusable
/// across every field on the same grid.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    /// Flat offsets `j·n` of the wrapped rows.
    rows: [usize; 6],
    /// Wrapped column indices.
    cols: [usize; 6],
    w1: [f64; 6],
    w2: [f64; 6],
    len: usize,
}

fn lagrange_weights(offsets: &[isize], s: f64, out: &mut [f64; 6]) {
    for (m, &om) in offsets.iter().enumerate() {
        let mut w = 1.0;
        for &ol in offsets {
            if ol != om {
                w *= (s - ol as f64) / (om - ol) as f64;
            }
        }
        out[m] = w;
    }
}

impl Stencil {
    /// Panics for [`Interp::Fourier`], which has no local stencil.
    pub fn new(grid: GridSpec, interp: Interp, p: Lift) -> Self {
        assert!(interp != Interp::Fourier, "Fourier interpolation has no local stencil");
        let offsets = interp.offsets();
        let h = grid.spacing();
        let u1 = p.theta1 / h;
        let u2 = p.theta2 / h;
        let f1 = u1.floor();
        let f2 = u2.floor();
        let mut w1 = [0.0; 6];
        let mut w2 = [0.0; 6];
        lagrange_weights(offsets, u1 - f1, &mut w1);
        lagrange_weights(offsets, u2 - f2, &mut w2);
        let n = grid.n() as isize;
        let (mut rows, mut cols) = ([0; 6], [0; 6]);
        for (m, &o) in offsets.iter().enumerate() {
            rows[m] = ((f1 as isize + o).rem_euclid(n) * n) as usize;
            cols[m] = (f2 as isize + o).rem_euclid(n) as usize;
        }
        Self {
            rows,
            cols,
            w1,
            w2,
            len: offsets.len(),
        }
    }

    #[inline]
    pub fn apply(&self, f: &ScalarField) -> f64 {
        let v = f.values();
        let mut acc = 0.0;
        for a in 0..self.len {
            let r = self.rows[a];
            let mut row = 0.0;
            for b in 0..self.len {
                row += self.w2[b] * v[r + self.cols[b]];
            }
            acc += self.w1[a] * row;
        }
        acc
    }

    /// Two fields on the same grid in one pass.
    #[inline]
    pub fn apply_pair(&self, f: &ScalarField, g: &ScalarField) -> (f64, f64) {
        let (u, v) = (f.values(), g.values());
        let (mut acc_u, mut acc_v) = (0.0, 0.0);
        for a in 0..self.len {
            let r = self.rows[a];
            let (mut ru, mut rv) = (0.0, 0.0);
            for b in 0..self.len {
                let i = r + self.cols[b];
                ru += self.w2[b] * u[i];
                rv += self.w2[b] * v[i];
            }
            acc_u += self.w1[a] * ru;
            acc_v += self.w1[a] * rv;
        }
        (acc_u, acc_v)
    }
}

/// Trigonometric interpolant of a field, built once and evaluated anywhere.
#[derive(Clone, Debug)]
pub struct FourierInterpolant {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl FourierInterpolant {
    pub fn new(f: &ScalarField) -> Self {
        let n = f.grid().n();
        let scale = 1.0 / (n * n) as f64;
        let coeffs = fft2(f).into_iter().map(|c| c * scale).collect();
        Self { n, coeffs }
    }

    fn basis(&self, x: f64) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|j| {
                if j == n / 2 {
                    Complex64::new((0.5 * n as f64 * x).cos(), 0.0)
                } else {
                    let (s, c) = (wavenumber(j, n) * x).sin_cos();
                    Complex64::new(c, s)
                }
            })
            .collect()
    }

    pub fn eval(&self, p: Lift) -> f64 {
        let n = self.n;
        let b1 = self.basis(p.theta1);
        let b2 = self.basis(p.theta2);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let row = &self.coeffs[j * n..(j + 1) * n];
            let inner: Complex64 = row.iter().zip(&b2).map(|(c, b)| c * b).sum();
            acc += b1[j] * inner;
        }
        acc.re
    }
}

impl ScalarField {
    /// Value at an arbitrary point under the given interpolation rule.
    pub fn eval(&self, p: Lift, interp: Interp) -> f64 {
        match interp {
            Interp::Fourier => FourierInterpolant::new(self).eval(p),
            _ => Stencil::new(self.grid(), interp, p).apply(self),
        }
    }
}

impl OneFormField {
    /// Components `(a1, a2)` at an arbitrary point.
    pub fn eval(&self, p: Lift, interp: Interp) -> (f64, f64) {
        match interp {
            Interp::Fourier => (
                FourierInterpolant::new(self.a1()).eval(p),
                FourierInterpolant::new(self.a2()).eval(p),
            ),
            _ => {
                Stencil::new(self.grid(), interp, p).apply_pair(self.a1(), self.a2())
            }
        }
    }
}
