use super::flow::{map_nodes, Isotopy};
use crate::error::Result;
use crate::torus::{FourierInterpolant, Interp, Lift, OneFormField, ScalarField, Stencil};

/// Point evaluator for a 1-form, honouring the isotopy's interpolation mode.
pub(crate) enum FormEval<'a> {
    Constant(f64, f64),
    Local(&'a OneFormField, Interp),
    Fourier(FourierInterpolant, FourierInterpolant),
}

impl<'a> FormEval<'a> {
    pub(crate) fn new(alpha: &'a OneFormField, interp: Interp) -> Self {
        let (a1, a2) = (alpha.a1(), alpha.a2());
        if a1.max() == a1.min() && a2.max() == a2.min() {
            return FormEval::Constant(a1.values()[0], a2.values()[0]);
        }
        match interp {
            Interp::Fourier => FormEval::Fourier(FourierInterpolant::new(a1), FourierInterpolant::new(a2)),
            _ => FormEval::Local(alpha, interp),
        }
    }

    pub(crate) fn eval(&self, p: Lift) -> (f64, f64) {
        match self {
            FormEval::Constant(c1, c2) => (*c1, *c2),
            FormEval::Local(alpha, interp) => {
                let st = Stencil::new(alpha.grid(), *interp, p);
                (st.apply(alpha.a1()), st.apply(alpha.a2()))
            }
            FormEval::Fourier(f1, f2) => (f1.eval(p), f2.eval(p)),
        }
    }
}

/// `F^α(t)(x) = ∫₀ᵗ α(X^s)(φ^s(x)) ds`, integrated alongside the trajectory
/// with the same RK4 stages.
pub fn calibrator(iso: &Isotopy, alpha: &OneFormField, t: f64, x: Lift) -> Result<f64> {
    iso.grid().ensure_same(&alpha.grid())?;
    let ev = FormEval::new(alpha, iso.config().interp);
    let f = |p: Lift| ev.eval(p);
    Ok(iso.integrate(x, 0.0, t, Some(&f))?.1)
}

/// `F^α(t)` on every grid node.
pub fn calibrator_field(iso: &Isotopy, alpha: &OneFormField, t: f64) -> Result<ScalarField> {
    iso.grid().ensure_same(&alpha.grid())?;
    let ev = FormEval::new(alpha, iso.config().interp);
    let f = |p: Lift| ev.eval(p);
    let values = map_nodes(iso.grid(), |x| Ok(iso.integrate(x, 0.0, t, Some(&f))?.1))?;
    ScalarField::new(iso.grid(), values)
}

/// `F^α(t_k)` at every slice time `t_k = k/T`, from one sweep per node.
pub fn calibrator_slices(iso: &Isotopy, alpha: &OneFormField) -> Result<Vec<ScalarField>> {
    iso.grid().ensure_same(&alpha.grid())?;
    let ev = FormEval::new(alpha, iso.config().interp);
    let f = |p: Lift| ev.eval(p);
    let g = iso.generator();
    let steps = g.steps();
    let rows = map_nodes(iso.grid(), |x| {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(0.0);
        let (mut p, mut acc) = (x, 0.0);
        for k in 0..steps {
            let (q, gain) = iso.integrate(p, g.time(k), g.time(k + 1), Some(&f))?;
            p = q;
            acc += gain;
            out.push(acc);
        }
        Ok(out)
    })?;
    (0..=steps)
        .map(|k| ScalarField::new(iso.grid(), rows.iter().map(|r| r[k]).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{Generator, IntegratorConfig};
    use crate::hodge::HarmonicForm;
    use crate::torus::spectral::spectral_gradient;
    use crate::torus::GridSpec;

    #[test]
    fn shear_calibrator_is_t_times_profile() {
        let grid = GridSpec::new(32).unwrap();
        // profile h(θ₂) = 0.4 + 0.3 sin θ₂: U = 0.3(−cos θ₂), H = (0, 0.4)
        let u = ScalarField::from_fn(grid, |_, b| -0.3 * b.cos());
        let g = Generator::autonomous(u, HarmonicForm::new(0.0, 0.4), 4);
        let iso = Isotopy::new(g, IntegratorConfig::accurate(2)).unwrap();
        let alpha = OneFormField::constant(grid, 1.0, 0.0);
        // θ₂ on a node row keeps the interpolated velocity exact
        let x = Lift::new(1.0, grid.coord(10));
        let want = 0.6 * (0.4 + 0.3 * x.theta2.sin());
        assert_close!(calibrator(&iso, &alpha, 0.6, x).unwrap(), want, 1e-12);
    }

    #[test]
    fn zero_generator_gives_zero() {
        let grid = GridSpec::new(16).unwrap();
        let iso = Isotopy::new(Generator::zero(grid, 2), IntegratorConfig::default()).unwrap();
        let alpha = OneFormField::from_fns(grid, |a, _| a.cos(), |_, b| b.sin());
        assert_eq!(calibrator_field(&iso, &alpha, 1.0).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn exact_form_calibrator_is_potential_difference() {
        let grid = GridSpec::new(32).unwrap();
        let gfun = |a: f64, b: f64| (a + 2.0 * b).sin() + 0.5 * a.cos();
        let alpha = spectral_gradient(&ScalarField::from_fn(grid, gfun));
        let g = Generator::random_band_limited(grid, 20, 17, 2, 1.0);
        let iso = Isotopy::new(g, IntegratorConfig { substeps: 2, interp: Interp::Fourier, ..Default::default() }).unwrap();
        let x = Lift::new(0.3, 4.1);
        let y = iso.flow(x, 1.0).unwrap();
        let got = calibrator(&iso, &alpha, 1.0, x).unwrap();
        assert_close!(got, gfun(y.theta1, y.theta2) - gfun(x.theta1, x.theta2), 1e-7);
    }

    #[test]
    fn calibrator_is_additive_in_time() {
        let grid = GridSpec::new(32).unwrap();
        let g = Generator::random_band_limited(grid, 10, 21, 2, 1.0);
        let iso = Isotopy::new(g, IntegratorConfig::accurate(2)).unwrap();
        let alpha = OneFormField::from_fns(grid, |_, b| 1.0 + b.cos(), |a, _| a.sin());
        let slices = calibrator_slices(&iso, &alpha).unwrap();
        let x = grid.node(3, 7);
        let total = slices[10].get(3, 7);
        let head = slices[4].get(3, 7);
        let ev = FormEval::new(&alpha, iso.config().interp);
        let f = |p: Lift| ev.eval(p);
        let mid = iso.flow(x, 0.4).unwrap();
        let tail = iso.integrate(mid, 0.4, 1.0, Some(&f)).unwrap().1;
        assert_close!(total, head + tail, 1e-12);
    }
}
