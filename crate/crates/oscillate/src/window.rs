use numeric_core::{Complex, EntireExpr};
use runge_approx::{approximate, DiskTarget, InterpCondition, RungeError};
use serde::{Deserialize, Serialize};

const ZERO: Complex = Complex::new(0.0, 0.0);

/// A correction term `exp(−s²)·p(u)` localized near one disk, with
/// `s = (z − center)·conj(axis)/sigma` and `u = (z − poly_center)/poly_scale`.
///
/// The Gaussian factor is tiny wherever `Re(s²)` is large, which covers a
/// double cone around the axis through the centre; every other set of the
/// construction is kept inside that cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub round: usize,
    pub center: Complex,
    pub radius: f64,
    pub axis: Complex,
    pub sigma: f64,
    /// Squared clearance over squared width.
    pub level: f64,
    /// Constant the corrected function takes on the disk.
    pub target: Complex,
    pub poly_center: Complex,
    pub poly_scale: f64,
    pub coefficients: Vec<Complex>,
    /// Sampled error of `p` against the rescaled target.
    pub fit_error: f64,
}

fn horner(c: &[Complex], u: Complex) -> Complex {
    c.iter().rev().fold(ZERO, |acc, a| acc * u + a)
}

impl Window {
    fn s(&self, z: Complex) -> Complex {
        (z - self.center) * self.axis.conj() / self.sigma
    }

    fn u(&self, z: Complex) -> Complex {
        (z - self.poly_center) / self.poly_scale
    }

    pub fn eval(&self, z: Complex) -> Complex {
        let s = self.s(z);
        let g = (-s * s).exp();
        if g == ZERO {
            return ZERO;
        }
        g * horner(&self.coefficients, self.u(z))
    }

    pub fn eval_deriv(&self, z: Complex) -> Complex {
        let s = self.s(z);
        let g = (-s * s).exp();
        if g == ZERO {
            return ZERO;
        }
        let u = self.u(z);
        let n = self.coefficients.len();
        let (mut p, mut dp) = (ZERO, ZERO);
        for k in (0..n).rev() {
            dp = dp * u + p;
            p = p * u + self.coefficients[k];
        }
        let ds = self.axis.conj() / self.sigma;
        g * (dp / self.poly_scale - 2.0 * s * ds * p)
    }

    /// Upper bound of `|exp(−s²)|` on the window's own disk.
    pub fn peak(&self) -> f64 {
        (self.radius / self.sigma).powi(2).exp()
    }

    pub fn to_expr(&self) -> EntireExpr {
        let var = EntireExpr::var();
        let s = (var.clone() - EntireExpr::constant(self.center)) * EntireExpr::constant(self.axis.conj() / self.sigma);
        let gauss = EntireExpr::exp(-(s.clone() * s));
        let u = (var - EntireExpr::constant(self.poly_center)) * EntireExpr::real(1.0 / self.poly_scale);
        let mut poly = EntireExpr::real(0.0);
        for &ck in self.coefficients.iter().rev() {
            poly = poly * u.clone() + EntireExpr::constant(ck);
        }
        // the Gaussian goes first so that its underflow short-circuits the product
        gauss * poly
    }

    /// Fits `p` so that `f + exp(−s²)·p` is within `tol·e^{(r/σ)²}` of `target`
    /// on the disk and hits it exactly at the centre.
    #[allow(clippy::too_many_arguments)]
    pub fn fit(
        round: usize,
        f: &EntireExpr,
        center: Complex,
        radius: f64,
        axis: Complex,
        sigma: f64,
        level: f64,
        target: Complex,
        tol: f64,
        degree_cap: usize,
    ) -> Result<Window, RungeError> {
        // in u ∈ D(0, 1): (target − f(c + r·u))·exp(((r·u·conj(axis))/σ)²)
        let u = EntireExpr::var();
        let z = EntireExpr::constant(center) + EntireExpr::real(radius) * u.clone();
        let su = u * EntireExpr::constant(axis.conj() * radius / sigma);
        let g = (EntireExpr::constant(target) - f.compose(&z)) * EntireExpr::exp(su.clone() * su);
        let g0 = g.eval(ZERO);
        let p = approximate(&[DiskTarget::function(ZERO, 1.0, g)], &[InterpCondition::value(ZERO, g0)], tol, degree_cap)?;
        Ok(Window {
            round,
            center,
            radius,
            axis,
            sigma,
            level,
            target,
            poly_center: center + p.center * radius,
            poly_scale: p.scale * radius,
            coefficients: p.coefficients,
            fit_error: p.sup_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use numeric_core::c;

    fn sample() -> Window {
        Window {
            round: 1,
            center: c(3.0, 0.0),
            radius: 0.5,
            axis: c(1.0, 0.0),
            sigma: 0.4,
            level: 36.0,
            target: c(1.0, 0.0),
            poly_center: c(3.0, 0.0),
            poly_scale: 0.5,
            coefficients: vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.25, 0.1)],
            fit_error: 0.0,
        }
    }

    #[test]
    fn expression_matches_direct_evaluation() {
        let w = sample();
        let e = w.to_expr();
        let de = e.deriv();
        for z in [c(3.1, 0.2), c(2.5, -0.3), c(4.0, 0.0)] {
            assert!((e.eval(z) - w.eval(z)).norm() < 1e-13);
            assert!((de.eval(z) - w.eval_deriv(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn far_along_the_axis_is_zero() {
        let w = sample();
        assert_eq!(w.eval(c(300.0, 0.0)), ZERO);
        assert_eq!(w.to_expr().eval(c(-300.0, 0.0)), ZERO);
    }

    #[test]
    fn fitted_window_hits_its_target() {
        let f = EntireExpr::var();
        let w = Window::fit(1, &f, c(5.0, 0.0), 0.5, c(1.0, 0.0), 0.4, 36.0, c(-2.0, 0.0), 1e-9, 64).unwrap();
        for z in [c(5.0, 0.0), c(5.3, 0.2), c(4.6, -0.1)] {
            let v = z + w.eval(z);
            assert!((v - c(-2.0, 0.0)).norm() < 1e-9 * w.peak(), "{v}");
        }
    }
}
