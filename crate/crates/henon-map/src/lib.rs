//! Transcendental Hénon maps of ℂ² in standard or alternative form.

mod mat;
mod spec;

pub use mat::Mat2c;
pub use spec::{MapError, MapSpec};

use numeric_core::{Complex, EntireExpr, C2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Form {
    /// `(z, w) ↦ (f(z) − δw, z)`
    Standard { delta: Complex },
    /// `(z, w) ↦ (f(z) + aw, az)`
    Alternative { a: Complex },
}

/// A Hénon map, optionally followed by a constant translation `p ↦ p − shift`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HenonMap {
    pub f: EntireExpr,
    df: EntireExpr,
    pub form: Form,
    #[serde(default)]
    pub shift: C2,
}

/// Orbit points `p, F(p), …`; truncated at the first non-finite image.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<C2>,
    pub overflow: bool,
}

/// Partial products `dF^0 = I, dF^1, …, dF^n` along an orbit.
#[derive(Clone, Debug)]
pub struct Cocycle {
    pub mats: Vec<Mat2c>,
    pub overflow: bool,
}

impl HenonMap {
    pub fn standard(f: EntireExpr, delta: Complex) -> Result<Self, MapError> {
        if delta == Complex::new(0.0, 0.0) {
            return Err(MapError::DegenerateParameter);
        }
        Ok(Self::build(f, Form::Standard { delta }))
    }

    pub fn alternative(f: EntireExpr, a: Complex) -> Result<Self, MapError> {
        if a == Complex::new(0.0, 0.0) {
            return Err(MapError::DegenerateParameter);
        }
        Ok(Self::build(f, Form::Alternative { a }))
    }

    fn build(f: EntireExpr, form: Form) -> Self {
        let df = f.deriv();
        HenonMap { f, df, form, shift: C2::default() }
    }

    /// The map followed by `p ↦ p − shift`.
    pub fn with_shift(mut self, shift: C2) -> Self {
        self.shift = shift;
        self
    }

    pub fn df(&self) -> &EntireExpr {
        &self.df
    }

    /// Constant determinant of the differential: δ or −a².
    pub fn jacobian_det(&self) -> Complex {
        match self.form {
            Form::Standard { delta } => delta,
            Form::Alternative { a } => -a * a,
        }
    }

    #[inline]
    pub fn apply(&self, p: C2) -> C2 {
        let fz = self.f.eval(p.z);
        let q = match self.form {
            Form::Standard { delta } => C2::new(fz - delta * p.w, p.z),
            Form::Alternative { a } => C2::new(fz + a * p.w, a * p.z),
        };
        q - self.shift
    }

    pub fn apply_inverse(&self, p: C2) -> C2 {
        let q = p + self.shift;
        match self.form {
            Form::Standard { delta } => C2::new(q.w, (self.f.eval(q.w) - q.z) / delta),
            Form::Alternative { a } => {
                let z = q.w / a;
                C2::new(z, (q.z - self.f.eval(z)) / a)
            }
        }
    }

    pub fn differential(&self, p: C2) -> Mat2c {
        let d = self.df.eval(p.z);
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        match self.form {
            Form::Standard { delta } => Mat2c::new(d, -delta, one, zero),
            Form::Alternative { a } => Mat2c::new(d, a, a, zero),
        }
    }

    pub fn iterate(&self, p: C2, n: usize) -> Orbit {
        let mut points = Vec::with_capacity(n + 1);
        points.push(p);
        let mut cur = p;
        for _ in 0..n {
            cur = self.apply(cur);
            if !cur.is_finite() {
                return Orbit { points, overflow: true };
            }
            points.push(cur);
        }
        Orbit { points, overflow: false }
    }

    /// `F^n(p)`, or `None` on overflow.
    pub fn iterate_to(&self, p: C2, n: usize) -> Option<C2> {
        let mut cur = p;
        for _ in 0..n {
            cur = self.apply(cur);
            if !cur.is_finite() {
                return None;
            }
        }
        Some(cur)
    }

    pub fn cocycle(&self, p: C2, n: usize) -> Cocycle {
        let mut mats = Vec::with_capacity(n + 1);
        let mut acc = Mat2c::identity();
        mats.push(acc);
        let mut cur = p;
        for _ in 0..n {
            acc = self.differential(cur) * acc;
            cur = self.apply(cur);
            if !acc.is_finite() || !cur.is_finite() {
                return Cocycle { mats, overflow: true };
            }
            mats.push(acc);
        }
        Cocycle { mats, overflow: false }
    }

    /// For the alternative form, the standard map `(f(z) + a²w, z)` conjugate to it
    /// by `φ(z, w) = (z, aw)`, that is `F = φ ∘ H ∘ φ⁻¹`. Standard maps return themselves.
    pub fn standard_conjugate(&self) -> HenonMap {
        match self.form {
            Form::Standard { .. } => self.clone(),
            Form::Alternative { a } => {
                let mut h = Self::build(self.f.clone(), Form::Standard { delta: -a * a });
                h.shift = C2::new(self.shift.z, self.shift.w / a);
                h
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use numeric_core::c;

    fn baker() -> HenonMap {
        HenonMap::standard("exp(-z) + 2*z".parse().unwrap(), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn baker_at_origin() {
        let m = baker();
        assert_eq!(m.apply(C2::real(0.0, 0.0)), C2::real(1.0, 0.0));
        let back = m.apply_inverse(C2::real(1.0, 0.0));
        assert!((back - C2::real(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_alternative() {
        let m = HenonMap::alternative(EntireExpr::var(), c(0.5, 0.0)).unwrap();
        assert_eq!(m.apply(C2::real(2.0, 2.0)), C2::real(3.0, 1.0));
    }

    #[test]
    fn zero_parameter_rejected() {
        assert!(HenonMap::standard(EntireExpr::var(), c(0.0, 0.0)).is_err());
        assert!(HenonMap::alternative(EntireExpr::var(), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn zero_step_orbit() {
        let m = baker();
        let p = C2::real(0.3, 0.1);
        assert_eq!(m.iterate(p, 0).points, vec![p]);
        assert_eq!(m.cocycle(p, 0).mats, vec![Mat2c::identity()]);
    }

    #[test]
    fn overflow_truncates() {
        let m = HenonMap::standard("exp(z)".parse().unwrap(), c(1.0, 0.0)).unwrap();
        let o = m.iterate(C2::real(5.0, 0.0), 10);
        assert!(o.overflow);
        assert!(o.points.len() < 11);
        assert!(o.points.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn conjugate_form() {
        let m = HenonMap::alternative("z + z^2".parse().unwrap(), c(0.5, 0.0)).unwrap();
        let h = m.standard_conjugate();
        let a = c(0.5, 0.0);
        let phi = |p: C2| C2::new(p.z, a * p.w);
        let phi_inv = |p: C2| C2::new(p.z, p.w / a);
        let p = C2::new(c(0.3, 0.1), c(-0.2, 0.4));
        let lhs = m.apply(p);
        let rhs = phi(h.apply(phi_inv(p)));
        assert!((lhs - rhs).norm() < 1e-14);
    }
}
