use numeric_core::{Complex, C2};
use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// Row-major complex 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2c {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl Mat2c {
    pub const fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Mat2c { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex::new(1.0, 0.0);
        let zero = Complex::new(0.0, 0.0);
        Mat2c::new(one, zero, zero, one)
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn apply(&self, v: C2) -> C2 {
        C2::new(self.a * v.z + self.b * v.w, self.c * v.z + self.d * v.w)
    }

    pub fn frobenius(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()).sqrt()
    }

    /// Largest singular value, from the closed form for 2×2 matrices.
    pub fn spectral_norm(&self) -> f64 {
        let s = self.frobenius();
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        // scale to keep the squares in range
        let m = *self * Complex::new(1.0 / s, 0.0);
        let f2 = m.a.norm_sqr() + m.b.norm_sqr() + m.c.norm_sqr() + m.d.norm_sqr();
        let dd = m.det().norm();
        let disc = ((f2 - 2.0 * dd) * (f2 + 2.0 * dd)).max(0.0);
        s * ((f2 + disc.sqrt()) / 2.0).sqrt()
    }

    /// Eigenvalues, larger modulus first.
    pub fn eigenvalues(&self) -> (Complex, Complex) {
        let tr = self.trace();
        let det = self.det();
        let mut root = (tr * tr - 4.0 * det).sqrt();
        if (tr.conj() * root).re < 0.0 {
            root = -root;
        }
        let big = (tr + root) / 2.0;
        let small = if big.norm() == 0.0 { Complex::new(0.0, 0.0) } else { det / big };
        (big, small)
    }

    /// Unit eigenvector for eigenvalue `lambda`.
    pub fn eigenvector(&self, lambda: Complex) -> C2 {
        // rows of (M − λI) annihilate v; use the better-scaled row
        let r1 = C2::new(self.a - lambda, self.b);
        let r2 = C2::new(self.c, self.d - lambda);
        let row = if r1.norm() >= r2.norm() { r1 } else { r2 };
        let v = if row.norm() == 0.0 {
            C2::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))
        } else {
            C2::new(-row.w, row.z)
        };
        v * (1.0 / v.norm())
    }
}

impl Mul for Mat2c {
    type Output = Mat2c;
    fn mul(self, o: Mat2c) -> Mat2c {
        Mat2c::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Mul<Complex> for Mat2c {
    type Output = Mat2c;
    fn mul(self, s: Complex) -> Mat2c {
        Mat2c::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use numeric_core::c;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Mat2c::new(c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0));
        assert!((m.spectral_norm() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_against_power_iteration() {
        let m = Mat2c::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0), c(2.0, -1.0));
        let mut v = C2::new(c(1.0, 0.0), c(0.3, 0.2));
        let mh = Mat2c::new(m.a.conj(), m.c.conj(), m.b.conj(), m.d.conj());
        for _ in 0..200 {
            v = mh.apply(m.apply(v));
            v = v * (1.0 / v.norm());
        }
        let est = m.apply(v).norm();
        assert!((m.spectral_norm() - est).abs() < 1e-12);
    }

    #[test]
    fn saddle_eigenvalues() {
        let m = Mat2c::new(c(1.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0));
        let (u, s) = m.eigenvalues();
        assert!((u.re - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((s.re - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-15);
        for l in [u, s] {
            let v = m.eigenvector(l);
            assert!((m.apply(v) - v * l).norm() < 1e-15);
        }
    }
}
