use crate::Complex;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or direction) of ℂ².
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct C2 {
    pub z: Complex,
    pub w: Complex,
}

impl C2 {
    pub const fn new(z: Complex, w: Complex) -> Self {
        C2 { z, w }
    }

    pub fn real(z: f64, w: f64) -> Self {
        C2::new(Complex::new(z, 0.0), Complex::new(w, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.z.norm().hypot(self.w.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.w.is_finite()
    }

    pub fn scale(&self, s: Complex) -> C2 {
        C2::new(self.z * s, self.w * s)
    }

    pub fn dot_conj(&self, o: &C2) -> Complex {
        self.z.conj() * o.z + self.w.conj() * o.w
    }
}

impl Add for C2 {
    type Output = C2;
    fn add(self, o: C2) -> C2 {
        C2::new(self.z + o.z, self.w + o.w)
    }
}

impl Sub for C2 {
    type Output = C2;
    fn sub(self, o: C2) -> C2 {
        C2::new(self.z - o.z, self.w - o.w)
    }
}

impl Neg for C2 {
    type Output = C2;
    fn neg(self) -> C2 {
        C2::new(-self.z, -self.w)
    }
}

impl Mul<f64> for C2 {
    type Output = C2;
    fn mul(self, s: f64) -> C2 {
        C2::new(self.z * s, self.w * s)
    }
}

impl Mul<Complex> for C2 {
    type Output = C2;
    fn mul(self, s: Complex) -> C2 {
        self.scale(s)
    }
}
