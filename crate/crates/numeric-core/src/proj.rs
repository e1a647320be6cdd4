use crate::{Complex, C2};
use serde::{Deserialize, Serialize};

/// A point of ℙ² in homogeneous coordinates `[x : y : t]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProjPoint {
    pub x: Complex,
    pub y: Complex,
    pub t: Complex,
}

impl ProjPoint {
    /// `None` when all three coordinates vanish or one is not finite.
    pub fn new(x: Complex, y: Complex, t: Complex) -> Option<Self> {
        let p = ProjPoint { x, y, t };
        let m = p.max_modulus();
        (m > 0.0 && m.is_finite()).then_some(p)
    }

    /// `[z : w : 1]`.
    pub fn affine(p: C2) -> Self {
        ProjPoint { x: p.z, y: p.w, t: Complex::new(1.0, 0.0) }
    }

    /// `[z : w : 0]`, a point of the line at infinity.
    pub fn at_infinity(dir: C2) -> Option<Self> {
        ProjPoint::new(dir.z, dir.w, Complex::new(0.0, 0.0))
    }

    pub fn coords(&self) -> [Complex; 3] {
        [self.x, self.y, self.t]
    }

    fn max_modulus(&self) -> f64 {
        self.x.norm().max(self.y.norm()).max(self.t.norm())
    }

    /// Representative whose largest-modulus coordinate equals 1.
    pub fn normalized(&self) -> ProjPoint {
        let c = self.coords();
        let k = (0..3)
            .max_by(|&i, &j| c[i].norm().total_cmp(&c[j].norm()).then(j.cmp(&i)))
            .unwrap();
        let s = c[k];
        ProjPoint { x: c[0] / s, y: c[1] / s, t: c[2] / s }
    }

    pub fn is_at_infinity(&self, tol: f64) -> bool {
        self.normalized().t.norm() <= tol
    }
}

impl PartialEq for ProjPoint {
    /// Equality of projective points, up to rounding.
    fn eq(&self, other: &Self) -> bool {
        fs_distance(self, other) < 1e-12
    }
}

/// Fubini–Study distance, in `[0, π/2]`.
///
/// Evaluated as `atan2(|p ∧ q|, |⟨p,q⟩|)`, which equals
/// `arccos(|⟨p,q⟩| / (‖p‖‖q‖))` but keeps full precision for nearby points.
pub fn fs_distance(p: &ProjPoint, q: &ProjPoint) -> f64 {
    let a = scaled(p);
    let b = scaled(q);
    let inner: Complex = (0..3).map(|i| a[i].conj() * b[i]).sum();
    let mut wedge2 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            wedge2 += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    wedge2.sqrt().atan2(inner.norm())
}

fn scaled(p: &ProjPoint) -> [Complex; 3] {
    let m = p.max_modulus();
    let c = p.coords();
    [c[0] / m, c[1] / m, c[2] / m]
}
