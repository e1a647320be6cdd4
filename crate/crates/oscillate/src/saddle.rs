use crate::OscError;
use henon_map::{Form, HenonMap, Mat2c};
use numeric_core::{c, Complex, C2};
use serde::{Deserialize, Serialize};

const ZERO: Complex = Complex::new(0.0, 0.0);
const SERIES_TOL: f64 = 1e-8;
const MIN_RADIUS: f64 = 1e-3;

/// Linear part of `(bz + aw, az)` at its saddle point, the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleModel {
    pub a: f64,
    pub b: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub eigvec_s: C2,
    pub eigvec_u: C2,
}

impl SaddleModel {
    pub fn new(a: f64, b: f64) -> Self {
        let root = (b * b + 4.0 * a * a).sqrt();
        let lambda_u = (b + root) / 2.0;
        let lambda_s = (b - root) / 2.0;
        let unit = |l: f64| {
            let n = l.hypot(a);
            C2::real(l / n, a / n)
        };
        SaddleModel { a, b, lambda_s, lambda_u, eigvec_s: unit(lambda_s), eigvec_u: unit(lambda_u) }
    }

    pub fn differential(&self) -> Mat2c {
        Mat2c::new(c(self.b, 0.0), c(self.a, 0.0), c(self.a, 0.0), ZERO)
    }

    /// Largest `‖(dF(0) − λI)v‖` over both eigenpairs.
    pub fn eigen_residual(&self) -> f64 {
        let m = self.differential();
        [(self.lambda_s, self.eigvec_s), (self.lambda_u, self.eigvec_u)]
            .iter()
            .map(|&(l, v)| (m.apply(v) - v * c(l, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

impl Default for SaddleModel {
    fn default() -> Self {
        SaddleModel::new(0.5, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Stable,
    Unstable,
}

/// Parametrization `φ(ζ) = Σ c_k ζ^k` of a local invariant manifold of the
/// origin with `F(φ(ζ)) = φ(λζ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSeries {
    pub which: Branch,
    pub lambda: Complex,
    pub coefficients: Vec<C2>,
    pub order: usize,
    pub radius_validated: f64,
    /// Largest sampled residual within the validated radius.
    pub residual: f64,
}

/// Truncated product of two power series.
fn series_mul(a: &[Complex], b: &[Complex], n: usize) -> Vec<Complex> {
    let mut out = vec![ZERO; n + 1];
    for (i, ai) in a.iter().enumerate().take(n + 1) {
        if *ai == ZERO {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Solves `F(φ(ζ)) = φ(λζ)` order by order. The map must fix the origin with
/// a saddle there.
pub fn linearize(map: &HenonMap, which: Branch, order: usize) -> Result<ManifoldSeries, OscError> {
    let Form::Alternative { .. } = map.form else { return Err(OscError::NotAlternative) };
    let f0 = map.f.eval(ZERO);
    if f0.norm() > 1e-10 {
        return Err(OscError::NotFixed(f0));
    }
    let taylor = map.f.taylor(ZERO, order.max(1));
    let df0 = map.differential(C2::default());
    let (big, small) = df0.eigenvalues();
    if !(small.norm() < 1.0 && big.norm() > 1.0) {
        return Err(OscError::NotSaddle(big.norm(), small.norm()));
    }
    let lambda = if which == Branch::Stable { small } else { big };
    let mut v = df0.eigenvector(lambda);
    // fix the orientation so that real maps give real series
    if v.z.re < 0.0 || (v.z.re == 0.0 && v.w.re < 0.0) {
        v = v * c(-1.0, 0.0);
    }

    let mut x = vec![ZERO; order + 1];
    let mut y = vec![ZERO; order + 1];
    if order >= 1 {
        x[1] = v.z;
        y[1] = v.w;
    }
    for k in 2..=order {
        // [Σ_{m≥2} f_m X^m]_k from the known lower orders, by Horner in m
        let mut acc = vec![ZERO; k + 1];
        acc[0] = taylor[k];
        for m in (2..k).rev() {
            acc = series_mul(&acc, &x, k);
            acc[0] += taylor[m];
        }
        let e = series_mul(&series_mul(&acc, &x, k), &x, k)[k];
        let lk = lambda.powu(k as u32);
        let m = Mat2c::new(df0.a - lk, df0.b, df0.c, df0.d - lk);
        let det = m.det();
        if det.norm() < 1e-14 * (1.0 + lk.norm()).powi(2) {
            return Err(OscError::ResonanceDetected(k));
        }
        // Cramer's rule for m·(x_k, y_k) = (−e, 0)
        x[k] = (-e * m.d) / det;
        y[k] = (m.c * e) / det;
    }
    let coefficients: Vec<C2> = x.iter().zip(&y).map(|(&z, &w)| C2::new(z, w)).collect();
    let mut series = ManifoldSeries { which, lambda, coefficients, order, radius_validated: 0.0, residual: 0.0 };

    let mut radius = 1.0;
    loop {
        let res = series.max_residual(map, radius);
        if res < SERIES_TOL {
            series.radius_validated = radius;
            series.residual = res;
            return Ok(series);
        }
        radius *= 0.8;
        if radius < MIN_RADIUS {
            return Err(OscError::ResidualTooLarge { radius: MIN_RADIUS, residual: res });
        }
    }
}

impl ManifoldSeries {
    pub fn eval(&self, zeta: Complex) -> C2 {
        self.coefficients.iter().rev().fold(C2::default(), |acc, ck| acc.scale(zeta) + *ck)
    }

    /// Residual of the functional equation at `ζ`. For the unstable branch the
    /// equivalent form `F⁻¹(φ(ζ)) = φ(ζ/λ)` keeps both sides inside the disk.
    pub fn residual_at(&self, map: &HenonMap, zeta: Complex) -> f64 {
        match self.which {
            Branch::Stable => (map.apply(self.eval(zeta)) - self.eval(self.lambda * zeta)).norm(),
            Branch::Unstable => (map.apply_inverse(self.eval(zeta)) - self.eval(zeta / self.lambda)).norm(),
        }
    }

    /// Sampled maximum of the residual on the closed disk of radius `r`.
    pub fn max_residual(&self, map: &HenonMap, r: f64) -> f64 {
        let mut worst = 0.0f64;
        for ring in [1.0, 0.75, 0.5, 0.25] {
            let count = 64;
            for i in 0..count {
                let t = std::f64::consts::TAU * (i as f64 + 0.5 * ring) / count as f64;
                worst = worst.max(self.residual_at(map, Complex::from_polar(r * ring, t)));
            }
        }
        worst
    }

    /// Number of steps needed to bring `ζ` within half the validated radius.
    fn steps_to_local(&self, zeta: Complex) -> usize {
        let target = 0.5 * self.radius_validated;
        let contraction = match self.which {
            Branch::Stable => self.lambda.norm(),
            Branch::Unstable => 1.0 / self.lambda.norm(),
        };
        let mut r = zeta.norm();
        let mut n = 0;
        while r > target && n < 100_000 {
            r *= contraction;
            n += 1;
        }
        n
    }

    /// Point of the global manifold with parameter `ζ`: the local point at
    /// `λ^n ζ` pulled back by `F^{-n}` (stable) or at `λ^{-n} ζ` pushed by
    /// `F^n` (unstable).
    pub fn global_point(&self, map: &HenonMap, zeta: Complex) -> C2 {
        let n = self.steps_to_local(zeta);
        match self.which {
            Branch::Stable => {
                let mut p = self.eval(zeta * self.lambda.powu(n as u32));
                for _ in 0..n {
                    p = map.apply_inverse(p);
                }
                p
            }
            Branch::Unstable => {
                let mut p = self.eval(zeta / self.lambda.powu(n as u32));
                for _ in 0..n {
                    p = map.apply(p);
                }
                p
            }
        }
    }

    /// Orbit through the global point of parameter `ζ`, in forward order:
    /// from it down to the local chart (stable) or from the local chart up to
    /// it (unstable). Unlike iterating from the global point, this never runs
    /// the map in its expanding direction.
    pub fn global_orbit(&self, map: &HenonMap, zeta: Complex) -> Vec<C2> {
        let n = self.steps_to_local(zeta);
        match self.which {
            Branch::Stable => {
                let mut pts = vec![self.eval(zeta * self.lambda.powu(n as u32))];
                for _ in 0..n {
                    pts.push(map.apply_inverse(*pts.last().unwrap()));
                }
                pts.reverse();
                pts
            }
            Branch::Unstable => {
                let mut pts = vec![self.eval(zeta / self.lambda.powu(n as u32))];
                for _ in 0..n {
                    pts.push(map.apply(*pts.last().unwrap()));
                }
                pts
            }
        }
    }

    /// Tangent of the global parametrization, by a central difference.
    pub fn global_tangent(&self, map: &HenonMap, zeta: Complex) -> C2 {
        let h = 1e-6 * zeta.norm().max(1e-3);
        let hc = c(h, 0.0);
        (self.global_point(map, zeta + hc) - self.global_point(map, zeta - hc)) * c(0.5 / h, 0.0)
    }

    /// First parameter on the ray `t·ray`, `0 < t ≤ reach`, at which the
    /// modulus of coordinate `coord` (0 for `z`, 1 for `w`) of the global
    /// point reaches `level`, with the phase of `phase` when given. The ray is
    /// scanned geometrically and the crossing bisected to full precision.
    pub fn first_crossing(
        &self,
        map: &HenonMap,
        coord: usize,
        level: f64,
        ray: Complex,
        reach: f64,
        phase: Option<Complex>,
    ) -> Result<Complex, OscError> {
        let pick = |t: f64| {
            let p = self.global_point(map, ray * t);
            if coord == 0 { p.z } else { p.w }
        };
        let t_min = 1e-3 * self.radius_validated;
        let steps = 4096;
        let ratio = (reach / t_min).powf(1.0 / steps as f64);
        let mut prev = 0.0;
        let mut t = t_min;
        let mut bracket = None;
        for _ in 0..=steps {
            let v = pick(t);
            if v.norm() >= level && phase.is_none_or(|ph| (v * ph.conj()).re > 0.0) {
                bracket = Some((prev, t));
                break;
            }
            prev = t;
            t *= ratio;
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| OscError::Infeasible(format!("manifold coordinate never reaches {level}")))?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if pick(mid).norm() >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(ray * hi)
    }

    /// Parameter whose global point has coordinate `coord` equal to `value`:
    /// the first crossing of `|value|` with the phase of `value` on the ray
    /// through `guess`, polished by Newton's method.
    pub fn solve_coordinate(&self, map: &HenonMap, coord: usize, value: Complex, guess: Complex) -> Result<Complex, OscError> {
        let pick = |zeta: Complex| {
            let p = self.global_point(map, zeta);
            if coord == 0 { p.z } else { p.w }
        };
        let target = value.norm();
        let mut zeta = self.first_crossing(map, coord, target, guess / guess.norm(), 4.0 * guess.norm(), Some(value))?;
        for _ in 0..20 {
            let r = pick(zeta) - value;
            if r.norm() <= 1e-13 * (1.0 + target) {
                break;
            }
            let p = self.global_tangent(map, zeta);
            let d = if coord == 0 { p.z } else { p.w };
            if d.norm() == 0.0 || !d.is_finite() {
                break;
            }
            zeta -= r / d;
        }
        if (pick(zeta) - value).norm() <= 1e-10 * (1.0 + target) {
            Ok(zeta)
        } else {
            Err(OscError::Infeasible(format!("no manifold point with coordinate {value}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use numeric_core::EntireExpr;

    #[test]
    fn model_constants() {
        let m = SaddleModel::default();
        assert!((m.lambda_s - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((m.lambda_u - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(m.eigen_residual() < 1e-12);
    }

    #[test]
    fn series_product() {
        let a = [c(1.0, 0.0), c(2.0, 0.0)];
        let b = [c(1.0, 0.0), c(-1.0, 0.0), c(3.0, 0.0)];
        let p = series_mul(&a, &b, 2);
        assert_eq!(p, vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn global_points_lie_on_the_manifold() {
        let map = HenonMap::alternative("z + z^2".parse::<EntireExpr>().unwrap(), c(0.5, 0.0)).unwrap();
        let s = linearize(&map, Branch::Stable, 20).unwrap();
        let p = s.global_point(&map, c(2.0, 0.0));
        // forward orbit tends to the origin
        let q = map.iterate_to(p, 40).unwrap();
        assert!(q.norm() < 1e-8, "{q:?}");
    }
}
