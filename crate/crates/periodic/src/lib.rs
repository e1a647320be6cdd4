//! Fixed points and period-2 cycles of standard-form Hénon maps.
//!
//! Fixed points satisfy `z = w` and `f(z) = (1+δ)z`. Period-2 points
//! `(z₀, z₁)` satisfy `f(z₀) = (1+δ)z₁` and `f(z₁) = (1+δ)z₀`, which for
//! `δ ≠ −1` reduces to the one-variable equation `g(g(z₀)) = z₀` with
//! `g = f/(1+δ)`. For `δ = −1` both coordinates are zeros of `f`.

use henon_map::{Form, HenonMap, Mat2c};
use numeric_core::{Complex, EntireExpr, C2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const MAX_NEWTON: usize = 200;
const DIVERGED: f64 = 1e6;
const DEDUP_RADIUS: f64 = 1e-6;
const UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error("periodic-point search needs a map in standard form")]
    NotStandard,
}

/// Search rectangle for `z₀` with a `starts × starts` grid of Newton seeds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SearchBox {
    pub fn square(half: f64) -> Self {
        SearchBox { re: (-half, half), im: (-half, half) }
    }

    pub fn contains(&self, z: Complex) -> bool {
        (self.re.0..=self.re.1).contains(&z.re) && (self.im.0..=self.im.1).contains(&z.im)
    }

    fn seeds(&self, starts: usize) -> Vec<Complex> {
        let n = starts.max(1);
        let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        (0..n * n)
            .map(|i| Complex::new(at(self.re, i % n), at(self.im, i / n)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Attracting,
    Repelling,
    Saddle,
    Indifferent,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub point: C2,
    pub period: u32,
    /// Eigenvalues of `dF^period`, larger modulus first.
    pub multipliers: (Complex, Complex),
    pub label: Label,
    /// `|residual|` of the scalar equation solved by Newton.
    pub newton_residual: f64,
    /// A multiplier modulus lies within `1e−6` of 1.
    pub indifferent_ambiguous: bool,
}

fn delta_of(m: &HenonMap) -> Result<Complex, PeriodicError> {
    match m.form {
        Form::Standard { delta } => Ok(delta),
        Form::Alternative { .. } => Err(PeriodicError::NotStandard),
    }
}

/// Newton's method on `h`; `None` on divergence or no convergence.
fn newton(h: &EntireExpr, dh: &EntireExpr, mut z: Complex, tol: f64) -> Option<(Complex, f64)> {
    for _ in 0..MAX_NEWTON {
        let v = h.eval(z);
        let d = dh.eval(z);
        if !v.is_finite() || !d.is_finite() || d.norm() == 0.0 {
            return None;
        }
        let step = v / d;
        z -= step;
        if !z.is_finite() || z.norm() > DIVERGED {
            return None;
        }
        if step.norm() <= 1e-3 * tol * (1.0 + z.norm()) {
            break;
        }
    }
    let r = h.eval(z).norm();
    (r < tol).then_some((z, r))
}

fn roots(h: &EntireExpr, search: &SearchBox, starts: usize, tol: f64) -> Vec<(Complex, f64)> {
    let dh = h.deriv();
    let mut found: Vec<(Complex, f64)> = search
        .seeds(starts)
        .par_iter()
        .filter_map(|&s| newton(h, &dh, s, tol))
        .filter(|(z, _)| search.contains(*z))
        .collect();
    dedup(&mut found);
    found
}

/// Order-independent clustering: sort, then keep the first of each cluster.
fn dedup(found: &mut Vec<(Complex, f64)>) {
    found.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut kept: Vec<(Complex, f64)> = Vec::new();
    for &(z, r) in found.iter() {
        match kept.iter_mut().find(|(k, _)| (*k - z).norm() < DEDUP_RADIUS) {
            Some(k) if r < k.1 => *k = (z, r),
            Some(_) => {}
            None => kept.push((z, r)),
        }
    }
    kept.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    *found = kept;
}

fn package(m: &HenonMap, point: C2, period: u32, newton_residual: f64) -> PeriodicPoint {
    let pp = PeriodicPoint {
        point,
        period,
        multipliers: (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)),
        label: Label::Indifferent,
        newton_residual,
        indifferent_ambiguous: false,
    };
    classify_cycle(m, pp)
}

pub fn fixed_points(m: &HenonMap, search: &SearchBox, starts: usize, tol: f64) -> Result<Vec<PeriodicPoint>, PeriodicError> {
    let delta = delta_of(m)?;
    let h = m.f.clone() - EntireExpr::constant(1.0 + delta) * EntireExpr::var();
    Ok(roots(&h, search, starts, tol)
        .into_iter()
        .map(|(z, r)| package(m, C2::new(z, z), 1, r))
        .collect())
}

pub fn period2_points(m: &HenonMap, search: &SearchBox, starts: usize, tol: f64) -> Result<Vec<PeriodicPoint>, PeriodicError> {
    let delta = delta_of(m)?;
    let one = Complex::new(1.0, 0.0);
    if (delta + one).norm() == 0.0 {
        let zeros = roots(&m.f, search, starts, tol);
        let mut out = Vec::new();
        for &(z0, r0) in &zeros {
            for &(z1, r1) in &zeros {
                if (z0 - z1).norm() >= DEDUP_RADIUS {
                    out.push(package(m, C2::new(z0, z1), 2, r0.max(r1)));
                }
            }
        }
        return Ok(out);
    }
    let g = EntireExpr::constant(one / (one + delta)) * m.f.clone();
    let h = g.compose(&g) - EntireExpr::var();
    Ok(roots(&h, search, starts, tol)
        .into_iter()
        .filter_map(|(z0, r)| {
            let z1 = g.eval(z0);
            ((z1 - z0).norm() >= DEDUP_RADIUS).then(|| package(m, C2::new(z0, z1), 2, r))
        })
        .collect())
}

/// Multipliers over one period and the modulus label.
pub fn classify_cycle(m: &HenonMap, mut pp: PeriodicPoint) -> PeriodicPoint {
    let d: Mat2c = *m.cocycle(pp.point, pp.period as usize).mats.last().unwrap();
    let (big, small) = d.eigenvalues();
    pp.multipliers = (big, small);
    let (mb, ms) = (big.norm(), small.norm());
    pp.indifferent_ambiguous = (mb - 1.0).abs() < UNIT_TOL || (ms - 1.0).abs() < UNIT_TOL;
    pp.label = if pp.indifferent_ambiguous {
        Label::Indifferent
    } else if mb < 1.0 {
        Label::Attracting
    } else if ms > 1.0 {
        Label::Repelling
    } else {
        Label::Saddle
    };
    pp
}

/// `‖F^period(p) − p‖`.
pub fn return_error(m: &HenonMap, pp: &PeriodicPoint) -> f64 {
    m.iterate_to(pp.point, pp.period as usize)
        .map(|q| (q - pp.point).norm())
        .unwrap_or(f64::INFINITY)
}

/// `dF²` at a period-2 point together with the closed-form trace
/// `f'(z₁)·f'(z₀) − 2δ` and determinant `δ²`.
pub fn period2_identities(m: &HenonMap, pp: &PeriodicPoint) -> Option<(Mat2c, Complex, Complex)> {
    let delta = delta_of(m).ok()?;
    let d = *m.cocycle(pp.point, 2).mats.last()?;
    let tr = m.df().eval(pp.point.w) * m.df().eval(pp.point.z) - 2.0 * delta;
    Some((d, tr, delta * delta))
}
