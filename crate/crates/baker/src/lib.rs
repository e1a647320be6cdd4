//! The Baker domain of `F(z, w) = (e^{−z} + 2z − w, z)`.
//!
//! On the regions `R_α = {Re z > Re w + α + η_α(Re w)}` the map drifts to the
//! right by at least `α` per step, and `ψ = lim L^{−n} ∘ F^n` conjugates it to
//! the linear map `L(z, w) = (2z − w, z)`.

mod sample;
mod verify;

pub use sample::{sample_r_alpha, sample_slab, stream_rng};
pub use verify::{
    absorption_check, drift_check, injectivity_check, invariance_check, AbsorptionReport, DriftReport,
    InjectivityReport, InvarianceReport,
};

use henon_map::HenonMap;
use numeric_core::{c, C2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ALPHA_MIN: f64 = 1e-3;
pub const ALPHA_MAX: f64 = 10.0;
pub const ALPHA_GRID: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum BakerError {
    #[error("point is not in any R_α with α in [1e-3, 10]")]
    NotInRegion,
    #[error("orbit overflowed while evaluating ψ")]
    Overflow,
    #[error("no iterate entered the absorbing region within {0} steps")]
    NotAbsorbed(usize),
}

pub fn baker_map() -> HenonMap {
    HenonMap::standard("exp(-z) + 2*z".parse().expect("constant expression"), c(1.0, 0.0))
        .expect("δ = 1 is nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub alpha: f64,
    /// `A_α = e^{−α}/(1 − e^{−α})`
    pub a_alpha: f64,
}

impl RegionParams {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "α must be positive");
        let e = (-alpha).exp();
        RegionParams { alpha, a_alpha: e / (1.0 - e) }
    }

    /// `η_α(x) = A_α e^{−x}`
    pub fn eta(&self, x: f64) -> f64 {
        self.a_alpha * (-x).exp()
    }
}

pub fn in_r_alpha(p: C2, alpha: f64) -> bool {
    let r = RegionParams::new(alpha);
    p.z.re > p.w.re + alpha + r.eta(p.w.re)
}

pub fn alpha_grid() -> impl Iterator<Item = f64> {
    let (lo, hi) = (ALPHA_MIN.ln(), ALPHA_MAX.ln());
    (0..ALPHA_GRID).map(move |k| (lo + (hi - lo) * k as f64 / (ALPHA_GRID - 1) as f64).exp())
}

/// Largest α on the log-spaced grid with `p ∈ R_α`.
pub fn membership_alpha(p: C2) -> Option<f64> {
    // membership is monotone in α, but scanning the whole grid keeps this obviously right
    alpha_grid().filter(|&a| in_r_alpha(p, a)).last()
}

/// `L^n(z, w) = ((n+1)z − nw, nz − (n−1)w)`, any integer `n`.
pub fn l_pow(n: i64, p: C2) -> C2 {
    let n = n as f64;
    C2::new((n + 1.0) * p.z - n * p.w, n * p.z - (n - 1.0) * p.w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyResult {
    pub psi_value: C2,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub alpha: f64,
    /// `Re(z − w) > 0` at `psi_value`.
    pub in_omega: bool,
}

/// `√2 e^{−x₀} Σ_{n≥N} (n+1) e^{−nα}` in closed form.
pub fn tail_bound(re_z0: f64, alpha: f64, n: usize) -> f64 {
    let q = (-alpha).exp();
    let nf = n as f64;
    let sum = q.powf(nf) * ((nf + 1.0) / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)));
    std::f64::consts::SQRT_2 * (-re_z0).exp() * sum
}

/// `ψ_N(p) = L^{−N}(F^N(p))` with the first `N` whose a-priori tail bound is below `tol`.
pub fn psi(p: C2, tol: f64) -> Result<ConjugacyResult, BakerError> {
    let alpha = membership_alpha(p).ok_or(BakerError::NotInRegion)?;
    let mut n = 0;
    while tail_bound(p.z.re, alpha, n) >= tol {
        n += 1;
    }
    let image = baker_map().iterate_to(p, n).ok_or(BakerError::Overflow)?;
    let v = l_pow(-(n as i64), image);
    Ok(ConjugacyResult {
        psi_value: v,
        terms_used: n,
        tail_bound: tail_bound(p.z.re, alpha, n),
        alpha,
        in_omega: (v.z - v.w).re > 0.0,
    })
}

/// `ψ` extended by absorption: find the first `m ≤ max_steps` with `F^m(p) ∈ R`
/// and return `L^{−m}(ψ(F^m(p)))`. Opt-in; `psi` alone never leaves `R`.
pub fn psi_extended(p: C2, tol: f64, max_steps: usize) -> Result<(ConjugacyResult, usize), BakerError> {
    let f = baker_map();
    let mut q = p;
    for m in 0..=max_steps {
        if membership_alpha(q).is_some() {
            let mut r = psi(q, tol)?;
            r.psi_value = l_pow(-(m as i64), r.psi_value);
            r.in_omega = (r.psi_value.z - r.psi_value.w).re > 0.0;
            return Ok((r, m));
        }
        q = f.apply(q);
        if !q.is_finite() {
            return Err(BakerError::Overflow);
        }
    }
    Err(BakerError::NotAbsorbed(max_steps))
}

/// `‖L(ψ(p)) − ψ(F(p))‖`.
pub fn conjugacy_residual(p: C2, tol: f64) -> Result<f64, BakerError> {
    let a = psi(p, tol)?.psi_value;
    let b = psi(baker_map().apply(p), tol)?.psi_value;
    Ok((l_pow(1, a) - b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_alpha_identity() {
        for a in [0.1, 0.5, 1.0, 2.0, 7.0] {
            let r = RegionParams::new(a);
            assert!((r.a_alpha / (1.0 + r.a_alpha) - (-a).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn membership_examples() {
        assert!(in_r_alpha(C2::real(3.0, 0.0), 1.0));
        assert!(!in_r_alpha(C2::real(1.0, 1.0), 0.5));
        let eta1 = (-1f64).exp() / (1.0 - (-1f64).exp());
        assert!(in_r_alpha(C2::real(1.0 + eta1 + 1e-9, 0.0), 1.0));
        assert!(!in_r_alpha(C2::real(1.0 + eta1 - 1e-3, 0.0), 1.0));
        assert!(membership_alpha(C2::real(3.0, 0.0)).unwrap() >= 1.0);
        assert_eq!(membership_alpha(C2::real(1.0, 1.0)), None);
    }

    #[test]
    fn alpha_grid_ends() {
        let g: Vec<f64> = alpha_grid().collect();
        assert_eq!(g.len(), 60);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[59] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_matches_direct_sum() {
        let (x0, a, n) = (2.0, 0.7, 5);
        let direct: f64 = (n..2000)
            .map(|k| std::f64::consts::SQRT_2 * (k as f64 + 1.0) * (-x0 - k as f64 * a).exp())
            .sum();
        assert!((tail_bound(x0, a, n) - direct).abs() < 1e-14);
    }
}
