//! An escaping wandering domain: a lift of a circle map with a critical lattice
//! where every `P_n = (n, n−1)` is an attracting fixed point of `G = F − (1, 1)`
//! and `F` translates the lattice by `(1, 1)`.

use henon_map::{HenonMap, Mat2c};
use numeric_core::{c, EntireExpr, C2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WanderError {
    #[error("δ = {0} must lie in (0, 1)")]
    DeltaOutOfRange(f64),
    #[error("P_n is not attracting for δ = {delta}: spectral radius {radius}")]
    DeltaTooLarge { delta: f64, radius: f64 },
    #[error("both endpoints settle in the same basin")]
    SameBasin,
    #[error("endpoint {0} is not captured by any basin")]
    Uncaptured(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WanderParams {
    /// `1 − √(1 − 1/(4π²))`
    pub lambda: f64,
    /// Root of `cos(2πα) = −1/(2π)` in `(1/4, 1/2)`.
    pub alpha_crit: f64,
    pub delta: f64,
}

/// Root of `cos(2πα) + 1/(2π)` in `(1/4, 1/2)`, polished by Newton from the closed form.
fn critical_alpha() -> f64 {
    let g = |a: f64| (2.0 * PI * a).cos() + 1.0 / (2.0 * PI);
    let dg = |a: f64| -2.0 * PI * (2.0 * PI * a).sin();
    let mut a = (-1.0 / (2.0 * PI)).acos() / (2.0 * PI);
    for _ in 0..3 {
        a -= g(a) / dg(a);
    }
    a
}

pub fn make_params(delta: f64) -> Result<WanderParams, WanderError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(WanderError::DeltaOutOfRange(delta));
    }
    let radius = fixed_point_differential(delta).eigenvalues().0.norm();
    if radius >= 1.0 {
        return Err(WanderError::DeltaTooLarge { delta, radius });
    }
    Ok(WanderParams {
        lambda: 1.0 - (1.0 - 1.0 / (4.0 * PI * PI)).sqrt(),
        alpha_crit: critical_alpha(),
        delta,
    })
}

/// `[[δ, −δ], [1, 0]]`, the differential of `G` at every `P_n`.
pub fn fixed_point_differential(delta: f64) -> Mat2c {
    Mat2c::new(c(delta, 0.0), c(-delta, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

fn two_pi_times(e: EntireExpr) -> EntireExpr {
    EntireExpr::real(2.0 * PI) * e
}

/// `f̃(z) = z + sin(2πz) + λ`
pub fn f_tilde(p: &WanderParams) -> EntireExpr {
    let z = EntireExpr::var();
    z.clone() + EntireExpr::sin(two_pi_times(z)) + EntireExpr::real(p.lambda)
}

/// `f(z) = f̃(z + α) − α`, so that `f(n) = n + 1` and `f'(n) = 0` on ℤ.
pub fn f_conj(p: &WanderParams) -> EntireExpr {
    let shifted = EntireExpr::var() + EntireExpr::real(p.alpha_crit);
    f_tilde(p).compose(&shifted) - EntireExpr::real(p.alpha_crit)
}

/// `F(z, w) = (f(z) + δ(z − 1) − δw, z)` and `G = F − (1, 1)`.
pub fn build_maps(p: &WanderParams) -> (HenonMap, HenonMap) {
    let d = EntireExpr::real(p.delta);
    let f = f_conj(p) + d * (EntireExpr::var() - EntireExpr::real(1.0));
    let big_f = HenonMap::standard(f, c(p.delta, 0.0)).expect("δ > 0");
    let g = big_f.clone().with_shift(C2::real(1.0, 1.0));
    (big_f, g)
}

pub fn lattice_point(n: i64) -> C2 {
    C2::real(n as f64, n as f64 - 1.0)
}

fn nearest_lattice(p: C2) -> i64 {
    ((p.z.re + p.w.re + 1.0) / 2.0).round() as i64
}

const STAY: usize = 20;
const SETTLED: f64 = 1e-6;

/// Index `n` once the `G`-orbit has stayed in `B(P_n, capture_radius)` for 20
/// consecutive steps and come within `1e−6` of `P_n`.
///
/// The second condition matters for points extremely close to a basin
/// boundary: their orbits can hover inside the ball for more than 20 steps
/// before being thrown out.
pub fn basin_index(g: &HenonMap, p: C2, n_max: usize, capture_radius: f64) -> Option<i64> {
    assert!(capture_radius < 0.25, "capture radius must isolate the lattice points");
    let mut q = p;
    let mut run: Option<(i64, usize)> = None;
    for _ in 0..=n_max {
        let n = nearest_lattice(q);
        if (q - lattice_point(n)).norm() < capture_radius {
            let count = match run {
                Some((m, k)) if m == n => k + 1,
                _ => 1,
            };
            if count >= STAY && (q - lattice_point(n)).norm() < SETTLED {
                return Some(n);
            }
            run = Some((n, count));
        } else {
            run = None;
        }
        q = g.apply(q);
        if !q.is_finite() {
            return None;
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasinOptions {
    pub n_max: usize,
    pub capture_radius: f64,
}

impl Default for BasinOptions {
    fn default() -> Self {
        BasinOptions { n_max: 400, capture_radius: 0.2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    pub boundary_point: C2,
    pub basin_in: i64,
    pub basin_out: Option<i64>,
    /// Length of the final bisection bracket.
    pub bracket: f64,
    /// `ln ‖dG^k(p*)‖`, `k = 0..=n`.
    pub log_norms: Vec<f64>,
    /// Least-squares slope of the log-norms over `k ∈ [n/2, n]`.
    pub rho: f64,
}

/// Least-squares slope of `ys` against their indices over `lo..ys.len()`.
pub fn fitted_rate(ys: &[f64], lo: usize) -> f64 {
    let pts: Vec<(f64, f64)> = ys.iter().enumerate().skip(lo).map(|(k, &y)| (k as f64, y)).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn log_cocycle_norms(g: &HenonMap, p: C2, n: usize) -> Vec<f64> {
    g.cocycle(p, n).mats.iter().map(|m| m.spectral_norm().ln()).collect()
}

/// Bisect `[p_in, p_out]` down to the floating-point resolution of the segment,
/// keeping the endpoint on the `p_in` side, then fit the cocycle growth there.
pub fn boundary_growth_test(g: &HenonMap, p_in: C2, p_out: C2, n: usize, opts: &BasinOptions) -> Result<GrowthReport, WanderError> {
    let basin = |p| basin_index(g, p, opts.n_max, opts.capture_radius);
    let b_in = basin(p_in).ok_or(WanderError::Uncaptured("p_in"))?;
    let b_out = basin(p_out);
    if b_out == Some(b_in) {
        return Err(WanderError::SameBasin);
    }
    let at = |t: f64| p_in + (p_out - p_in) * t;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if basin(at(mid)) == Some(b_in) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let length = (p_out - p_in).norm();
    let boundary_point = at(lo);
    let log_norms = log_cocycle_norms(g, boundary_point, n);
    let rho = fitted_rate(&log_norms, n / 2);
    Ok(GrowthReport { boundary_point, basin_in: b_in, basin_out: b_out, bracket: (hi - lo) * length, log_norms, rho })
}

/// `count` probes between `P_n` and `P_{n+1}` for random `n ∈ [−5, 5]`, with
/// random endpoint offsets of size ≤ 0.05 and deterministic per-probe streams.
pub fn random_probes(params: &WanderParams, count: usize, n: usize, seed: u64) -> Vec<Result<GrowthReport, WanderError>> {
    let (_, g) = build_maps(params);
    let opts = BasinOptions::default();
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let k: i64 = rng.gen_range(-5..=5);
            let mut jitter = || {
                let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.025..0.025));
                C2::new(c(v[0], v[1]), c(v[2], v[3]))
            };
            let p_in = lattice_point(k) + jitter();
            let p_out = lattice_point(k + 1) + jitter();
            boundary_growth_test(&g, p_in, p_out, n, &opts)
        })
        .collect()
}

use rand::SeedableRng;

/// Contraction rate of a captured orbit: `‖G^{k+1}(p) − P‖ / ‖G^k(p) − P‖`
/// averaged geometrically over `k ∈ [from, to)`.
pub fn observed_rate(g: &HenonMap, p: C2, target: i64, from: usize, to: usize) -> f64 {
    let orbit = g.iterate(p, to);
    let d: Vec<f64> = orbit.points.iter().map(|q| (*q - lattice_point(target)).norm()).collect();
    ((d[to] / d[from]).ln() / (to - from) as f64).exp()
}
