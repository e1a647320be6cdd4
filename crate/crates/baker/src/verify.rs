use crate::{baker_map, in_r_alpha, membership_alpha, psi, sample_r_alpha, sample_slab, stream_rng, RegionParams};
use numeric_core::C2;
use orbit_engine::equicontinuity_probe;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const CHUNK: usize = 4096;

/// Samples `0..n`, drawn chunk by chunk from independent streams so the result
/// does not depend on how the work is scheduled.
fn chunked<T: Send>(n: usize, seed: u64, draw: impl Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync) -> Vec<T> {
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub alpha: f64,
    pub samples: usize,
    /// Offending `(p, F(p))` pairs, verbatim.
    pub violations: Vec<(C2, C2)>,
    /// Smallest `Re z − Re w − α − η_α(Re w)` over the images.
    pub min_image_slack: f64,
}

pub fn invariance_check(alpha: f64, max_modulus: f64, n_samples: usize, seed: u64) -> InvarianceReport {
    let f = baker_map();
    let region = RegionParams::new(alpha);
    let results = chunked(n_samples, seed, |rng| {
        let p = sample_r_alpha(rng, alpha, max_modulus);
        let q = f.apply(p);
        (p, q, q.z.re - q.w.re - alpha - region.eta(q.w.re), in_r_alpha(q, alpha))
    });
    InvarianceReport {
        alpha,
        samples: n_samples,
        min_image_slack: results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
        violations: results.into_iter().filter(|r| !r.3).map(|r| (r.0, r.1)).collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DriftReport {
    pub alpha: f64,
    pub orbits: usize,
    pub steps: usize,
    /// Steps with `Re z_{n+1} − Re z_n ≤ α + η_α(Re z_n)`.
    pub step_violations: usize,
    /// Points with `Re z_n < Re z_0 + nα`.
    pub linear_violations: usize,
    pub min_step_slack: f64,
    pub min_linear_slack: f64,
    /// Starting points, for reuse by the escape check.
    pub starts: Vec<C2>,
}

pub fn drift_check(alpha: f64, max_modulus: f64, n_orbits: usize, steps: usize, seed: u64) -> DriftReport {
    let f = baker_map();
    let region = RegionParams::new(alpha);
    let starts = chunked(n_orbits, seed, |rng| sample_r_alpha(rng, alpha, max_modulus));
    let per: Vec<(usize, usize, f64, f64)> = starts
        .par_iter()
        .map(|&p| {
            let orbit = f.iterate(p, steps);
            let (mut sv, mut lv) = (0, 0);
            let (mut ss, mut ls) = (f64::INFINITY, f64::INFINITY);
            for (n, pair) in orbit.points.windows(2).enumerate() {
                let slack = pair[1].z.re - pair[0].z.re - alpha - region.eta(pair[0].z.re);
                ss = ss.min(slack);
                if slack <= 0.0 {
                    sv += 1;
                }
                let lin = pair[1].z.re - p.z.re - (n + 1) as f64 * alpha;
                ls = ls.min(lin);
                if lin < 0.0 {
                    lv += 1;
                }
            }
            (sv, lv, ss, ls)
        })
        .collect();
    DriftReport {
        alpha,
        orbits: n_orbits,
        steps,
        step_violations: per.iter().map(|r| r.0).sum(),
        linear_violations: per.iter().map(|r| r.1).sum(),
        min_step_slack: per.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
        min_linear_slack: per.iter().map(|r| r.3).fold(f64::INFINITY, f64::min),
        starts,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub pairs: usize,
    /// Smallest `‖ψ(p) − ψ(q)‖ / ‖p − q‖`.
    pub min_ratio: f64,
}

/// Random pairs in `R_1` at distance at most 1.
pub fn injectivity_check(n_pairs: usize, max_modulus: f64, tol: f64, seed: u64) -> InjectivityReport {
    let pairs = chunked(n_pairs, seed, |rng| {
        use rand::Rng;
        loop {
            let p = sample_r_alpha(rng, 1.0, max_modulus);
            let g: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
            let q = p + C2::new(numeric_core::c(g[0], g[1]), numeric_core::c(g[2], g[3]));
            if p != q && in_r_alpha(q, 1.0) && (p - q).norm() <= 1.0 {
                return (p, q);
            }
        }
    });
    let min_ratio = pairs
        .par_iter()
        .map(|&(p, q)| {
            let a = psi(p, tol).expect("sampled in R_1").psi_value;
            let b = psi(q, tol).expect("sampled in R_1").psi_value;
            (a - b).norm() / (p - q).norm()
        })
        .reduce(|| f64::INFINITY, f64::min);
    InjectivityReport { pairs: n_pairs, min_ratio }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub alpha: f64,
    pub samples: usize,
    /// Samples the equicontinuity proxy did not accept as Fatou points.
    pub excluded: Vec<C2>,
    pub absorbed: usize,
    /// Accepted samples that never entered `R`.
    pub failures: Vec<C2>,
    pub max_entry_step: usize,
    /// Accepted samples whose entry point was already in `R_{α/3}`.
    pub entered_third: usize,
}

/// Slab samples `{0 < Re(z−w) < α}` that look Fatou (probe < 0.1) should enter
/// `R = ∪ R_β` within `max_steps`. The Fatou test is a heuristic proxy.
///
/// Entry into `R_{α/3}` specifically is only counted: `z_n − w_n` converges along
/// such orbits, so a sample whose limit has real part below `α/3` drifts off to
/// the right just outside `R_{α/3}` forever.
pub fn absorption_check(alpha: f64, n_samples: usize, max_steps: usize, seed: u64) -> AbsorptionReport {
    let f = baker_map();
    let starts = chunked(n_samples, seed, |rng| sample_slab(rng, alpha, 10.0));
    let out: Vec<(C2, Option<Option<(usize, bool)>>)> = starts
        .par_iter()
        .map(|&p| {
            if equicontinuity_probe(&f, p, 1e-3, 8, 30) >= 0.1 {
                return (p, None);
            }
            let mut q = p;
            for m in 0..=max_steps {
                if membership_alpha(q).is_some() {
                    return (p, Some(Some((m, in_r_alpha(q, alpha / 3.0)))));
                }
                q = f.apply(q);
                if !q.is_finite() {
                    break;
                }
            }
            (p, Some(None))
        })
        .collect();
    AbsorptionReport {
        alpha,
        samples: n_samples,
        excluded: out.iter().filter(|r| r.1.is_none()).map(|r| r.0).collect(),
        absorbed: out.iter().filter(|r| matches!(r.1, Some(Some(_)))).count(),
        failures: out.iter().filter(|r| matches!(r.1, Some(None))).map(|r| r.0).collect(),
        max_entry_step: out.iter().filter_map(|r| r.1.flatten()).map(|e| e.0).max().unwrap_or(0),
        entered_third: out.iter().filter_map(|r| r.1.flatten()).filter(|e| e.1).count(),
    }
}
