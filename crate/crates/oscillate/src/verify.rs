use crate::ConstructionState;
use numeric_core::{c, Complex, C2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tolerance for the orbit relation `F_k(P_n) = P_{n+1}`.
pub const ORBIT_TOL: f64 = 1e-8;

/// One property: passes when `value < bound`; `margin = bound − value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub detail: String,
}

impl PropertyCheck {
    fn below(name: &str, value: f64, bound: f64, detail: String) -> Self {
        PropertyCheck { name: name.into(), passed: value < bound || (value == 0.0 && bound == 0.0), value, bound, margin: bound - value, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub checks: Vec<PropertyCheck>,
}

impl RoundReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Points on the polar grid of `D(0, r)`, boundary included.
fn disk_grid(r: f64, rings: usize, per_ring: usize) -> Vec<Complex> {
    let mut pts = vec![c(0.0, 0.0)];
    for i in 1..=rings {
        let rad = r * i as f64 / rings as f64;
        for j in 0..per_ring {
            pts.push(Complex::from_polar(rad, std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / per_ring as f64));
        }
    }
    pts
}

/// Uniform points on the unit sphere of ℂ², by rejection from the cube.
fn sphere_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<C2> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            out.push(C2::new(c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n)));
        }
    }
    out
}

/// Numerical check of the five properties of a round, each with its margin.
pub fn verify_round(state: &ConstructionState) -> RoundReport {
    let k = state.round;
    let p = &state.params;
    let map = state.map();
    let nk = state.n_k();
    let mut checks = Vec::with_capacity(5);

    // (i) ‖f_k − f_{k−1}‖ on D(0, R_{k−1}). Older windows grow like
    // exp(y²/σ²) off their axis, so f itself overflows on most of the disk;
    // the difference is the sum of this round's windows and is evaluated as
    // such. Where f is representable the direct difference is compared too.
    if k == 0 {
        checks.push(PropertyCheck::below("i", 0.0, 0.0, "no previous map".into()));
    } else {
        let grid = disk_grid(state.big_r[k - 1], 48, 1024);
        let older: Vec<_> = state.windows.iter().filter(|w| w.round < k).collect();
        let (sup, direct) = grid
            .par_iter()
            .map(|&z| {
                let diff = state.eval_correction(k, z).norm();
                let prev = p.b * z + older.iter().map(|w| w.eval(z)).sum::<Complex>();
                let direct = if prev.norm() < 1e6 { (state.f.eval(z) - prev).norm() } else { 0.0 };
                (diff, direct)
            })
            .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
        let value = sup.max(direct);
        let detail = format!("{} samples of D(0, {}); direct difference {direct:e} where |f| < 1e6", grid.len(), state.big_r[k - 1]);
        checks.push(PropertyCheck::below("i", value, state.eps[k] * (1.0 + 1e-12), detail));
    }

    // (ii) F_k(P_n) = P_{n+1}
    let worst = (0..nk).map(|n| (map.apply(state.orbit[n]) - state.orbit[n + 1]).norm()).fold(0.0, f64::max);
    checks.push(PropertyCheck::below("ii", worst, ORBIT_TOL, format!("{nk} steps")));

    // (iii) F_k(B(P_n, β_n)) ⊂⊂ B(P_{n+1}, β_{n+1}) and β_n ≤ θ_ρ(n)/2
    let ratios: Vec<f64> = (0..nk)
        .into_par_iter()
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(n as u64);
            let (pn, bn) = (state.orbit[n], state.radii[n]);
            let (target, bt) = (state.orbit[n + 1], state.radii[n + 1]);
            std::iter::once(C2::default())
                .chain(sphere_points(&mut rng, p.sphere_points))
                .map(|u| (map.apply(pn + u * c(bn, 0.0)) - target).norm() / bt)
                .fold(0.0, f64::max)
        })
        .collect();
    let nesting = ratios.iter().copied().fold(0.0, f64::max);
    let radius_excess = (0..=nk).map(|n| state.radii[n] / (state.theta[state.rho(n)] / 2.0)).fold(0.0, f64::max);
    let mut iii = PropertyCheck::below(
        "iii",
        nesting,
        1.0 - p.nesting_margin,
        format!("worst image ratio at n = {}; worst β_n/(θ_ρ/2) = {radius_excess:.4}", argmax(&ratios)),
    );
    iii.passed &= radius_excess <= 1.0 + 1e-12;
    checks.push(iii);

    // (iv) |z_n| < R_k − θ_ρ(n) for n < n_k, |z_{n_k}| > R_k + 5θ_k
    let r_k = state.big_r[k];
    let inner = (0..nk).map(|n| state.orbit[n].z.norm() + state.theta[state.rho(n)] - r_k).fold(f64::NEG_INFINITY, f64::max);
    let outer = r_k + 5.0 * state.theta[k] - state.orbit[nk].z.norm();
    let excess = inner.max(outer);
    checks.push(PropertyCheck::below("iv", excess, 0.0, format!("inner {inner:.4}, outer {outer:.4}")));

    // (v) the last piece of orbit enters B(0, 1/k)
    if k == 0 {
        checks.push(PropertyCheck::below("v", 0.0, 0.0, "no passage yet".into()));
    } else {
        let lo = state.n[k - 1] + 1;
        let closest = state.orbit[lo..=nk].iter().map(|q| q.norm()).fold(f64::INFINITY, f64::min);
        checks.push(PropertyCheck::below("v", closest, 1.0 / k as f64, format!("indices {lo}..={nk}")));
    }

    RoundReport { round: k, checks }
}

fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc }).0
}
