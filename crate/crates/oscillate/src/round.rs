use crate::lip::Disk;
use crate::{
    lambda_shoot_along, linearize, plan_detour, verify_round, Branch, OscError, OscParams, ShootCaps, ShootTarget, Window,
};
use henon_map::HenonMap;
use numeric_core::{c, Complex, EntireExpr, C2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex = Complex::new(0.0, 0.0);
/// Samples on the boundary of the big disk when measuring clearances.
const BIG_SAMPLES: usize = 4096;
const DISK_SAMPLES: usize = 64;
/// Allowed size of a correction at points where the orbit must be kept exact.
const POINT_LEAK: f64 = 1e-12;

/// Everything built after `k` rounds. The serialized form leaves out `f`,
/// whose tree is too deep for most readers, and rebuilds it from the windows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "StateData", from = "StateData")]
pub struct ConstructionState {
    pub params: OscParams,
    pub round: usize,
    /// `f_k`: `b·z` plus every window so far.
    pub f: EntireExpr,
    pub windows: Vec<Window>,
    /// `P_0, …, P_{n_k}`.
    pub orbit: Vec<C2>,
    /// `β_0, …, β_{n_k}`.
    pub radii: Vec<f64>,
    /// `θ_0, …, θ_k`.
    pub theta: Vec<f64>,
    /// `R_0, …, R_k`.
    pub big_r: Vec<f64>,
    /// `ε_j` for `j = 1..=k`, with an unused zero in front.
    pub eps: Vec<f64>,
    /// `n_0, …, n_k`.
    pub n: Vec<usize>,
    /// `n'_0, …, n'_{k−1}`.
    pub n_prime: Vec<usize>,
    pub log: Vec<RoundLog>,
}

#[derive(Serialize, Deserialize)]
struct StateData {
    params: OscParams,
    round: usize,
    windows: Vec<Window>,
    orbit: Vec<C2>,
    radii: Vec<f64>,
    theta: Vec<f64>,
    big_r: Vec<f64>,
    eps: Vec<f64>,
    n: Vec<usize>,
    n_prime: Vec<usize>,
    log: Vec<RoundLog>,
}

impl From<ConstructionState> for StateData {
    fn from(s: ConstructionState) -> Self {
        StateData {
            params: s.params,
            round: s.round,
            windows: s.windows,
            orbit: s.orbit,
            radii: s.radii,
            theta: s.theta,
            big_r: s.big_r,
            eps: s.eps,
            n: s.n,
            n_prime: s.n_prime,
            log: s.log,
        }
    }
}

impl From<StateData> for ConstructionState {
    fn from(d: StateData) -> Self {
        let f = d.windows.iter().fold(EntireExpr::real(d.params.b) * EntireExpr::var(), |acc, w| acc + w.to_expr());
        ConstructionState {
            params: d.params,
            round: d.round,
            f,
            windows: d.windows,
            orbit: d.orbit,
            radii: d.radii,
            theta: d.theta,
            big_r: d.big_r,
            eps: d.eps,
            n: d.n,
            n_prime: d.n_prime,
            log: d.log,
        }
    }
}

/// Diagnostics of one round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub detour_len: usize,
    pub passage_len: usize,
    pub theta: f64,
    pub theta_halvings: usize,
    pub big_r: f64,
    pub eps: f64,
    pub eps_attempts: usize,
    pub far_point: Complex,
    pub far_ratio: f64,
    pub stable_param: Complex,
    pub unstable_param: Complex,
    pub manifold_monotone: bool,
    pub shoot_offsets: [Complex; 2],
    pub closest_approach: f64,
    pub window_levels: Vec<f64>,
    pub max_degree: usize,
}

pub fn initial_state(params: &OscParams) -> ConstructionState {
    ConstructionState {
        params: params.clone(),
        round: 0,
        f: EntireExpr::real(params.b) * EntireExpr::var(),
        windows: Vec::new(),
        orbit: vec![C2::real(params.z0, 0.0)],
        radii: vec![0.5],
        theta: vec![1.0],
        big_r: vec![1.0],
        eps: vec![0.0],
        n: vec![0],
        n_prime: Vec::new(),
        log: Vec::new(),
    }
}

impl ConstructionState {
    pub fn map(&self) -> HenonMap {
        HenonMap::alternative(self.f.clone(), c(self.params.a, 0.0)).expect("a ≠ 0")
    }

    pub fn n_k(&self) -> usize {
        *self.n.last().expect("n_0 exists")
    }

    /// `ρ(n)`, the round whose `θ` bounds `β_n`: `n'_{ρ−1} ≤ n < n'_ρ` with
    /// `n'_{−1} = 0`.
    pub fn rho(&self, n: usize) -> usize {
        self.n_prime.iter().position(|&np| n < np).unwrap_or(self.n_prime.len())
    }

    /// `f_j − f_{j−1}` as an expression.
    pub fn correction(&self, j: usize) -> EntireExpr {
        self.windows.iter().filter(|w| w.round == j).fold(EntireExpr::real(0.0), |acc, w| acc + w.to_expr())
    }

    pub fn eval_correction(&self, j: usize, z: Complex) -> Complex {
        self.windows.iter().filter(|w| w.round == j).map(|w| w.eval(z)).sum()
    }
}

fn real_pow2(k: usize) -> f64 {
    0.5f64.powi(k as i32)
}

/// One disk of the new set `H` with the constant `h` takes on it.
#[derive(Clone, Copy, Debug)]
struct HDisk {
    disk: Disk,
    target: Complex,
}

/// `min Re((z − c)²·conj(axis)²)` over sample points: the window at `c`
/// decays like `exp(−m/σ²)` there.
fn clearance(center: Complex, axis: Complex, pts: &[Complex]) -> f64 {
    pts.iter().map(|&z| ((z - center) * axis.conj()).powu(2).re).fold(f64::INFINITY, f64::min)
}

/// Data shared by all window fits of one attempt.
struct Scene<'a> {
    f: &'a EntireExpr,
    round: usize,
    axis: Complex,
    /// Boundary samples of every set, tagged by owner (`None` for `K`).
    boundary: Vec<(Option<usize>, Complex)>,
    /// Orbit points inside `K`, where every new window must vanish to
    /// working precision.
    exact: Vec<Complex>,
    params: &'a OscParams,
}

impl Scene<'_> {
    fn others(&self, j: usize) -> Vec<Complex> {
        self.boundary.iter().filter(|(o, _)| *o != Some(j)).map(|(_, z)| *z).collect()
    }

    /// Fits the window for disk `j`, trying ever sharper levels until its
    /// leakage onto the other sets is within `share`.
    fn fit(&self, j: usize, h: &HDisk, eps: f64, share: f64) -> Result<Window, OscError> {
        let others = self.others(j);
        let m = clearance(h.disk.center, self.axis, &others);
        if !(m > 0.0) {
            return Err(OscError::Infeasible(format!("disk {j} is not separated along the axis")));
        }
        let mut last = OscError::Infeasible(format!("no window level fits disk {j}"));
        for &level in &self.params.levels {
            let sigma = (m / level).sqrt();
            let rho = h.disk.radius / sigma;
            if rho > self.params.rho_max {
                break;
            }
            let tol = eps / (2.0 * (rho * rho).exp());
            let w = match Window::fit(
                self.round,
                self.f,
                h.disk.center,
                h.disk.radius,
                self.axis,
                sigma,
                level,
                h.target,
                tol,
                self.params.degree_cap,
            ) {
                Ok(w) => w,
                Err(e) => {
                    last = e.into();
                    break;
                }
            };
            let leak = others.iter().map(|&z| w.eval(z).norm()).fold(0.0, f64::max);
            let point_leak = self.exact.iter().map(|&z| w.eval(z).norm() + w.eval_deriv(z).norm()).fold(0.0, f64::max);
            if leak <= share && point_leak <= POINT_LEAK {
                return Ok(w);
            }
            last = OscError::Infeasible(format!("disk {j}: leak {leak:e} at level {level}"));
        }
        Err(last)
    }
}

/// Size of the windows and their derivatives at `pts`.
fn influence(windows: &[Window], pts: &[Complex]) -> f64 {
    pts.iter()
        .map(|&z| windows.iter().map(|w| w.eval(z).norm() + w.eval_deriv(z).norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// First coordinates the next round's passage should visit on its way in if
/// the far point sits at `far`: `λ_s^i·(|far| − 4θ)` along the same axis.
fn predicted_passage(far: Complex, theta: f64, ball: f64, params: &OscParams) -> Vec<Complex> {
    let model = crate::SaddleModel::new(params.a, params.b);
    let dir = far / far.norm();
    let mut pts = Vec::new();
    let mut z = dir * (far.norm() - 4.0 * theta);
    loop {
        z *= model.lambda_s;
        if z.norm() < ball / 8.0 {
            break;
        }
        pts.push(z);
    }
    pts
}

/// Runs round `k → k + 1`. The input is left untouched on failure.
pub fn round(state: &ConstructionState) -> Result<ConstructionState, OscError> {
    let p = &state.params;
    let k = state.round;
    let map = state.map();
    let ball = 1.0 / (k + 1) as f64;
    let a = p.a;
    let pk = state.orbit[state.n_k()];
    let theta_k = state.theta[k];
    let dir = pk.z / pk.z.norm();

    let stable = linearize(&map, Branch::Stable, p.series_order)?;
    let unstable = linearize(&map, Branch::Unstable, p.series_order)?;
    // parameters are searched along the real ray of the eigen-direction
    let v0 = dir * (a * (pk.z.norm() - 4.0 * theta_k));
    let xi = stable.solve_coordinate(&map, 1, v0, v0 / stable.coefficients[1].w)?;
    let sp = stable.global_point(&map, xi);
    // The unstable branch leaves on the side opposite to P_{n_k}. Once earlier
    // rounds have put an exit window on that side, the branch is carried across
    // by it, and the exit point is taken halfway between √2·R_k (where a window
    // can still decay over D(0, R_k)) and the stable disk instead.
    let c1 = unstable.coefficients[1].z;
    let ray = -dir * c1.conj() / c1.norm();
    let level = pk.z.norm() - 2.0 * theta_k;
    let reach = 8.0 * level / c1.norm();
    let mut tau = unstable.first_crossing(&map, 0, level, ray, reach, None)?;
    if (unstable.global_point(&map, tau).z * dir.conj()).re > 0.0 {
        let inner = 1.5 * state.big_r[k];
        let level = 0.5 * (inner + pk.z.norm() - 6.0 * theta_k);
        if level <= inner + theta_k {
            return Err(OscError::Infeasible("no room for the exit disk".into()));
        }
        tau = unstable.first_crossing(&map, 0, level, ray, reach, None)?;
    }
    for _ in 0..8 {
        let path = unstable.global_orbit(&map, tau);
        if path.iter().all(|q| (q.z - sp.w / a).norm() > 1e-4) {
            break;
        }
        tau *= 1.0 + 1e-4;
    }
    let up = unstable.global_point(&map, tau);
    // up to the closest approach; beyond it rounding takes the orbit away again
    let until_closest = |pts: Vec<C2>| {
        let i = pts.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, q)| if q.norm() < acc.1 { (i, q.norm()) } else { acc }).0;
        pts[..=i].to_vec()
    };
    let forward = until_closest(map.iterate(sp, 200).points);
    let path = unstable.global_orbit(&map, tau);
    let backward: Vec<Complex> = until_closest(path.iter().rev().copied().collect()).iter().map(|q| q.z).collect();
    let manifold_monotone = forward.iter().skip(1).all(|q| q.w.norm() < sp.w.norm())
        && backward.iter().skip(1).all(|z| z.norm() < up.z.norm());

    let st = ShootTarget::from_tangent(sp, stable.global_tangent(&map, xi));
    let ut = ShootTarget::from_tangent(up, unstable.global_tangent(&map, tau));
    let shot = lambda_shoot_along(&map, &st, &ut, &path, ball, &ShootCaps::default())?;

    let mut last = OscError::Infeasible("no θ tried".into());
    for halvings in 1..=12 {
        let theta = theta_k * real_pow2(halvings);
        match attempt_round(state, &map, &shot.orbit, theta) {
            Ok((mut next, mut log)) => {
                log.theta_halvings = halvings;
                log.stable_param = xi;
                log.unstable_param = tau;
                log.manifold_monotone = manifold_monotone;
                log.shoot_offsets = [shot.t, shot.s];
                log.closest_approach = shot.min_norm;
                next.log.push(log);
                return Ok(next);
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Builds and verifies round `k + 1` for a given `θ_{k+1}`.
fn attempt_round(
    state: &ConstructionState,
    map: &HenonMap,
    q: &[C2],
    theta: f64,
) -> Result<(ConstructionState, RoundLog), OscError> {
    let p = &state.params;
    let k = state.round;
    let a = p.a;
    let nk = state.n_k();
    let pk = state.orbit[nk];
    let theta_k = state.theta[k];
    let r_k = state.big_r[k];
    let m = q.len() - 1;
    let dir = pk.z / pk.z.norm();

    // radii along the passage, backwards from θ/2
    let mut bt = vec![0.0; m + 1];
    bt[m] = theta / 2.0;
    for j in (0..m).rev() {
        let d0 = map.differential(q[j]).spectral_norm();
        let probe = bt[j + 1] / d0;
        let lip = (0..8)
            .map(|i| {
                let z = q[j].z + Complex::from_polar(probe, std::f64::consts::TAU * i as f64 / 8.0);
                map.differential(C2::new(z, q[j].w)).spectral_norm()
            })
            .fold(d0, f64::max);
        bt[j] = (0.93 * bt[j + 1] / lip).min(theta / 2.0);
    }
    let beta_k = state.radii[nk];
    let mut n_detour = 1;
    while p.c.powi(n_detour as i32) * beta_k >= bt[0] {
        n_detour += 1;
        if n_detour > 10_000 {
            return Err(OscError::Infeasible("detour length does not converge".into()));
        }
    }
    let gap = p.detour_gap * theta_k;
    let anchors = plan_detour(pk.z, q[0].w / a, n_detour, gap)?;

    // the set H, with the far constant filled in later
    let mut h: Vec<HDisk> = Vec::with_capacity(n_detour + 2);
    let w2 = |j: usize| if j == 0 { pk.w } else { anchors[j - 1] * a };
    for j in 0..n_detour {
        h.push(HDisk { disk: Disk::new(anchors[j], theta_k), target: anchors[j + 1] - w2(j) * a });
    }
    h.push(HDisk { disk: Disk::new(anchors[n_detour], theta), target: q[0].z - w2(n_detour) * a });
    h.push(HDisk { disk: Disk::new(q[m].z, theta), target: ZERO });
    let far_index = h.len() - 1;

    let big = Disk::new(ZERO, r_k);
    let qdisks: Vec<Disk> = q[..m].iter().map(|x| Disk::new(x.z, theta)).collect();
    for (j, hd) in h.iter().enumerate() {
        let d = hd.disk;
        if d.center.norm() - d.radius <= r_k {
            return Err(OscError::Infeasible(format!("disk {j} meets D(0, R_k)")));
        }
        if let Some(i) = qdisks.iter().position(|qd| (qd.center - d.center).norm() <= qd.radius + d.radius) {
            return Err(OscError::Infeasible(format!("disk {j} meets the passage disk {i}")));
        }
        for (i, other) in h.iter().enumerate().skip(j + 1) {
            if (other.disk.center - d.center).norm() <= other.disk.radius + d.radius {
                return Err(OscError::Infeasible(format!("disks {j} and {i} of H meet")));
            }
        }
    }
    let big_r_next = anchors.iter().map(|z| z.norm() + theta_k).chain(q.iter().map(|x| x.z.norm() + theta)).fold(0.0, f64::max)
        + 0.01;

    let mut boundary: Vec<(Option<usize>, Complex)> = big.boundary(BIG_SAMPLES).map(|z| (None, z)).collect();
    for qd in qdisks.iter().filter(|qd| qd.center.norm() + qd.radius > r_k) {
        boundary.extend(qd.boundary(DISK_SAMPLES).map(|z| (None, z)));
    }
    for (j, hd) in h.iter().enumerate() {
        boundary.extend(hd.disk.boundary(DISK_SAMPLES).map(|z| (Some(j), z)));
    }
    let mut exact = vec![ZERO];
    exact.extend(state.orbit[..nk].iter().map(|x| x.z));
    exact.extend(q[..m].iter().map(|x| x.z));
    let scene = Scene { f: &state.f, round: k + 1, axis: dir, boundary, exact, params: p };

    let gap_a = (p.a_upper - p.a).min(p.a - p.a_lower);
    let alpha = gap_a * h.iter().map(|hd| hd.disk.radius / 2.0).fold(f64::INFINITY, f64::min);
    let eps_base = real_pow2(k + 1).min(alpha);
    let share_of = |eps: f64| eps / (2.0 * h.len() as f64);

    let mut failures = Vec::new();
    for attempt in 0..=p.eps_retries {
        let eps = eps_base * real_pow2(attempt);
        let share = share_of(eps);
        let mut windows: Vec<Window> = h[..far_index]
            .par_iter()
            .enumerate()
            .map(|(j, hd)| scene.fit(j, hd, eps, share))
            .collect::<Result<_, _>>()?;

        // far constant: scan |Z| = γ·R_{k+1} for the value whose predicted
        // next passage stays clear of all windows
        let far_at = |ratio: f64| dir * (ratio * big_r_next);
        let far_target = |z: Complex| z - q[m].w * a;
        let provisional = scene.fit(far_index, &HDisk { target: far_target(far_at(2.0)), ..h[far_index] }, eps, share)?;
        let mut all: Vec<Window> = state.windows.clone();
        all.extend(windows.iter().cloned());
        all.push(provisional);
        let mut best = (f64::INFINITY, 2.0);
        for i in 0..=100 {
            let ratio = 1.5 + 0.01 * i as f64;
            let far = far_at(ratio);
            if far.norm() <= big_r_next + 5.0 * theta + 1e-9 {
                continue;
            }
            let score = influence(&all, &predicted_passage(far, theta, 1.0 / (k + 2) as f64, p));
            if score < best.0 {
                best = (score, ratio);
            }
            if score < 1e-9 {
                break;
            }
        }
        let far_ratio = best.1;
        let far = far_at(far_ratio);
        let mut hd_far = h[far_index];
        hd_far.target = far_target(far);
        windows.push(scene.fit(far_index, &hd_far, eps, share)?);
        let targets: Vec<Complex> = h[..far_index].iter().map(|hd| hd.target).chain([hd_far.target]).collect();

        // the fits hit their targets only up to the leakage of the others;
        // absorb the remaining error in the constant terms
        for _ in 0..2 {
            let fixes: Vec<Complex> = windows
                .iter()
                .zip(&targets)
                .map(|(w, t)| {
                    let z = w.center;
                    t - (state.f.eval(z) + windows.iter().map(|v| v.eval(z)).sum::<Complex>())
                })
                .collect();
            for (w, d) in windows.iter_mut().zip(fixes) {
                w.coefficients[0] += d;
            }
        }

        let max_degree = windows.iter().map(|w| w.coefficients.len() - 1).max().unwrap_or(0);
        let levels = windows.iter().map(|w| w.level).collect();
        let f_next = windows.iter().fold(state.f.clone(), |acc, w| acc + w.to_expr());
        let mut next = state.clone();
        next.round = k + 1;
        next.f = f_next;
        next.windows.extend(windows);
        let map_next = next.map();
        for j in 1..=n_detour {
            next.orbit.push(C2::new(anchors[j], w2(j)));
            next.radii.push(beta_k * p.c.powi(j as i32));
        }
        next.orbit.extend_from_slice(q);
        next.radii.extend_from_slice(&bt);
        next.orbit.push(map_next.apply(q[m]));
        next.radii.push(p.c * bt[m]);
        let n_prime = nk + n_detour + 1;
        next.n_prime.push(n_prime);
        next.n.push(n_prime + m + 1);
        debug_assert_eq!(next.orbit.len(), n_prime + m + 2);
        next.theta.push(theta);
        next.big_r.push(big_r_next);
        next.eps.push(eps);

        let report = verify_round(&next);
        if report.all_passed() {
            let log = RoundLog {
                round: k + 1,
                detour_len: n_detour,
                passage_len: m,
                theta,
                theta_halvings: 0,
                big_r: big_r_next,
                eps,
                eps_attempts: attempt + 1,
                far_point: far,
                far_ratio,
                stable_param: ZERO,
                unstable_param: ZERO,
                manifold_monotone: false,
                shoot_offsets: [ZERO; 2],
                closest_approach: 0.0,
                window_levels: levels,
                max_degree,
            };
            return Ok((next, log));
        }
        failures = report.failed_names();
    }
    Err(OscError::VerificationFailed { retries: p.eps_retries, failed: failures.join(", ") })
}

/// Runs `rounds` rounds from the initial state.
pub fn run(params: &OscParams, rounds: usize) -> Result<ConstructionState, OscError> {
    let mut state = initial_state(params);
    for _ in 0..rounds {
        state = round(&state)?;
    }
    Ok(state)
}
