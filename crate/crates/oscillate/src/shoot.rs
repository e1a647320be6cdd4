use crate::OscError;
use henon_map::HenonMap;
use nalgebra::{DMatrix, DVector};
use numeric_core::{c, Complex, C2};
use serde::{Deserialize, Serialize};

/// A point on an invariant manifold and a direction transverse to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootTarget {
    pub point: C2,
    pub transversal: C2,
}

impl ShootTarget {
    /// Uses the Hermitian complement of the manifold tangent as transversal.
    pub fn from_tangent(point: C2, tangent: C2) -> Self {
        let t = C2::new(-tangent.w.conj(), tangent.z.conj());
        ShootTarget { point, transversal: t * c(1.0 / t.norm(), 0.0) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootCaps {
    pub max_iter: usize,
    /// Longest allowed passage from either target to the ball.
    pub max_steps: usize,
    /// Largest allowed offset along the unstable transversal.
    pub max_offset: f64,
}

impl Default for ShootCaps {
    fn default() -> Self {
        ShootCaps { max_iter: 200, max_steps: 10_000, max_offset: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    /// `Q_0, …, Q_M`.
    pub orbit: Vec<C2>,
    /// `Q_0 = p + t·v_p`.
    pub t: Complex,
    /// `Q_M = q + s·v_q`.
    pub s: Complex,
    pub closest_index: usize,
    pub min_norm: f64,
    pub iterations: usize,
}

impl ShootResult {
    pub fn len(&self) -> usize {
        self.orbit.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.orbit.len() <= 1
    }
}

fn first_inside(mut p: C2, step: impl Fn(C2) -> C2, r: f64, cap: usize) -> Option<usize> {
    for i in 0..=cap {
        if p.norm() < r {
            return Some(i);
        }
        p = step(p);
        if !p.is_finite() {
            return None;
        }
    }
    None
}

/// Solves `F^m(p + t·v_p) = q + s·v_q` for `(t, s)` by multiple shooting:
/// every intermediate point is an unknown, so the huge derivatives of long
/// compositions never appear. Returns the whole orbit.
fn solve_fixed_length(
    map: &HenonMap,
    stable: &ShootTarget,
    unstable: &ShootTarget,
    back_path: &[C2],
    m: usize,
    split: usize,
    max_iter: usize,
) -> Result<(Vec<C2>, Complex, Complex, usize), OscError> {
    let (p, vp) = (stable.point, stable.transversal);
    let (q, vq) = (unstable.point, unstable.transversal);
    let n = 2 * m;
    // unknowns: t, x_1, …, x_{m−1}, s
    let mut x = vec![c(0.0, 0.0); n];
    let mut fwd = p;
    // F^{−j}(q) for j < m, continued from the far end of the known path
    let mut back: Vec<C2> = back_path.iter().rev().take(m).copied().collect();
    while back.len() < m {
        back.push(map.apply_inverse(*back.last().unwrap()));
    }
    for i in 1..m {
        fwd = map.apply(fwd);
        let node = if i <= split { fwd } else { back[m - i] };
        x[2 * i - 1] = node.z;
        x[2 * i] = node.w;
    }
    let nodes = |x: &[Complex]| -> Vec<C2> {
        let mut v = Vec::with_capacity(m + 1);
        v.push(p + vp * x[0]);
        for i in 1..m {
            v.push(C2::new(x[2 * i - 1], x[2 * i]));
        }
        v.push(q + vq * x[n - 1]);
        v
    };
    let residual = |pts: &[C2]| -> Vec<C2> { (0..m).map(|i| map.apply(pts[i]) - pts[i + 1]).collect() };
    let size = |r: &[C2]| r.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let mut pts = nodes(&x);
    let scale = 1.0 + pts.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut r = residual(&pts);
    let mut iterations = 0;
    while iterations < max_iter {
        if !(size(&r) >= 1e-13 * scale) {
            break;
        }
        iterations += 1;
        let mut jac = DMatrix::<Complex>::zeros(n, n);
        let mut rhs = DVector::<Complex>::zeros(n);
        for i in 0..m {
            let d = map.differential(pts[i]);
            let (r0, r1) = (2 * i, 2 * i + 1);
            if i == 0 {
                let dv = d.apply(vp);
                jac[(r0, 0)] = dv.z;
                jac[(r1, 0)] = dv.w;
            } else {
                let col = 2 * i - 1;
                jac[(r0, col)] = d.a;
                jac[(r0, col + 1)] = d.b;
                jac[(r1, col)] = d.c;
                jac[(r1, col + 1)] = d.d;
            }
            if i + 1 == m {
                jac[(r0, n - 1)] = -vq.z;
                jac[(r1, n - 1)] = -vq.w;
            } else {
                let col = 2 * i + 1;
                jac[(r0, col)] = c(-1.0, 0.0);
                jac[(r1, col + 1)] = c(-1.0, 0.0);
            }
            rhs[r0] = -r[i].z;
            rhs[r1] = -r[i].w;
        }
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        // damped step: halve until the residual decreases
        let before = size(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<Complex> = x.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
            let tp = nodes(&trial);
            let tr = residual(&tp);
            let after = size(&tr);
            if after.is_finite() && (after < before || lambda < 1e-6) {
                x = trial;
                pts = tp;
                r = tr;
                break;
            }
            lambda *= 0.5;
        }
    }
    if !(size(&r) <= 1e-10 * scale) {
        return Err(OscError::ShootFailed(format!("residual {:e} after {iterations} iterations", size(&r))));
    }
    Ok((pts, x[0], x[n - 1], iterations))
}

/// Orbit from the stable transversal at `stable` to the unstable transversal
/// at `unstable` that passes through `B(0, ball_radius)`.
///
/// The length `M` starts at the number of steps the stable target needs to
/// reach half the ball plus the number of backward steps the unstable target
/// needs. Newton's method solves `F^M(p + t·v_p) = q + s·v_q` for `(t, s)`;
/// while the exit offset `|s|` is too large the passage is made longer, which
/// shrinks it by about `|λ_s|` per step.
pub fn lambda_shoot(
    map: &HenonMap,
    stable: &ShootTarget,
    unstable: &ShootTarget,
    ball_radius: f64,
    caps: &ShootCaps,
) -> Result<ShootResult, OscError> {
    let half = 0.5 * ball_radius;
    let mut path = vec![unstable.point];
    while path.len() <= caps.max_steps && !(path.last().unwrap().norm() < half) {
        let prev = map.apply_inverse(*path.last().unwrap());
        if !prev.is_finite() {
            break;
        }
        path.push(prev);
    }
    path.reverse();
    lambda_shoot_along(map, stable, unstable, &path, ball_radius, caps)
}

/// As [`lambda_shoot`], with the backward orbit of the unstable target given
/// as a forward orbit `path` ending at it. Iterating the inverse map loses
/// the unstable manifold after a few expanding steps; a path pushed forward
/// from the local chart does not.
pub fn lambda_shoot_along(
    map: &HenonMap,
    stable: &ShootTarget,
    unstable: &ShootTarget,
    path: &[C2],
    ball_radius: f64,
    caps: &ShootCaps,
) -> Result<ShootResult, OscError> {
    if !(ball_radius > 0.0) {
        return Err(OscError::ShootFailed(format!("ball radius {ball_radius} must be positive")));
    }
    let half = 0.5 * ball_radius;
    let i_s = first_inside(stable.point, |p| map.apply(p), half, caps.max_steps)
        .ok_or_else(|| OscError::ShootFailed("stable target does not approach the origin".into()))?;
    // extend the path backwards into the ball if it starts outside
    let mut path = path.to_vec();
    let mut guard = 0;
    while !path.iter().any(|p| p.norm() < half) && guard < caps.max_steps {
        let prev = map.apply_inverse(path[0]);
        if !prev.is_finite() {
            break;
        }
        path.insert(0, prev);
        guard += 1;
    }
    let i_u = path
        .iter()
        .rev()
        .position(|p| p.norm() < half)
        .filter(|&i| i <= caps.max_steps)
        .ok_or_else(|| OscError::ShootFailed("unstable target does not come from the origin".into()))?;
    let mut last = OscError::ShootFailed("no passage length tried".into());
    for m in i_s + i_u..=i_s + i_u + 16 {
        let extra = m - i_s - i_u;
        let (orbit, t, s, iterations) = match solve_fixed_length(map, stable, unstable, &path, m, i_s + extra / 2, caps.max_iter) {
            Ok(v) => v,
            Err(e) => {
                last = e;
                continue;
            }
        };
        if s.norm() > caps.max_offset {
            last = OscError::ShootFailed(format!("exit offset {:e} exceeds {:e}", s.norm(), caps.max_offset));
            continue;
        }
        let (closest_index, min_norm) = orbit
            .iter()
            .enumerate()
            .map(|(i, q)| (i, q.norm()))
            .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        if min_norm >= ball_radius {
            return Err(OscError::ShootFailed(format!("closest approach {min_norm} misses the ball {ball_radius}")));
        }
        return Ok(ShootResult { orbit, t, s, closest_index, min_norm, iterations });
    }
    Err(last)
}
