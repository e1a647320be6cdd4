use henon_map::HenonMap;
use numeric_core::{fs_distance, ProjPoint, C2};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub n_max: usize,
    pub r_escape: f64,
    pub r_bound: f64,
    /// Cauchy tolerance for the projective limit.
    pub tail_tol: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { n_max: 1000, r_escape: 1e3, r_bound: 2.0, tail_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum EscapeClass {
    Bounded { radius: f64 },
    EscapesTo { limit: ProjPoint, residual: f64 },
    Oscillating { inner_radius: f64, outer_radius: f64, exceed_index: usize, return_index: usize },
    Undetermined,
}

impl EscapeClass {
    pub fn tag(&self) -> &'static str {
        match self {
            EscapeClass::Bounded { .. } => "bounded",
            EscapeClass::EscapesTo { .. } => "escapes",
            EscapeClass::Oscillating { .. } => "oscillating",
            EscapeClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<C2>,
    pub proj: Vec<ProjPoint>,
    /// `u[k]` is `−Re(z_{k+1})/(k+1)`.
    pub u: Vec<f64>,
    /// Spectral norms of `dF^k(p)` for `k = 0, 1, …`.
    pub cocycle_norms: Vec<f64>,
    pub overflow: bool,
    pub class: EscapeClass,
}

/// Iterate `p` up to `n_max` times and classify the orbit.
///
/// The escape limit is estimated from the directions of the increments
/// `P_{k+1} − P_k`, which lie on the line at infinity. When the norms blow up
/// and these directions converge, the positions converge to the same point
/// (Stolz–Cesàro), usually far more slowly: for orbits drifting linearly the
/// positions approach their limit like `1/k` while the increments settle
/// exponentially fast.
pub fn classify(map: &HenonMap, p: C2, params: &ClassifyParams) -> OrbitRecord {
    assert!(params.r_bound < params.r_escape, "r_bound must be below r_escape");
    let orbit = map.iterate(p, params.n_max);
    let points = orbit.points;
    let proj: Vec<ProjPoint> = points.iter().map(|&q| ProjPoint::affine(q)).collect();
    let u = points
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, q)| -q.z.re / k as f64)
        .collect();
    let cocycle_norms = cocycle_norms(map, &points);
    let norms: Vec<f64> = points.iter().map(C2::norm).collect();
    let class = decide(&points, &proj, &norms, orbit.overflow, params);
    OrbitRecord { points, proj, u, cocycle_norms, overflow: orbit.overflow, class }
}

/// Norms of the partial products, renormalised so that only their size can overflow.
fn cocycle_norms(map: &HenonMap, points: &[C2]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = henon_map::Mat2c::identity();
    let mut log_scale = 0.0f64;
    out.push(1.0);
    for q in &points[..points.len().saturating_sub(1)] {
        acc = map.differential(*q) * acc;
        let s = acc.frobenius();
        if !(s.is_finite() && s > 0.0) {
            out.push(f64::INFINITY);
            continue;
        }
        acc = acc * numeric_core::Complex::new(1.0 / s, 0.0);
        log_scale += s.ln();
        out.push((log_scale + acc.spectral_norm().ln()).exp());
    }
    out
}

fn decide(
    points: &[C2],
    proj: &[ProjPoint],
    norms: &[f64],
    overflow: bool,
    params: &ClassifyParams,
) -> EscapeClass {
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    if !overflow && max_norm <= params.r_bound {
        return EscapeClass::Bounded { radius: max_norm };
    }
    if let Some((limit, residual)) = escape_limit(points, proj, norms, params) {
        return EscapeClass::EscapesTo { limit, residual };
    }
    if let Some(i) = norms.iter().position(|&r| r > params.r_escape) {
        if let Some(j) = (i + 1..norms.len()).find(|&j| norms[j] <= params.r_bound) {
            return EscapeClass::Oscillating {
                inner_radius: norms[j],
                outer_radius: norms[i],
                exceed_index: i,
                return_index: j,
            };
        }
    }
    EscapeClass::Undetermined
}

fn escape_limit(
    points: &[C2],
    proj: &[ProjPoint],
    norms: &[f64],
    params: &ClassifyParams,
) -> Option<(ProjPoint, f64)> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let start = n - (n / 4).max(2);
    if norms[start..].iter().any(|&r| r <= params.r_escape) {
        return None;
    }
    let dirs: Vec<ProjPoint> = (start..n - 1)
        .map(|k| ProjPoint::at_infinity(points[k + 1] - points[k]))
        .collect::<Option<_>>()?;
    let last = *dirs.last()?;
    let spread = dirs.iter().map(|d| fs_distance(d, &last)).fold(0.0, f64::max);
    // a bound on the tail diameter of the direction sequence
    let residual = 2.0 * spread;
    let approaching = fs_distance(&proj[n - 1], &last) <= fs_distance(&proj[start], &last);
    (residual < params.tail_tol && approaching).then(|| (last.normalized(), residual))
}
