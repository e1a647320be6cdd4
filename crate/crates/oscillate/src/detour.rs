use crate::OscError;
use numeric_core::Complex;

/// Anchors `z''_0 = start, z''_1, …, z''_{n−1}, z''_n = end` of a detour.
///
/// The intermediate points go along the ray through `start`, equally spaced
/// by `gap ≥ 2.1` beyond `|start|`. Putting everything on one line lets the
/// correction windows decay towards all other sets at once. The conditions
/// `|z''_j| > |start| + 2` for `0 < j < n` and `|z''_i − z''_j| > 2` for
/// `i ≠ j < n` are rechecked pairwise.
pub fn plan_detour(start: Complex, end: Complex, n: usize, gap: f64) -> Result<Vec<Complex>, OscError> {
    if n == 0 {
        return Err(OscError::Infeasible("a detour needs at least one step".into()));
    }
    if start.norm() == 0.0 {
        return Err(OscError::Infeasible("detour start at the origin has no direction".into()));
    }
    let gap = gap.max(2.1);
    let dir = start / start.norm();
    let mut pts = vec![start];
    for j in 1..n {
        pts.push(start + dir * (gap * j as f64));
    }
    pts.push(end);

    let r0 = start.norm();
    if let Some(j) = (1..n).find(|&j| pts[j].norm() <= r0 + 2.0) {
        return Err(OscError::Infeasible(format!("anchor {j} is within |start| + 2")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i] - pts[j]).norm() <= 2.0 {
                return Err(OscError::Infeasible(format!("anchors {i} and {j} are too close")));
            }
        }
    }
    Ok(pts)
}
