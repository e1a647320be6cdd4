use crate::SliceGrid;
use henon_map::HenonMap;
use numeric_core::{c, fs_distance, ProjPoint, C2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `u_n = −Re(z_n)/n` on the nodes of a slice; row-major, row 0 on top.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PshField {
    pub width: usize,
    pub height: usize,
    pub n: usize,
    /// `NaN` where the orbit overflowed before step `n`.
    pub values: Vec<f64>,
    pub overflowed: Vec<bool>,
}

pub fn psh_probe(map: &HenonMap, grid: &SliceGrid, n: usize) -> PshField {
    assert!(n >= 1, "the probe needs at least one step");
    let (w, h) = grid.resolution;
    let vals: Vec<Option<f64>> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let p = grid.node(idx % w, idx / w);
            map.iterate_to(p, n).map(|q| -q.z.re / n as f64)
        })
        .collect();
    PshField {
        width: w,
        height: h,
        n,
        overflowed: vals.iter().map(Option::is_none).collect(),
        values: vals.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
    }
}

impl PshField {
    /// One CSV row per node: column, row, the node's coordinates, `u_n`.
    pub fn write_csv<W: Write>(&self, grid: &SliceGrid, out: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["col", "row", "z_re", "z_im", "w_re", "w_im", "u_n", "overflow"])?;
        for (idx, (&v, &o)) in self.values.iter().zip(&self.overflowed).enumerate() {
            let (col, row) = (idx % self.width, idx / self.width);
            let p = grid.node(col, row);
            wr.write_record(&[
                col.to_string(),
                row.to_string(),
                p.z.re.to_string(),
                p.z.im.to_string(),
                p.w.re.to_string(),
                p.w.im.to_string(),
                v.to_string(),
                o.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Deterministic sample of the closed ball of radius `r` about `p` (center included).
fn ball_samples(p: C2, r: f64, count: usize) -> Vec<C2> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = vec![p];
    while out.len() < count.max(1) {
        let g: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let len = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 || len > 1.0 {
            continue;
        }
        out.push(p + C2::new(c(g[0], g[1]), c(g[2], g[3])) * r);
    }
    out
}

/// For each `k ≤ n`, the largest Fubini–Study distance between `[F^k(q)]` and
/// `[F^k(p)]` over samples `q` of the ball. A heuristic normality indicator:
/// staying small suggests Fatou behaviour, growth to O(1) suggests the Julia set.
/// Samples that overflow count as distance π/2.
pub fn equicontinuity_profile(map: &HenonMap, p: C2, ball_radius: f64, sample_count: usize, n: usize) -> Vec<f64> {
    if ball_radius == 0.0 {
        return vec![0.0; n + 1];
    }
    let base = map.iterate(p, n);
    let samples = ball_samples(p, ball_radius, sample_count);
    let per_sample: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|&q| {
            let o = map.iterate(q, n);
            (0..=n)
                .map(|k| match (o.points.get(k), base.points.get(k)) {
                    (Some(&a), Some(&b)) => fs_distance(&ProjPoint::affine(a), &ProjPoint::affine(b)),
                    _ => std::f64::consts::FRAC_PI_2,
                })
                .collect()
        })
        .collect();
    (0..=n)
        .map(|k| per_sample.iter().map(|s| s[k]).fold(0.0, f64::max))
        .collect()
}

pub fn equicontinuity_probe(map: &HenonMap, p: C2, ball_radius: f64, sample_count: usize, n: usize) -> f64 {
    equicontinuity_profile(map, p, ball_radius, sample_count, n)[n]
}
