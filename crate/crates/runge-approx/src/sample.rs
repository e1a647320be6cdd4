use crate::DiskTarget;
use numeric_core::Complex;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub z: Complex,
    pub disk: usize,
    /// True for points on the bounding circle.
    pub boundary: bool,
}

fn disk_samples(out: &mut Vec<Sample>, disk: usize, d: &DiskTarget, n_boundary: usize, spacing: f64, phase: f64) {
    for k in 0..n_boundary {
        let t = 2.0 * PI * (k as f64 + phase) / n_boundary as f64;
        out.push(Sample { z: d.center + Complex::from_polar(d.radius, t), disk, boundary: true });
    }
    let h = spacing * d.radius;
    let m = (1.0 / spacing).ceil() as i64 + 1;
    for i in -m..=m {
        for j in -m..=m {
            let u = Complex::new((i as f64 + phase) * h, (j as f64 + phase) * h);
            if u.norm() < d.radius * (1.0 - 0.25 * spacing) {
                out.push(Sample { z: d.center + u, disk, boundary: false });
            }
        }
    }
}

/// Fitting sample: 8(d+1) equiangular boundary points and an interior mesh of
/// spacing radius/8 on every disk.
pub fn fit_samples(disks: &[DiskTarget], degree: usize) -> Vec<Sample> {
    let mut out = Vec::new();
    for (i, d) in disks.iter().enumerate() {
        disk_samples(&mut out, i, d, 8 * (degree + 1), 1.0 / 8.0, 0.0);
    }
    out
}

/// Validation sample, at least four times denser than the fitting sample in
/// each direction and never coinciding with it. Higher `level` gives a finer,
/// shifted grid.
pub fn validation_samples(disks: &[DiskTarget], degree: usize, level: usize) -> Vec<Sample> {
    let factor = 4 + 2 * level;
    let phase = 1.0 / (2.0 + level as f64);
    let mut out = Vec::new();
    for (i, d) in disks.iter().enumerate() {
        let n = (8 * factor * (degree + 1)).max(64 * factor);
        disk_samples(&mut out, i, d, n, 1.0 / (8 * factor) as f64, phase);
    }
    out
}
