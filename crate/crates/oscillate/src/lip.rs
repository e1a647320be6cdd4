use henon_map::{Form, HenonMap};
use numeric_core::{c, Complex, C2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, z: Complex) -> bool {
        (z - self.center).norm() <= self.radius
    }

    /// `count` points evenly spaced on the boundary circle.
    pub fn boundary(&self, count: usize) -> impl Iterator<Item = Complex> + '_ {
        (0..count).map(move |i| {
            self.center + Complex::from_polar(self.radius, std::f64::consts::TAU * i as f64 / count as f64)
        })
    }

    /// Distance from this disk to the complement of `outer`, negative when not
    /// compactly contained.
    pub fn clearance_in(&self, outer: &Disk) -> f64 {
        outer.radius - (self.center - outer.center).norm() - self.radius
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// Sampled `‖f − s‖` on the closed outer disk.
    pub deviation: f64,
    /// Largest `α` for which the bounds are guaranteed: with `|f'| ≤ α/d` on
    /// the inner disk by Cauchy's estimate, the differential is within `α/d`
    /// of `a` times an isometry, `d` being the clearance between the disks.
    pub certified_alpha: f64,
}

impl ContractionReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }

    pub fn within_certified(&self) -> bool {
        self.deviation <= self.certified_alpha
    }
}

fn in_disk(rng: &mut ChaCha8Rng, d: &Disk) -> Complex {
    // uniform on the disk
    let r = d.radius * rng.gen::<f64>().sqrt();
    d.center + Complex::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Samples `10⁴` pairs with first coordinates in `d1` and checks
/// `a''‖p − q‖ ≤ ‖F(p) − F(q)‖ ≤ a'‖p − q‖`.
pub fn contraction_check(map: &HenonMap, d1: &Disk, d2: &Disk, s: Complex, a_upper: f64, a_lower: f64) -> ContractionReport {
    contraction_check_seeded(map, d1, d2, s, a_upper, a_lower, 10_000, 7)
}

#[allow(clippy::too_many_arguments)]
pub fn contraction_check_seeded(
    map: &HenonMap,
    d1: &Disk,
    d2: &Disk,
    s: Complex,
    a_upper: f64,
    a_lower: f64,
    pairs: usize,
    seed: u64,
) -> ContractionReport {
    let a = match map.form {
        Form::Alternative { a } => a.norm(),
        Form::Standard { delta } => delta.norm().sqrt(),
    };
    let mut deviation = 0.0f64;
    for ring in [1.0, 0.5, 0.0] {
        let d = Disk::new(d2.center, d2.radius * ring);
        for z in d.boundary(if ring == 0.0 { 1 } else { 512 }) {
            deviation = deviation.max((map.f.eval(z) - s).norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_disk = Disk::new(c(0.0, 0.0), d1.radius.max(1e-300));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..pairs {
        let p = C2::new(in_disk(&mut rng, d1), in_disk(&mut rng, &w_disk));
        let q = C2::new(in_disk(&mut rng, d1), in_disk(&mut rng, &w_disk));
        let dist = (p - q).norm();
        if dist == 0.0 {
            continue;
        }
        let ratio = (map.apply(p) - map.apply(q)).norm() / dist;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let gap = (a_upper - a).min(a - a_lower).max(0.0);
    ContractionReport {
        pairs,
        min_ratio: lo,
        max_ratio: hi,
        lower_holds: lo >= a_lower,
        upper_holds: hi <= a_upper,
        deviation,
        certified_alpha: gap * d1.clearance_in(d2).max(0.0),
    }
}
