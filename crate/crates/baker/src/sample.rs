use crate::RegionParams;
use numeric_core::{c, C2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn disc<R: Rng>(rng: &mut R, r: f64) -> (f64, f64) {
    loop {
        let (x, y) = (rng.gen_range(-r..r), rng.gen_range(-r..r));
        if x * x + y * y <= r * r {
            return (x, y);
        }
    }
}

/// Rejection sample of `R_α` with `|z|, |w| ≤ max_modulus`.
pub fn sample_r_alpha<R: Rng>(rng: &mut R, alpha: f64, max_modulus: f64) -> C2 {
    let region = RegionParams::new(alpha);
    loop {
        let (wr, wi) = disc(rng, max_modulus);
        let threshold = wr + alpha + region.eta(wr);
        if threshold >= max_modulus {
            continue;
        }
        // uniform in the part of the z-disc right of the threshold
        for _ in 0..64 {
            let (zr, zi) = disc(rng, max_modulus);
            if zr > threshold {
                return C2::new(c(zr, zi), c(wr, wi));
            }
        }
    }
}

/// Uniform sample of `{0 < Re(z − w) < width}` with `|z|, |w| ≤ max_modulus`.
pub fn sample_slab<R: Rng>(rng: &mut R, width: f64, max_modulus: f64) -> C2 {
    loop {
        let (zr, zi) = disc(rng, max_modulus);
        let (wr, wi) = disc(rng, max_modulus);
        let d = zr - wr;
        if d > 0.0 && d < width {
            return C2::new(c(zr, zi), c(wr, wi));
        }
    }
}
