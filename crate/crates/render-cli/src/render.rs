use henon_map::{HenonMap, Mat2c};
use numeric_core::{c, Complex, C2};
use orbit_engine::SliceGrid;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Colour of pixels whose orbit overflowed before it could be classified.
pub const OVERFLOW_COLOR: [u8; 3] = [255, 0, 255];
/// Colour of orbits that stayed bounded or were never captured.
pub const BACKGROUND: [u8; 3] = [0, 0, 0];

/// Pixel values for `u_n` are clamped to this range before colouring.
pub const PSH_RANGE: (f64, f64) = (-2.0, 0.5);
/// Cocycle growth rates are clamped to `[-GROWTH_CLAMP, GROWTH_CLAMP]`.
pub const GROWTH_CLAMP: f64 = 1.0;

/// Past this norm an escaping orbit is stopped and its direction read off.
const DIRECTION_CUTOFF: f64 = 1e100;

#[derive(Debug, Error, PartialEq)]
pub enum SliceError {
    #[error("slice axes are linearly dependent")]
    DependentAxes,
    #[error("resolution {0}x{1} is below 16x16")]
    TooSmall(usize, usize),
    #[error("extent must be positive and finite")]
    BadExtent,
}

pub fn validate_slice(grid: &SliceGrid) -> Result<(), SliceError> {
    if !grid.axes_independent() {
        return Err(SliceError::DependentAxes);
    }
    let (w, h) = grid.resolution;
    if w < 16 || h < 16 {
        return Err(SliceError::TooSmall(w, h));
    }
    let (ew, eh) = grid.extent;
    if !(ew > 0.0 && eh > 0.0 && ew.is_finite() && eh.is_finite()) {
        return Err(SliceError::BadExtent);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColorMode {
    EscapeTime,
    /// Hue is the argument of `z/w` once the orbit is far out.
    EscapeDirection,
    /// `u_n = −Re(z_n)/n` at `n = n_max`.
    PshValue,
    /// Index of the attracting lattice point the orbit settles on.
    BasinIndex,
    /// `ln‖dF^n‖/n` at `n = n_max`.
    CocycleGrowth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub r_escape: f64,
    pub capture_radius: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { r_escape: 1e3, capture_radius: 0.2 }
    }
}

/// What a pixel's orbit did, before colouring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Pixel {
    Escaped { step: usize },
    Bounded,
    Direction { arg: f64 },
    Psh { u: f64 },
    Basin { index: Option<i64> },
    Growth { rate: f64 },
    Overflow,
}

pub fn pixel(map: &HenonMap, p: C2, mode: ColorMode, n_max: usize, thr: &Thresholds) -> Pixel {
    match mode {
        ColorMode::EscapeTime => escape_time(map, p, n_max, thr.r_escape),
        ColorMode::EscapeDirection => escape_direction(map, p, n_max, thr.r_escape),
        ColorMode::PshValue => match map.iterate_to(p, n_max.max(1)) {
            Some(q) => Pixel::Psh { u: -q.z.re / n_max.max(1) as f64 },
            None => Pixel::Overflow,
        },
        ColorMode::BasinIndex => Pixel::Basin { index: wander_escape::basin_index(map, p, n_max, thr.capture_radius) },
        ColorMode::CocycleGrowth => growth(map, p, n_max.max(1)),
    }
}

fn escape_time(map: &HenonMap, mut p: C2, n_max: usize, r: f64) -> Pixel {
    for step in 0..=n_max {
        if !p.is_finite() {
            return Pixel::Overflow;
        }
        if p.norm() > r {
            return Pixel::Escaped { step };
        }
        if step < n_max {
            p = map.apply(p);
        }
    }
    Pixel::Bounded
}

fn escape_direction(map: &HenonMap, mut p: C2, n_max: usize, r: f64) -> Pixel {
    for _ in 0..n_max {
        if p.norm() > DIRECTION_CUTOFF {
            break;
        }
        p = map.apply(p);
        if !p.is_finite() {
            return Pixel::Overflow;
        }
    }
    if p.norm() <= r {
        return Pixel::Bounded;
    }
    // arg(z/w) without forming the quotient
    Pixel::Direction { arg: (p.z * p.w.conj()).arg() }
}

fn growth(map: &HenonMap, mut p: C2, n: usize) -> Pixel {
    let mut acc = Mat2c::identity();
    let mut log_scale = 0.0f64;
    for _ in 0..n {
        acc = map.differential(p) * acc;
        p = map.apply(p);
        let s = acc.frobenius();
        if !(s.is_finite() && s > 0.0 && p.is_finite()) {
            return Pixel::Overflow;
        }
        acc = acc * c(1.0 / s, 0.0);
        log_scale += s.ln();
    }
    Pixel::Growth { rate: (log_scale + acc.spectral_norm().ln()) / n as f64 }
}

/// Row-major pixel values, row 0 on top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub width: usize,
    pub height: usize,
    pub n_max: usize,
    pub mode: ColorMode,
    pub pixels: Vec<Pixel>,
}

impl Field {
    pub fn at(&self, col: usize, row: usize) -> Pixel {
        self.pixels[row * self.width + col]
    }
}

/// Rows are distributed over the rayon pool and gathered by index, so the
/// result does not depend on the number of workers.
pub fn render_field(map: &HenonMap, grid: &SliceGrid, mode: ColorMode, n_max: usize, thr: &Thresholds) -> Result<Field, SliceError> {
    validate_slice(grid)?;
    let (w, h) = grid.resolution;
    let rows: Vec<Vec<Pixel>> = (0..h)
        .into_par_iter()
        .map(|row| (0..w).map(|col| pixel(map, grid.node(col, row), mode, n_max, thr)).collect())
        .collect();
    Ok(Field { width: w, height: h, n_max, mode, pixels: rows.concat() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn from_field(field: &Field) -> Image {
        let rgb = field.pixels.iter().flat_map(|p| color(p, field.n_max)).collect();
        Image { width: field.width, height: field.height, rgb }
    }

    pub fn get(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.rgb)?;
        out.flush()
    }

    /// FNV-1a of each row, for comparing renders row by row.
    pub fn row_checksums(&self) -> Vec<u64> {
        self.rgb
            .chunks(3 * self.width)
            .map(|row| row.iter().fold(0xcbf29ce484222325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3)))
            .collect()
    }
}

pub fn render(map: &HenonMap, grid: &SliceGrid, mode: ColorMode, n_max: usize, thr: &Thresholds) -> Result<Image, SliceError> {
    Ok(Image::from_field(&render_field(map, grid, mode, n_max, thr)?))
}

/// Fully saturated colour at angle `arg` (radians); `0` is red.
pub fn hue(arg: f64) -> [u8; 3] {
    let h = arg.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [to_byte(r), to_byte(g), to_byte(b)]
}

/// Blue below zero, white at zero, red above; `t ∈ [−1, 1]`.
fn diverging(t: f64) -> [u8; 3] {
    let t = t.clamp(-1.0, 1.0);
    if t < 0.0 {
        [to_byte(1.0 + t), to_byte(1.0 + t), 255]
    } else {
        [255, to_byte(1.0 - t), to_byte(1.0 - t)]
    }
}

fn to_byte(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn color(p: &Pixel, n_max: usize) -> [u8; 3] {
    match *p {
        Pixel::Overflow => OVERFLOW_COLOR,
        Pixel::Bounded | Pixel::Basin { index: None } => BACKGROUND,
        Pixel::Escaped { step } => {
            // early escapes bright, late ones dark
            let t = 1.0 - (step as f64 / n_max.max(1) as f64).sqrt();
            [to_byte(0.2 + 0.8 * t), to_byte(0.1 + 0.9 * t * t), to_byte(0.3 * t)]
        }
        Pixel::Direction { arg } => hue(arg),
        Pixel::Psh { u } => {
            let (lo, hi) = PSH_RANGE;
            let u = u.clamp(lo, hi);
            diverging(if u < 0.0 { u / -lo } else { u / hi })
        }
        Pixel::Basin { index: Some(n) } => hue(golden(n)),
        Pixel::Growth { rate } => diverging(rate / GROWTH_CLAMP),
    }
}

/// Neighbouring indices get well separated hues.
fn golden(n: i64) -> f64 {
    let phi = 0.618_033_988_749_894_9;
    (n as f64 * phi).rem_euclid(1.0) * std::f64::consts::TAU
}

/// The complex line `{w = w0}` (or `{z = z0}`) over the rectangle `re × im` of the free coordinate.
pub fn complex_line(fixed_w: bool, value: Complex, re: (f64, f64), im: (f64, f64), resolution: (usize, usize)) -> SliceGrid {
    let corner = c(re.0, im.0);
    let (origin, u, v) = if fixed_w {
        (C2::new(corner, value), C2::new(c(1.0, 0.0), c(0.0, 0.0)), C2::new(c(0.0, 1.0), c(0.0, 0.0)))
    } else {
        (C2::new(value, corner), C2::new(c(0.0, 0.0), c(1.0, 0.0)), C2::new(c(0.0, 0.0), c(0.0, 1.0)))
    };
    SliceGrid { origin, axis_u: u, axis_v: v, extent: (re.1 - re.0, im.1 - im.0), resolution }
}

/// The real plane `(Re z, Re w)`.
pub fn real_plane(z: (f64, f64), w: (f64, f64), resolution: (usize, usize)) -> SliceGrid {
    SliceGrid {
        origin: C2::real(z.0, w.0),
        axis_u: C2::real(1.0, 0.0),
        axis_v: C2::real(0.0, 1.0),
        extent: (z.1 - z.0, w.1 - w.0),
        resolution,
    }
}
