use numeric_core::C2;
use serde::{Deserialize, Serialize};

/// Rectangle on the real 2-plane `origin + x·axis_u + y·axis_v`, sampled at pixel centres.
///
/// `origin` is the lower-left corner; row 0 is the top row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub origin: C2,
    pub axis_u: C2,
    pub axis_v: C2,
    pub extent: (f64, f64),
    pub resolution: (usize, usize),
}

impl SliceGrid {
    pub fn node(&self, col: usize, row: usize) -> C2 {
        let (w, h) = self.extent;
        let (nx, ny) = self.resolution;
        let x = w * (col as f64 + 0.5) / nx as f64;
        let y = h * (1.0 - (row as f64 + 0.5) / ny as f64);
        self.origin + self.axis_u * x + self.axis_v * y
    }

    pub fn len(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axes must span a real 2-plane.
    pub fn axes_independent(&self) -> bool {
        let u = [self.axis_u.z.re, self.axis_u.z.im, self.axis_u.w.re, self.axis_u.w.im];
        let v = [self.axis_v.z.re, self.axis_v.z.im, self.axis_v.w.re, self.axis_v.w.im];
        let uu: f64 = u.iter().map(|x| x * x).sum();
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        uu > 0.0 && vv > 0.0 && uu * vv - uv * uv > 1e-12 * uu * vv
    }
}
