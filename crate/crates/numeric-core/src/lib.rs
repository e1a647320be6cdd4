//! Complex scalars, entire-function expressions and projective geometry.

mod c2;
mod expr;
mod jet;
mod parse;
mod proj;

pub use c2::C2;
pub use expr::{EntireExpr, Eval};
pub use parse::ParseError;
pub use proj::{fs_distance, ProjPoint};

pub use num_complex::Complex64 as Complex;

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}
