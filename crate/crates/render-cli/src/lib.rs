//! Slice renderer and the `henon` command line.

pub mod cli;
pub mod render;

pub use render::{
    color, hue, pixel, render, render_field, validate_slice, ColorMode, Field, Image, Pixel, SliceError, Thresholds,
    BACKGROUND, OVERFLOW_COLOR,
};
