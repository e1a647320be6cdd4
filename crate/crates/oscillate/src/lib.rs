//! An orbit that oscillates between a neighbourhood of the origin and
//! infinity, built one round at a time for maps `(f(z) + aw, az)`.
//!
//! Each round finds a new excursion of the current map, passing near the
//! saddle at the origin along its stable and unstable manifolds. It then
//! modifies `f` far from everything built so far, so that a contracting
//! detour joins the old orbit to the new excursion.

mod detour;
mod lip;
mod round;
mod saddle;
mod shoot;
mod verify;
mod window;

pub use detour::plan_detour;
pub use lip::{contraction_check, ContractionReport, Disk};
pub use round::{initial_state, round, run, ConstructionState, RoundLog};
pub use saddle::{linearize, Branch, ManifoldSeries, SaddleModel};
pub use shoot::{lambda_shoot, lambda_shoot_along, ShootCaps, ShootResult, ShootTarget};
pub use verify::{verify_round, PropertyCheck, RoundReport};
pub use window::Window;

use numeric_core::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OscError {
    #[error("the map is not in the alternative form")]
    NotAlternative,
    #[error("the origin is not a saddle: eigenvalue moduli {0} and {1}")]
    NotSaddle(f64, f64),
    #[error("the origin is not fixed: f(0) = {0}")]
    NotFixed(Complex),
    #[error("resonance at order {0}")]
    ResonanceDetected(usize),
    #[error("series residual {residual:e} too large at every radius down to {radius}")]
    ResidualTooLarge { radius: f64, residual: f64 },
    #[error("shooting failed: {0}")]
    ShootFailed(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("verification failed after {retries} retries: {failed}")]
    VerificationFailed { retries: usize, failed: String },
    #[error(transparent)]
    Runge(#[from] runge_approx::RungeError),
    #[error(transparent)]
    Map(#[from] henon_map::MapError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscParams {
    pub a: f64,
    pub b: f64,
    /// Contraction factor of the detours.
    pub c: f64,
    pub a_upper: f64,
    pub a_lower: f64,
    /// First coordinate of `P_0`.
    pub z0: f64,
    pub series_order: usize,
    /// Window sharpness levels tried in order; the squared window width is the
    /// clearance divided by the level.
    pub levels: Vec<f64>,
    /// Largest allowed ratio of disk radius to window width.
    pub rho_max: f64,
    /// Spacing of detour anchors in units of the disk radius.
    pub detour_gap: f64,
    /// Attempts with halved ε before a round gives up.
    pub eps_retries: usize,
    pub sphere_points: usize,
    /// Required relative margin for ball nesting.
    pub nesting_margin: f64,
    pub degree_cap: usize,
    pub seed: u64,
}

impl Default for OscParams {
    fn default() -> Self {
        OscParams {
            a: 0.5,
            b: 1.0,
            c: 0.6,
            a_upper: 0.55,
            a_lower: 0.45,
            z0: 6.01,
            series_order: 30,
            levels: vec![36.0, 64.0, 100.0, 144.0, 196.0, 256.0],
            rho_max: 2.5,
            detour_gap: 7.0,
            eps_retries: 6,
            sphere_points: 64,
            nesting_margin: 0.05,
            degree_cap: 64,
            seed: 11,
        }
    }
}
