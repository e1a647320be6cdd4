//! Polynomial approximation on finite unions of disjoint closed disks, with
//! exact value and derivative interpolation.
//!
//! The fit is a weighted least squares problem in an Arnoldi basis for the
//! sample set, with the interpolation conditions eliminated through a QR
//! factorization of the constraint matrix. The result is stored in monomial
//! form in the local variable `(z - center) / scale`.

mod dd;
mod sample;
mod solve;

use numeric_core::{Complex, EntireExpr};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sample::{fit_samples, validation_samples, Sample};

/// Condition estimates above this are refused.
pub const MAX_CONDITION: f64 = 1e14;
/// Required accuracy of the interpolation conditions.
pub const CONDITION_TOL: f64 = 1e-10;
pub const DEFAULT_DEGREE_CAP: usize = 512;
const FIRST_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    ConstValue(Complex),
    Function(EntireExpr),
}

impl Target {
    pub fn eval(&self, z: Complex) -> Complex {
        match self {
            Target::ConstValue(c) => *c,
            Target::Function(f) => f.eval(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskTarget {
    pub center: Complex,
    pub radius: f64,
    pub target: Target,
}

impl DiskTarget {
    pub fn new(center: Complex, radius: f64, target: Target) -> Self {
        DiskTarget { center, radius, target }
    }

    pub fn constant(center: Complex, radius: f64, value: Complex) -> Self {
        Self::new(center, radius, Target::ConstValue(value))
    }

    pub fn function(center: Complex, radius: f64, f: EntireExpr) -> Self {
        Self::new(center, radius, Target::Function(f))
    }

    pub fn contains(&self, z: Complex) -> bool {
        (z - self.center).norm() <= self.radius * (1.0 + 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpCondition {
    pub point: Complex,
    pub value: Complex,
    pub deriv: Option<Complex>,
}

impl InterpCondition {
    pub fn value(point: Complex, value: Complex) -> Self {
        InterpCondition { point, value, deriv: None }
    }

    pub fn with_deriv(point: Complex, value: Complex, deriv: Complex) -> Self {
        InterpCondition { point, value, deriv: Some(deriv) }
    }

    fn rows(&self) -> usize {
        1 + self.deriv.is_some() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyApproximant {
    /// Monomial coefficients in the variable `(z - center) / scale`.
    pub coefficients: Vec<Complex>,
    pub degree: usize,
    pub center: Complex,
    pub scale: f64,
    pub sup_error: f64,
    pub conditions_residual: f64,
    pub condition_estimate: f64,
}

impl PolyApproximant {
    pub fn eval(&self, z: Complex) -> Complex {
        dd::horner_dd(&self.coefficients, self.frame().local(z)).0
    }

    pub fn eval_deriv(&self, z: Complex) -> Complex {
        dd::horner_dd(&self.coefficients, self.frame().local(z)).1 / self.scale
    }

    pub fn to_expr(&self) -> EntireExpr {
        EntireExpr::polynomial(&self.coefficients, self.center, Complex::new(1.0 / self.scale, 0.0))
    }

    pub fn frame(&self) -> Frame {
        Frame { center: self.center, scale: self.scale }
    }
}

pub(crate) fn horner(coeffs: &[Complex], x: Complex) -> Complex {
    dd::horner_dd(coeffs, x).0
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RungeError {
    #[error("disk {0} has non-positive or non-finite radius")]
    BadDisk(usize),
    #[error("disks {0} and {1} intersect")]
    DisksOverlap(usize, usize),
    #[error("condition point {0} lies outside every disk")]
    ConditionOutside(Complex),
    #[error("two conditions share the point {0}")]
    DuplicateCondition(Complex),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("degree cap {cap} reached, best sup error {best_error:e} at degree {best_degree}")]
    DegreeCapExceeded { cap: usize, best_error: f64, best_degree: usize },
    #[error("condition estimate {estimate:e} at degree {degree}")]
    IllConditioned { estimate: f64, degree: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub sup_error: f64,
    pub per_disk: Vec<f64>,
    pub conditions_residual: f64,
    pub samples: usize,
}

fn check_inputs(disks: &[DiskTarget], conditions: &[InterpCondition]) -> Result<(), RungeError> {
    for (i, d) in disks.iter().enumerate() {
        if !(d.radius > 0.0 && d.radius.is_finite()) || !(d.center.re.is_finite() && d.center.im.is_finite()) {
            return Err(RungeError::BadDisk(i));
        }
    }
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            if (disks[i].center - disks[j].center).norm() <= disks[i].radius + disks[j].radius {
                return Err(RungeError::DisksOverlap(i, j));
            }
        }
    }
    for (i, c) in conditions.iter().enumerate() {
        if !disks.iter().any(|d| d.contains(c.point)) {
            return Err(RungeError::ConditionOutside(c.point));
        }
        if conditions[..i].iter().any(|o| o.point == c.point) {
            return Err(RungeError::DuplicateCondition(c.point));
        }
    }
    Ok(())
}

/// Affine change of variable in which the coefficients are stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub center: Complex,
    pub scale: f64,
}

impl Frame {
    pub fn local(&self, z: Complex) -> Complex {
        (z - self.center) / self.scale
    }

    /// Centre of the bounding box of the disks, and the largest distance
    /// from it to any disk point.
    pub fn for_disks(disks: &[DiskTarget]) -> Frame {
        let lo_re = disks.iter().map(|d| d.center.re - d.radius).fold(f64::INFINITY, f64::min);
        let hi_re = disks.iter().map(|d| d.center.re + d.radius).fold(f64::NEG_INFINITY, f64::max);
        let lo_im = disks.iter().map(|d| d.center.im - d.radius).fold(f64::INFINITY, f64::min);
        let hi_im = disks.iter().map(|d| d.center.im + d.radius).fold(f64::NEG_INFINITY, f64::max);
        let center = if disks.is_empty() {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.5 * (lo_re + hi_re), 0.5 * (lo_im + hi_im))
        };
        let scale = disks.iter().map(|d| (d.center - center).norm() + d.radius).fold(0.0, f64::max);
        Frame { center, scale: scale.max(f64::MIN_POSITIVE) }
    }
}

fn degree_schedule(cap: usize, min_degree: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = FIRST_DEGREE;
    while d < cap {
        if d >= min_degree {
            out.push(d);
        }
        d *= 2;
    }
    if cap >= min_degree {
        out.push(cap);
    }
    out
}

struct Attempt {
    poly: PolyApproximant,
}

fn attempt(
    disks: &[DiskTarget],
    conditions: &[InterpCondition],
    degree: usize,
    frame: Frame,
) -> Result<Attempt, RungeError> {
    let samples = fit_samples(disks, degree);
    let values: Vec<Complex> = samples.par_iter().map(|s| disks[s.disk].target.eval(s.z)).collect();
    let fit = solve::constrained_fit(&samples, &values, conditions, degree, frame);
    if !(fit.condition_estimate <= MAX_CONDITION) {
        return Err(RungeError::IllConditioned { estimate: fit.condition_estimate, degree });
    }
    let report = validate_with(&fit.coefficients, frame, disks, conditions, validation_samples(disks, degree, 0));
    Ok(Attempt {
        poly: PolyApproximant {
            coefficients: fit.coefficients,
            degree,
            center: frame.center,
            scale: frame.scale,
            sup_error: report.sup_error,
            conditions_residual: report.conditions_residual,
            condition_estimate: fit.condition_estimate,
        },
    })
}

/// Finds the lowest degree polynomial on the doubling schedule (refined by
/// bisection below the first passing degree) whose sampled error is at most
/// `epsilon` on every disk and which meets all conditions.
pub fn approximate(
    disks: &[DiskTarget],
    conditions: &[InterpCondition],
    epsilon: f64,
    degree_cap: usize,
) -> Result<PolyApproximant, RungeError> {
    if !(epsilon > 0.0) {
        return Err(RungeError::BadEpsilon(epsilon));
    }
    check_inputs(disks, conditions)?;
    let frame = Frame::for_disks(disks);
    let rows: usize = conditions.iter().map(InterpCondition::rows).sum();
    // one spare degree of freedom beyond the constraints
    let min_degree = rows;
    let ok = |p: &PolyApproximant| p.sup_error <= epsilon && p.conditions_residual < CONDITION_TOL;

    // a constant target met by a degree 0 polynomial needs no fit
    if let Some(p) = constant_solution(disks, conditions, frame) {
        if ok(&p) {
            return Ok(p);
        }
    }

    let mut best: Option<PolyApproximant> = None;
    let mut prev_fail = 0usize;
    for degree in degree_schedule(degree_cap, min_degree) {
        let a = match attempt(disks, conditions, degree, frame) {
            Ok(a) => a,
            Err(e @ RungeError::IllConditioned { .. }) => {
                // the doubling step may overshoot into the unusable range
                // while a usable degree lies between
                return below_ill_conditioned(disks, conditions, epsilon, frame, prev_fail.max(min_degree.saturating_sub(1)), degree)
                    .ok_or(e);
            }
            Err(e) => return Err(e),
        };
        if ok(&a.poly) {
            return Ok(refine(disks, conditions, epsilon, frame, prev_fail.max(min_degree.saturating_sub(1)), a.poly));
        }
        prev_fail = degree;
        if best.as_ref().is_none_or(|b| a.poly.sup_error < b.sup_error) {
            best = Some(a.poly);
        }
    }
    let (best_error, best_degree) = best.map(|b| (b.sup_error, b.degree)).unwrap_or((f64::INFINITY, 0));
    Err(RungeError::DegreeCapExceeded { cap: degree_cap, best_error, best_degree })
}

// bisection for a passing degree strictly between `lo` (failing) and `hi`
// (ill conditioned)
fn below_ill_conditioned(
    disks: &[DiskTarget],
    conditions: &[InterpCondition],
    epsilon: f64,
    frame: Frame,
    mut lo: usize,
    mut hi: usize,
) -> Option<PolyApproximant> {
    while hi > lo + 1 {
        let mid = (lo + hi) / 2;
        match attempt(disks, conditions, mid, frame) {
            Ok(a) if a.poly.sup_error <= epsilon && a.poly.conditions_residual < CONDITION_TOL => {
                return Some(refine(disks, conditions, epsilon, frame, lo, a.poly));
            }
            Ok(_) => lo = mid,
            Err(_) => hi = mid,
        }
    }
    None
}

// bisection between the last failing and the first passing degree
fn refine(
    disks: &[DiskTarget],
    conditions: &[InterpCondition],
    epsilon: f64,
    frame: Frame,
    mut lo: usize,
    mut pass: PolyApproximant,
) -> PolyApproximant {
    while pass.degree > lo + 1 {
        let mid = (lo + pass.degree) / 2;
        match attempt(disks, conditions, mid, frame) {
            Ok(a) if a.poly.sup_error <= epsilon && a.poly.conditions_residual < CONDITION_TOL => pass = a.poly,
            _ => lo = mid,
        }
    }
    pass
}

fn constant_solution(disks: &[DiskTarget], conditions: &[InterpCondition], frame: Frame) -> Option<PolyApproximant> {
    let value = match disks.first()?.target {
        Target::ConstValue(v) => v,
        Target::Function(_) => return None,
    };
    let coefficients = vec![value];
    let report = validate_with(&coefficients, frame, disks, conditions, validation_samples(disks, 0, 0));
    Some(PolyApproximant {
        coefficients,
        degree: 0,
        center: frame.center,
        scale: frame.scale,
        sup_error: report.sup_error,
        conditions_residual: report.conditions_residual,
        condition_estimate: 1.0,
    })
}

/// Recomputes the errors of `p` on a sample that is finer than, and offset
/// from, the one used during fitting.
pub fn validate(p: &PolyApproximant, disks: &[DiskTarget], conditions: &[InterpCondition]) -> ValidationReport {
    validate_with(&p.coefficients, p.frame(), disks, conditions, validation_samples(disks, p.degree, 1))
}

fn validate_with(
    coeffs: &[Complex],
    frame: Frame,
    disks: &[DiskTarget],
    conditions: &[InterpCondition],
    samples: Vec<Sample>,
) -> ValidationReport {
    let errs: Vec<(usize, f64)> = samples
        .par_iter()
        .map(|s| {
            let e = (horner(coeffs, frame.local(s.z)) - disks[s.disk].target.eval(s.z)).norm();
            (s.disk, if e.is_nan() { f64::INFINITY } else { e })
        })
        .collect();
    let mut per_disk = vec![0.0f64; disks.len()];
    for (d, e) in errs {
        per_disk[d] = per_disk[d].max(e);
    }
    let p = PolyApproximant {
        coefficients: coeffs.to_vec(),
        degree: coeffs.len().saturating_sub(1),
        center: frame.center,
        scale: frame.scale,
        sup_error: 0.0,
        conditions_residual: 0.0,
        condition_estimate: 0.0,
    };
    let conditions_residual = conditions_residual(&p, conditions);
    ValidationReport {
        sup_error: per_disk.iter().copied().fold(0.0, f64::max),
        per_disk,
        conditions_residual,
        samples: samples.len(),
    }
}

pub fn conditions_residual(p: &PolyApproximant, conditions: &[InterpCondition]) -> f64 {
    let mut r = 0.0f64;
    for c in conditions {
        r = r.max((p.eval(c.point) - c.value).norm());
        if let Some(d) = c.deriv {
            r = r.max((p.eval_deriv(c.point) - d).norm());
        }
    }
    r
}
