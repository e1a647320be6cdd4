use crate::{dd::horner_dd, horner, Frame, InterpCondition, Sample};
use nalgebra::{DMatrix, DVector};
use numeric_core::Complex;

type C = Complex;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub(crate) struct Fit {
    pub coefficients: Vec<C>,
    pub condition_estimate: f64,
}

/// Arnoldi basis for the weighted sample set. Column k of `q` is
/// `w * p_k(x)` where the polynomials `p_k` are orthonormal for the weighted
/// inner product; `h` holds the recurrence.
struct Arnoldi {
    q: Vec<Vec<C>>,
    h: Vec<Vec<C>>,
    p0: f64,
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl Arnoldi {
    fn new(x: &[C], w: &[f64], degree: usize) -> Self {
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut q = vec![w.iter().map(|&v| C::new(v / wn, 0.0)).collect::<Vec<_>>()];
        let mut h = vec![vec![ZERO; degree + 1]; degree + 2];
        for k in 0..degree {
            let mut v: Vec<C> = q[k].iter().zip(x).map(|(a, b)| a * b).collect();
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for (j, qj) in q.iter().enumerate() {
                    let c = dot(qj, &v);
                    h[j][k] += c;
                    for (vi, qi) in v.iter_mut().zip(qj) {
                        *vi -= c * qi;
                    }
                }
            }
            let nv = norm(&v);
            h[k + 1][k] = C::new(nv, 0.0);
            let inv = if nv > 0.0 { 1.0 / nv } else { 0.0 };
            q.push(v.into_iter().map(|vi| vi * inv).collect());
        }
        Arnoldi { q, h, p0: 1.0 / wn }
    }

    fn degree(&self) -> usize {
        self.q.len() - 1
    }

    /// Values and derivatives of the basis polynomials at `x`.
    fn basis_at(&self, x: C) -> (Vec<C>, Vec<C>) {
        let n = self.degree() + 1;
        let mut p = vec![ZERO; n];
        let mut dp = vec![ZERO; n];
        p[0] = C::new(self.p0, 0.0);
        for k in 0..n - 1 {
            let mut v = x * p[k];
            let mut dv = p[k] + x * dp[k];
            for j in 0..=k {
                v -= self.h[j][k] * p[j];
                dv -= self.h[j][k] * dp[j];
            }
            let d = self.h[k + 1][k];
            p[k + 1] = v / d;
            dp[k + 1] = dv / d;
        }
        (p, dp)
    }

    /// Monomial coefficients of every basis polynomial; column k is p_k.
    fn monomials(&self) -> Vec<Vec<C>> {
        let n = self.degree() + 1;
        let mut t = vec![vec![ZERO; n]; n];
        t[0][0] = C::new(self.p0, 0.0);
        for k in 0..n - 1 {
            let mut col = vec![ZERO; n];
            for i in 0..=k {
                col[i + 1] += t[k][i];
            }
            for j in 0..=k {
                let hjk = self.h[j][k];
                for i in 0..=j {
                    col[i] -= hjk * t[j][i];
                }
            }
            let d = self.h[k + 1][k];
            for c in col.iter_mut() {
                *c /= d;
            }
            t[k + 1] = col;
        }
        t
    }
}

/// Constraint rows (normalized) and right hand side for the conditions, given
/// a function producing basis values and derivatives at a point in the scaled
/// variable.
fn constraint_system(
    conditions: &[InterpCondition],
    frame: Frame,
    n: usize,
    basis: impl Fn(C) -> (Vec<C>, Vec<C>),
) -> (DMatrix<C>, DVector<C>) {
    let rows: usize = conditions.iter().map(|c| 1 + c.deriv.is_some() as usize).sum();
    let mut a = DMatrix::from_element(rows, n, ZERO);
    let mut e = DVector::from_element(rows, ZERO);
    let mut r = 0;
    for c in conditions {
        let (p, dp) = basis(frame.local(c.point));
        let mut put = |row: &[C], rhs: C, r: &mut usize| {
            let s = norm(row).max(f64::MIN_POSITIVE);
            for (k, v) in row.iter().enumerate() {
                a[(*r, k)] = v / s;
            }
            e[*r] = rhs / s;
            *r += 1;
        };
        put(&p, c.value, &mut r);
        if let Some(d) = c.deriv {
            let row: Vec<C> = dp.iter().map(|v| v / frame.scale).collect();
            put(&row, d, &mut r);
        }
    }
    (a, e)
}

struct Projector {
    u: DMatrix<C>,
    r: DMatrix<C>,
    cond: f64,
}

impl Projector {
    /// QR factorization of `a^H`; the diagonal ratio of the triangular factor
    /// serves as condition estimate.
    fn new(a: &DMatrix<C>) -> Projector {
        let qr = a.adjoint().qr();
        let (u, r) = (qr.q(), qr.r());
        let diag: Vec<f64> = (0..r.nrows()).map(|i| r[(i, i)].norm()).collect();
        let dmax = diag.iter().copied().fold(0.0, f64::max);
        let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let cond = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
        Projector { u, r, cond }
    }

    /// Minimal norm `d` with `a d = res`, added to `c`. Since `a = r^H u^H`,
    /// `d = u r^{-H} res`.
    fn correct(&self, c: &mut [C], res: &DVector<C>) -> bool {
        let Some(y) = self.r.adjoint().solve_lower_triangular(res) else { return false };
        let d = &self.u * y;
        for (ci, di) in c.iter_mut().zip(d.iter()) {
            *ci += di;
        }
        true
    }
}

pub(crate) fn constrained_fit(
    samples: &[Sample],
    values: &[C],
    conditions: &[InterpCondition],
    degree: usize,
    frame: Frame,
) -> Fit {
    let n_disks = samples.iter().map(|s| s.disk + 1).max().unwrap_or(0);
    let mut counts = vec![0usize; n_disks];
    for s in samples {
        counts[s.disk] += 1;
    }
    // every disk carries the same total weight
    let w: Vec<f64> = samples.iter().map(|s| 1.0 / (counts[s.disk] as f64).sqrt()).collect();
    let x: Vec<C> = samples.iter().map(|s| frame.local(s.z)).collect();
    let arn = Arnoldi::new(&x, &w, degree);
    let n = degree + 1;

    let wb: Vec<C> = values.iter().zip(&w).map(|(b, wi)| b * *wi).collect();
    let mut c: Vec<C> = arn.q.iter().map(|qk| dot(qk, &wb)).collect();
    let mut cond_c = 1.0;
    if !conditions.is_empty() {
        let (a, e) = constraint_system(conditions, frame, n, |x| arn.basis_at(x));
        let proj = Projector::new(&a);
        cond_c = proj.cond;
        let cv = DVector::from_column_slice(&c);
        if !proj.correct(&mut c, &(e - &a * cv)) {
            cond_c = f64::INFINITY;
        }
    }

    let t = arn.monomials();
    let mut coeffs = vec![ZERO; n];
    for (k, col) in t.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            coeffs[i] += v * c[k];
        }
    }

    // rounding in the change of basis disturbs the conditions; restore them
    // in the monomial form with residuals evaluated in extended precision
    if !conditions.is_empty() {
        let monomial_basis = |x: C| {
            let mut p = vec![ZERO; n];
            let mut dp = vec![ZERO; n];
            let mut pw = ONE;
            for k in 0..n {
                p[k] = pw;
                if k + 1 < n {
                    dp[k + 1] = pw * (k + 1) as f64;
                }
                pw *= x;
            }
            (p, dp)
        };
        let (am, em) = constraint_system(conditions, frame, n, monomial_basis);
        let proj = Projector::new(&am);
        for _ in 0..3 {
            let res = monomial_residual(&coeffs, conditions, frame, &am, &em);
            if !proj.correct(&mut coeffs, &res) {
                break;
            }
        }
    }

    // amplification of rounding when the monomial form is evaluated
    let mut amp = 0.0f64;
    let mut size = 0.0f64;
    for (xi, b) in x.iter().zip(values) {
        let r = xi.norm();
        amp = amp.max(coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm()));
        size = size.max(horner(&coeffs, *xi).norm()).max(b.norm());
    }
    let kappa = if size > 0.0 { amp / size } else { 1.0 };

    Fit { coefficients: coeffs, condition_estimate: cond_c.max(kappa) }
}

// rows of `am` are normalized; the residual must be scaled the same way
fn monomial_residual(coeffs: &[C], conditions: &[InterpCondition], frame: Frame, am: &DMatrix<C>, em: &DVector<C>) -> DVector<C> {
    let mut res = DVector::from_element(em.len(), ZERO);
    let mut r = 0;
    for c in conditions {
        let (p, dp) = horner_dd(coeffs, frame.local(c.point));
        // recover the row scale from the first entry: row 0 of a value row is 1/s
        let s = 1.0 / am[(r, 0)].re;
        res[r] = (c.value - p) / s;
        r += 1;
        if let Some(d) = c.deriv {
            let s = 1.0 / (am[(r, 1)].re * frame.scale);
            res[r] = (d - dp / frame.scale) / s;
            r += 1;
        }
    }
    res
}
