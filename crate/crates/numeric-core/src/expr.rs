use crate::Complex;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Expression tree for an entire function of one complex variable.
///
/// Children are reference counted so derivatives and compositions share
/// subtrees instead of copying them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntireExpr {
    Var,
    Const(Complex),
    Add(Arc<EntireExpr>, Arc<EntireExpr>),
    Mul(Arc<EntireExpr>, Arc<EntireExpr>),
    Neg(Arc<EntireExpr>),
    Exp(Arc<EntireExpr>),
    Sin(Arc<EntireExpr>),
    Cos(Arc<EntireExpr>),
    IntPow(Arc<EntireExpr>, u32),
}

/// Result of a checked evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eval {
    pub value: Complex,
    /// Some intermediate value left the floating-point range.
    pub overflow: bool,
}

use EntireExpr::*;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

impl EntireExpr {
    pub fn var() -> Self {
        Var
    }

    pub fn constant(c: Complex) -> Self {
        Const(c)
    }

    pub fn real(x: f64) -> Self {
        Const(Complex::new(x, 0.0))
    }

    pub fn as_const(&self) -> Option<Complex> {
        match self {
            Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Const(c) if *c == ZERO)
    }

    fn is_one(&self) -> bool {
        matches!(self, Const(c) if *c == ONE)
    }

    pub fn add(a: EntireExpr, b: EntireExpr) -> Self {
        match (&a, &b) {
            (Const(x), Const(y)) => Const(x + y),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: EntireExpr, b: EntireExpr) -> Self {
        Self::add(a, Self::neg(b))
    }

    pub fn mul(a: EntireExpr, b: EntireExpr) -> Self {
        match (&a, &b) {
            (Const(x), Const(y)) => Const(x * y),
            _ if a.is_zero() || b.is_zero() => Const(ZERO),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Mul(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn neg(a: EntireExpr) -> Self {
        match a {
            Const(x) => Const(-x),
            Neg(inner) => Arc::unwrap_or_clone(inner),
            other => Neg(Arc::new(other)),
        }
    }

    pub fn exp(a: EntireExpr) -> Self {
        match a {
            Const(x) => Const(x.exp()),
            other => Exp(Arc::new(other)),
        }
    }

    pub fn sin(a: EntireExpr) -> Self {
        match a {
            Const(x) => Const(x.sin()),
            other => Sin(Arc::new(other)),
        }
    }

    pub fn cos(a: EntireExpr) -> Self {
        match a {
            Const(x) => Const(x.cos()),
            other => Cos(Arc::new(other)),
        }
    }

    pub fn powi(a: EntireExpr, k: u32) -> Self {
        match (a, k) {
            (_, 0) => Const(ONE),
            (a, 1) => a,
            (Const(x), k) => Const(x.powu(k)),
            (a, k) => IntPow(Arc::new(a), k),
        }
    }

    /// Value at `z`. Non-finite results signal overflow; see [`eval_checked`](Self::eval_checked).
    pub fn eval(&self, z: Complex) -> Complex {
        match self {
            Var => z,
            Const(c) => *c,
            Add(a, b) => a.eval(z) + b.eval(z),
            // a factor that underflowed to zero annihilates the other one, even
            // when that one overflows; this also skips negligible terms
            Mul(a, b) => {
                let x = a.eval(z);
                if x == ZERO {
                    return ZERO;
                }
                let y = b.eval(z);
                if y == ZERO { ZERO } else { x * y }
            }
            Neg(a) => -a.eval(z),
            Exp(a) => a.eval(z).exp(),
            Sin(a) => a.eval(z).sin(),
            Cos(a) => a.eval(z).cos(),
            IntPow(a, k) => a.eval(z).powu(*k),
        }
    }

    /// Value at `z` with an overflow flag raised when any intermediate result is not finite.
    pub fn eval_checked(&self, z: Complex) -> Eval {
        let mut overflow = false;
        let value = self.eval_flag(z, &mut overflow);
        Eval { value, overflow }
    }

    fn eval_flag(&self, z: Complex, flag: &mut bool) -> Complex {
        let v = match self {
            Var => z,
            Const(c) => *c,
            Add(a, b) => a.eval_flag(z, flag) + b.eval_flag(z, flag),
            Mul(a, b) => {
                let x = a.eval_flag(z, flag);
                if x == ZERO {
                    return ZERO;
                }
                let y = b.eval_flag(z, flag);
                if y == ZERO { ZERO } else { x * y }
            }
            Neg(a) => -a.eval_flag(z, flag),
            Exp(a) => a.eval_flag(z, flag).exp(),
            Sin(a) => a.eval_flag(z, flag).sin(),
            Cos(a) => a.eval_flag(z, flag).cos(),
            IntPow(a, k) => a.eval_flag(z, flag).powu(*k),
        };
        if !v.is_finite() {
            *flag = true;
        }
        v
    }

    /// Exact complex derivative.
    pub fn deriv(&self) -> EntireExpr {
        match self {
            Var => Const(ONE),
            Const(_) => Const(ZERO),
            Add(a, b) => Self::add(a.deriv(), b.deriv()),
            Mul(a, b) => Self::add(
                Self::mul(a.deriv(), shared(b)),
                Self::mul(shared(a), b.deriv()),
            ),
            Neg(a) => Self::neg(a.deriv()),
            Exp(a) => Self::mul(Exp(a.clone()), a.deriv()),
            Sin(a) => Self::mul(Cos(a.clone()), a.deriv()),
            Cos(a) => Self::neg(Self::mul(Sin(a.clone()), a.deriv())),
            IntPow(a, k) => Self::mul(
                Self::mul(Self::real(*k as f64), Self::powi(shared(a), k - 1)),
                a.deriv(),
            ),
        }
    }

    /// Substitute `inner` for the variable.
    pub fn compose(&self, inner: &EntireExpr) -> EntireExpr {
        match self {
            Var => inner.clone(),
            Const(c) => Const(*c),
            Add(a, b) => Self::add(a.compose(inner), b.compose(inner)),
            Mul(a, b) => Self::mul(a.compose(inner), b.compose(inner)),
            Neg(a) => Self::neg(a.compose(inner)),
            Exp(a) => Self::exp(a.compose(inner)),
            Sin(a) => Self::sin(a.compose(inner)),
            Cos(a) => Self::cos(a.compose(inner)),
            IntPow(a, k) => Self::powi(a.compose(inner), *k),
        }
    }

    /// Polynomial `Σ coeffs[k]·u^k` in the affine variable `u = (z − center)·scale`.
    pub fn polynomial(coeffs: &[Complex], center: Complex, scale: Complex) -> EntireExpr {
        let u = Self::mul(Self::constant(scale), Self::add(Var, Self::constant(-center)));
        let mut acc = Self::real(0.0);
        for (k, &ck) in coeffs.iter().enumerate() {
            if ck == ZERO {
                continue;
            }
            acc = Self::add(acc, Self::mul(Self::constant(ck), Self::powi(u.clone(), k as u32)));
        }
        acc
    }

    /// Number of nodes, counting shared subtrees once per reference.
    pub fn size(&self) -> usize {
        match self {
            Var | Const(_) => 1,
            Add(a, b) | Mul(a, b) => 1 + a.size() + b.size(),
            Neg(a) | Exp(a) | Sin(a) | Cos(a) | IntPow(a, _) => 1 + a.size(),
        }
    }
}

// cheap: only the Arc handles of the children are cloned
fn shared(a: &Arc<EntireExpr>) -> EntireExpr {
    (**a).clone()
}

impl std::ops::Add for EntireExpr {
    type Output = EntireExpr;
    fn add(self, o: EntireExpr) -> EntireExpr {
        EntireExpr::add(self, o)
    }
}

impl std::ops::Sub for EntireExpr {
    type Output = EntireExpr;
    fn sub(self, o: EntireExpr) -> EntireExpr {
        EntireExpr::sub(self, o)
    }
}

impl std::ops::Mul for EntireExpr {
    type Output = EntireExpr;
    fn mul(self, o: EntireExpr) -> EntireExpr {
        EntireExpr::mul(self, o)
    }
}

impl std::ops::Neg for EntireExpr {
    type Output = EntireExpr;
    fn neg(self) -> EntireExpr {
        EntireExpr::neg(self)
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_const(c: Complex) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("({}*i)", fmt_real(c.im))
    } else if c.im < 0.0 {
        format!("({}-{}*i)", fmt_real(c.re), fmt_real(-c.im))
    } else {
        format!("({}+{}*i)", fmt_real(c.re), fmt_real(c.im))
    }
}

// precedence: 1 sum, 2 product, 3 unary minus, 4 power, 5 atom
fn prec(e: &EntireExpr) -> u8 {
    match e {
        Add(..) => 1,
        Mul(..) => 2,
        Neg(..) => 3,
        Const(c) if c.im == 0.0 && c.re.is_sign_negative() => 3,
        IntPow(..) => 4,
        _ => 5,
    }
}

fn write_prec(e: &EntireExpr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write!(f, "{e}")?;
        write!(f, ")")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for EntireExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var => write!(f, "z"),
            Const(c) => write!(f, "{}", fmt_const(*c)),
            Add(a, b) => {
                write_prec(a, 1, f)?;
                write!(f, " + ")?;
                write_prec(b, 2, f)
            }
            Mul(a, b) => {
                write_prec(a, 2, f)?;
                write!(f, "*")?;
                write_prec(b, 3, f)
            }
            Neg(a) => {
                write!(f, "-")?;
                write_prec(a, 4, f)
            }
            Exp(a) => write!(f, "exp({a})"),
            Sin(a) => write!(f, "sin({a})"),
            Cos(a) => write!(f, "cos({a})"),
            IntPow(a, k) => {
                write_prec(a, 5, f)?;
                write!(f, "^{k}")
            }
        }
    }
}
