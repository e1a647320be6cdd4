//! Horner evaluation in double-double arithmetic, used where the monomial
//! form would otherwise lose the interpolation accuracy to rounding.

use numeric_core::Complex;

#[derive(Clone, Copy)]
struct Dd(f64, f64);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd(p, a.mul_add(b, -p))
}

impl Dd {
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let lo = s.1 + self.1 + o.1;
        let r = two_sum(s.0, lo);
        Dd(r.0, r.1)
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn mul_f(self, b: f64) -> Dd {
        let p = two_prod(self.0, b);
        let r = two_sum(p.0, p.1 + self.1 * b);
        Dd(r.0, r.1)
    }
}

#[derive(Clone, Copy)]
struct Cdd(Dd, Dd);

impl Cdd {
    fn from(c: Complex) -> Cdd {
        Cdd(Dd(c.re, 0.0), Dd(c.im, 0.0))
    }

    fn mul_c(self, x: Complex) -> Cdd {
        let re = self.0.mul_f(x.re).add(self.1.mul_f(x.im).neg());
        let im = self.0.mul_f(x.im).add(self.1.mul_f(x.re));
        Cdd(re, im)
    }

    fn add_c(self, c: Complex) -> Cdd {
        Cdd(self.0.add(Dd(c.re, 0.0)), self.1.add(Dd(c.im, 0.0)))
    }

    fn round(self) -> Complex {
        Complex::new(self.0 .0 + self.0 .1, self.1 .0 + self.1 .1)
    }
}

/// Σ coeffs[k]·x^k and its derivative, accurate to about twice working
/// precision in `x` given exactly.
pub(crate) fn horner_dd(coeffs: &[Complex], x: Complex) -> (Complex, Complex) {
    let Some(last) = coeffs.last() else { return (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)) };
    let mut p = Cdd::from(*last);
    let mut dp = Cdd::from(Complex::new(0.0, 0.0));
    for c in coeffs.iter().rev().skip(1) {
        dp = Cdd(dp.mul_c(x).0.add(p.0), dp.mul_c(x).1.add(p.1));
        p = p.mul_c(x).add_c(*c);
    }
    (p.round(), dp.round())
}
