use crate::expr::EntireExpr;
use crate::Complex;

const ZERO: Complex = Complex::new(0.0, 0.0);

fn mul(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let n = a.len();
    (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

// s = exp(a): k s_k = Σ j a_j s_{k-j}
fn exp(a: &[Complex]) -> Vec<Complex> {
    let n = a.len();
    let mut s = vec![ZERO; n];
    s[0] = a[0].exp();
    for k in 1..n {
        let acc: Complex = (1..=k).map(|j| a[j] * s[k - j] * j as f64).sum();
        s[k] = acc / k as f64;
    }
    s
}

fn sin_cos(a: &[Complex]) -> (Vec<Complex>, Vec<Complex>) {
    let n = a.len();
    let mut s = vec![ZERO; n];
    let mut c = vec![ZERO; n];
    s[0] = a[0].sin();
    c[0] = a[0].cos();
    for k in 1..n {
        let mut ds = ZERO;
        let mut dc = ZERO;
        for j in 1..=k {
            ds += a[j] * c[k - j] * j as f64;
            dc -= a[j] * s[k - j] * j as f64;
        }
        s[k] = ds / k as f64;
        c[k] = dc / k as f64;
    }
    (s, c)
}

fn powu(a: &[Complex], k: u32) -> Vec<Complex> {
    let mut out = vec![ZERO; a.len()];
    out[0] = Complex::new(1.0, 0.0);
    let mut base = a.to_vec();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            out = mul(&out, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    out
}

impl EntireExpr {
    /// Taylor coefficients at `z0` up to and including `order`, by truncated
    /// power series arithmetic.
    pub fn taylor(&self, z0: Complex, order: usize) -> Vec<Complex> {
        let n = order + 1;
        match self {
            EntireExpr::Var => {
                let mut v = vec![ZERO; n];
                v[0] = z0;
                if n > 1 {
                    v[1] = Complex::new(1.0, 0.0);
                }
                v
            }
            EntireExpr::Const(c) => {
                let mut v = vec![ZERO; n];
                v[0] = *c;
                v
            }
            EntireExpr::Add(a, b) => {
                let (x, y) = (a.taylor(z0, order), b.taylor(z0, order));
                x.iter().zip(&y).map(|(p, q)| p + q).collect()
            }
            EntireExpr::Mul(a, b) => mul(&a.taylor(z0, order), &b.taylor(z0, order)),
            EntireExpr::Neg(a) => a.taylor(z0, order).into_iter().map(|v| -v).collect(),
            EntireExpr::Exp(a) => exp(&a.taylor(z0, order)),
            EntireExpr::Sin(a) => sin_cos(&a.taylor(z0, order)).0,
            EntireExpr::Cos(a) => sin_cos(&a.taylor(z0, order)).1,
            EntireExpr::IntPow(a, k) => powu(&a.taylor(z0, order), *k),
        }
    }
}
