use numeric_core::{c, fs_distance, Complex, EntireExpr, ProjPoint};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = EntireExpr> {
    prop_oneof![
        Just(EntireExpr::var()),
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| EntireExpr::constant(c(a, b))),
    ]
}

fn expr() -> impl Strategy<Value = EntireExpr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(EntireExpr::exp),
            inner.clone().prop_map(EntireExpr::sin),
            inner.clone().prop_map(EntireExpr::cos),
            (inner, 0u32..4).prop_map(|(a, k)| EntireExpr::powi(a, k)),
        ]
    })
}

fn complex(r: f64) -> impl Strategy<Value = Complex> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn proj() -> impl Strategy<Value = ProjPoint> {
    (complex(3.0), complex(3.0), complex(3.0))
        .prop_filter_map("nonzero", |(x, y, t)| ProjPoint::new(x, y, t))
}

proptest! {
    #[test]
    fn symbolic_derivative_matches_central_difference(e in expr(), z in complex(1.0)) {
        let h = 1e-5;
        let f = |z: Complex| e.eval(z);
        let vals = [f(z), f(z + h), f(z - h), f(z + c(0.0, h)), f(z - c(0.0, h))];
        prop_assume!(vals.iter().all(|v| v.norm() <= 10.0));
        let fd = (vals[1] - vals[2]) / (2.0 * h);
        let d = e.deriv().eval(z);
        prop_assume!(d.norm() <= 10.0);
        prop_assert!((fd - d).norm() < 1e-6, "fd {fd} vs symbolic {d} for {e}");
    }

    #[test]
    fn display_round_trips(e in expr(), z in complex(1.0)) {
        let text = e.to_string();
        // constant folding can overflow, and non-finite literals have no syntax
        prop_assume!(!text.contains("inf") && !text.contains("NaN"));
        let back: EntireExpr = text.parse().unwrap();
        let (a, b) = (e.eval(z), back.eval(z));
        prop_assume!(a.is_finite() && a.norm() < 1e6);
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{e} reparsed as {back}");
    }

    #[test]
    fn fs_triangle_inequality(p in proj(), q in proj(), r in proj()) {
        let lhs = fs_distance(&p, &r);
        prop_assert!(lhs <= fs_distance(&p, &q) + fs_distance(&q, &r) + 1e-12);
    }

    #[test]
    fn fs_scale_invariance(p in proj(), q in proj(), s in complex(5.0)) {
        prop_assume!(s.norm() > 1e-3);
        let ps = ProjPoint::new(p.x * s, p.y * s, p.t * s).unwrap();
        prop_assert!((fs_distance(&ps, &q) - fs_distance(&p, &q)).abs() < 1e-12);
        prop_assert!((fs_distance(&p, &q) - fs_distance(&q, &p)).abs() < 1e-15);
        prop_assert!(fs_distance(&p, &q) <= std::f64::consts::FRAC_PI_2 + 1e-15);
    }
}

#[test]
fn sine_at_i_pi_is_i_sinh_pi() {
    use std::f64::consts::PI;
    let v = EntireExpr::sin(EntireExpr::var()).eval(c(0.0, PI));
    // sinh by its own series, not the library routine
    let mut sinh = 0.0;
    let mut term = PI;
    for k in 0..30 {
        sinh += term;
        term *= PI * PI / ((2 * k + 2) as f64 * (2 * k + 3) as f64);
    }
    assert!(v.re.abs() < 1e-15);
    assert!((v.im - sinh).abs() < 1e-12);
    assert!((v.im - 11.5487).abs() < 1e-4);
}

#[test]
fn wandering_lift_value_at_origin() {
    let lambda = 1.0 - (1.0 - 1.0 / (4.0 * std::f64::consts::PI.powi(2))).sqrt();
    let e: EntireExpr = format!("z + sin(2*pi*z) + {lambda:?}").parse().unwrap();
    let v = e.eval(c(0.0, 0.0));
    assert!((v.re - lambda).abs() < 1e-17);
    assert!((v.re - 0.0127464).abs() < 1e-7);
}

#[test]
fn derivative_vanishes_at_critical_point() {
    use std::f64::consts::PI;
    let e: EntireExpr = "z + sin(2*pi*z)".parse().unwrap();
    let alpha = (-1.0 / (2.0 * PI)).acos() / (2.0 * PI);
    for n in -3..=3 {
        let d = e.deriv().eval(c(alpha + n as f64, 0.0));
        assert!(d.norm() < 1e-10, "f' at critical point {n}: {d}");
    }
    assert_eq!(EntireExpr::var().deriv(), EntireExpr::real(1.0));
}

#[test]
fn serde_round_trip() {
    let e: EntireExpr = "exp(-z) + 2*z + (1+2i)*z^3".parse().unwrap();
    let json = serde_json::to_string(&e).unwrap();
    let back: EntireExpr = serde_json::from_str(&json).unwrap();
    assert_eq!(e, back);
}

#[test]
fn taylor_coefficients_match_known_series() {
    let z = EntireExpr::var();
    let f = EntireExpr::add(EntireExpr::exp(z.clone()), EntireExpr::mul(EntireExpr::sin(z.clone()), EntireExpr::powi(z.clone(), 2)));
    let t = f.taylor(numeric_core::c(0.0, 0.0), 8);
    // e^z + z^2 sin z = Σ z^k/k! + z^3 - z^5/6 + z^7/120
    let fact = |k: u32| (1..=k).map(|j| j as f64).product::<f64>();
    let extra = [0.0, 0.0, 0.0, 1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0, 0.0];
    for k in 0..=8 {
        let want = 1.0 / fact(k as u32) + extra[k];
        assert!((t[k].re - want).abs() < 1e-14 && t[k].im.abs() < 1e-14, "{k}");
    }
    // shifted centre against derivatives
    let z0 = numeric_core::c(0.3, -0.4);
    let t = f.taylor(z0, 2);
    assert!((t[0] - f.eval(z0)).norm() < 1e-13);
    assert!((t[1] - f.deriv().eval(z0)).norm() < 1e-13);
    assert!((t[2] - f.deriv().deriv().eval(z0) / 2.0).norm() < 1e-13);
}
