use baker::*;
use numeric_core::{c, fs_distance, ProjPoint, C2};
use orbit_engine::{classify, with_workers, ClassifyParams, EscapeClass};

#[test]
fn invariance_without_violations() {
    for (alpha, m) in [(1.0, 20.0), (0.1, 50.0), (2.0, 50.0)] {
        let r = invariance_check(alpha, m, 100_000, 42);
        assert!(r.violations.is_empty(), "α = {alpha}: {:?}", &r.violations[..1]);
        assert!(r.min_image_slack > 0.0);
    }
}

#[test]
fn single_point_image() {
    let q = baker_map().apply(C2::real(3.0, 0.0));
    assert!((q.z.re - ((-3f64).exp() + 6.0)).abs() < 1e-15);
    assert!((q.z.re - 6.0498).abs() < 1e-4);
    let threshold = 3.0 + 1.0 + RegionParams::new(1.0).eta(3.0);
    assert!((threshold - 4.0290).abs() < 1e-4);
    assert!(in_r_alpha(q, 1.0));
}

#[test]
fn linear_model_powers() {
    let p = C2::new(c(1.5, -0.3), c(0.2, 0.7));
    let l = |q: C2| C2::new(2.0 * q.z - q.w, q.z);
    assert_eq!(l_pow(0, p), p);
    assert!((l_pow(2, p) - l(l(p))).norm() < 1e-15);
    assert!((l_pow(2, p) - C2::new(3.0 * p.z - 2.0 * p.w, 2.0 * p.z - p.w)).norm() < 1e-15);
    let inv = l_pow(-1, p);
    assert!((inv - C2::new(p.w, 2.0 * p.w - p.z)).norm() < 1e-15);
    assert!((l(inv) - p).norm() < 1e-15);
    for n in -7..7 {
        assert!((l_pow(n, l_pow(-n, p)) - p).norm() < 1e-12);
    }
}

#[test]
fn conjugacy_on_r1() {
    let mut rng = stream_rng(7, 0);
    for _ in 0..1000 {
        let p = sample_r_alpha(&mut rng, 1.0, 20.0);
        let r = psi(p, 1e-8).unwrap();
        assert!(r.tail_bound < 1e-8);
        assert!(r.in_omega);
        assert!(conjugacy_residual(p, 1e-8).unwrap() < 5e-8);
    }
}

#[test]
fn psi_approaches_identity_far_right() {
    let mut last = f64::INFINITY;
    for x in [5.0, 10.0, 20.0, 40.0] {
        let p = C2::real(x, 0.0);
        let d = (psi(p, 1e-12).unwrap().psi_value - p).norm();
        // corrections decay like e^{−x}
        assert!(d < 2.0 * (-x).exp() + 1e-12, "x = {x}: {d}");
        assert!(d <= last);
        last = d;
    }
}

#[test]
fn psi_outside_region_and_extension() {
    assert_eq!(psi(C2::real(1.0, 1.0), 1e-8), Err(BakerError::NotInRegion));
    // the slab point (1, 0.5) reaches R within a few steps
    let p = C2::real(1.0, 0.5);
    let (r, m) = psi_extended(p, 1e-10, 500).unwrap();
    assert!(m > 0);
    let (r1, _) = psi_extended(baker_map().apply(p), 1e-10, 500).unwrap();
    assert!((l_pow(1, r.psi_value) - r1.psi_value).norm() < 1e-7);
}

#[test]
fn membership_far_right_is_grid_top() {
    let a = membership_alpha(C2::real(100.0, 0.0)).unwrap();
    assert!((a - ALPHA_MAX).abs() < 1e-9);
}

#[test]
fn drift_along_sampled_orbits() {
    for alpha in [0.5, 1.0, 2.0] {
        let r = drift_check(alpha, 50.0, 1000, 200, 3);
        assert_eq!(r.step_violations, 0, "α = {alpha}");
        assert_eq!(r.linear_violations, 0, "α = {alpha}");
    }
}

#[test]
fn sampled_orbits_escape_to_diagonal_direction() {
    let target = ProjPoint::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let params = ClassifyParams { n_max: 200, r_escape: 50.0, r_bound: 2.0, tail_tol: 1e-6 };
    for alpha in [0.5, 1.0, 2.0] {
        let r = drift_check(alpha, 50.0, 200, 200, 5);
        for p in r.starts {
            match classify(&baker_map(), p, &params).class {
                EscapeClass::EscapesTo { limit, residual } => {
                    assert!(residual < 1e-6);
                    assert!(fs_distance(&limit, &target) < 1e-6);
                }
                other => panic!("{p:?} at α = {alpha}: {other:?}"),
            }
        }
    }
}

#[test]
fn psi_is_injective_on_samples() {
    let r = injectivity_check(1000, 20.0, 1e-10, 9);
    assert!(r.min_ratio >= 1e-3, "{}", r.min_ratio);
}

#[test]
fn slab_points_are_absorbed() {
    let r = absorption_check(1.0, 200, 500, 13);
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert!(r.absorbed + r.excluded.len() == r.samples);
    assert!(r.absorbed > 0);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let a = with_workers(1, || invariance_check(0.5, 50.0, 20_000, 1));
    let b = with_workers(4, || invariance_check(0.5, 50.0, 20_000, 1));
    assert_eq!(a.min_image_slack.to_bits(), b.min_image_slack.to_bits());
    let a = with_workers(1, || drift_check(1.0, 50.0, 300, 50, 1));
    let b = with_workers(3, || drift_check(1.0, 50.0, 300, 50, 1));
    assert_eq!(a.starts, b.starts);
}
