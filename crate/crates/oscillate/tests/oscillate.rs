use henon_map::HenonMap;
use numeric_core::{c, Complex, EntireExpr, C2};
use orbit_engine::{classify, ClassifyParams, EscapeClass};
use oscillate::*;
use std::sync::OnceLock;

fn alt(f: EntireExpr) -> HenonMap {
    HenonMap::alternative(f, c(0.5, 0.0)).unwrap()
}

fn z_plus_z2() -> EntireExpr {
    EntireExpr::var() + EntireExpr::powi(EntireExpr::var(), 2)
}

// two rounds take most of a minute; share them
fn two_rounds() -> &'static ConstructionState {
    static STATE: OnceLock<ConstructionState> = OnceLock::new();
    STATE.get_or_init(|| run(&OscParams::default(), 2).expect("two rounds"))
}

#[test]
fn saddle_eigenvalues() {
    let m = SaddleModel::default();
    assert!((m.lambda_s - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!((m.lambda_u - (1.0 + 2f64.sqrt()) / 2.0).abs() < 1e-12);
    assert!(m.eigen_residual() < 1e-12);
}

#[test]
fn linear_map_has_a_linear_manifold() {
    let map = alt(EntireExpr::var());
    for which in [Branch::Stable, Branch::Unstable] {
        let s = linearize(&map, which, 30).unwrap();
        assert!(s.coefficients[2..].iter().all(|v| v.norm() < 1e-14), "{which:?}");
    }
}

#[test]
fn series_residual_on_the_validated_radius() {
    let map = alt(z_plus_z2());
    for which in [Branch::Stable, Branch::Unstable] {
        let s = linearize(&map, which, 30).unwrap();
        assert!(s.radius_validated >= 1e-3);
        let r = s.max_residual(&map, s.radius_validated);
        assert!(r < 1e-8, "{which:?}: {r:e}");
    }
}

#[test]
fn stable_series_agrees_with_iteration() {
    // F^n(φ(ζ)) = φ(λ^n ζ)
    let map = alt(z_plus_z2());
    let s = linearize(&map, Branch::Stable, 30).unwrap();
    let zeta = c(0.6 * s.radius_validated, 0.2 * s.radius_validated);
    let mut p = s.eval(zeta);
    let mut l = c(1.0, 0.0);
    for _ in 0..6 {
        p = map.apply(p);
        l *= s.lambda;
        assert!((p - s.eval(zeta * l)).norm() < 1e-8);
    }
}

#[test]
fn first_coefficient_is_the_eigenvector() {
    let map = alt(z_plus_z2());
    let d = map.differential(C2::default());
    for which in [Branch::Stable, Branch::Unstable] {
        let s = linearize(&map, which, 30).unwrap();
        let v = s.coefficients[1];
        assert!((d.apply(v) - v * s.lambda).norm() < 1e-12 * v.norm());
        assert_eq!(s.coefficients[0], C2::default());
    }
}

#[test]
fn non_saddles_are_rejected() {
    let map = alt(EntireExpr::real(0.1) * EntireExpr::var());
    assert!(matches!(linearize(&map, Branch::Stable, 10), Err(OscError::NotSaddle(..))));
    let map = alt(EntireExpr::var() + EntireExpr::real(1.0));
    assert!(matches!(linearize(&map, Branch::Stable, 10), Err(OscError::NotFixed(_))));
}

fn linear_targets(eps: f64, tau: f64) -> (HenonMap, ShootTarget, ShootTarget, SaddleModel) {
    let map = alt(EntireExpr::var());
    let m = SaddleModel::default();
    let p = m.eigvec_s * c(eps, 0.0);
    let q = m.eigvec_u * c(tau, 0.0);
    (map, ShootTarget::from_tangent(p, m.eigvec_s), ShootTarget::from_tangent(q, m.eigvec_u), m)
}

#[test]
fn linear_shooting_recovers_the_offset() {
    let (map, st, ut, m) = linear_targets(0.5, 0.5);
    let shot = lambda_shoot(&map, &st, &ut, 0.1, &ShootCaps::default()).unwrap();
    let n = shot.len() as i32;
    // Q_0 = ε v_s + t v_u with t = τ λ_u^{−M}
    let t_exact = 0.5 * m.lambda_u.powi(-n);
    let offset = st.transversal * shot.t;
    let along = (offset.z * m.eigvec_u.z.conj() + offset.w * m.eigvec_u.w.conj()) / m.eigvec_u.norm().powi(2);
    assert!((along - c(t_exact, 0.0)).norm() < 1e-8 * t_exact.max(1.0));
    assert!((offset - m.eigvec_u * along).norm() < 1e-12);
    let s_exact = 0.5 * m.lambda_s.powi(n);
    assert!((shot.s.norm() - s_exact.abs()).abs() < 1e-12);
    assert!(shot.min_norm < 0.1);
    for w in shot.orbit.windows(2) {
        assert!((map.apply(w[0]) - w[1]).norm() < 1e-12);
    }
}

#[test]
fn smaller_balls_give_longer_passages() {
    let (map, st, ut, _) = linear_targets(0.5, 0.5);
    let mut prev = 0;
    for r in [0.2, 0.1, 0.05, 0.025] {
        let shot = lambda_shoot(&map, &st, &ut, r, &ShootCaps::default()).unwrap();
        assert!(shot.min_norm < r);
        assert!(shot.len() >= prev);
        prev = shot.len();
    }
}

#[test]
fn shooting_rejects_a_bad_ball() {
    let (map, st, ut, _) = linear_targets(0.5, 0.5);
    assert!(matches!(lambda_shoot(&map, &st, &ut, 0.0, &ShootCaps::default()), Err(OscError::ShootFailed(_))));
}

#[test]
fn detour_conditions_hold() {
    let start = c(-77.0, 0.0);
    let end = c(-2.5, 0.0);
    let pts = plan_detour(start, end, 12, 3.0).unwrap();
    assert_eq!(pts.len(), 13);
    assert_eq!(pts[0], start);
    assert_eq!(pts[12], end);
    for j in 1..12 {
        assert!(pts[j].norm() > start.norm() + 2.0);
        for i in 0..j {
            assert!((pts[i] - pts[j]).norm() > 2.0);
        }
    }
    assert!(plan_detour(start, end, 0, 3.0).is_err());
}

#[test]
fn constant_f_contracts_by_exactly_a() {
    let s = c(3.0, -1.0);
    let map = alt(EntireExpr::constant(s));
    let (d1, d2) = (Disk::new(c(10.0, 0.0), 0.5), Disk::new(c(10.0, 0.0), 1.0));
    let r = contraction_check(&map, &d1, &d2, s, 0.55, 0.45);
    assert!(r.holds());
    assert!((r.min_ratio - 0.5).abs() < 1e-12 && (r.max_ratio - 0.5).abs() < 1e-12);
    assert_eq!(r.deviation, 0.0);
    assert!(r.within_certified());

    let bad = contraction_check(&map, &d1, &d2, s, 0.6, 0.55);
    assert!(!bad.lower_holds);
}

#[test]
fn small_perturbation_keeps_the_bounds() {
    let s = c(3.0, 0.0);
    let f = EntireExpr::constant(s) + EntireExpr::real(1e-3) * EntireExpr::sin(EntireExpr::var());
    let map = alt(f);
    let (d1, d2) = (Disk::new(c(0.0, 0.0), 0.5), Disk::new(c(0.0, 0.0), 1.0));
    let r = contraction_check(&map, &d1, &d2, s, 0.55, 0.45);
    assert!(r.holds(), "{r:?}");
    assert!(r.deviation > 0.0 && r.deviation < 2e-3);
    assert!(r.within_certified());
}

#[test]
fn initial_state_passes() {
    let s = initial_state(&OscParams::default());
    assert_eq!(s.big_r, vec![1.0]);
    assert_eq!(s.theta, vec![1.0]);
    assert_eq!(s.radii, vec![0.5]);
    assert!(s.orbit[0].z.norm() > 6.0);
    assert!(verify_round(&s).all_passed());
}

#[test]
fn verification_catches_a_perturbed_map() {
    let s1 = round(&initial_state(&OscParams::default())).unwrap();
    let report = verify_round(&s1);
    assert!(report.all_passed(), "{report:?}");
    let i = report.get("i").unwrap();
    assert!(i.bound <= 0.5 && i.value <= i.bound);

    let mut bad = s1.clone();
    bad.f = bad.f.clone() + EntireExpr::real(2.0 * s1.eps[1]);
    let report = verify_round(&bad);
    assert!(!report.get("i").unwrap().passed);
}

#[test]
fn two_rounds_oscillate() {
    let s = two_rounds();
    assert_eq!(s.round, 2);
    let report = verify_round(s);
    assert!(report.all_passed(), "{report:?}");
    assert!(report.checks.iter().all(|c| c.margin >= 0.0));
    let n2 = s.n_k();
    assert_eq!(s.orbit.len(), n2 + 1);
    let map = s.map();
    for n in 0..n2 {
        assert!((map.apply(s.orbit[n]) - s.orbit[n + 1]).norm() < 1e-8, "n = {n}");
    }
    let rec = classify(&map, s.orbit[0], &ClassifyParams { n_max: n2, r_escape: 8.0, r_bound: 0.5, ..Default::default() });
    assert!(matches!(rec.class, EscapeClass::Oscillating { .. }), "{:?}", rec.class);
}

#[test]
fn detour_radii_decay_by_c() {
    let s = two_rounds();
    let cc = s.params.c;
    for k in 0..2 {
        let (nk, npk) = (s.n[k], s.n_prime[k]);
        let n_detour = npk - nk - 1;
        for l in 1..=n_detour {
            let expect = s.radii[nk] * cc.powi(l as i32);
            assert!((s.radii[nk + l] - expect).abs() <= 1e-15 * expect);
        }
        // N is the smallest with c^N β_{n_k} < β̃_0
        let b0 = s.radii[npk];
        assert!(s.radii[nk] * cc.powi(n_detour as i32) < b0);
        assert!(n_detour == 1 || s.radii[nk] * cc.powi(n_detour as i32 - 1) >= b0);
    }
}

#[test]
fn detour_disks_contract() {
    let s = two_rounds();
    let map = s.map();
    let p = &s.params;
    for k in 0..2 {
        let (nk, npk, next) = (s.n[k], s.n_prime[k], s.n[k + 1]);
        // detour disks of radius θ_k, then the entry and exit disks of radius θ_{k+1}
        let disks = (nk..npk - 1).map(|n| (n, s.theta[k])).chain([(npk - 1, s.theta[k + 1]), (next - 1, s.theta[k + 1])]);
        for (n, theta) in disks {
            let zc = s.orbit[n].z;
            let target = s.orbit[n + 1].z - s.orbit[n].w * c(p.a, 0.0);
            let r = contraction_check(&map, &Disk::new(zc, theta / 2.0), &Disk::new(zc, theta), target, p.a_upper, p.a_lower);
            assert!(r.holds() && r.within_certified(), "round {} index {n}: {r:?}", k + 1);
        }
    }
}

#[test]
fn state_round_trips_through_json() {
    let s = round(&initial_state(&OscParams::default())).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: ConstructionState = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
    assert_eq!(back.orbit, s.orbit);
    let z = c(0.3, 0.1);
    assert_eq!(back.f.eval(z), s.f.eval(z));
    let _: Complex = back.log[0].far_point;
}
