//! One line per acceptance criterion. Runs without the libtest harness so the
//! criteria print in order with their measured values.

use baker::{baker_map, conjugacy_residual, drift_check, invariance_check, psi, sample_r_alpha, stream_rng};
use henon_map::HenonMap;
use numeric_core::{c, fs_distance, EntireExpr, ProjPoint, C2};
use orbit_engine::{classify, with_workers, ClassifyParams, EscapeClass};
use oscillate::{initial_state, linearize, round, verify_round, Branch, OscParams, SaddleModel};
use periodic::{fixed_points, period2_identities, period2_points, SearchBox};
use render_cli::render::complex_line;
use render_cli::{render, ColorMode, Thresholds};
use runge_approx::{approximate, validate, DiskTarget, InterpCondition, DEFAULT_DEGREE_CAP};
use std::time::Instant;
use wander_escape::{build_maps, f_conj, fitted_rate, lattice_point, log_cocycle_norms, make_params, random_probes};

const ALPHAS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn invariance() -> Outcome {
    let t = Instant::now();
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for (i, &alpha) in ALPHAS.iter().enumerate() {
        let r = invariance_check(alpha, 50.0, 1_000_000, 100 + i as u64);
        violations += r.violations.len();
        slack = slack.min(r.min_image_slack);
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(violations == 0 && secs <= 10.0, format!("{violations} violations in 4x10^6 samples, min slack {slack:.3e}, {secs:.2}s"))
}

fn drift_reports() -> Vec<baker::DriftReport> {
    ALPHAS.iter().enumerate().map(|(i, &a)| drift_check(a, 50.0, 1000, 200, 200 + i as u64)).collect()
}

fn drift(reports: &[baker::DriftReport]) -> Outcome {
    let step: usize = reports.iter().map(|r| r.step_violations).sum();
    let linear: usize = reports.iter().map(|r| r.linear_violations).sum();
    let slack = reports.iter().map(|r| r.min_step_slack).fold(f64::INFINITY, f64::min);
    outcome(step == 0 && linear == 0, format!("{step} step and {linear} linear violations over 4x1000 orbits, min step slack {slack:.3e}"))
}

fn escape(reports: &[baker::DriftReport]) -> Outcome {
    let target = ProjPoint::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let params = ClassifyParams { n_max: 200, r_escape: 50.0, r_bound: 2.0, tail_tol: 1e-6 };
    let (mut bad, mut worst_res, mut worst_dist) = (0, 0.0f64, 0.0f64);
    for r in reports {
        for &p in &r.starts {
            match classify(&baker_map(), p, &params).class {
                EscapeClass::EscapesTo { limit, residual } => {
                    let d = fs_distance(&limit, &target);
                    worst_res = worst_res.max(residual);
                    worst_dist = worst_dist.max(d);
                    bad += usize::from(residual >= 1e-6 || d >= 1e-6);
                }
                _ => bad += 1,
            }
        }
    }
    outcome(bad == 0, format!("{bad} orbits not escaping to [1:1:0]; worst residual {worst_res:.2e}, worst distance {worst_dist:.2e}"))
}

fn conjugacy() -> Outcome {
    let mut rng = stream_rng(31, 0);
    let (mut worst, mut outside, mut errors, mut loose) = (0.0f64, 0, 0, 0);
    for _ in 0..1000 {
        let p = sample_r_alpha(&mut rng, 1.0, 20.0);
        match (psi(p, 1e-8), conjugacy_residual(p, 1e-8)) {
            (Ok(r), Ok(res)) => {
                worst = worst.max(res);
                outside += usize::from(!r.in_omega);
                loose += usize::from(r.tail_bound >= 1e-8);
            }
            _ => errors += 1,
        }
    }
    outcome(
        worst < 5e-8 && outside == 0 && errors == 0 && loose == 0,
        format!("max residual {worst:.2e}, {outside} outside Ω, {errors} errors, {loose} tail bounds above 1e-8"),
    )
}

fn periodic_identities() -> Outcome {
    let std_map = |f: &str, d: f64| HenonMap::standard(f.parse().unwrap(), c(d, 0.0)).unwrap();
    let (mut count, mut det_err, mut tr_err) = (0, 0.0f64, 0.0f64);
    for (f, d) in [("sin(z)", 0.5), ("z^2 - 1", 0.3), ("exp(z) - 2", 0.5)] {
        let m = std_map(f, d);
        let pts = period2_points(&m, &SearchBox::square(5.0), 40, 1e-10).unwrap_or_default();
        for pp in &pts {
            let (dm, tr, det) = period2_identities(&m, pp).unwrap();
            det_err = det_err.max((dm.det() - det).norm());
            tr_err = tr_err.max((dm.trace() - tr).norm());
        }
        count += pts.len();
    }
    let baker_fixed = fixed_points(&baker_map(), &SearchBox::square(20.0), 40, 1e-10).map(|v| v.len());
    let passed = count > 0 && det_err < 1e-8 && tr_err < 1e-8 && baker_fixed.as_ref().is_ok_and(|&n| n == 0);
    outcome(passed, format!("{count} period-2 points, det error {det_err:.2e}, trace error {tr_err:.2e}; Baker fixed points {baker_fixed:?}"))
}

fn wandering_constants() -> Outcome {
    let p = make_params(0.05).unwrap();
    let expect = 1.0 - (1.0 - 1.0 / (4.0 * std::f64::consts::PI.powi(2))).sqrt();
    let dl = (p.lambda - expect).abs();
    let f = f_conj(&p);
    let df = f.deriv();
    let (_, g) = build_maps(&p);
    let (mut fe, mut de, mut ge) = (0.0f64, 0.0f64, 0.0f64);
    for n in -5..=5i64 {
        let x = c(n as f64, 0.0);
        fe = fe.max((f.eval(x) - c(n as f64 + 1.0, 0.0)).norm());
        de = de.max(df.eval(x).norm());
        ge = ge.max((g.apply(lattice_point(n)) - lattice_point(n)).norm());
    }
    outcome(
        dl < 1e-12 && fe < 1e-12 && de < 1e-10 && ge < 1e-12,
        format!("|λ − oracle| {dl:.1e}, |f(n) − n − 1| {fe:.1e}, |f'(n)| {de:.1e}, |G(P_n) − P_n| {ge:.1e}"),
    )
}

fn basin_separation() -> Outcome {
    let p = make_params(0.05).unwrap();
    let (_, g) = build_maps(&p);
    let steps = 40;
    let bound = p.delta.sqrt().ln() + 0.05;
    let reports = random_probes(&p, 100, steps, 7);
    let (mut errors, mut nonpositive, mut misordered, mut interior_bad) = (0, 0, 0, 0);
    let mut min_rho = f64::INFINITY;
    let mut max_interior = f64::NEG_INFINITY;
    for r in &reports {
        let Ok(r) = r else {
            errors += 1;
            continue;
        };
        let interior = fitted_rate(&log_cocycle_norms(&g, lattice_point(r.basin_in), steps), steps / 2);
        max_interior = max_interior.max(interior);
        min_rho = min_rho.min(r.rho);
        nonpositive += usize::from(r.rho <= 0.0);
        interior_bad += usize::from(interior > bound);
        misordered += usize::from(r.rho <= interior || r.basin_out != Some(r.basin_in + 1));
    }
    outcome(
        errors + nonpositive + misordered + interior_bad == 0 && bound < 0.0,
        format!("100 probes: min boundary ρ {min_rho:.3}, max interior ρ {max_interior:.3} (bound {bound:.3}), {misordered} misorderings, {errors} errors"),
    )
}

fn saddle_data() -> Outcome {
    let m = SaddleModel::new(0.5, 1.0);
    let es = (m.lambda_s - (1.0 - 2f64.sqrt()) / 2.0).abs();
    let eu = (m.lambda_u - (1.0 + 2f64.sqrt()) / 2.0).abs();
    let quad = HenonMap::alternative("z + z^2".parse().unwrap(), c(0.5, 0.0)).unwrap();
    let (l1, l2) = quad.differential(C2::default()).eigenvalues();
    let mut direct = [l1.re, l2.re];
    direct.sort_by(f64::total_cmp);
    let ed = (direct[0] - (1.0 - 2f64.sqrt()) / 2.0).abs().max((direct[1] - (1.0 + 2f64.sqrt()) / 2.0).abs());
    let mut worst = 0.0f64;
    let mut ok = true;
    for which in [Branch::Stable, Branch::Unstable] {
        match linearize(&quad, which, 30) {
            Ok(s) => worst = worst.max(s.max_residual(&quad, s.radius_validated)),
            Err(_) => ok = false,
        }
    }
    outcome(
        ok && es < 1e-12 && eu < 1e-12 && ed < 1e-12 && worst < 1e-8,
        format!("eigenvalue errors {:.1e}, series residual {worst:.2e} on the validated radius at order 30", es.max(eu).max(ed)),
    )
}

fn oscillating_rounds() -> Outcome {
    let t = Instant::now();
    let mut state = initial_state(&OscParams::default());
    let mut margins = Vec::new();
    let mut failed = Vec::new();
    for _ in 0..2 {
        match round(&state) {
            Ok(next) => state = next,
            Err(e) => return outcome(false, format!("round {} failed: {e}", state.round + 1)),
        }
        let report = verify_round(&state);
        failed.extend(report.failed_names().into_iter().map(|n| format!("{}:{n}", state.round)));
        margins.extend(report.checks.iter().map(|ch| format!("{}{}={:.2e}", state.round, ch.name, ch.margin)));
    }
    let params = ClassifyParams { n_max: state.n_k(), r_escape: 8.0, r_bound: 0.5, tail_tol: 1e-6 };
    let class = classify(&state.map(), state.orbit[0], &params).class;
    let secs = t.elapsed().as_secs_f64();
    let passed = failed.is_empty() && matches!(class, EscapeClass::Oscillating { .. }) && secs <= 300.0;
    outcome(passed, format!("class {}, failed [{}], {secs:.1}s, margins {}", class.tag(), failed.join(" "), margins.join(" ")))
}

fn runge() -> Outcome {
    let exp_disk = [DiskTarget::function(c(0.0, 0.0), 1.0, EntireExpr::exp(EntireExpr::var()))];
    let cond = [InterpCondition::with_deriv(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0))];
    let two = [DiskTarget::constant(c(0.0, 0.0), 1.0, c(0.0, 0.0)), DiskTarget::constant(c(5.0, 0.0), 1.0, c(1.0, 0.0))];
    let run = || {
        let e = approximate(&exp_disk, &cond, 1e-6, DEFAULT_DEGREE_CAP);
        let t = approximate(&two, &[], 1e-3, DEFAULT_DEGREE_CAP);
        (e, t)
    };
    let ((Ok(e), Ok(t)), (Ok(e2), Ok(t2))) = (run(), run()) else {
        return outcome(false, "approximation failed".into());
    };
    let ve = validate(&e, &exp_disk, &cond);
    let vt = validate(&t, &two, &[]);
    let bits = |p: &runge_approx::PolyApproximant| p.coefficients.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
    let same = bits(&e) == bits(&e2) && bits(&t) == bits(&t2);
    outcome(
        ve.sup_error <= 1e-6 && e.conditions_residual <= 1e-10 && vt.sup_error <= 1e-3 && same,
        format!(
            "e^z degree {} error {:.2e} conditions {:.1e}; two disks degree {} error {:.2e}; reruns identical: {same}",
            e.degree, ve.sup_error, e.conditions_residual, t.degree, vt.sup_error
        ),
    )
}

fn renderer() -> Outcome {
    let map = baker_map();
    let grid = complex_line(true, c(0.0, 0.0), (-2.0, 8.0), (-5.0, 5.0), (256, 256));
    let thr = Thresholds::default();
    let images: Vec<_> = [1, 2, 8]
        .iter()
        .map(|&w| with_workers(w, || render(&map, &grid, ColorMode::EscapeDirection, 100, &thr).unwrap()))
        .collect();
    let identical = images.windows(2).all(|p| p[0] == p[1]);
    // throughput on the default pool, best of three
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let t = Instant::now();
        std::hint::black_box(render(&map, &grid, ColorMode::EscapeDirection, 100, &thr).unwrap());
        best = best.min(t.elapsed().as_secs_f64());
    }
    let rate = grid.len() as f64 / best;
    outcome(
        identical && rate >= 1e5 / 3.0,
        format!("identical across 1/2/8 workers: {identical}; {rate:.3e} pixel-orbits/s at n_max = 100 on {} threads", rayon::current_num_threads()),
    )
}

fn main() {
    let t = Instant::now();
    let drift_runs = drift_reports();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("baker invariance", Box::new(invariance)),
        ("baker drift", Box::new(|| drift(&drift_runs))),
        ("baker escape", Box::new(|| escape(&drift_runs))),
        ("conjugacy", Box::new(conjugacy)),
        ("periodic identities", Box::new(periodic_identities)),
        ("wandering constants", Box::new(wandering_constants)),
        ("basin separation", Box::new(basin_separation)),
        ("saddle data", Box::new(saddle_data)),
        ("oscillating rounds", Box::new(oscillating_rounds)),
        ("runge engine", Box::new(runge)),
        ("renderer", Box::new(renderer)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.passed);
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failures, criteria.len(), t.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
