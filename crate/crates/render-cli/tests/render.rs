use baker::baker_map;
use henon_map::HenonMap;
use numeric_core::{c, C2};
use orbit_engine::{classify, with_workers, ClassifyParams, EscapeClass, SliceGrid};
use render_cli::cli::basin_slice;
use render_cli::render::{complex_line, real_plane};
use render_cli::*;

fn baker_slice(res: usize) -> SliceGrid {
    complex_line(true, c(0.0, 0.0), (-2.0, 8.0), (-5.0, 5.0), (res, res))
}

#[test]
fn output_does_not_depend_on_workers() {
    let map = baker_map();
    let grid = baker_slice(48);
    for mode in [ColorMode::EscapeTime, ColorMode::EscapeDirection, ColorMode::PshValue, ColorMode::CocycleGrowth] {
        let one = with_workers(1, || render(&map, &grid, mode, 60, &Thresholds::default()).unwrap());
        for w in [2, 3, 8] {
            let other = with_workers(w, || render(&map, &grid, mode, 60, &Thresholds::default()).unwrap());
            assert_eq!(one, other, "{mode:?} with {w} workers");
            assert_eq!(one.row_checksums(), other.row_checksums());
        }
    }
}

#[test]
fn pixels_are_functions_of_their_node() {
    let map = baker_map();
    let grid = baker_slice(32);
    let field = render_field(&map, &grid, ColorMode::EscapeDirection, 80, &Thresholds::default()).unwrap();
    for (col, row) in [(0, 0), (31, 0), (5, 17), (31, 31)] {
        assert_eq!(field.at(col, row), pixel(&map, grid.node(col, row), ColorMode::EscapeDirection, 80, &Thresholds::default()));
    }
}

#[test]
fn far_right_of_the_baker_slice_is_coloured_by_the_diagonal() {
    let map = baker_map();
    let grid = baker_slice(40);
    let img = render(&map, &grid, ColorMode::EscapeDirection, 200, &Thresholds::default()).unwrap();
    let params = ClassifyParams { n_max: 200, r_escape: 50.0, r_bound: 2.0, tail_tol: 1e-6 };
    let mut checked = 0;
    for row in 0..40 {
        for col in 0..40 {
            let p = grid.node(col, row);
            if p.z.re < 5.0 {
                continue;
            }
            // the classifier is the oracle: the limit is [1:1:0], whose z/w has argument 0
            let EscapeClass::EscapesTo { limit, .. } = classify(&map, p, &params).class else {
                panic!("node {p:?} does not escape");
            };
            let [x, y, _] = limit.coords();
            let want = hue((x * y.conj()).arg());
            let got = img.get(col, row);
            assert!(want.iter().zip(got).all(|(a, b)| a.abs_diff(b) <= 2), "{p:?}: {got:?} vs {want:?}");
            assert_eq!(want[0], 255);
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn rotation_is_uniformly_bounded() {
    // f = 0, δ = 1 gives (z, w) ↦ (−w, z), of order four
    let map = HenonMap::standard("0".parse().unwrap(), c(1.0, 0.0)).unwrap();
    let grid = real_plane((-3.0, 3.0), (-3.0, 3.0), (20, 20));
    let field = render_field(&map, &grid, ColorMode::EscapeTime, 100, &Thresholds::default()).unwrap();
    assert!(field.pixels.iter().all(|p| *p == Pixel::Bounded));
    let img = Image::from_field(&field);
    assert!(img.rgb.chunks(3).all(|px| px == BACKGROUND));
}

#[test]
fn basins_shift_with_the_lattice() {
    let p = wander_escape::make_params(0.05).unwrap();
    let (_, g) = wander_escape::build_maps(&p);
    let k = 16;
    let grid = basin_slice(k);
    let field = render_field(&g, &grid, ColorMode::BasinIndex, 400, &Thresholds::default()).unwrap();
    let index = |col, row| match field.at(col, row) {
        Pixel::Basin { index } => index,
        other => panic!("{other:?}"),
    };
    // the pixel centre nearest P_n sits in the basin of P_n
    for n in 0..5 {
        assert_eq!(index(n * k + k / 2, k / 2), Some(n as i64));
    }
    // A_{n+1} = A_n + (1, 1): one lattice step is k whole pixels along u.
    // Orbits through the chaotic boundary layer may round differently after
    // the shift, so a small share of disagreement is tolerated.
    let (mut same, mut compared) = (0, 0);
    for row in 0..k {
        for col in 0..4 * k {
            if let (Some(a), Some(b)) = (index(col, row), index(col + k, row)) {
                same += usize::from(b == a + 1);
                compared += 1;
            }
        }
    }
    assert!(compared > 8 * k);
    assert!(same as f64 >= 0.97 * compared as f64, "{same} of {compared}");
}

#[test]
fn overflow_gets_the_reserved_colour() {
    let map = HenonMap::standard("exp(z)".parse().unwrap(), c(1.0, 0.0)).unwrap();
    let p = pixel(&map, C2::real(700.0, 0.0), ColorMode::PshValue, 5, &Thresholds::default());
    assert_eq!(p, Pixel::Overflow);
    assert_eq!(color(&p, 5), OVERFLOW_COLOR);
}

#[test]
fn bad_slices_are_rejected() {
    let mut grid = baker_slice(32);
    grid.axis_v = grid.axis_u * 2.0;
    assert_eq!(validate_slice(&grid), Err(SliceError::DependentAxes));
    let small = baker_slice(8);
    assert_eq!(validate_slice(&small), Err(SliceError::TooSmall(8, 8)));
    assert!(render(&baker_map(), &small, ColorMode::EscapeTime, 10, &Thresholds::default()).is_err());
}

#[test]
fn ppm_header_and_size() {
    let img = render(&baker_map(), &baker_slice(16), ColorMode::EscapeTime, 20, &Thresholds::default()).unwrap();
    let mut buf = Vec::new();
    img.write_ppm(&mut buf).unwrap();
    let header = b"P6\n16 16\n255\n";
    assert_eq!(&buf[..header.len()], header);
    assert_eq!(buf.len(), header.len() + 16 * 16 * 3);
}

#[test]
fn hue_wheel_primaries() {
    use std::f64::consts::TAU;
    assert_eq!(hue(0.0), [255, 0, 0]);
    assert_eq!(hue(TAU / 3.0), [0, 255, 0]);
    assert_eq!(hue(-TAU / 3.0), [0, 0, 255]);
}
