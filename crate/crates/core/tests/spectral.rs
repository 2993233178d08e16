use gplab_core::samples;
use gplab_core::spectral::{apply_multiplier, make_reference, quadrature_inner};
use gplab_core::{Field, Grid, Multiplier, Reference};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid_for(dim: usize) -> Grid {
    match dim {
        1 => Grid::new(1, 64, 6.0).unwrap(),
        _ => Grid::new(2, 16, 4.0).unwrap(),
    }
}

fn max_abs(f: &Field) -> f64 {
    f.values().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(seed in 0u64..10_000, dim in 1usize..=2) {
        let grid = grid_for(dim);
        let f = samples::rough_field(&grid, &mut samples::rng(seed));
        let position = quadrature_inner(&f, &f).unwrap().re;
        let momentum = grid.momentum_weight() * f.to_momentum().iter().map(|c| c.norm_sqr()).sum::<f64>();
        prop_assert!((position - momentum).abs() <= 1e-12 * position);
        prop_assert!((f.mass() - position).abs() <= 1e-12 * position);
    }

    #[test]
    fn momentum_round_trip(seed in 0u64..10_000, dim in 1usize..=2) {
        let grid = grid_for(dim);
        let f = samples::rough_field(&grid, &mut samples::rng(seed));
        let back = Field::from_momentum(grid, &f.to_momentum()).unwrap();
        prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * max_abs(&f));
    }

    #[test]
    fn multipliers_compose(seed in 0u64..10_000, t in -2.0f64..2.0, a in -1.0f64..1.0) {
        let grid = grid_for(1);
        let f = samples::rough_field(&grid, &mut samples::rng(seed));
        let s1 = |p: &[f64]| Complex64::from_polar((1.0 + p[0] * p[0]).powf(-0.5), t * p[0]);
        let s2 = |p: &[f64]| Complex64::new(1.0 + a * p[0].cos(), a * p[0]);
        let twice = apply_multiplier(&apply_multiplier(&f, s1).unwrap(), s2).unwrap();
        let once = apply_multiplier(&f, |p| s1(p) * s2(p)).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() <= 1e-12 * max_abs(&f).max(max_abs(&once)));
    }

    #[test]
    fn free_propagator_is_unitary(seed in 0u64..10_000, t in -5.0f64..5.0, dim in 1usize..=2) {
        let grid = grid_for(dim);
        let f = samples::rough_field(&grid, &mut samples::rng(seed));
        let g = Multiplier::free_propagator(&grid, t).apply(&f);
        let (a, b) = (quadrature_inner(&f, &f).unwrap().re, quadrature_inner(&g, &g).unwrap().re);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn free_propagators_form_a_group(seed in 0u64..10_000, t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let grid = grid_for(1);
        let f = samples::smooth_field(&grid, &mut samples::rng(seed)).unwrap();
        let stepwise = Multiplier::free_propagator(&grid, t2).apply(&Multiplier::free_propagator(&grid, t1).apply(&f));
        let direct = Multiplier::free_propagator(&grid, t1 + t2).apply(&f);
        prop_assert!(stepwise.max_abs_diff(&direct).unwrap() <= 1e-12 * max_abs(&f));
    }
}

#[test]
fn free_gaussian_matches_closed_form() {
    // i u_t = -u_xx from exp(-x^2) is (1 + 4 i t)^(-1/2) exp(-x^2 / (1 + 4 i t))
    let grid = Grid::new(1, 512, 30.0).unwrap();
    let t = 0.7;
    let exact = |x: f64| {
        let d = Complex64::new(1.0, 4.0 * t);
        d.sqrt().inv() * (-Complex64::new(x * x, 0.0) / d).exp()
    };
    let u0 = Field::from_fn(grid, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
    let ut = Multiplier::free_propagator(&grid, t).apply(&u0);
    let want = Field::from_fn(grid, |x| exact(x[0])).unwrap();
    assert!(ut.max_abs_diff(&want).unwrap() < 1e-12);
}

#[test]
fn plane_wave_derivative_and_kinetic() {
    let grid = Grid::new(1, 32, 4.0).unwrap();
    let p0 = grid.frequency(3);
    let wave = make_reference(&Reference::PlaneWave { momentum: vec![p0], amplitude: 1.0 }, &grid).unwrap();
    let d = wave.derivative(0).unwrap();
    let want = wave.scaled(Complex64::new(0.0, p0));
    assert!(d.max_abs_diff(&want).unwrap() < 1e-12);
    let mass = wave.mass();
    assert!((mass - 8.0).abs() < 1e-12);
    assert!((wave.kinetic() - p0 * p0 * mass).abs() < 1e-10);
    assert!((wave.hs_norm_sq(2.0) - (1.0 + p0 * p0).powi(2) * mass).abs() < 1e-9);
}

#[test]
fn gaussian_references_are_normalized() {
    for dim in [1, 2, 3] {
        let grid = Grid::new(dim, 32, 6.0).unwrap();
        let g = make_reference(&Reference::gaussian(dim, 1.0, 1.0), &grid).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-12, "dim {dim}: {}", g.mass());
        // ||grad||^2 = n / w^2 for the unit Gaussian
        assert!((g.kinetic() - dim as f64).abs() < 1e-9);
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = Field::zeros(Grid::new(1, 16, 2.0).unwrap());
    let b = Field::zeros(Grid::new(1, 16, 3.0).unwrap());
    assert!(quadrature_inner(&a, &b).is_err());
    assert!(a.max_abs_diff(&b).is_err());
}

#[test]
fn nonfinite_symbols_are_rejected() {
    let grid = Grid::new(1, 16, 2.0).unwrap();
    let f = Field::zeros(grid);
    assert!(apply_multiplier(&f, |p| Complex64::new(1.0 / p[0], 0.0)).is_err());
}
