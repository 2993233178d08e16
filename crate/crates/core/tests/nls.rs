use gplab_core::nls::{nls_evolve, nls_step, SplitStepper};
use gplab_core::samples;
use gplab_core::spectral::make_reference;
use gplab_core::{Field, Grid, NlsProblem, Power, Reference, Sign, StepController};
use num_complex::Complex64;
use proptest::prelude::*;

fn power_of(q: bool) -> Power {
    if q {
        Power::Quintic
    } else {
        Power::Cubic
    }
}

fn sign_of(f: bool) -> Sign {
    if f {
        Sign::Focusing
    } else {
        Sign::Defocusing
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn split_step_keeps_mass(seed in 0u64..10_000, dt in -0.05f64..0.05, quintic: bool, focusing: bool) {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let f = samples::smooth_field(&grid, &mut samples::rng(seed)).unwrap();
        let g = nls_step(&f, sign_of(focusing), power_of(quintic), dt);
        prop_assert!((g.mass() - f.mass()).abs() <= 1e-12 * f.mass());
    }

    #[test]
    fn negated_steps_retrace_the_path(seed in 0u64..10_000, quintic: bool, focusing: bool) {
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let f0 = samples::smooth_field(&grid, &mut samples::rng(seed)).unwrap();
        let (mu, power) = (sign_of(focusing), power_of(quintic));
        let forward = SplitStepper::new(&grid, mu, power, 0.01);
        let backward = SplitStepper::new(&grid, mu, power, -0.01);
        let mut f = f0.clone();
        (0..50).for_each(|_| forward.step(&mut f));
        (0..50).for_each(|_| backward.step(&mut f));
        prop_assert!(f.max_abs_diff(&f0).unwrap() < 1e-8);
    }
}

fn energy_drift(dt: f64) -> f64 {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let initial = make_reference(
        &Reference::Gaussian { center: vec![0.5], width: 1.0, amplitude: 1.2, chirp: 0.3 },
        &grid,
    )
    .unwrap();
    let prob = NlsProblem { mu: Sign::Focusing, power: Power::Cubic, initial };
    let tr = nls_evolve(&prob, &StepController::fixed(dt), 1.0, 0.05).unwrap();
    let e = tr.series("energy").unwrap();
    e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max)
}

#[test]
fn energy_drift_is_second_order() {
    let coarse = energy_drift(0.02);
    let fine = energy_drift(0.01);
    assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
}

#[test]
fn soliton_rotates_in_phase() {
    // sqrt(2) a sech(a x) solves i u_t = -u_xx - |u|^2 u as exp(i a^2 t) Q
    let grid = Grid::new(1, 256, 20.0).unwrap();
    let a = 1.3;
    let q = make_reference(&Reference::Soliton { scale: a }, &grid).unwrap();
    let prob = NlsProblem { mu: Sign::Focusing, power: Power::Cubic, initial: q.clone() };
    let t = 1.0;
    let tr = nls_evolve(&prob, &StepController::fixed(1e-3), t, t).unwrap();
    let last = tr.states.last().unwrap().as_mixture().unwrap();
    let want = q.scaled(Complex64::from_polar(1.0, a * a * t));
    assert!(last.fields()[0].max_abs_diff(&want).unwrap() < 1e-5);
}

#[test]
fn samples_land_on_the_grid() {
    let grid = Grid::new(1, 64, 8.0).unwrap();
    let initial = make_reference(&Reference::gaussian(1, 1.0, 1.0), &grid).unwrap();
    let prob = NlsProblem { mu: Sign::Defocusing, power: Power::Quintic, initial };
    let tr = nls_evolve(&prob, &StepController::fixed(0.003), 0.1, 0.02).unwrap();
    let want: Vec<f64> = (0..=5).map(|i| 0.02 * i as f64).collect();
    assert_eq!(tr.times.len(), want.len());
    for (t, w) in tr.times.iter().zip(&want) {
        assert!((t - w).abs() < 1e-12);
    }
    tr.validate().unwrap();
    for name in ["mass", "energy", "h1_norm", "virial", "virial_dt"] {
        assert_eq!(tr.series(name).unwrap().len(), want.len());
    }
}

#[test]
fn controller_rejects_bad_parameters() {
    let grid = Grid::new(1, 32, 4.0).unwrap();
    let initial = make_reference(&Reference::gaussian(1, 1.0, 1.0), &grid).unwrap();
    let prob = NlsProblem { mu: Sign::Focusing, power: Power::Cubic, initial: initial.clone() };
    let mut low_halt = StepController::fixed(0.01);
    low_halt.halt_norm = 0.5 * initial.h1_norm();
    assert!(nls_evolve(&prob, &low_halt, 1.0, 0.1).is_err());
    assert!(nls_evolve(&prob, &StepController::fixed(-0.01), 1.0, 0.1).is_err());
    assert!(nls_evolve(&prob, &StepController::fixed(0.01), 0.0, 0.1).is_err());
    let nan = Field::new(grid, vec![Complex64::new(f64::NAN, 0.0); 32]);
    assert!(nan.is_err());
}

#[test]
fn focusing_quintic_with_negative_energy_halts() {
    let grid = Grid::new(1, 1024, 8.0).unwrap();
    let initial = make_reference(&Reference::gaussian(1, 1.0, 2.0), &grid).unwrap();
    let e = gplab_core::functionals::nls_energy(&initial, Sign::Focusing, Power::Quintic).unwrap();
    assert!(e < 0.0);
    let prob = NlsProblem { mu: Sign::Focusing, power: Power::Quintic, initial: initial.clone() };
    let ctrl = StepController::adaptive(1e-3, 5.0 * initial.h1_norm(), 0.05);
    let tr = nls_evolve(&prob, &ctrl, 2.0, 0.01).unwrap();
    let halt = tr.halted.expect("blowup halt");
    assert!(halt.norm >= 5.0 * initial.h1_norm());
    assert!(halt.time < 2.0);
}
