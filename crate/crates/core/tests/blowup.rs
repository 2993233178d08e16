use gplab_core::blowup::{
    concavity_excess, detect_blowup, fit_rate, glassey_bound, negative_energy_state, Detection, GlasseyBound,
    RateRegime,
};
use gplab_core::checks::{quintic_collapse_run, synthetic_blowup};
use gplab_core::dynamics::evolve_mixture;
use gplab_core::functionals::{nls_energy, Diagnostic};
use gplab_core::spectral::make_reference;
use gplab_core::{Grid, Power, ProductMixture, Reference, Sampling, Sign, StepController};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_power_laws_are_recovered(p in 0.2f64..2.0, t_star in 0.3f64..2.0, c in 0.1f64..10.0) {
        let tr = synthetic_blowup(t_star, p, c).unwrap();
        let Detection::Blowup { t_star: t_fit, .. } = detect_blowup(&tr, 1.0).unwrap() else {
            return Err(TestCaseError::fail("no blowup detected"));
        };
        let rep = fit_rate(&tr, t_fit, 1.0, RateRegime::QuinticLowRegularity).unwrap();
        prop_assert!((rep.fitted_exponent - p).abs() < 0.01, "p {} fitted {}", p, rep.fitted_exponent);
        prop_assert!((t_fit - t_star).abs() < 1e-3 * t_star);
    }

    #[test]
    fn glassey_root_solves_the_quadratic(e0 in -10.0f64..-0.01, v0 in 0.01f64..10.0, vd in -5.0f64..5.0) {
        let GlasseyBound::Finite(t) = glassey_bound(e0, v0, vd).unwrap() else {
            return Err(TestCaseError::fail("bound should be finite"));
        };
        prop_assert!(t > 0.0);
        let v = v0 + vd * t + 8.0 * e0 * t * t;
        prop_assert!(v.abs() < 1e-9 * (v0 + vd.abs() * t + 8.0 * e0.abs() * t * t));
    }
}

#[test]
fn glassey_needs_negative_energy() {
    assert_eq!(glassey_bound(0.0, 1.0, 0.0).unwrap(), GlasseyBound::NotApplicable);
    assert_eq!(glassey_bound(2.0, 1.0, -1.0).unwrap(), GlasseyBound::NotApplicable);
    assert!(glassey_bound(-1.0, -1.0, 0.0).is_err());
}

#[test]
fn negative_energy_amplitude_for_a_gaussian() {
    // E(A) = A^2 / 2 - A^6 L6 / 6 for the unit Gaussian, L6 = (2/pi)^(3/2) sqrt(pi/6)
    let grid = Grid::new(1, 512, 12.0).unwrap();
    let base = make_reference(&Reference::gaussian(1, 1.0, 1.0), &grid).unwrap();
    let (amp, mix) = negative_energy_state(&base, 1, Power::Quintic).unwrap();
    let pi = std::f64::consts::PI;
    let l6 = (2.0 / pi).powf(1.5) * (pi / 6.0).sqrt();
    let want = 1.1 * (3.0 / l6).powf(0.25);
    assert!((amp - want).abs() < 1e-9 * want);
    assert!(nls_energy(&mix.fields()[0], Sign::Focusing, Power::Quintic).unwrap() < 0.0);
}

#[test]
fn concavity_of_an_exact_quadratic() {
    let times: Vec<f64> = vec![0.0, 0.1, 0.15, 0.3, 0.31, 0.5];
    let v: Vec<f64> = times.iter().map(|t| 2.0 - t + 3.0 * t * t).collect();
    assert!(concavity_excess(&times, &v, 6.0, 0.0).abs() < 1e-9);
    assert!(concavity_excess(&times, &v, 5.0, 0.0) > 0.99);
    // triples touching the 0.01 gap are skipped
    assert!(concavity_excess(&times, &v, 6.0, 0.04).abs() < 1e-9);
    assert_eq!(concavity_excess(&times, &v, 6.0, 1.0), f64::NEG_INFINITY);
}

#[test]
fn detected_collapse_precedes_the_glassey_time() {
    let (e0, bound, tr) = quintic_collapse_run(0.01).unwrap();
    assert!(e0 < 0.0);
    let GlasseyBound::Finite(t_bound) = bound else { panic!("bound not applicable") };
    let Detection::Blowup { t_star, .. } = detect_blowup(&tr, 1.0).unwrap() else { panic!("no blowup") };
    assert!(t_star <= 1.05 * t_bound);
    assert!(tr.halted.as_ref().unwrap().time < t_star);
    for regime in [RateRegime::QuinticHighRegularity, RateRegime::QuinticLowRegularity] {
        assert!(fit_rate(&tr, t_star, 1.0, regime).unwrap().verdict);
    }
}

#[test]
fn trace_norm_diverges_as_the_variance_collapses() {
    let grid = Grid::new(1, 4096, 10.0).unwrap();
    let base = make_reference(&Reference::gaussian(1, 1.0, 1.0), &grid).unwrap();
    let (_, mix) = negative_energy_state(&base, 1, Power::Quintic).unwrap();
    let diags = [Diagnostic::Kinetic(1), Diagnostic::Virial(1), Diagnostic::TraceNorm(1), Diagnostic::Mass];
    let tr = evolve_mixture(
        &mix,
        Sign::Focusing,
        Power::Quintic,
        &StepController::adaptive(1e-3, 40.0, 0.01),
        1.0,
        &Sampling { every: 0.01, growth: Some(0.05), keep_states: false },
        &diags,
    )
    .unwrap();
    assert!(tr.halted.is_some());
    let kinetic = tr.series(&diags[0].to_string()).unwrap();
    let variance = tr.series(&diags[1].to_string()).unwrap();
    let trace = tr.series(&diags[2].to_string()).unwrap();
    let mass = tr.series(&diags[3].to_string()).unwrap()[0];
    // Heisenberg: ||grad phi||^2 ||x phi||^2 >= ||phi||^4 / 4 in one dimension
    for (k, v) in kinetic.iter().zip(variance) {
        assert!(k * v >= 0.25 * mass * mass * (1.0 - 1e-9));
    }
    assert!(trace.last().unwrap() / trace[0] > 10.0);
}

#[test]
fn defocusing_runs_report_no_blowup() {
    let grid = Grid::new(1, 256, 10.0).unwrap();
    let mix = ProductMixture::single(make_reference(&Reference::gaussian(1, 1.0, 2.0), &grid).unwrap());
    let tr = evolve_mixture(
        &mix,
        Sign::Defocusing,
        Power::Quintic,
        &StepController::fixed(1e-3),
        0.2,
        &Sampling::every(0.01),
        &[Diagnostic::QuasiNorm(1.0)],
    )
    .unwrap();
    assert_eq!(detect_blowup(&tr, 1.0).unwrap(), Detection::NoBlowup);
}
