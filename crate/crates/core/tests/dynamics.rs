use gplab_core::dynamics::{duhamel_residual, evolve_mixture, evolve_truncated, time_shift_check};
use gplab_core::functionals::Diagnostic;
use gplab_core::spectral::make_reference;
use gplab_core::{
    ClosurePolicy, DenseKernel, Grid, HierarchyTruncation, Power, ProductMixture, Reference, Sampling, Sign, Snapshot,
    StepController,
};

fn two_bumps(grid: &Grid) -> ProductMixture {
    let bump = |c: f64, a: f64, chirp: f64| {
        make_reference(&Reference::Gaussian { center: vec![c], width: 1.0, amplitude: a, chirp }, grid).unwrap()
    };
    ProductMixture::new(vec![(0.7, bump(-0.8, 1.3, 0.2)), (0.3, bump(0.9, 0.8, -0.4))]).unwrap()
}

fn conj(g: &DenseKernel) -> DenseKernel {
    DenseKernel::new(g.order(), *g.grid(), g.values().iter().map(|z| z.conj()).collect()).unwrap()
}

fn final_levels(tr: &gplab_core::TrajectoryRecord) -> Vec<DenseKernel> {
    match tr.states.last() {
        Some(Snapshot::Levels(l)) => l.clone(),
        _ => panic!("no dense levels recorded"),
    }
}

#[test]
fn mixture_trace_is_constant() {
    let grid = Grid::new(1, 128, 10.0).unwrap();
    let mix = two_bumps(&grid);
    for power in [Power::Cubic, Power::Quintic] {
        let tr = evolve_mixture(
            &mix,
            Sign::Focusing,
            power,
            &StepController::fixed(1e-3),
            0.5,
            &Sampling::every(0.05),
            &[Diagnostic::Mass],
        )
        .unwrap();
        let mass = tr.series("mass").unwrap();
        assert!(mass.iter().all(|m| (m - mass[0]).abs() <= 1e-10 * mass[0]));
    }
}

#[test]
fn truncated_levels_stay_symmetric() {
    let grid = Grid::new(1, 16, 6.0).unwrap();
    let init = HierarchyTruncation::from_mixture(&two_bumps(&grid), 2).unwrap();
    let tr = evolve_truncated(&init, Sign::Focusing, Power::Cubic, 0.01, 0.2, 0.02).unwrap();
    assert!(tr.series("symmetry_defect").unwrap().iter().all(|d| *d <= 1e-8));
    let trace = tr.series("trace_k1").unwrap();
    assert!(trace.iter().all(|t| (t - trace[0]).abs() < 1e-10 * trace[0]));
}

#[test]
fn conjugation_reverses_time() {
    let grid = Grid::new(1, 16, 6.0).unwrap();
    let mix = two_bumps(&grid);
    let init = HierarchyTruncation::from_mixture(&mix, 2).unwrap();
    let conj_mix = mix.with_fields(mix.fields().iter().map(|f| f.conj()).collect()).unwrap();
    let conj_init = HierarchyTruncation::new(
        init.levels().iter().map(conj).collect(),
        ClosurePolicy::MixtureReference(conj_mix),
    )
    .unwrap();
    let (mu, power) = (Sign::Focusing, Power::Cubic);
    let forward = final_levels(&evolve_truncated(&conj_init, mu, power, 0.01, 0.1, 0.1).unwrap());
    let backward = final_levels(&evolve_truncated(&init, mu, power, -0.01, 0.1, 0.1).unwrap());
    for (f, b) in forward.iter().zip(&backward) {
        assert!(f.max_abs_diff(&conj(b)).unwrap() < 1e-12);
    }
}

#[test]
fn zero_closure_differs_from_exact_closure() {
    let grid = Grid::new(1, 16, 6.0).unwrap();
    let mix = two_bumps(&grid);
    let exact = HierarchyTruncation::from_mixture(&mix, 1).unwrap();
    let cut = HierarchyTruncation::new(exact.levels().to_vec(), ClosurePolicy::Zero).unwrap();
    let (mu, power) = (Sign::Focusing, Power::Cubic);
    let a = final_levels(&evolve_truncated(&exact, mu, power, 0.01, 0.2, 0.2).unwrap());
    let b = final_levels(&evolve_truncated(&cut, mu, power, 0.01, 0.2, 0.2).unwrap());
    // with no source the first level evolves freely
    let free = exact.levels()[0].free_flow(0.2);
    assert!(b[0].max_abs_diff(&free).unwrap() < 1e-12);
    assert!(a[0].max_abs_diff(&free).unwrap() > 1e-3);
}

#[test]
fn duhamel_holds_at_every_dense_level() {
    let grid = Grid::new(1, 16, 6.0).unwrap();
    let mix = two_bumps(&grid);
    let t_end = 0.2;
    let residual = |nodes: usize, k: usize| {
        let ds = t_end / nodes as f64;
        let tr = evolve_mixture(
            &mix,
            Sign::Focusing,
            Power::Quintic,
            &StepController::fixed(ds / 10.0),
            t_end,
            &Sampling::every(ds),
            &[],
        )
        .unwrap();
        duhamel_residual(&tr, k).unwrap()
    };
    for k in [1, 2] {
        let (coarse, fine) = (residual(50, k), residual(100, k));
        assert!(fine < 1e-4, "k = {k}: {fine}");
        assert!(coarse / fine > 3.5, "k = {k}: ratio {}", coarse / fine);
    }
}

#[test]
fn truncated_trajectories_satisfy_duhamel() {
    let grid = Grid::new(1, 16, 6.0).unwrap();
    let init = HierarchyTruncation::from_mixture(&two_bumps(&grid), 2).unwrap();
    let tr = evolve_truncated(&init, Sign::Defocusing, Power::Cubic, 0.002, 0.2, 0.002).unwrap();
    assert!(duhamel_residual(&tr, 1).unwrap() < 1e-4);
    assert!(duhamel_residual(&tr, 2).is_err());
}

#[test]
fn time_shift_reindexes_exactly() {
    let grid = Grid::new(1, 64, 8.0).unwrap();
    let tr = evolve_mixture(
        &two_bumps(&grid),
        Sign::Focusing,
        Power::Cubic,
        &StepController::fixed(1e-3),
        0.2,
        &Sampling::every(0.02),
        &[],
    )
    .unwrap();
    assert!(time_shift_check(&tr, 0.06, 1.0).unwrap() < 1e-9);
    // off-grid origins interpolate states, which moves the norm only slightly
    assert!(time_shift_check(&tr, 0.05, 1.0).unwrap() < 1e-2);
    assert!(time_shift_check(&tr, 0.5, 1.0).is_err());
}

#[test]
fn truncation_rejects_bad_inputs() {
    let grid = Grid::new(1, 8, 2.0).unwrap();
    let init = HierarchyTruncation::from_mixture(&two_bumps(&Grid::new(1, 8, 6.0).unwrap()), 1).unwrap();
    assert!(evolve_truncated(&init, Sign::Focusing, Power::Cubic, 0.0, 0.1, 0.1).is_err());
    assert!(evolve_truncated(&init, Sign::Focusing, Power::Cubic, 0.01, -1.0, 0.1).is_err());
    let skewed = DenseKernel::new(1, grid, (0..64).map(|i| num_complex::Complex64::new(i as f64, 0.0)).collect()).unwrap();
    let bad = HierarchyTruncation::new(vec![skewed], ClosurePolicy::Zero).unwrap();
    assert!(evolve_truncated(&bad, Sign::Focusing, Power::Cubic, 0.01, 0.1, 0.1).is_err());
}
