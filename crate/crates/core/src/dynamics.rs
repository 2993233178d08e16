//! Time evolution of hierarchy states.

use num_complex::Complex64;

use crate::collision::{apply_collision, mixture_collision_dense};
use crate::error::{Error, Result};
use crate::functionals::{kernel_hs_norm, mixture_quasinorm, seq_quasinorm, Diagnostic, NormSequence};
use crate::model::{Power, Sign};
use crate::nls::{integrate, Sampling, SplitStepper, StepController};
use crate::spectral::Field;
use crate::state::{materialize, symmetry_report, ClosurePolicy, DenseKernel, HierarchyTruncation, ProductMixture};
use crate::trajectory::{Snapshot, TrajectoryRecord};

/// Largest symmetry defect tolerated by [`evolve_truncated`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Evolves every component of a mixture by NLS on a shared time grid.
///
/// The weights stay fixed, so `Gamma(t)` solves the hierarchy up to the NLS
/// solver error. The run halts as soon as any component crosses the halt
/// norm. Each sample records the requested diagnostics.
pub fn evolve_mixture(
    mix: &ProductMixture,
    mu: Sign,
    power: Power,
    ctrl: &StepController,
    t_end: f64,
    sampling: &Sampling,
    diagnostics: &[Diagnostic],
) -> Result<TrajectoryRecord> {
    let mut record = TrajectoryRecord::new(mu, power);
    let mut fields = mix.fields().to_vec();
    let halted = integrate(&mut fields, mu, power, ctrl, t_end, sampling, |t, fs| {
        let current = mix.with_fields(fs.to_vec())?;
        let values = diagnostics
            .iter()
            .map(|d| Ok((d.to_string(), d.evaluate(&current, mu, power)?)))
            .collect::<Result<Vec<_>>>()?;
        let state = sampling.keep_states.then(|| Snapshot::Mixture(current));
        record.push(t, state, &values)
    })?;
    record.halted = halted;
    Ok(record)
}

/// `C^(k) gamma^(k+offset)`, from the dense upper level when it is part of
/// the truncation and from the closure otherwise.
fn collision_source(
    upper: Option<&DenseKernel>,
    k: usize,
    reference: Option<&ProductMixture>,
    power: Power,
) -> Result<Option<DenseKernel>> {
    match (upper, reference) {
        (Some(g), _) => Ok(Some(apply_collision(g, power)?.kernel)),
        (None, Some(mix)) => Ok(Some(mixture_collision_dense(mix, k, power)?)),
        (None, None) => Ok(None),
    }
}

fn check_symmetry(levels: &[DenseKernel], t: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in levels {
        let rep = symmetry_report(g);
        worst = worst.max(rep.max());
    }
    if worst > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryDefect { defect: worst, tolerance: SYMMETRY_TOLERANCE, time: t });
    }
    Ok(worst)
}

/// Integrates the truncated hierarchy `gamma^(1..=K)` with fixed step `dt`.
///
/// Each step applies, per level in descending order, a half step of the
/// explicit collision source, the exact free flow on both argument blocks,
/// and a half step of the source evaluated at the new time (using the
/// already-advanced upper level or the closure). A mixture closure is
/// evolved alongside with the same step. Negative `dt` runs backwards;
/// the recorded times are then elapsed durations `|t|`.
pub fn evolve_truncated(
    init: &HierarchyTruncation,
    mu: Sign,
    power: Power,
    dt: f64,
    t_end: f64,
    sample_every: f64,
) -> Result<TrajectoryRecord> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be nonzero")));
    }
    if !(t_end > 0.0 && sample_every > 0.0) {
        return Err(Error::InvalidArgument("t_end and the sample spacing must be positive".into()));
    }
    let depth = init.depth();
    let coupling = mu.value();
    let mut reference = match init.closure() {
        ClosurePolicy::Zero => None,
        ClosurePolicy::MixtureReference(m) => Some(m.clone()),
    };
    let mut levels: Vec<DenseKernel> = init.levels().to_vec();
    let mut record = TrajectoryRecord::new(mu, power);
    let push = |record: &mut TrajectoryRecord, t: f64, levels: &[DenseKernel], defect: f64| {
        let values = [
            ("trace_k1".to_string(), levels[0].trace().re),
            ("symmetry_defect".to_string(), defect),
        ];
        record.push(t, Some(Snapshot::Levels(levels.to_vec())), &values)
    };
    let defect = check_symmetry(&levels, 0.0)?;
    push(&mut record, 0.0, &levels, defect)?;

    let span = dt.abs();
    let steps = (t_end / span).round().max(1.0) as u64;
    let per_sample = ((sample_every / span).round() as u64).max(1);
    let grid = *init.grid();
    let stepper = SplitStepper::new(&grid, mu, power, dt);
    for n in 1..=steps {
        let next_ref = match &reference {
            Some(m) => {
                let mut fields = m.fields().to_vec();
                fields.iter_mut().for_each(|f| stepper.step(f));
                Some(m.with_fields(fields)?)
            }
            None => None,
        };
        let half = Complex64::new(0.0, -0.5 * coupling * dt);
        let mut new: Vec<Option<DenseKernel>> = vec![None; depth];
        for k in (1..=depth).rev() {
            let upper = k + power.order_offset();
            let g = &levels[k - 1];
            let mut stage = match collision_source(levels.get(upper - 1), k, reference.as_ref(), power)? {
                Some(c) => g.add_scaled(&c, half)?,
                None => g.clone(),
            };
            stage = stage.free_flow(dt);
            // upper levels were advanced earlier in this sweep
            let upper_new = if upper <= depth { new[upper - 1].as_ref() } else { None };
            if let Some(c) = collision_source(upper_new, k, next_ref.as_ref(), power)? {
                stage = stage.add_scaled(&c, half)?;
            }
            new[k - 1] = Some(stage);
        }
        levels = new.into_iter().map(|g| g.expect("level advanced")).collect();
        reference = next_ref;
        let t = n as f64 * span;
        if levels.iter().any(|g| !g.is_finite()) {
            return Err(Error::NanState { time: t });
        }
        if n % per_sample == 0 || n == steps {
            let defect = check_symmetry(&levels, t)?;
            push(&mut record, t, &levels, defect)?;
        }
    }
    Ok(record)
}

/// Level `k` of a snapshot and the collision term acting on it.
fn level_and_source(state: &Snapshot, k: usize, power: Power) -> Result<(DenseKernel, DenseKernel)> {
    match state {
        Snapshot::Levels(levels) => {
            let upper = k + power.order_offset();
            let g = levels.get(k - 1).ok_or(Error::LevelUnavailable(k))?;
            let u = levels.get(upper - 1).ok_or(Error::LevelUnavailable(upper))?;
            Ok((g.clone(), apply_collision(u, power)?.kernel))
        }
        other => {
            let mix = other.as_mixture().expect("mixture-like snapshot");
            Ok((materialize(&mix, k)?, mixture_collision_dense(&mix, k, power)?))
        }
    }
}

/// Relative L2 deviation of the final state from the Duhamel formula
/// `e^{itLap} gamma_0 - i mu integral e^{i(t-s)Lap} C gamma_s ds`, with the
/// integral evaluated by the trapezoid rule on the recorded samples.
pub fn duhamel_residual(traj: &TrajectoryRecord, k: usize) -> Result<f64> {
    duhamel_residual_with_coupling(traj, k, traj.mu.value())
}

/// [`duhamel_residual`] with an explicit coupling (zero disables the
/// interaction term).
pub fn duhamel_residual_with_coupling(traj: &TrajectoryRecord, k: usize, coupling: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::LevelUnavailable(0));
    }
    let n = traj.states.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { got: n, need: 3 });
    }
    if n != traj.times.len() {
        return Err(Error::InvalidArgument("trajectory does not store every sampled state".into()));
    }
    let t_final = traj.times[n - 1];
    let t0 = traj.times[0];
    let mut integral: Option<DenseKernel> = None;
    let mut initial = None;
    let mut last = None;
    for i in 0..n {
        let (g, c) = level_and_source(&traj.states[i], k, traj.power)?;
        let w = match i {
            0 => 0.5 * (traj.times[1] - traj.times[0]),
            _ if i == n - 1 => 0.5 * (traj.times[i] - traj.times[i - 1]),
            _ => 0.5 * (traj.times[i + 1] - traj.times[i - 1]),
        };
        let propagated = c.free_flow(t_final - traj.times[i]);
        integral = Some(match integral {
            None => propagated.scaled(w),
            Some(acc) => acc.add_scaled(&propagated, Complex64::new(w, 0.0))?,
        });
        if i == 0 {
            initial = Some(g.clone());
        }
        if i == n - 1 {
            last = Some(g);
        }
    }
    let initial = initial.expect("first sample").free_flow(t_final - t0);
    let last = last.expect("last sample");
    let formula = initial.add_scaled(&integral.expect("integral"), Complex64::new(0.0, -coupling))?;
    let scale = last.l2_norm();
    let deviation = formula.add_scaled(&last, Complex64::new(-1.0, 0.0))?.l2_norm();
    Ok(if scale > 0.0 { deviation / scale } else { deviation })
}

fn snapshot_norm(state: &Snapshot, s: f64) -> Result<f64> {
    match state {
        Snapshot::Levels(levels) => {
            let head = levels.iter().map(|g| kernel_hs_norm(g, s)).collect();
            seq_quasinorm(&NormSequence::with_fitted_tail(head)?)
        }
        other => mixture_quasinorm(&other.as_mixture().expect("mixture-like snapshot"), s),
    }
}

fn lerp_snapshot(a: &Snapshot, b: &Snapshot, theta: f64) -> Result<Snapshot> {
    match (a, b) {
        (Snapshot::Levels(x), Snapshot::Levels(y)) => Ok(Snapshot::Levels(
            x.iter()
                .zip(y)
                .map(|(g, h)| g.scaled(1.0 - theta).add_scaled(h, Complex64::new(theta, 0.0)))
                .collect::<Result<Vec<_>>>()?,
        )),
        _ => {
            let (x, y) = (a.as_mixture(), b.as_mixture());
            match (x, y) {
                (Some(x), Some(y)) => {
                    let fields = x
                        .fields()
                        .iter()
                        .zip(y.fields())
                        .map(|(f, g)| Field::lerp(f, g, theta))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Snapshot::Mixture(x.with_fields(fields)?))
                }
                _ => Err(Error::InvalidArgument("cannot interpolate between different state kinds".into())),
            }
        }
    }
}

/// Locates `t` in the sample grid: index `i` and weight `theta` with
/// `t = (1 - theta) t_i + theta t_{i+1}`.
fn bracket(times: &[f64], t: f64) -> (usize, f64) {
    let n = times.len();
    let i = match times.partition_point(|&s| s <= t) {
        0 => 0,
        p => (p - 1).min(n - 2),
    };
    let theta = ((t - times[i]) / (times[i + 1] - times[i])).clamp(0.0, 1.0);
    (i, theta)
}

/// Max over sampled shifts `tau` of the difference between the norm of the
/// re-indexed trajectory `R_{t0} Gamma(tau) = Gamma(t0 + tau)` (a linearly
/// interpolated state) and the norm series at `t0 + tau` (linearly
/// interpolated norms). The shifts are multiples of the mean sample spacing.
pub fn time_shift_check(traj: &TrajectoryRecord, t0: f64, s: f64) -> Result<f64> {
    let n = traj.times.len();
    if n < 2 || traj.states.len() != n {
        return Err(Error::InsufficientSamples { got: traj.states.len(), need: 2 });
    }
    let (first, last) = (traj.times[0], traj.times[n - 1]);
    if !(t0 >= first && t0 <= last) {
        return Err(Error::InvalidArgument(format!("shift origin {t0} lies outside [{first}, {last}]")));
    }
    let norms = traj.states.iter().map(|st| snapshot_norm(st, s)).collect::<Result<Vec<f64>>>()?;
    let spacing = (last - first) / (n - 1) as f64;
    let mut worst: f64 = 0.0;
    let mut j = 0u64;
    loop {
        let t = t0 + j as f64 * spacing;
        if t > last * (1.0 + 1e-12) + 1e-300 {
            break;
        }
        let t = t.min(last);
        let (i, theta) = bracket(&traj.times, t);
        let shifted = if theta == 0.0 {
            norms[i]
        } else if theta == 1.0 {
            norms[i + 1]
        } else {
            snapshot_norm(&lerp_snapshot(&traj.states[i], &traj.states[i + 1], theta)?, s)?
        };
        let direct = (1.0 - theta) * norms[i] + theta * norms[i + 1];
        worst = worst.max((shifted - direct).abs());
        j += 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_reference, Grid, Reference};

    fn soliton_mix() -> ProductMixture {
        let g = Grid::new(1, 32, 8.0).unwrap();
        ProductMixture::single(make_reference(&Reference::Soliton { scale: 1.0 }, &g).unwrap())
    }

    #[test]
    fn zero_truncation_stays_zero() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let levels = vec![DenseKernel::zeros(1, g).unwrap(), DenseKernel::zeros(2, g).unwrap()];
        let t = HierarchyTruncation::new(levels, ClosurePolicy::Zero).unwrap();
        let rec = evolve_truncated(&t, Sign::Focusing, Power::Cubic, 0.01, 0.05, 0.01).unwrap();
        for s in &rec.states {
            let Snapshot::Levels(ls) = s else { panic!() };
            assert!(ls.iter().all(|g| g.max_abs() == 0.0));
        }
    }

    #[test]
    fn diagonal_of_gamma1_is_density() {
        let mix = soliton_mix();
        let sampling = Sampling::every(0.1);
        let rec = evolve_mixture(&mix, Sign::Focusing, Power::Cubic, &StepController::fixed(1e-3), 0.2, &sampling, &[Diagnostic::Mass]).unwrap();
        let Snapshot::Mixture(m) = rec.states.last().unwrap() else { panic!() };
        let g1 = materialize(m, 1).unwrap();
        for (d, v) in g1.diagonal().iter().zip(m.fields()[0].values()) {
            assert!((d.re - v.norm_sqr()).abs() < 1e-14 && d.im.abs() < 1e-14);
        }
        let mass = rec.series("mass").unwrap();
        assert!((mass[0] - mass[mass.len() - 1]).abs() < 1e-12);
    }

    #[test]
    fn shift_on_grid_is_zero() {
        let mix = soliton_mix();
        let rec = evolve_mixture(&mix, Sign::Focusing, Power::Cubic, &StepController::fixed(1e-3), 0.2, &Sampling::every(0.05), &[]).unwrap();
        assert_eq!(time_shift_check(&rec, 0.1, 1.0).unwrap(), 0.0);
        assert!(time_shift_check(&rec, 0.3, 1.0).is_err());
    }

    #[test]
    fn duhamel_needs_three_samples() {
        let mix = soliton_mix();
        let rec = evolve_mixture(&mix, Sign::Focusing, Power::Cubic, &StepController::fixed(1e-3), 0.1, &Sampling::every(0.1), &[]).unwrap();
        assert!(matches!(duhamel_residual(&rec, 1), Err(Error::InsufficientSamples { .. })));
    }
}
