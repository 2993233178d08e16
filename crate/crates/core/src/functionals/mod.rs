//! Norms, quasi-norms, energies and virial functionals.

mod diagnostics;
mod energy;
mod norms;

pub use diagnostics::{mixture_quasinorm, Diagnostic, QUASINORM_DEPTH};
pub use energy::{
    energy, kinetic_forms, kinetic_trace, nls_energy, virial, virial_dt, virial_rhs, EnergyReport, KineticForm, KineticForms, KINETIC_FORM_TOLERANCE,
};
pub use norms::{
    kernel_hs_norm, mixture_hs_norm, sandwiched_matrix, seq_quasinorm, trace_norm_k, xi_norm, Level, NormSequence, Tail,
    HERMITIAN_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::trajectory::{Snapshot, TrajectoryRecord};

/// Trapezoid integrals `integral a_k(t) dt` of per-level series sampled at
/// `times`; `levels[k-1][i]` is `a_k(times[i])`.
pub fn level_integrals(times: &[f64], levels: &[Vec<f64>]) -> Result<Vec<f64>> {
    if times.len() < 2 {
        return Err(Error::InsufficientSamples { got: times.len(), need: 2 });
    }
    levels
        .iter()
        .map(|series| {
            if series.len() != times.len() {
                return Err(Error::InvalidArgument("level series and time grid differ in length".into()));
            }
            Ok(times
                .windows(2)
                .zip(series.windows(2))
                .map(|(t, a)| 0.5 * (t[1] - t[0]) * (a[0] + a[1]))
                .sum())
        })
        .collect()
}

/// `L^1_t ℋ^s` quasi-norm from sampled level norms, with the tail fitted
/// from the last two integrated levels.
pub fn l1t_quasinorm_from_levels(times: &[f64], levels: &[Vec<f64>]) -> Result<f64> {
    let head = level_integrals(times, levels)?;
    seq_quasinorm(&NormSequence::with_fitted_tail(head)?)
}

/// `L^1_t ℋ^s` quasi-norm of a recorded trajectory. Dense snapshots supply
/// their own levels; mixture snapshots supply the first [`QUASINORM_DEPTH`].
pub fn l1t_seq_quasinorm(traj: &TrajectoryRecord, s: f64) -> Result<f64> {
    if traj.states.len() != traj.times.len() {
        return Err(Error::InvalidArgument("trajectory did not keep its states".into()));
    }
    let per_sample: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|snap| match snap {
            Snapshot::Levels(levels) => levels.iter().map(|g| kernel_hs_norm(g, s)).collect(),
            _ => {
                let mix = snap.as_mixture().expect("field and mixture snapshots convert");
                (1..=QUASINORM_DEPTH).map(|k| mixture_hs_norm(&mix, k, s)).collect()
            }
        })
        .collect();
    let depth = per_sample.iter().map(Vec::len).min().unwrap_or(0);
    if depth == 0 {
        return Err(Error::InvalidArgument("trajectory snapshots carry no levels".into()));
    }
    let levels: Vec<Vec<f64>> = (0..depth).map(|k| per_sample.iter().map(|a| a[k]).collect()).collect();
    let head = level_integrals(&traj.times, &levels)?;
    if depth == 1 {
        return seq_quasinorm(&NormSequence::new(head, Tail::Zero)?);
    }
    seq_quasinorm(&NormSequence::with_fitted_tail(head)?)
}
