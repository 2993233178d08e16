//! Strang split-step integration of `i phi_t = -Lap phi + mu |phi|^(2 sigma) phi`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::nls_energy;
use crate::model::{Power, Sign};
use crate::spectral::{Field, Grid, Multiplier};
use crate::trajectory::{Halt, Snapshot, TrajectoryRecord};

/// Relative one-step growth of the `H^1` norm that triggers a step shrink.
pub const GROWTH_LIMIT: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsProblem {
    pub mu: Sign,
    pub power: Power,
    pub initial: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepController {
    pub dt: f64,
    pub dt_min: f64,
    /// Halt once any component's `H^1` norm exceeds this.
    pub halt_norm: f64,
    /// Factor applied to `dt` when the norm grows too fast.
    pub safety: f64,
    /// Optional cap on the nonlinear phase `|mu| |phi|^(2 sigma) dt` of one
    /// step; `dt` shrinks by `safety` until it holds. Collapse needs it
    /// because the norm-growth rule alone lets the phase per step grow
    /// without bound.
    #[serde(default)]
    pub max_phase: Option<f64>,
}

impl StepController {
    /// Fixed step with no halting, for smooth runs.
    pub fn fixed(dt: f64) -> Self {
        Self { dt, dt_min: dt * 1e-6, halt_norm: f64::INFINITY, safety: 0.5, max_phase: None }
    }

    /// Adaptive stepping for runs that end in collapse.
    pub fn adaptive(dt: f64, halt_norm: f64, max_phase: f64) -> Self {
        Self { dt, dt_min: dt * 1e-9, halt_norm, safety: 0.5, max_phase: Some(max_phase) }
    }

    pub fn validate(&self, initial_norm: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt) {
            return Err(Error::InvalidArgument(format!("dt_min = {} must lie in (0, dt)", self.dt_min)));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::InvalidArgument(format!("safety = {} must lie in (0, 1)", self.safety)));
        }
        if let Some(p) = self.max_phase {
            if !(p > 0.0) {
                return Err(Error::InvalidArgument(format!("max_phase = {p} must be positive")));
            }
        }
        if !(self.halt_norm > initial_norm) {
            return Err(Error::InvalidArgument(format!(
                "halt_norm = {} must exceed the initial H1 norm {initial_norm}",
                self.halt_norm
            )));
        }
        Ok(())
    }
}

/// When samples are taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Regular sample spacing; samples land exactly on its multiples.
    pub every: f64,
    /// Extra sample whenever the norm grew by this fraction since the last one.
    pub growth: Option<f64>,
    pub keep_states: bool,
}

impl Sampling {
    pub fn every(every: f64) -> Self {
        Self { every, growth: None, keep_states: true }
    }
}

/// One Strang step of fixed size: half nonlinear phase, full free flow,
/// half nonlinear phase. Negative `dt` runs backwards and undoes a forward
/// step exactly up to roundoff.
#[derive(Debug, Clone)]
pub struct SplitStepper {
    coupling: f64,
    sigma: i32,
    dt: f64,
    linear: Multiplier,
}

impl SplitStepper {
    pub fn new(grid: &Grid, mu: Sign, power: Power, dt: f64) -> Self {
        Self { coupling: mu.value(), sigma: power.sigma(), dt, linear: Multiplier::free_propagator(grid, dt) }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn phase(&self, v: &mut [Complex64]) {
        let c = -self.coupling * 0.5 * self.dt;
        let sigma = self.sigma;
        v.iter_mut().for_each(|z| *z *= Complex64::from_polar(1.0, c * z.norm_sqr().powi(sigma)));
    }

    pub fn step(&self, f: &mut Field) {
        let v = f.values_mut();
        self.phase(v);
        self.linear.apply_in_place(v);
        self.phase(v);
    }
}

/// A single Strang step of size `dt` (possibly negative).
pub fn nls_step(f: &Field, mu: Sign, power: Power, dt: f64) -> Field {
    let mut out = f.clone();
    SplitStepper::new(f.grid(), mu, power, dt).step(&mut out);
    out
}

fn max_norm(norms: &[f64]) -> f64 {
    norms.iter().copied().fold(0.0, f64::max)
}

/// Advances all `fields` in lockstep, calling `on_sample` at `t = 0`, at
/// every multiple of `sampling.every`, on growth and at the halt.
pub(crate) fn integrate(
    fields: &mut Vec<Field>,
    mu: Sign,
    power: Power,
    ctrl: &StepController,
    t_end: f64,
    sampling: &Sampling,
    mut on_sample: impl FnMut(f64, &[Field]) -> Result<()>,
) -> Result<Option<Halt>> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must be positive")));
    }
    if !(sampling.every > 0.0) {
        return Err(Error::InvalidArgument(format!("sample spacing {} must be positive", sampling.every)));
    }
    if fields.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite { what: "field value", location: "initial state".into() });
    }
    let grid = *fields.first().ok_or_else(|| Error::InvalidArgument("nothing to evolve".into()))?.grid();
    let mut norms: Vec<f64> = fields.par_iter().map(Field::h1_norm).collect();
    ctrl.validate(max_norm(&norms))?;

    let eps = 1e-12 * t_end.max(sampling.every);
    let mut t = 0.0;
    let mut dt = ctrl.dt;
    let mut sample_index = 1u64;
    let mut last_sampled_norm = max_norm(&norms);
    let mut last_sample_t = 0.0;
    on_sample(0.0, fields)?;
    let mut stepper = SplitStepper::new(&grid, mu, power, dt);

    let sigma = power.sigma();
    while t < t_end - eps {
        if let Some(limit) = ctrl.max_phase {
            let peak = fields
                .par_iter()
                .map(|f| f.values().iter().map(|v| v.norm_sqr().powi(sigma)).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max);
            while dt * peak > limit {
                dt *= ctrl.safety;
                if dt < ctrl.dt_min {
                    return Err(Error::StepCollapse { time: t, dt, dt_min: ctrl.dt_min });
                }
            }
        }
        let next_sample = (sample_index as f64 * sampling.every).min(t_end);
        let step_dt = dt.min(next_sample - t);
        if (stepper.dt() - step_dt).abs() > 1e-15 * dt {
            stepper = SplitStepper::new(&grid, mu, power, step_dt);
        }
        let mut trial = fields.clone();
        trial.par_iter_mut().for_each(|f| stepper.step(f));
        if trial.iter().any(|f| !f.is_finite()) {
            return Err(Error::NanState { time: t + step_dt });
        }
        let new_norms: Vec<f64> = trial.par_iter().map(Field::h1_norm).collect();
        let too_fast = new_norms.iter().zip(&norms).any(|(n, o)| *n > (1.0 + GROWTH_LIMIT) * o);
        if too_fast {
            dt *= ctrl.safety;
            if dt < ctrl.dt_min {
                return Err(Error::StepCollapse { time: t, dt, dt_min: ctrl.dt_min });
            }
            continue;
        }
        *fields = trial;
        norms = new_norms;
        t += step_dt;
        let current = max_norm(&norms);
        let mut sampled = false;
        if t >= next_sample - eps {
            if next_sample >= t_end - eps {
                t = t_end;
            } else {
                t = next_sample;
            }
            sample_index += 1;
            on_sample(t, fields)?;
            sampled = true;
        } else if let Some(g) = sampling.growth {
            if current > last_sampled_norm * (1.0 + g) && t > last_sample_t {
                on_sample(t, fields)?;
                sampled = true;
            }
        }
        if sampled {
            last_sampled_norm = current;
            last_sample_t = t;
        }
        if current > ctrl.halt_norm {
            if !sampled {
                on_sample(t, fields)?;
            }
            return Ok(Some(Halt { time: t, reason: "H1 norm exceeded halt threshold".into(), norm: current }));
        }
    }
    Ok(None)
}

/// Evolves one field, recording mass, energy, `H^1` norm and the virial
/// moments at every sample.
pub fn nls_evolve(prob: &NlsProblem, ctrl: &StepController, t_end: f64, sample_every: f64) -> Result<TrajectoryRecord> {
    nls_evolve_with(prob, ctrl, t_end, &Sampling::every(sample_every))
}

pub fn nls_evolve_with(prob: &NlsProblem, ctrl: &StepController, t_end: f64, sampling: &Sampling) -> Result<TrajectoryRecord> {
    let mut record = TrajectoryRecord::new(prob.mu, prob.power);
    let mut fields = vec![prob.initial.clone()];
    let halted = integrate(&mut fields, prob.mu, prob.power, ctrl, t_end, sampling, |t, fs| {
        let f = &fs[0];
        let values = [
            ("mass".to_string(), f.mass()),
            ("energy".to_string(), nls_energy(f, prob.mu, prob.power)?),
            ("h1_norm".to_string(), f.h1_norm()),
            ("virial".to_string(), f.second_moment()),
            ("virial_dt".to_string(), f.current_moment()),
        ];
        let state = sampling.keep_states.then(|| Snapshot::Field(f.clone()));
        record.push(t, state, &values)
    })?;
    record.halted = halted;
    Ok(record)
}
