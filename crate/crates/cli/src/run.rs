//! Scenario execution.

use gplab_core::blowup::{detect_blowup, fit_rate, glassey_bound, negative_energy_state, Detection, RateRegime};
use gplab_core::checks::Measurement;
use gplab_core::dynamics::{duhamel_residual, evolve_mixture, evolve_truncated};
use gplab_core::functionals::{
    energy, kernel_hs_norm, kinetic_forms, mixture_hs_norm, mixture_quasinorm, trace_norm_k, virial, virial_dt,
    Diagnostic, Level,
};
use gplab_core::spectral::make_reference;
use gplab_core::{
    samples, ClosurePolicy, HierarchyTruncation, ProductMixture, Reference, Sampling, Snapshot, StepController,
    TrajectoryRecord,
};
use serde_json::{json, Value};

use crate::config::{Closure, ConfigError, ExperimentConfig, InitialState, Scenario};

/// Why a run did not complete.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// A numerical invariant failed while the run was in progress.
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<gplab_core::Error> for RunError {
    fn from(e: gplab_core::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Runtime(e) => write!(f, "runtime error: {e}"),
        }
    }
}

/// A CSV table: a header row and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub report: Value,
    pub checks: Vec<Measurement>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Measurement::passed)
    }
}

/// The configured initial state as a mixture.
pub fn initial_mixture(cfg: &ExperimentConfig) -> Result<ProductMixture, ConfigError> {
    let grid = cfg.grid()?;
    let fail = |e: gplab_core::Error| ConfigError(format!("initial: {e}"));
    let n = grid.dim();
    match &cfg.initial {
        InitialState::Gaussians { components } => {
            let parts = components
                .iter()
                .map(|c| {
                    let center = if c.center.is_empty() { vec![0.0; n] } else { c.center.clone() };
                    let r = Reference::Gaussian { center, width: c.width, amplitude: c.amplitude, chirp: c.chirp };
                    Ok((c.weight, make_reference(&r, &grid)?))
                })
                .collect::<gplab_core::Result<Vec<_>>>()
                .map_err(fail)?;
            ProductMixture::new(parts).map_err(fail)
        }
        InitialState::Soliton { scale } => {
            Ok(ProductMixture::single(make_reference(&Reference::Soliton { scale: *scale }, &grid).map_err(fail)?))
        }
        InitialState::PlaneWave { momentum, amplitude } => {
            let r = Reference::PlaneWave { momentum: momentum.clone(), amplitude: *amplitude };
            Ok(ProductMixture::single(make_reference(&r, &grid).map_err(fail)?))
        }
        InitialState::RandomSmooth { count } => {
            samples::smooth_mixture(&grid, *count, &mut samples::rng(cfg.seed)).map_err(fail)
        }
        InitialState::NegativeEnergy { width } => {
            let base = make_reference(&Reference::gaussian(n, *width, 1.0), &grid).map_err(fail)?;
            Ok(negative_energy_state(&base, 1, cfg.equation).map_err(fail)?.1)
        }
    }
}

fn h1_max(mix: &ProductMixture) -> f64 {
    mix.fields().iter().map(|f| f.h1_norm()).fold(0.0, f64::max)
}

pub fn controller(cfg: &ExperimentConfig, mix: &ProductMixture) -> StepController {
    let it = &cfg.integrator;
    let halt = it.halt_norm.or(it.halt_factor.map(|f| f * h1_max(mix)));
    let mut ctrl = match halt {
        Some(h) => StepController::adaptive(it.dt, h, it.max_phase.unwrap_or(f64::INFINITY)),
        None => StepController::fixed(it.dt),
    };
    ctrl.max_phase = it.max_phase;
    ctrl.safety = it.safety;
    if let Some(m) = it.dt_min {
        ctrl.dt_min = m;
    }
    ctrl
}

fn relative_drift(series: &[f64]) -> f64 {
    let first = series[0];
    let worst = series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
    if first == 0.0 {
        worst
    } else {
        worst / first.abs()
    }
}

fn trajectory_table(traj: &TrajectoryRecord, names: &[String]) -> Result<Table, RunError> {
    let columns = names.iter().map(|n| traj.series(n)).collect::<gplab_core::Result<Vec<_>>>()?;
    let rows = (0..traj.len()).map(|i| std::iter::once(traj.times[i]).chain(columns.iter().map(|c| c[i])).collect()).collect();
    let header = std::iter::once("t".to_string()).chain(names.iter().cloned()).collect();
    Ok(Table { file: "trajectory.csv".into(), header, rows })
}

fn drift_checks(cfg: &ExperimentConfig, traj: &TrajectoryRecord) -> Result<(Vec<Measurement>, Value), RunError> {
    let mut checks = Vec::new();
    let mut drifts = serde_json::Map::new();
    for d in cfg.parsed_diagnostics()? {
        let name = d.to_string();
        let drift = relative_drift(traj.series(&name)?);
        match d {
            Diagnostic::Mass => {
                if let Some(limit) = cfg.checks.max_mass_drift {
                    checks.push(Measurement::at_most("mass relative drift", drift, limit));
                }
            }
            Diagnostic::Energy(_) => {
                if let Some(limit) = cfg.checks.max_energy_drift {
                    checks.push(Measurement::at_most(format!("{name} relative drift"), drift, limit));
                }
            }
            _ => {}
        }
        drifts.insert(name, json!(drift));
    }
    Ok((checks, Value::Object(drifts)))
}

fn header(cfg: &ExperimentConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("scenario".into(), json!(cfg.scenario.name()));
    m.insert("equation".into(), json!(cfg.equation));
    m.insert("mu".into(), json!(cfg.mu));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("grid".into(), json!(cfg.grid));
    m.insert("initial_kind".into(), json!(cfg.initial.kind()));
    m
}

fn finish(mut report: serde_json::Map<String, Value>, tables: Vec<Table>, checks: Vec<Measurement>) -> RunOutput {
    let rows: Vec<Value> =
        checks.iter().map(|c| json!({ "label": c.label, "value": c.value, "bound": c.bound, "limit": c.limit, "passed": c.passed() })).collect();
    report.insert("checks".into(), Value::Array(rows));
    report.insert("passed".into(), json!(checks.iter().all(Measurement::passed)));
    RunOutput { tables, report: Value::Object(report), checks }
}

fn initial_energies(cfg: &ExperimentConfig, mix: &ProductMixture) -> Result<Value, RunError> {
    let mut ks: Vec<usize> = cfg
        .parsed_diagnostics()?
        .iter()
        .filter_map(|d| if let Diagnostic::Energy(k) = d { Some(*k) } else { None })
        .collect();
    if ks.is_empty() {
        ks.push(1);
    }
    let reports = ks.iter().map(|&k| energy(mix, k, cfg.mu, cfg.equation)).collect::<gplab_core::Result<Vec<_>>>()?;
    Ok(json!(reports))
}

fn run_mixture(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mix = initial_mixture(cfg)?;
    let diags = cfg.parsed_diagnostics()?;
    let ctrl = controller(cfg, &mix);
    let keep_states = cfg.checks.max_duhamel_residual.is_some();
    let sampling = Sampling { every: cfg.integrator.sample_every, growth: cfg.integrator.growth_sample, keep_states };
    let traj = evolve_mixture(&mix, cfg.mu, cfg.equation, &ctrl, cfg.integrator.t_end, &sampling, &diags)?;
    traj.validate()?;
    let (mut checks, drifts) = drift_checks(cfg, &traj)?;
    let mut report = header(cfg);
    if let Some(limit) = cfg.checks.max_duhamel_residual {
        let r = duhamel_residual(&traj, 1)?;
        checks.push(Measurement::at_most("level-1 Duhamel residual", r, limit));
        report.insert("duhamel_residual_k1".into(), json!(r));
    }
    report.insert("samples".into(), json!(traj.len()));
    report.insert("halted".into(), json!(traj.halted));
    report.insert("initial_energy".into(), initial_energies(cfg, &mix)?);
    report.insert("relative_drift".into(), drifts);
    Ok(finish(report, vec![trajectory_table(&traj, &cfg.diagnostics)?], checks))
}

fn run_truncated(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mix = initial_mixture(cfg)?;
    let depth = cfg.truncation.depth;
    let exact = HierarchyTruncation::from_mixture(&mix, depth)?;
    let init = match cfg.truncation.closure {
        Closure::Mixture => exact,
        Closure::Zero => HierarchyTruncation::new(exact.levels().to_vec(), ClosurePolicy::Zero)?,
    };
    let it = &cfg.integrator;
    let traj = evolve_truncated(&init, cfg.mu, cfg.equation, it.dt, it.t_end, it.sample_every)?;
    let diags = cfg.parsed_diagnostics()?;
    let mut rows = Vec::with_capacity(traj.len());
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let Snapshot::Levels(levels) = state else { unreachable!("truncated runs record dense levels") };
        let mut row = vec![*t];
        for d in &diags {
            let g = &levels[d.order().unwrap_or(1) - 1];
            row.push(match *d {
                Diagnostic::Mass => g.trace().re,
                Diagnostic::Kinetic(_) => kinetic_forms(g).laplacian,
                Diagnostic::HsNorm { s, .. } => kernel_hs_norm(g, s),
                Diagnostic::TraceNorm(_) => trace_norm_k(g)?,
                _ => unreachable!("validated as a dense diagnostic"),
            });
        }
        rows.push(row);
    }
    let header_row = std::iter::once("t".to_string()).chain(cfg.diagnostics.iter().cloned()).collect();
    let table = Table { file: "trajectory.csv".into(), header: header_row, rows };

    let mut checks = Vec::new();
    let defect = traj.series("symmetry_defect")?.iter().copied().fold(0.0, f64::max);
    if let Some(limit) = cfg.checks.max_symmetry_defect {
        checks.push(Measurement::at_most("symmetry defect", defect, limit));
    }
    let mass_drift = relative_drift(traj.series("trace_k1")?);
    if let Some(limit) = cfg.checks.max_mass_drift {
        checks.push(Measurement::at_most("mass relative drift", mass_drift, limit));
    }
    let mut report = header(cfg);
    report.insert("depth".into(), json!(depth));
    report.insert("closure".into(), json!(cfg.truncation.closure));
    report.insert("samples".into(), json!(traj.len()));
    report.insert("max_symmetry_defect".into(), json!(defect));
    report.insert("mass_relative_drift".into(), json!(mass_drift));
    if depth > cfg.equation.order_offset() {
        let r = duhamel_residual(&traj, 1)?;
        report.insert("duhamel_residual_k1".into(), json!(r));
        if let Some(limit) = cfg.checks.max_duhamel_residual {
            checks.push(Measurement::at_most("level-1 Duhamel residual", r, limit));
        }
    } else if cfg.checks.max_duhamel_residual.is_some() {
        return Err(ConfigError(format!(
            "checks.max_duhamel_residual: level 1 needs truncation depth above {}",
            cfg.equation.order_offset()
        ))
        .into());
    }
    Ok(finish(report, vec![table], checks))
}

fn run_blowup(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mix = initial_mixture(cfg)?;
    let grid = cfg.grid()?;
    let s = cfg.blowup.s;
    let regime = match &cfg.blowup.regime {
        Some(name) => RateRegime::parse(name).map_err(|e| ConfigError(format!("blowup.regime: {e}")))?,
        None => RateRegime::applicable(cfg.equation, s, grid.dim()).expect("validated"),
    };
    let e0 = energy(&mix, 1, cfg.mu, cfg.equation)?;
    let bound = glassey_bound(e0.total, virial(&mix, 1)?, virial_dt(&mix, 1)?)?;
    let mut diags = cfg.parsed_diagnostics()?;
    let norm = Diagnostic::QuasiNorm(s);
    if !diags.contains(&norm) {
        diags.push(norm);
    }
    let ctrl = controller(cfg, &mix);
    let sampling =
        Sampling { every: cfg.integrator.sample_every, growth: cfg.integrator.growth_sample, keep_states: false };
    let traj = evolve_mixture(&mix, cfg.mu, cfg.equation, &ctrl, cfg.integrator.t_end, &sampling, &diags)?;
    traj.validate()?;
    let detection = detect_blowup(&traj, s)?;
    let mut report = header(cfg);
    report.insert("samples".into(), json!(traj.len()));
    report.insert("halted".into(), json!(traj.halted));
    report.insert("initial_energy".into(), json!(e0));
    report.insert("glassey_bound".into(), json!(bound));
    report.insert("detection".into(), json!(detection));
    let mut checks = Vec::new();
    match detection {
        Detection::Blowup { t_star, .. } => {
            let mut rep = fit_rate(&traj, t_star, s, regime)?;
            rep.t_bound = bound.time();
            if cfg.checks.require_verdict {
                checks.push(Measurement::at_least(
                    format!("{} fitted exponent", regime.name()),
                    rep.fitted_exponent,
                    rep.bound_exponent - gplab_core::blowup::RATE_TOLERANCE,
                ));
                if let Some(tb) = rep.t_bound {
                    checks.push(Measurement::at_most("t_star / glassey bound", t_star / tb, 1.05));
                }
            }
            report.insert("blowup".into(), json!(rep));
        }
        Detection::NoBlowup => {
            if cfg.checks.require_verdict {
                checks.push(Measurement::at_least(format!("{} fitted exponent", regime.name()), f64::NAN, regime.bound_exponent()));
            }
            report.insert("blowup".into(), Value::Null);
        }
    }
    Ok(finish(report, vec![trajectory_table(&traj, &cfg.diagnostics)?], checks))
}

fn run_norms(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mix = initial_mixture(cfg)?;
    let nc = &cfg.norms;
    let rows = (1..=nc.levels)
        .map(|k| std::iter::once(k as f64).chain(nc.s.iter().map(|&s| mixture_hs_norm(&mix, k, s))).collect())
        .collect();
    let header_row = std::iter::once("k".to_string()).chain(nc.s.iter().map(|s| format!("hs_norm_s{s}"))).collect();
    let quasi = nc
        .s
        .iter()
        .map(|&s| Ok(json!({ "s": s, "quasinorm": mixture_quasinorm(&mix, s)? })))
        .collect::<gplab_core::Result<Vec<_>>>()?;
    let traces = nc
        .trace_orders
        .iter()
        .map(|&k| Ok(json!({ "k": k, "trace_norm": trace_norm_k(Level::Mixture(&mix, k))? })))
        .collect::<gplab_core::Result<Vec<_>>>()?;
    let mut report = header(cfg);
    report.insert("components".into(), json!(mix.len()));
    report.insert("quasinorms".into(), Value::Array(quasi));
    report.insert("trace_norms".into(), Value::Array(traces));
    report.insert("initial_energy".into(), json!(energy(&mix, 1, cfg.mu, cfg.equation)?));
    report.insert("virial_k1".into(), json!(virial(&mix, 1)?));
    Ok(finish(report, vec![Table { file: "levels.csv".into(), header: header_row, rows }], Vec::new()))
}

/// Runs a validated configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Nls | Scenario::Mixture => run_mixture(cfg),
        Scenario::TruncatedHierarchy => run_truncated(cfg),
        Scenario::Blowup => run_blowup(cfg),
        Scenario::Norms => run_norms(cfg),
    }
}
