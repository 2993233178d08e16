//! Built-in configurations for the `blowup` subcommand.

use gplab_core::{Power, Sign};

use crate::config::{
    BlowupConfig, ChecksConfig, ConfigError, ExperimentConfig, GridConfig, InitialState, IntegratorConfig, Scenario,
};

/// A Gaussian just past the zero-energy amplitude, integrated with step
/// control until its `H^1` norm has grown well past its initial value.
pub fn blowup(equation: Power, dimension: usize) -> Result<ExperimentConfig, ConfigError> {
    let (points, halfwidth) = match dimension {
        1 => (8192, 10.0),
        2 => (256, 8.0),
        3 => (64, 6.0),
        other => return Err(ConfigError(format!("dimension: {other} must be 1, 2 or 3"))),
    };
    let mut integrator = IntegratorConfig {
        dt: 1e-3,
        t_end: 1.0,
        sample_every: 0.005,
        growth_sample: Some(0.02),
        ..Default::default()
    };
    if dimension == 1 {
        integrator.halt_norm = Some(60.0);
        integrator.max_phase = Some(gplab_core::checks::COLLAPSE_PHASE);
    } else {
        // a 64^3 box resolves the collapse only until H^1 has grown about fourfold
        integrator.halt_factor = Some(4.0);
        integrator.max_phase = Some(0.05);
    }
    // the lowest regularity with the strongest rate bound
    let s = (dimension as f64 / 2.0 + 0.5).max(1.0);
    let norm = gplab_core::functionals::Diagnostic::QuasiNorm(s).to_string();
    let cfg = ExperimentConfig {
        scenario: Scenario::Blowup,
        equation,
        mu: Sign::Focusing,
        seed: 0,
        name: Some(format!("blowup-{equation}-{dimension}d")),
        diagnostics: vec![norm, "virial_k1".into(), "energy_k1".into(), "h1_max".into()],
        grid: GridConfig { dimension, points, halfwidth },
        initial: InitialState::NegativeEnergy { width: 1.0 },
        integrator,
        blowup: BlowupConfig { s, regime: None },
        checks: ChecksConfig::default(),
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}
