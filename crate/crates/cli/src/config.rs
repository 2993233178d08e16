//! Experiment configuration files.

use std::fmt;
use std::path::Path;

use gplab_core::functionals::Diagnostic;
use gplab_core::{Grid, Power, Sign};
use serde::{Deserialize, Serialize};

/// A configuration problem, reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {msg}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Nls,
    Mixture,
    TruncatedHierarchy,
    Blowup,
    Norms,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Nls, Scenario::Mixture, Scenario::TruncatedHierarchy, Scenario::Blowup, Scenario::Norms];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Nls => "nls",
            Scenario::Mixture => "mixture",
            Scenario::TruncatedHierarchy => "truncated-hierarchy",
            Scenario::Blowup => "blowup",
            Scenario::Norms => "norms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dimension: usize,
    pub points: usize,
    pub halfwidth: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dimension: 1, points: 256, halfwidth: 16.0 }
    }
}

/// One Gaussian component `weight * |phi><phi|^(x)k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    #[serde(default = "one")]
    pub weight: f64,
    /// Defaults to the origin.
    #[serde(default)]
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub chirp: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    Gaussians { components: Vec<Component> },
    /// `sqrt(2) a sech(a x)`; one-dimensional.
    Soliton { scale: f64 },
    PlaneWave { momentum: Vec<f64>, amplitude: f64 },
    /// `count` random smooth components drawn from the configured seed.
    RandomSmooth { count: usize },
    /// A centred Gaussian scaled just past the zero-energy amplitude of the
    /// focusing equation.
    NegativeEnergy { width: f64 },
}

impl InitialState {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialState::Gaussians { .. } => "gaussians",
            InitialState::Soliton { .. } => "soliton",
            InitialState::PlaneWave { .. } => "plane-wave",
            InitialState::RandomSmooth { .. } => "random-smooth",
            InitialState::NegativeEnergy { .. } => "negative-energy",
        }
    }
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Gaussians {
            components: vec![
                Component { weight: 0.6, center: vec![-2.0], width: 2.5, amplitude: 2f64.sqrt(), chirp: 0.0 },
                Component { weight: 0.4, center: vec![2.0], width: 2.5, amplitude: 1.0, chirp: 0.0 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Defaults to `1e-9 dt` when halting is enabled and `1e-6 dt` otherwise.
    pub dt_min: Option<f64>,
    pub t_end: f64,
    pub sample_every: f64,
    /// Absolute `H^1` halt threshold.
    pub halt_norm: Option<f64>,
    /// Halt threshold as a multiple of the initial largest `H^1` norm.
    pub halt_factor: Option<f64>,
    /// Cap on the nonlinear phase of one step.
    pub max_phase: Option<f64>,
    /// Extra sample whenever the norm grew by this fraction.
    pub growth_sample: Option<f64>,
    pub safety: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            dt_min: None,
            t_end: 1.0,
            sample_every: 0.05,
            halt_norm: None,
            halt_factor: None,
            max_phase: None,
            growth_sample: None,
            safety: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// Levels above the truncation come from the exact mixture solution.
    Mixture,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub depth: usize,
    pub closure: Closure,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { depth: 2, closure: Closure::Mixture }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    /// Regularities at which the level norms are tabulated.
    pub s: Vec<f64>,
    /// Number of explicit levels.
    pub levels: usize,
    /// Orders at which the trace norm is evaluated.
    pub trace_orders: Vec<usize>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { s: vec![0.0, 1.0, 2.0], levels: 8, trace_orders: vec![1, 2] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    /// Regularity of the norm whose growth is fitted.
    pub s: f64,
    /// Rate regime name; defaults to the strongest applicable bound.
    pub regime: Option<String>,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self { s: 1.0, regime: None }
    }
}

/// Invariant checks evaluated after a run; any failure gives exit status 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Largest relative drift of `Tr gamma^(1)`.
    pub max_mass_drift: Option<f64>,
    /// Largest relative drift of every recorded energy series.
    pub max_energy_drift: Option<f64>,
    /// Largest symmetry defect of a truncated run.
    pub max_symmetry_defect: Option<f64>,
    /// Largest level-1 Duhamel residual.
    pub max_duhamel_residual: Option<f64>,
    /// Blowup runs fail unless the fitted rate respects the bound.
    pub require_verdict: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            max_mass_drift: None,
            max_energy_drift: None,
            max_symmetry_defect: None,
            max_duhamel_residual: None,
            require_verdict: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    /// Write one SVG line plot per diagnostic.
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub equation: Power,
    pub mu: Sign,
    pub seed: u64,
    /// Run directory below the output root; defaults to the config file stem.
    pub name: Option<String>,
    /// Diagnostic series written to `trajectory.csv`, in this order.
    pub diagnostics: Vec<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub blowup: BlowupConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub plot: PlotConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Mixture,
            equation: Power::Cubic,
            mu: Sign::Focusing,
            seed: 0,
            name: None,
            diagnostics: vec!["mass".into(), "energy_k1".into(), "virial_k1".into()],
            grid: GridConfig::default(),
            initial: InitialState::default(),
            integrator: IntegratorConfig::default(),
            truncation: TruncationConfig::default(),
            norms: NormsConfig::default(),
            blowup: BlowupConfig::default(),
            checks: ChecksConfig { max_mass_drift: Some(1e-10), max_energy_drift: Some(1e-6), ..Default::default() },
            plot: PlotConfig::default(),
        }
    }
}

/// Diagnostics a truncated run can evaluate from its dense levels.
pub fn dense_diagnostic(d: &Diagnostic) -> bool {
    matches!(d, Diagnostic::Mass | Diagnostic::Kinetic(_) | Diagnostic::HsNorm { .. } | Diagnostic::TraceNorm(_))
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(field, format!("{v} must be positive")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.grid.dimension, self.grid.points, self.grid.halfwidth).map_err(|e| bad("grid", e))
    }

    pub fn parsed_diagnostics(&self) -> Result<Vec<Diagnostic>, ConfigError> {
        self.diagnostics
            .iter()
            .map(|name| name.parse::<Diagnostic>().map_err(|e| bad("diagnostics", e)))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        let diags = self.parsed_diagnostics()?;
        let mut seen = std::collections::HashSet::new();
        for name in &self.diagnostics {
            if !seen.insert(name) {
                return Err(bad("diagnostics", format!("'{name}' is listed twice")));
            }
        }
        let it = &self.integrator;
        positive("integrator.dt", it.dt)?;
        positive("integrator.t_end", it.t_end)?;
        positive("integrator.sample_every", it.sample_every)?;
        if let Some(v) = it.dt_min {
            positive("integrator.dt_min", v)?;
        }
        if let Some(v) = it.max_phase {
            positive("integrator.max_phase", v)?;
        }
        if let Some(v) = it.growth_sample {
            positive("integrator.growth_sample", v)?;
        }
        if !(it.safety > 0.0 && it.safety < 1.0) {
            return Err(bad("integrator.safety", format!("{} must lie in (0, 1)", it.safety)));
        }
        match (it.halt_norm, it.halt_factor) {
            (Some(_), Some(_)) => return Err(bad("integrator", "set at most one of halt_norm and halt_factor")),
            (Some(v), None) => positive("integrator.halt_norm", v)?,
            (None, Some(v)) if !(v > 1.0) => return Err(bad("integrator.halt_factor", format!("{v} must exceed 1"))),
            _ => {}
        }
        match &self.initial {
            InitialState::Gaussians { components } => {
                if components.is_empty() {
                    return Err(bad("initial.components", "at least one component is required"));
                }
                for (i, c) in components.iter().enumerate() {
                    let field = format!("initial.components[{i}]");
                    positive(&format!("{field}.weight"), c.weight)?;
                    positive(&format!("{field}.width"), c.width)?;
                    if !c.center.is_empty() && c.center.len() != grid.dim() {
                        return Err(bad(&format!("{field}.center"), format!("needs {} coordinates", grid.dim())));
                    }
                }
            }
            InitialState::Soliton { scale } => {
                positive("initial.scale", *scale)?;
                if grid.dim() != 1 {
                    return Err(bad("initial", "solitons are one-dimensional"));
                }
            }
            InitialState::PlaneWave { momentum, .. } => {
                if momentum.len() != grid.dim() {
                    return Err(bad("initial.momentum", format!("needs {} components", grid.dim())));
                }
            }
            InitialState::RandomSmooth { count } => {
                if *count == 0 {
                    return Err(bad("initial.count", "must be at least 1"));
                }
            }
            InitialState::NegativeEnergy { width } => positive("initial.width", *width)?,
        }
        match self.scenario {
            Scenario::Nls => {
                let single = match &self.initial {
                    InitialState::Gaussians { components } => components.len() == 1,
                    InitialState::RandomSmooth { count } => *count == 1,
                    _ => true,
                };
                if !single {
                    return Err(bad("initial", "the nls scenario evolves a single field"));
                }
            }
            Scenario::TruncatedHierarchy => {
                if grid.dim() != 1 {
                    return Err(bad("grid.dimension", "truncated hierarchies need a 1-D grid"));
                }
                let depth = self.truncation.depth;
                if depth == 0 {
                    return Err(bad("truncation.depth", "must be at least 1"));
                }
                gplab_core::state::check_budget(depth + self.equation.order_offset(), &grid, gplab_core::state::MAX_DENSE_ENTRIES)
                    .map_err(|e| bad("truncation.depth", e))?;
                for d in &diags {
                    if !dense_diagnostic(d) {
                        return Err(bad("diagnostics", format!("'{d}' is not available for truncated runs")));
                    }
                    if d.order().is_some_and(|k| k > depth) {
                        return Err(bad("diagnostics", format!("'{d}' needs a level above the truncation depth {depth}")));
                    }
                }
            }
            Scenario::Blowup => {
                if self.mu != Sign::Focusing {
                    return Err(bad("mu", "blowup runs need the focusing sign"));
                }
                if self.equation.sigma() as usize * grid.dim() < 2 {
                    return Err(bad("equation", format!("{} NLS in dimension {} does not blow up", self.equation, grid.dim())));
                }
                if it.halt_norm.is_none() && it.halt_factor.is_none() {
                    return Err(bad("integrator", "blowup runs need halt_norm or halt_factor"));
                }
                if !self.blowup.s.is_finite() {
                    return Err(bad("blowup.s", "must be finite"));
                }
                if let Some(r) = &self.blowup.regime {
                    gplab_core::blowup::RateRegime::parse(r).map_err(|e| bad("blowup.regime", e))?;
                } else if gplab_core::blowup::RateRegime::applicable(self.equation, self.blowup.s, grid.dim()).is_none() {
                    return Err(bad("blowup.s", "no rate bound applies at this regularity; set blowup.regime"));
                }
            }
            Scenario::Norms => {
                if self.norms.levels == 0 || self.norms.s.is_empty() {
                    return Err(bad("norms", "need at least one level and one regularity"));
                }
                if self.norms.trace_orders.contains(&0) {
                    return Err(bad("norms.trace_orders", "orders start at 1"));
                }
            }
            Scenario::Mixture => {}
        }
        let needs_energy = self.checks.max_energy_drift.is_some();
        if needs_energy && !diags.iter().any(|d| matches!(d, Diagnostic::Energy(_))) {
            return Err(bad("checks.max_energy_drift", "needs an energy_k diagnostic"));
        }
        if self.checks.max_mass_drift.is_some() && !diags.contains(&Diagnostic::Mass) {
            return Err(bad("checks.max_mass_drift", "needs the mass diagnostic"));
        }
        if self.checks.max_symmetry_defect.is_some() && self.scenario != Scenario::TruncatedHierarchy {
            return Err(bad("checks.max_symmetry_defect", "applies to truncated-hierarchy runs only"));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(bad("name", format!("'{name}' is not a plain directory name")));
            }
        }
        Ok(())
    }
}
