use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::energy::{energy, kinetic_trace, virial, virial_dt, virial_rhs};
use super::norms::{mixture_hs_norm, seq_quasinorm, trace_norm_k, Level, NormSequence};
use crate::collision::interaction_trace_mixture;
use crate::error::{Error, Result};
use crate::model::{Power, Sign};
use crate::state::ProductMixture;

/// Number of explicit levels used when a mixture quasi-norm is evaluated;
/// the remainder is the fitted geometric tail, which is exact for
/// single-component states.
pub const QUASINORM_DEPTH: usize = 8;

/// A scalar probe recorded along mixture trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Diagnostic {
    /// `Tr gamma^(1)`.
    Mass,
    Energy(usize),
    Virial(usize),
    VirialDt(usize),
    VirialRhs(usize),
    /// `Tr[C_{1,+} gamma^(k+offset)]`.
    Interaction(usize),
    /// `sum_j Tr[-Lap_j gamma^(k)]`.
    Kinetic(usize),
    HsNorm { k: usize, s: f64 },
    /// The sequence quasi-norm over all levels.
    QuasiNorm(f64),
    TraceNorm(usize),
    /// Largest one-particle `H^1` norm among the components.
    H1Max,
}

/// `ℋ^s` quasi-norm of a mixture from its first [`QUASINORM_DEPTH`] levels.
pub fn mixture_quasinorm(mix: &ProductMixture, s: f64) -> Result<f64> {
    let head = (1..=QUASINORM_DEPTH).map(|k| mixture_hs_norm(mix, k, s)).collect();
    seq_quasinorm(&NormSequence::with_fitted_tail(head)?)
}

impl Diagnostic {
    pub fn evaluate(&self, mix: &ProductMixture, mu: Sign, power: Power) -> Result<f64> {
        match *self {
            Diagnostic::Mass => Ok(mix.level_sum(1, |f| f.mass())),
            Diagnostic::Energy(k) => Ok(energy(mix, k, mu, power)?.total),
            Diagnostic::Virial(k) => virial(mix, k),
            Diagnostic::VirialDt(k) => virial_dt(mix, k),
            Diagnostic::VirialRhs(k) => virial_rhs(mix, k, mu, power),
            Diagnostic::Interaction(k) => Ok(interaction_trace_mixture(mix, k, power)),
            Diagnostic::Kinetic(k) => Ok(kinetic_trace(mix, k)),
            Diagnostic::HsNorm { k, s } => Ok(mixture_hs_norm(mix, k, s)),
            Diagnostic::QuasiNorm(s) => mixture_quasinorm(mix, s),
            Diagnostic::TraceNorm(k) => trace_norm_k(Level::Mixture(mix, k)),
            Diagnostic::H1Max => Ok(mix.fields().iter().map(|f| f.h1_norm()).fold(0.0, f64::max)),
        }
    }

    pub fn order(&self) -> Option<usize> {
        match *self {
            Diagnostic::Energy(k)
            | Diagnostic::Virial(k)
            | Diagnostic::VirialDt(k)
            | Diagnostic::VirialRhs(k)
            | Diagnostic::Interaction(k)
            | Diagnostic::Kinetic(k)
            | Diagnostic::TraceNorm(k)
            | Diagnostic::HsNorm { k, .. } => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Mass => write!(f, "mass"),
            Diagnostic::Energy(k) => write!(f, "energy_k{k}"),
            Diagnostic::Virial(k) => write!(f, "virial_k{k}"),
            Diagnostic::VirialDt(k) => write!(f, "virial_dt_k{k}"),
            Diagnostic::VirialRhs(k) => write!(f, "virial_rhs_k{k}"),
            Diagnostic::Interaction(k) => write!(f, "interaction_k{k}"),
            Diagnostic::Kinetic(k) => write!(f, "kinetic_k{k}"),
            Diagnostic::HsNorm { k, s } => write!(f, "hs_norm_k{k}_s{s}"),
            Diagnostic::QuasiNorm(s) => write!(f, "quasinorm_s{s}"),
            Diagnostic::TraceNorm(k) => write!(f, "trace_norm_k{k}"),
            Diagnostic::H1Max => write!(f, "h1_max"),
        }
    }
}

impl FromStr for Diagnostic {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown diagnostic '{name}'"));
        let order = |s: &str| -> Result<usize> {
            let k: usize = s.strip_prefix('k').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            Ok(k)
        };
        let reg = |s: &str| -> Result<f64> {
            let v: f64 = s.strip_prefix('s').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            Ok(v)
        };
        match name {
            "mass" => return Ok(Diagnostic::Mass),
            "h1_max" => return Ok(Diagnostic::H1Max),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix("hs_norm_") {
            let (k, s) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(Diagnostic::HsNorm { k: order(k)?, s: reg(s)? });
        }
        if let Some(rest) = name.strip_prefix("quasinorm_") {
            return Ok(Diagnostic::QuasiNorm(reg(rest)?));
        }
        let (head, k) = name.rsplit_once('_').ok_or_else(bad)?;
        let k = order(k)?;
        match head {
            "energy" => Ok(Diagnostic::Energy(k)),
            "virial" => Ok(Diagnostic::Virial(k)),
            "virial_dt" => Ok(Diagnostic::VirialDt(k)),
            "virial_rhs" => Ok(Diagnostic::VirialRhs(k)),
            "interaction" => Ok(Diagnostic::Interaction(k)),
            "kinetic" => Ok(Diagnostic::Kinetic(k)),
            "trace_norm" => Ok(Diagnostic::TraceNorm(k)),
            _ => Err(bad()),
        }
    }
}

impl From<Diagnostic> for String {
    fn from(d: Diagnostic) -> Self {
        d.to_string()
    }
}

impl TryFrom<String> for Diagnostic {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
