use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Power, Sign};
use crate::spectral::Field;
use crate::state::{DenseKernel, ProductMixture};

/// State recorded at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state", rename_all = "snake_case")]
pub enum Snapshot {
    Field(Field),
    Mixture(ProductMixture),
    /// Dense levels `gamma^(1..=K)`.
    Levels(Vec<DenseKernel>),
}

impl Snapshot {
    /// The snapshot as a mixture, when it is one.
    pub fn as_mixture(&self) -> Option<ProductMixture> {
        match self {
            Snapshot::Field(f) => Some(ProductMixture::single(f.clone())),
            Snapshot::Mixture(m) => Some(m.clone()),
            Snapshot::Levels(_) => None,
        }
    }
}

/// Why an evolution stopped before its end time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub time: f64,
    pub reason: String,
    /// `H^1` norm (largest over components) that triggered the halt.
    pub norm: f64,
}

/// Time-stamped states and named diagnostic series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub mu: Sign,
    pub power: Power,
    pub times: Vec<f64>,
    /// Empty when states were not kept.
    pub states: Vec<Snapshot>,
    pub diagnostics: IndexMap<String, Vec<f64>>,
    pub halted: Option<Halt>,
}

impl TrajectoryRecord {
    pub fn new(mu: Sign, power: Power) -> Self {
        Self { mu, power, times: Vec::new(), states: Vec::new(), diagnostics: IndexMap::new(), halted: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.diagnostics
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidArgument(format!("trajectory has no '{name}' series")))
    }

    /// Appends a sample; times must increase strictly.
    pub fn push(&mut self, t: f64, state: Option<Snapshot>, values: &[(String, f64)]) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Invariant(format!("sample time {t} does not follow {last}")));
            }
        }
        let n = self.times.len();
        for (name, _) in values {
            let have = self.diagnostics.get(name).map_or(0, Vec::len);
            if have != n {
                return Err(Error::Invariant(format!("diagnostic '{name}' is missing earlier samples")));
            }
        }
        for (name, v) in values {
            self.diagnostics.entry(name.clone()).or_default().push(*v);
        }
        self.times.push(t);
        if let Some(s) = state {
            self.states.push(s);
        }
        Ok(())
    }

    /// Checks strictly increasing times and finite diagnostics.
    pub fn validate(&self) -> Result<()> {
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invariant("sample times are not strictly increasing".into()));
        }
        for (name, series) in &self.diagnostics {
            if series.len() != self.times.len() {
                return Err(Error::Invariant(format!("diagnostic '{name}' has {} samples for {} times", series.len(), self.times.len())));
            }
            if let Some(i) = series.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "diagnostic", location: format!("{name} at t = {}", self.times[i]) });
            }
        }
        if !self.states.is_empty() && self.states.len() != self.times.len() {
            return Err(Error::Invariant("state count does not match sample count".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_enforces_order() {
        let mut r = TrajectoryRecord::new(Sign::Focusing, Power::Cubic);
        r.push(0.0, None, &[("a".into(), 1.0)]).unwrap();
        r.push(0.5, None, &[("a".into(), 2.0)]).unwrap();
        assert!(r.push(0.5, None, &[("a".into(), 2.0)]).is_err());
        assert!(r.push(1.0, None, &[("b".into(), 2.0)]).is_err());
        r.validate().unwrap();
        assert_eq!(r.series("a").unwrap(), &[1.0, 2.0]);
    }
}
