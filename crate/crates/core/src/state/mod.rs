//! Hierarchy states: dense kernels, product mixtures and truncations.

mod kernel;
mod mixture;

pub use kernel::{
    check_budget, factorized_kernel, partial_trace, symmetry_report, DenseKernel, SymmetryReport, MAX_DENSE_ENTRIES,
};
pub(crate) use kernel::{tensor_power, unravel};
pub use mixture::{materialize, ProductMixture};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// How a truncated hierarchy obtains the levels above its top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "reference", rename_all = "snake_case")]
pub enum ClosurePolicy {
    /// Levels above the truncation are zero.
    Zero,
    /// Levels above the truncation come from a mixture evolved alongside.
    MixtureReference(ProductMixture),
}

/// Dense levels `gamma^(1..=K)` plus a closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyTruncation {
    levels: Vec<DenseKernel>,
    closure: ClosurePolicy,
}

impl HierarchyTruncation {
    pub fn new(levels: Vec<DenseKernel>, closure: ClosurePolicy) -> Result<Self> {
        let first = levels.first().ok_or(Error::OrderTooLow { got: 0, need: 1 })?;
        let grid = *first.grid();
        for (i, g) in levels.iter().enumerate() {
            if g.order() != i + 1 {
                return Err(Error::InvalidArgument(format!("level {} has order {}", i + 1, g.order())));
            }
            if *g.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        if let ClosurePolicy::MixtureReference(mix) = &closure {
            if *mix.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self { levels, closure })
    }

    /// Levels `1..=depth` of a mixture, closed by the mixture itself.
    pub fn from_mixture(mix: &ProductMixture, depth: usize) -> Result<Self> {
        let levels = (1..=depth).map(|k| materialize(mix, k)).collect::<Result<Vec<_>>>()?;
        Self::new(levels, ClosurePolicy::MixtureReference(mix.clone()))
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn grid(&self) -> &Grid {
        self.levels[0].grid()
    }

    pub fn levels(&self) -> &[DenseKernel] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> Result<&DenseKernel> {
        if k == 0 {
            return Err(Error::LevelUnavailable(0));
        }
        self.levels.get(k - 1).ok_or(Error::LevelUnavailable(k))
    }

    pub fn closure(&self) -> &ClosurePolicy {
        &self.closure
    }
}

/// Borrowed view of either hierarchy representation.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Mixture(&'a ProductMixture),
    Truncation(&'a HierarchyTruncation),
}

impl<'a> From<&'a ProductMixture> for StateRef<'a> {
    fn from(m: &'a ProductMixture) -> Self {
        StateRef::Mixture(m)
    }
}

impl<'a> From<&'a HierarchyTruncation> for StateRef<'a> {
    fn from(t: &'a HierarchyTruncation) -> Self {
        StateRef::Truncation(t)
    }
}

/// `|| partial_trace(gamma^(k+1)) - gamma^(k) ||_L2`.
///
/// For mixtures this is evaluated in closed form: the difference is the
/// mixture with weights `w_r (||phi_r||^2 - 1)`, whose L2 norm follows from
/// the Gram matrix of the components.
pub fn admissibility_defect<'a>(state: impl Into<StateRef<'a>>, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::LevelUnavailable(0));
    }
    match state.into() {
        StateRef::Mixture(mix) => {
            let c: Vec<f64> = mix.components().map(|(w, f)| w * (f.mass() - 1.0)).collect();
            let gram = mix.hs_gram(0.0);
            let mut total = 0.0;
            for (a, ca) in c.iter().enumerate() {
                for (b, cb) in c.iter().enumerate() {
                    total += ca * cb * gram[a][b].norm_sqr().powi(k as i32);
                }
            }
            Ok(total.max(0.0).sqrt())
        }
        StateRef::Truncation(t) => {
            let upper = t.level(k + 1)?;
            let lower = t.level(k)?;
            let traced = partial_trace(upper)?;
            Ok(traced.add_scaled(lower, (-1.0).into())?.l2_norm())
        }
    }
}
