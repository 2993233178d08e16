//! Numerical laboratory for cubic and quintic Gross-Pitaevskii hierarchies.
//!
//! States come in two representations: dense kernels `gamma^(k)` on 1-D
//! grids (small `k`), and product mixtures of one-particle fields, which are
//! exact hierarchy solutions in any dimension when each field follows NLS.

pub mod blowup;
pub mod checks;
pub mod collision;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod model;
pub mod nls;
pub mod samples;
pub mod spectral;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{Power, Side, Sign};
pub use nls::{NlsProblem, Sampling, StepController};
pub use spectral::{Field, Grid, Multiplier, Reference};
pub use state::{ClosurePolicy, DenseKernel, HierarchyTruncation, ProductMixture};
pub use trajectory::{Halt, Snapshot, TrajectoryRecord};
