//! Periodic spectral grids, Fourier multipliers, quadrature and analytic
//! reference fields.

pub(crate) mod fft;
mod field;
mod grid;
mod reference;

pub use field::{apply_multiplier, quadrature_inner, Field, Multiplier};
pub use grid::{Grid, MAX_GRID_POINTS};
pub use reference::{make_reference, Reference};
