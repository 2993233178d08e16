//! Fixed inputs shared by the benchmarks.

use gplab_core::spectral::make_reference;
use gplab_core::{samples, DenseKernel, Field, Grid, Reference};

/// A unit Gaussian on a cubic grid with `m` points per axis.
pub fn gaussian_field(dim: usize, m: usize, halfwidth: f64) -> Field {
    let grid = Grid::new(dim, m, halfwidth).expect("valid grid");
    make_reference(&Reference::gaussian(dim, 1.0, 1.0), &grid).expect("gaussian samples")
}

/// A seeded symmetric kernel of the given order on a 1-D grid.
pub fn symmetric_kernel(order: usize, m: usize) -> DenseKernel {
    let grid = Grid::new(1, m, 4.0).expect("valid grid");
    samples::symmetric_kernel(order, &grid, &mut samples::rng(7)).expect("kernel within budget")
}
