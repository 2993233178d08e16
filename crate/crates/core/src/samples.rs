//! Seeded random states for property checks and cross-validation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::spectral::{make_reference, Field, Grid, Reference};
use crate::state::{materialize, DenseKernel, ProductMixture};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A sum of two or three chirped Gaussian bumps placed well inside the box,
/// so it is smooth and negligible at the boundary.
pub fn smooth_field(grid: &Grid, rng: &mut impl Rng) -> Result<Field> {
    let n = grid.dim();
    let l = grid.halfwidth();
    let bumps = rng.random_range(2..=3);
    let mut total = Field::zeros(*grid);
    for _ in 0..bumps {
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(-0.25 * l..0.25 * l)).collect();
        let width = rng.random_range(0.08 * l..0.16 * l);
        let amplitude = rng.random_range(0.3..1.0);
        let chirp = rng.random_range(-0.5..0.5);
        let bump = make_reference(&Reference::Gaussian { center, width, amplitude, chirp }, grid)?;
        let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let v: Vec<Complex64> = total.values().iter().zip(bump.values()).map(|(a, b)| a + phase * b).collect();
        total = Field::new(*grid, v)?;
    }
    Ok(total)
}

/// Independent complex normal values at every grid point.
pub fn rough_field(grid: &Grid, rng: &mut impl Rng) -> Field {
    Field::from_raw(*grid, (0..grid.len()).map(|_| normal(rng)).collect())
}

/// A mixture of `count` smooth components with weights in `[0.2, 1)`.
pub fn smooth_mixture(grid: &Grid, count: usize, rng: &mut impl Rng) -> Result<ProductMixture> {
    let parts = (0..count)
        .map(|_| Ok((rng.random_range(0.2..1.0), smooth_field(grid, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    ProductMixture::new(parts)
}

/// A mixture of `count` rough components, useful on coarse grids where
/// only discrete identities are tested.
pub fn rough_mixture(grid: &Grid, count: usize, rng: &mut impl Rng) -> Result<ProductMixture> {
    let scale = (grid.len() as f64 * grid.cell_volume()).sqrt().recip();
    let parts = (0..count)
        .map(|_| (rng.random_range(0.2..1.0), rough_field(grid, rng).scaled(Complex64::from(scale))))
        .collect();
    ProductMixture::new(parts)
}

/// Independent complex normal entries, with no symmetry.
pub fn generic_kernel(order: usize, grid: &Grid, rng: &mut impl Rng) -> Result<DenseKernel> {
    let len = DenseKernel::zeros(order, *grid)?.values().len();
    DenseKernel::new(order, *grid, (0..len).map(|_| normal(rng)).collect())
}

/// [`generic_kernel`] symmetrized to be Hermitian and permutation symmetric.
pub fn symmetric_kernel(order: usize, grid: &Grid, rng: &mut impl Rng) -> Result<DenseKernel> {
    Ok(generic_kernel(order, grid, rng)?.symmetrized())
}

/// A positive kernel `sum_r w_r |phi_r^(x)k><phi_r^(x)k|` from rough fields.
pub fn positive_kernel(order: usize, grid: &Grid, rng: &mut impl Rng) -> Result<DenseKernel> {
    materialize(&rough_mixture(grid, 3, rng)?, order)
}

/// A non-negative sequence with geometric-looking decay, possibly with
/// zeros, of length in `[1, 12]`.
pub fn nonnegative_sequence(rng: &mut impl Rng) -> Vec<f64> {
    let len = rng.random_range(1..=12);
    let rate: f64 = rng.random_range(0.05..3.0);
    (0..len)
        .map(|k| {
            if rng.random_bool(0.1) {
                0.0
            } else {
                rng.random_range(0.1..2.0) * rate.powi(k as i32 + 1)
            }
        })
        .collect()
}
