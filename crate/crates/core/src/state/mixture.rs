use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{check_budget, tensor_power, DenseKernel, MAX_DENSE_ENTRIES};
use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// A positive combination of factorized states,
/// `gamma^(k) = sum_r w_r prod_j phi_r(x_j) conj(phi_r(x'_j))` for every `k`.
///
/// Components need not be normalized; unnormalized components give states
/// that are not admissible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMixture {
    weights: Vec<f64>,
    fields: Vec<Field>,
}

impl ProductMixture {
    pub fn new(components: Vec<(f64, Field)>) -> Result<Self> {
        let (weights, fields): (Vec<f64>, Vec<Field>) = components.into_iter().unzip();
        Self::from_parts(weights, fields)
    }

    pub fn from_parts(weights: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidArgument("a mixture needs at least one component".into()));
        }
        if weights.len() != fields.len() {
            return Err(Error::InvalidArgument("weight and field counts differ".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!("weight {i} is {w}, weights must be positive")));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite { what: "field value", location: "mixture component".into() });
        }
        Ok(Self { weights, fields })
    }

    pub fn single(field: Field) -> Self {
        Self { weights: vec![1.0], fields: vec![field] }
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn components(&self) -> impl Iterator<Item = (f64, &Field)> {
        self.weights.iter().copied().zip(&self.fields)
    }

    /// Same weights, new fields (for time evolution).
    pub fn with_fields(&self, fields: Vec<Field>) -> Result<Self> {
        Self::from_parts(self.weights.clone(), fields)
    }

    /// Each weight multiplied by `factor(r)`.
    pub fn reweighted(&self, factor: impl Fn(usize, &Field) -> f64) -> Result<Self> {
        let weights = self.weights.iter().enumerate().map(|(r, w)| w * factor(r, &self.fields[r])).collect();
        Self::from_parts(weights, self.fields.clone())
    }

    /// `sum_r w_r ||phi_r||^(2(k-1)) f(phi_r)`: the reduction of a
    /// one-particle functional acting on the first particle of `gamma^(k)`.
    pub fn level_sum(&self, k: usize, f: impl Fn(&Field) -> f64) -> f64 {
        self.components()
            .map(|(w, phi)| w * phi.mass().powi(k as i32 - 1) * f(phi))
            .sum()
    }

    /// Gram matrix of `<S^s phi_a, S^s phi_b>` with `S^s = (1 - Laplacian)^(s/2)`.
    pub fn hs_gram(&self, s: f64) -> Vec<Vec<Complex64>> {
        let p2 = self.grid().momentum_sq();
        let weight = (self.grid().cell_volume()).powi(2) * self.grid().momentum_weight();
        let coeffs: Vec<Vec<Complex64>> = self.fields.iter().map(|f| {
            let mut c = f.values().to_vec();
            crate::spectral::fft::forward(&mut c, self.grid().points(), self.grid().dim());
            c
        }).collect();
        let n = self.len();
        let mut gram = vec![vec![Complex64::default(); n]; n];
        for a in 0..n {
            for b in a..n {
                let v: Complex64 = coeffs[a]
                    .iter()
                    .zip(&coeffs[b])
                    .zip(&p2)
                    .map(|((x, y), q)| x.conj() * y * (1.0 + q).powf(s))
                    .sum::<Complex64>()
                    * weight;
                gram[a][b] = v;
                gram[b][a] = v.conj();
            }
        }
        gram
    }
}

/// `sum_r w_r factorized_kernel(phi_r, k)`.
pub fn materialize(mix: &ProductMixture, k: usize) -> Result<DenseKernel> {
    let len = check_budget(k, mix.grid(), MAX_DENSE_ENTRIES)?;
    let mut values = vec![Complex64::default(); len];
    for (w, phi) in mix.components() {
        let v = tensor_power(phi.values(), k);
        let side = v.len();
        for (r, a) in v.iter().enumerate() {
            let aw = a * w;
            let row = &mut values[r * side..(r + 1) * side];
            for (slot, b) in row.iter_mut().zip(&v) {
                *slot += aw * b.conj();
            }
        }
    }
    Ok(DenseKernel::from_raw(k, *mix.grid(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_reference, Reference};
    use crate::state::kernel::factorized_kernel;

    fn grid() -> Grid {
        Grid::new(1, 32, 8.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let f = Field::zeros(grid());
        assert!(ProductMixture::new(vec![(0.0, f.clone())]).is_err());
        assert!(ProductMixture::new(vec![(-1.0, f.clone())]).is_err());
        assert!(ProductMixture::new(vec![]).is_err());
        let other = Field::zeros(Grid::new(1, 16, 8.0).unwrap());
        assert!(matches!(ProductMixture::new(vec![(1.0, f), (1.0, other)]), Err(Error::GridMismatch)));
    }

    #[test]
    fn single_component_matches_factorized() {
        let phi = make_reference(&Reference::gaussian(1, 1.0, 1.0), &grid()).unwrap();
        let a = materialize(&ProductMixture::single(phi.clone()), 2).unwrap();
        let b = factorized_kernel(&phi, 2).unwrap();
        assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_components_trace() {
        let g = grid();
        let p = std::f64::consts::PI / 8.0;
        let f1 = make_reference(&Reference::PlaneWave { momentum: vec![p], amplitude: 0.2 }, &g).unwrap();
        let f2 = make_reference(&Reference::PlaneWave { momentum: vec![3.0 * p], amplitude: 0.3 }, &g).unwrap();
        let want = 0.5 * f1.mass() + 0.5 * f2.mass();
        let mix = ProductMixture::new(vec![(0.5, f1), (0.5, f2)]).unwrap();
        let k = materialize(&mix, 1).unwrap();
        assert!((k.trace().re - want).abs() < 1e-12);
        let gram = mix.hs_gram(0.0);
        assert!(gram[0][1].norm() < 1e-12);
    }
}
