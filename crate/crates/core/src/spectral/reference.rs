use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::Field;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Analytic reference fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    /// `A (2 / (pi w^2))^(n/4) exp(-|x - c|^2 / w^2) exp(i b |x - c|^2)`, unit
    /// L2 norm at `A = 1`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// `A exp(i p0 . x)`, `p0` on the momentum lattice.
    PlaneWave { momentum: Vec<f64>, amplitude: f64 },
    /// `sqrt(2) a sech(a x)`, the standing wave of focusing cubic NLS with
    /// phase `exp(i a^2 t)`. One-dimensional only.
    Soliton { scale: f64 },
}

impl Reference {
    pub fn gaussian(dim: usize, width: f64, amplitude: f64) -> Self {
        Reference::Gaussian { center: vec![0.0; dim], width, amplitude, chirp: 0.0 }
    }
}

/// Samples an analytic reference field on `grid`.
pub fn make_reference(kind: &Reference, grid: &Grid) -> Result<Field> {
    let n = grid.dim();
    match kind {
        Reference::Gaussian { center, width, amplitude, chirp } => {
            if center.len() != n {
                return Err(Error::InvalidArgument(format!("gaussian center has {} components, grid dimension is {n}", center.len())));
            }
            if !(*width > 0.0) {
                return Err(Error::InvalidArgument(format!("gaussian width {width} must be positive")));
            }
            let norm = amplitude * (2.0 / (PI * width * width)).powf(n as f64 / 4.0);
            let w2 = width * width;
            Field::from_fn(*grid, |x| {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                Complex64::from_polar(norm * (-r2 / w2).exp(), chirp * r2)
            })
        }
        Reference::PlaneWave { momentum, amplitude } => {
            if momentum.len() != n {
                return Err(Error::InvalidArgument(format!("plane-wave momentum has {} components, grid dimension is {n}", momentum.len())));
            }
            if momentum.iter().any(|&p| grid.lattice_index(p).is_none()) {
                return Err(Error::OffLattice { momentum: momentum.clone() });
            }
            Field::from_fn(*grid, |x| {
                let phase: f64 = x.iter().zip(momentum).map(|(a, p)| a * p).sum();
                Complex64::from_polar(*amplitude, phase)
            })
        }
        Reference::Soliton { scale } => {
            if n != 1 {
                return Err(Error::InvalidArgument("soliton reference is one-dimensional".into()));
            }
            let a = *scale;
            Field::from_fn(*grid, |x| Complex64::new(SQRT_2 * a / (a * x[0]).cosh(), 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gaussian_has_unit_mass() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = make_reference(&Reference::gaussian(1, 1.0, 1.0), &g).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-10);
        let g3 = Grid::new(3, 32, 6.0).unwrap();
        let f3 = make_reference(&Reference::gaussian(3, 1.0, 2.0), &g3).unwrap();
        assert!((f3.mass() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn plane_wave_has_constant_modulus() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let kind = Reference::PlaneWave { momentum: vec![PI / 4.0 * 3.0, -PI / 4.0], amplitude: 0.3 };
        let f = make_reference(&kind, &g).unwrap();
        assert!(f.values().iter().all(|v| (v.norm() - 0.3).abs() < 1e-14));
    }

    #[test]
    fn off_lattice_plane_wave_rejected() {
        let g = Grid::new(1, 16, 4.0).unwrap();
        let kind = Reference::PlaneWave { momentum: vec![1.0], amplitude: 1.0 };
        assert!(matches!(make_reference(&kind, &g), Err(Error::OffLattice { .. })));
    }

    #[test]
    fn soliton_mass_is_four() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = make_reference(&Reference::Soliton { scale: 1.0 }, &g).unwrap();
        assert!((f.mass() - 4.0).abs() < 1e-8);
        assert!(make_reference(&Reference::Soliton { scale: 1.0 }, &Grid::new(2, 8, 1.0).unwrap()).is_err());
    }
}
