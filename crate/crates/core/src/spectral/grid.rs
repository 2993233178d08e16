use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of grid points accepted for a one-particle field.
pub const MAX_GRID_POINTS: usize = 1 << 24;

/// Uniform periodic grid on the box `[-L, L)^n` with `m` points per axis.
///
/// The momentum lattice per axis is `(pi / L) * {-m/2, ..., m/2 - 1}`, laid
/// out in FFT order (non-negative frequencies first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    halfwidth: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, halfwidth: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} must be 1, 2 or 3")));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("points per axis {points} must be even and >= 2")));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::InvalidGrid(format!("halfwidth {halfwidth} must be positive")));
        }
        let total = (points as u128).pow(dim as u32);
        if total > MAX_GRID_POINTS as u128 {
            return Err(Error::Budget { required: total, available: MAX_GRID_POINTS as u128 });
        }
        Ok(Self { dim, points, halfwidth })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    /// Grid spacing `h = 2L / m`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / self.points as f64
    }

    /// Total number of points `m^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^n` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Weight of one lattice momentum, `(dp / 2 pi)^n = (2L)^-n`.
    pub fn momentum_weight(&self) -> f64 {
        (2.0 * self.halfwidth).powi(-(self.dim as i32))
    }

    /// Coordinate of index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.halfwidth + i as f64 * self.spacing()
    }

    /// Integer frequency label of FFT index `i` in `{-m/2, ..., m/2 - 1}`.
    pub fn frequency_label(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Momentum of FFT index `i` along any axis.
    pub fn frequency(&self, i: usize) -> f64 {
        self.frequency_label(i) as f64 * PI / self.halfwidth
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.frequency(i)).collect()
    }

    /// Splits a flat row-major index into per-axis indices.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.dim);
        for slot in out.iter_mut().rev() {
            *slot = flat % self.points;
            flat /= self.points;
        }
    }

    /// Squared distance from the origin of every grid point.
    pub fn radius_sq(&self) -> Vec<f64> {
        let x = self.coordinates();
        self.per_point(|idx| idx.iter().map(|&i| x[i] * x[i]).sum())
    }

    /// `|p|^2` for every lattice momentum, in FFT order.
    pub fn momentum_sq(&self) -> Vec<f64> {
        let p = self.frequencies();
        self.per_point(|idx| idx.iter().map(|&i| p[i] * p[i]).sum())
    }

    /// Evaluates `f` on per-axis index tuples in flat order.
    pub fn per_point<T>(&self, mut f: impl FnMut(&[usize]) -> T) -> Vec<T> {
        let mut idx = vec![0usize; self.dim];
        (0..self.len())
            .map(|flat| {
                self.unravel(flat, &mut idx);
                f(&idx)
            })
            .collect()
    }

    /// Returns the lattice index of momentum `p` along one axis, if `p` lies
    /// on the lattice.
    pub fn lattice_index(&self, p: f64) -> Option<usize> {
        let label = p * self.halfwidth / PI;
        let rounded = label.round();
        if (label - rounded).abs() > 1e-9 * label.abs().max(1.0) {
            return None;
        }
        let m = self.points as i64;
        let n = rounded as i64;
        if n < -m / 2 || n >= m / 2 {
            return None;
        }
        Some(n.rem_euclid(m) as usize)
    }
}
