use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// A one-particle wavefunction sampled on a periodic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { what: "field value", location: format!("flat index {i}") });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::default(); grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let x = grid.coordinates();
        let mut pos = vec![0.0; grid.dim()];
        let values = grid.per_point(|idx| {
            for (p, &i) in pos.iter_mut().zip(idx) {
                *p = x[i];
            }
            f(&pos)
        });
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn conj(&self) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v.conj()).collect())
    }

    /// `(1 - theta) a + theta b`.
    pub fn lerp(a: &Field, b: &Field, theta: f64) -> Result<Self> {
        if a.grid != b.grid {
            return Err(Error::GridMismatch);
        }
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x * (1.0 - theta) + y * theta).collect();
        Ok(Self::from_raw(a.grid, values))
    }

    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Fourier coefficients in the continuous-transform normalization
    /// `f(p) = integral f(x) exp(-i p.x) dx`, in FFT order.
    pub fn to_momentum(&self) -> Vec<Complex64> {
        let mut c = self.values.clone();
        fft::forward(&mut c, self.grid.points(), self.grid.dim());
        let h = self.grid.cell_volume();
        let phases = lattice_phases(&self.grid);
        c.iter_mut().zip(&phases).for_each(|(v, s)| *v *= h * s);
        c
    }

    /// Inverse of [`Field::to_momentum`].
    pub fn from_momentum(grid: Grid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument("coefficient count does not match grid".into()));
        }
        let h = grid.cell_volume();
        let phases = lattice_phases(&grid);
        let mut c: Vec<Complex64> = coeffs.iter().zip(&phases).map(|(v, s)| v * (s / h)).collect();
        fft::inverse(&mut c, grid.points(), grid.dim());
        Self::new(grid, c)
    }

    /// Integral of `|f|^2`.
    pub fn mass(&self) -> f64 {
        self.lp_pow(2)
    }

    /// Integral of `|f|^p` for integer `p`.
    pub fn lp_pow(&self, p: i32) -> f64 {
        let h = self.grid.cell_volume();
        if p % 2 == 0 {
            h * self.values.iter().map(|v| v.norm_sqr().powi(p / 2)).sum::<f64>()
        } else {
            h * self.values.iter().map(|v| v.norm().powi(p)).sum::<f64>()
        }
    }

    /// `||grad f||^2`, evaluated in momentum space.
    pub fn kinetic(&self) -> f64 {
        let p2 = self.grid.momentum_sq();
        self.weighted_spectrum(|i| p2[i])
    }

    /// `||f||_{H^s}^2 = sum (1 + |p|^2)^s |f(p)|^2`.
    pub fn hs_norm_sq(&self, s: f64) -> f64 {
        let p2 = self.grid.momentum_sq();
        self.weighted_spectrum(|i| (1.0 + p2[i]).powf(s))
    }

    pub fn h1_norm(&self) -> f64 {
        self.hs_norm_sq(1.0).sqrt()
    }

    fn weighted_spectrum(&self, w: impl Fn(usize) -> f64) -> f64 {
        let mut c = self.values.clone();
        fft::forward(&mut c, self.grid.points(), self.grid.dim());
        // Parseval with the discrete scaling: h^n / m^n * sum |DFT|^2
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        scale * c.iter().enumerate().map(|(i, v)| w(i) * v.norm_sqr()).sum::<f64>()
    }

    /// Spectral partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Result<Field> {
        if axis >= self.grid.dim() {
            return Err(Error::IndexOutOfRange { index: axis + 1, max: self.grid.dim() });
        }
        let p = self.grid.frequencies();
        let mult = Multiplier::from_fn(&self.grid, |idx| Complex64::new(0.0, p[idx[axis]]));
        Ok(mult.apply(self))
    }

    /// Integral of `|x|^2 |f|^2`.
    pub fn second_moment(&self) -> f64 {
        let r2 = self.grid.radius_sq();
        let h = self.grid.cell_volume();
        h * self.values.iter().zip(&r2).map(|(v, r)| r * v.norm_sqr()).sum::<f64>()
    }

    /// `4 Im integral conj(f) x . grad f`, the time derivative of
    /// [`Field::second_moment`] along the Schroedinger flow.
    pub fn current_moment(&self) -> f64 {
        let x = self.grid.coordinates();
        let h = self.grid.cell_volume();
        let mut idx = vec![0; self.grid.dim()];
        let mut total = 0.0;
        for axis in 0..self.grid.dim() {
            let d = self.derivative(axis).expect("axis in range");
            for (flat, (v, dv)) in self.values.iter().zip(d.values()).enumerate() {
                self.grid.unravel(flat, &mut idx);
                total += x[idx[axis]] * (v.conj() * dv).im;
            }
        }
        4.0 * h * total
    }
}

/// `(-1)^(sum of frequency labels)`: the phase from shifting the box origin
/// to `-L`.
fn lattice_phases(grid: &Grid) -> Vec<f64> {
    grid.per_point(|idx| {
        let parity: usize = idx.iter().sum();
        if parity % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// A Fourier multiplier tabulated on the momentum lattice.
#[derive(Debug, Clone)]
pub struct Multiplier {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Multiplier {
    /// Tabulates `symbol(p)`; rejects the first non-finite value.
    pub fn from_symbol(grid: &Grid, mut symbol: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let p = grid.frequencies();
        let mut mom = vec![0.0; grid.dim()];
        let mut values = Vec::with_capacity(grid.len());
        let mut idx = vec![0; grid.dim()];
        for flat in 0..grid.len() {
            grid.unravel(flat, &mut idx);
            for (q, &i) in mom.iter_mut().zip(&idx) {
                *q = p[i];
            }
            let v = symbol(&mom);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSymbol { momentum: mom });
            }
            values.push(v);
        }
        Ok(Self { grid: *grid, values })
    }

    pub(crate) fn from_fn(grid: &Grid, f: impl FnMut(&[usize]) -> Complex64) -> Self {
        Self { grid: *grid, values: grid.per_point(f) }
    }

    /// The free propagator `exp(i t Laplacian)`, symbol `exp(-i t |p|^2)`.
    pub fn free_propagator(grid: &Grid, t: f64) -> Self {
        let p2 = grid.momentum_sq();
        Self { grid: *grid, values: p2.iter().map(|q| Complex64::from_polar(1.0, -t * q)).collect() }
    }

    pub fn apply(&self, f: &Field) -> Field {
        let mut v = f.values.clone();
        self.apply_in_place(&mut v);
        Field::from_raw(f.grid, v)
    }

    pub(crate) fn apply_in_place(&self, v: &mut [Complex64]) {
        let m = self.grid.points();
        let d = self.grid.dim();
        fft::forward(v, m, d);
        v.iter_mut().zip(&self.values).for_each(|(a, s)| *a *= s);
        fft::inverse(v, m, d);
    }
}

/// Multiplies the Fourier coefficients of `f` by `symbol(p)`.
pub fn apply_multiplier(f: &Field, symbol: impl FnMut(&[f64]) -> Complex64) -> Result<Field> {
    if !f.is_finite() {
        return Err(Error::NonFinite { what: "field value", location: "input".into() });
    }
    Ok(Multiplier::from_symbol(f.grid(), symbol)?.apply(f))
}

/// Trapezoid pairing `h^n sum conj(f) g` on the torus.
pub fn quadrature_inner(f: &Field, g: &Field) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let h = f.grid.cell_volume();
    Ok(f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(grid: Grid) -> Field {
        let norm = (2.0 / PI).powf(0.25 * grid.dim() as f64);
        Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Complex64::new(norm * (-r2).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn identity_multiplier_is_identity() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let f = gaussian(g);
        let out = apply_multiplier(&f, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(out.max_abs_diff(&f).unwrap() < 1e-14);
    }

    #[test]
    fn plane_wave_is_multiplier_eigenfunction() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let p0 = [3.0 * PI / 3.0, -2.0 * PI / 3.0];
        let f = Field::from_fn(g, |x| Complex64::from_polar(0.7, p0[0] * x[0] + p0[1] * x[1])).unwrap();
        let s = 1.5;
        let out = apply_multiplier(&f, |p| Complex64::new((1.0 + p[0] * p[0] + p[1] * p[1]).powf(s / 2.0), 0.0)).unwrap();
        let eig = (1.0 + p0[0] * p0[0] + p0[1] * p0[1]).powf(s / 2.0);
        assert!(out.max_abs_diff(&f.scaled(Complex64::new(eig, 0.0))).unwrap() < 1e-12);
    }

    #[test]
    fn laplacian_pairing_of_gaussian_is_one() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = gaussian(g);
        let lap = apply_multiplier(&f, |p| Complex64::new(p[0] * p[0], 0.0)).unwrap();
        let pairing = quadrature_inner(&f, &lap).unwrap();
        assert!((pairing.re - 1.0).abs() < 1e-8);
        assert!(pairing.im.abs() < 1e-12);
    }

    #[test]
    fn non_finite_symbol_names_momentum() {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let f = Field::zeros(g);
        let err = apply_multiplier(&f, |p| Complex64::new(1.0 / p[0], 0.0)).unwrap_err();
        match err {
            Error::NonFiniteSymbol { momentum } => assert_eq!(momentum, vec![0.0]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn quadrature_inner_cases() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = gaussian(g);
        assert!((quadrature_inner(&f, &f).unwrap().re - 1.0).abs() < 1e-10);
        let pw = |n: f64| Field::from_fn(g, move |x| Complex64::from_polar(1.0, n * PI / 16.0 * x[0])).unwrap();
        assert!(quadrature_inner(&pw(3.0), &pw(5.0)).unwrap().norm() < 1e-12);
        let z = Field::zeros(g);
        assert_eq!(quadrature_inner(&z, &z).unwrap(), Complex64::default());
        let other = Field::zeros(Grid::new(1, 128, 16.0).unwrap());
        assert!(matches!(quadrature_inner(&z, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn momentum_round_trip() {
        let g = Grid::new(1, 32, 4.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), x[0].sin() * 0.1)).unwrap();
        let back = Field::from_momentum(g, &f.to_momentum()).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-13);
    }

    #[test]
    fn continuous_transform_of_gaussian() {
        // integral exp(-x^2) exp(-ipx) dx = sqrt(pi) exp(-p^2/4)
        let g = Grid::new(1, 128, 12.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        let c = f.to_momentum();
        for (i, v) in c.iter().enumerate() {
            let p = g.frequency(i);
            let want = PI.sqrt() * (-p * p / 4.0).exp();
            assert!((v - want).norm() < 1e-12, "p = {p}: {v} vs {want}");
        }
    }

    #[test]
    fn gaussian_moments() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = gaussian(g);
        assert!((f.kinetic() - 1.0).abs() < 1e-10);
        assert!((f.lp_pow(4) - 1.0 / PI.sqrt()).abs() < 1e-10);
        assert!((f.second_moment() - 0.25).abs() < 1e-10);
        assert!(f.current_moment().abs() < 1e-12);
    }
}
