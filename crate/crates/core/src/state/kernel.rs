use itertools::Itertools;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{fft, Field, Grid};

/// Default cap on the number of entries of a dense kernel.
pub const MAX_DENSE_ENTRIES: usize = 1 << 26;

/// Checks that an order-`k` kernel on `grid` fits in `cap` entries.
pub fn check_budget(order: usize, grid: &Grid, cap: usize) -> Result<usize> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "dense kernels are one-dimensional, grid has dimension {}",
            grid.dim()
        )));
    }
    if order == 0 {
        return Err(Error::OrderTooLow { got: 0, need: 1 });
    }
    let required = (grid.points() as u128).checked_pow(2 * order as u32).unwrap_or(u128::MAX);
    if required > cap as u128 {
        return Err(Error::Budget { required, available: cap as u128 });
    }
    Ok(required as usize)
}

/// An order-`k` density kernel `gamma(x_1..x_k; x'_1..x'_k)` on a 1-D grid.
///
/// Entries are stored row-major over the `2k` axes, so the kernel is also a
/// `m^k x m^k` matrix with rows indexed by `x` and columns by `x'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseKernel {
    order: usize,
    grid: Grid,
    values: Vec<Complex64>,
}

impl DenseKernel {
    pub fn new(order: usize, grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        let len = check_budget(order, &grid, MAX_DENSE_ENTRIES)?;
        if values.len() != len {
            return Err(Error::InvalidArgument(format!("kernel has {} entries, order {order} needs {len}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { what: "kernel entry", location: format!("flat index {i}") });
        }
        Ok(Self { order, grid, values })
    }

    pub fn zeros(order: usize, grid: Grid) -> Result<Self> {
        let len = check_budget(order, &grid, MAX_DENSE_ENTRIES)?;
        Ok(Self { order, grid, values: vec![Complex64::default(); len] })
    }

    pub(crate) fn from_raw(order: usize, grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.points().pow(2 * order as u32));
        Self { order, grid, values }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Matrix side `m^k`.
    pub fn side(&self) -> usize {
        self.grid.points().pow(self.order as u32)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Entry at row digits `x` and column digits `xp`.
    pub fn get(&self, x: &[usize], xp: &[usize]) -> Complex64 {
        let m = self.grid.points();
        let row = x.iter().fold(0, |acc, &i| acc * m + i);
        let col = xp.iter().fold(0, |acc, &i| acc * m + i);
        self.values[row * self.side() + col]
    }

    fn same_shape(&self, other: &DenseKernel) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.order != other.order {
            return Err(Error::InvalidArgument(format!("kernel orders differ: {} vs {}", self.order, other.order)));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.order, self.grid, self.values.iter().map(|v| v * c).collect())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &DenseKernel, c: Complex64) -> Result<Self> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b * c).collect();
        Ok(Self::from_raw(self.order, self.grid, values))
    }

    pub fn max_abs_diff(&self, other: &DenseKernel) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Quadrature L2 norm `(h^{2k} sum |gamma|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.spacing().powi(2 * self.order as i32);
        (w * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// The kernel `conj(gamma(x'; x))`.
    pub fn adjoint(&self) -> Self {
        let n = self.side();
        let mut out = vec![Complex64::default(); n * n];
        for r in 0..n {
            for c in 0..n {
                out[c * n + r] = self.values[r * n + c].conj();
            }
        }
        Self::from_raw(self.order, self.grid, out)
    }

    /// Diagonal entries `gamma(x; x)` in row order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let n = self.side();
        (0..n).map(|r| self.values[r * n + r]).collect()
    }

    /// `h^k sum_x gamma(x; x)`.
    pub fn trace(&self) -> Complex64 {
        let w = self.grid.spacing().powi(self.order as i32);
        self.diagonal().iter().sum::<Complex64>() * w
    }

    /// `h^k sum_x f(x) gamma(x; x)`, with `f` receiving the row digits.
    pub fn weighted_trace(&self, mut f: impl FnMut(&[usize]) -> f64) -> Complex64 {
        let w = self.grid.spacing().powi(self.order as i32);
        let m = self.grid.points();
        let n = self.side();
        let mut digits = vec![0; self.order];
        let mut total = Complex64::default();
        for r in 0..n {
            unravel(r, m, &mut digits);
            total += self.values[r * n + r] * f(&digits);
        }
        total * w
    }

    /// Max-norm hermitian defect `|gamma(x; x') - conj(gamma(x'; x))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.side();
        (0..n)
            .flat_map(|r| (r..n).map(move |c| (r, c)))
            .map(|(r, c)| (self.values[r * n + c] - self.values[c * n + r].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm anti-hermitian defect `|gamma(x; x') + conj(gamma(x'; x))|`.
    pub fn antihermitian_defect(&self) -> f64 {
        let n = self.side();
        (0..n)
            .flat_map(|r| (r..n).map(move |c| (r, c)))
            .map(|(r, c)| (self.values[r * n + c] + self.values[c * n + r].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// The kernel with both argument blocks permuted by `perm`:
    /// `out(x; x') = gamma(x_perm; x'_perm)`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.order;
        if perm.len() != k || !perm.iter().sorted().copied().eq(0..k) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{k}")));
        }
        let m = self.grid.points();
        let axes: Vec<usize> = perm.iter().copied().chain(perm.iter().map(|&p| p + k)).collect();
        let mut out = vec![Complex64::default(); self.values.len()];
        let mut digits = vec![0; 2 * k];
        for (flat, slot) in out.iter_mut().enumerate() {
            unravel(flat, m, &mut digits);
            let src = axes.iter().fold(0, |acc, &a| acc * m + digits[a]);
            *slot = self.values[src];
        }
        Ok(Self::from_raw(k, self.grid, out))
    }

    /// Max-norm defect over all simultaneous block permutations.
    pub fn permutation_defect(&self) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        (0..self.order)
            .permutations(self.order)
            .skip(1)
            .map(|p| self.max_abs_diff(&self.permuted(&p).expect("valid permutation")).expect("same shape"))
            .fold(0.0, f64::max)
    }

    /// Average over block permutations followed by the hermitian part.
    pub fn symmetrized(&self) -> Self {
        let perms: Vec<Vec<usize>> = (0..self.order).permutations(self.order).collect();
        let count = perms.len() as f64;
        let mut acc = vec![Complex64::default(); self.values.len()];
        for p in &perms {
            let g = self.permuted(p).expect("valid permutation");
            acc.iter_mut().zip(&g.values).for_each(|(a, b)| *a += b / count);
        }
        let sym = Self::from_raw(self.order, self.grid, acc);
        let adj = sym.adjoint();
        Self::from_raw(
            self.order,
            self.grid,
            sym.values.iter().zip(&adj.values).map(|(a, b)| (a + b) * 0.5).collect(),
        )
    }

    /// Raw DFT coefficients: forward transform on the `x` axes and the
    /// opposite sign on the `x'` axes, so that `(p; p')` pairs with
    /// `exp(i p.x - i p'.x')`.
    pub(crate) fn momentum_raw(&self) -> Vec<Complex64> {
        let mut c = self.values.clone();
        let k = self.order;
        fft::transform(&mut c, self.grid.points(), 2 * k, |axis| {
            if axis < k {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            }
        });
        c
    }

    /// Inverse of [`DenseKernel::momentum_raw`].
    pub(crate) fn from_momentum_raw(order: usize, grid: Grid, mut c: Vec<Complex64>) -> Self {
        fft::transform(&mut c, grid.points(), 2 * order, |axis| {
            if axis < order {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            }
        });
        let scale = 1.0 / c.len() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        Self::from_raw(order, grid, c)
    }

    /// Multiplies the momentum representation by `symbol(p, p')`, where the
    /// symbol receives momenta of the `x` block and of the `x'` block.
    pub fn apply_symbol(&self, mut symbol: impl FnMut(&[f64], &[f64]) -> Complex64) -> Self {
        let k = self.order;
        let m = self.grid.points();
        let freq = self.grid.frequencies();
        let mut c = self.momentum_raw();
        let mut digits = vec![0; 2 * k];
        let mut p = vec![0.0; k];
        let mut pp = vec![0.0; k];
        for (flat, v) in c.iter_mut().enumerate() {
            unravel(flat, m, &mut digits);
            for j in 0..k {
                p[j] = freq[digits[j]];
                pp[j] = freq[digits[k + j]];
            }
            *v *= symbol(&p, &pp);
        }
        Self::from_momentum_raw(k, self.grid, c)
    }

    /// The free flow `exp(i t Laplacian^(k))`, symbol
    /// `exp(-i t (sum |p_j|^2 - sum |p'_j|^2))`.
    pub fn free_flow(&self, t: f64) -> Self {
        self.apply_symbol(|p, pp| {
            let e: f64 = p.iter().map(|q| q * q).sum::<f64>() - pp.iter().map(|q| q * q).sum::<f64>();
            Complex64::from_polar(1.0, -t * e)
        })
    }

    /// Spectral derivative along one of the `2k` axes (`axis < k` is `x_j`).
    pub(crate) fn derivative(&self, axis: usize) -> Self {
        let k = self.order;
        let m = self.grid.points();
        let freq = self.grid.frequencies();
        // x axes pair with exp(+ipx), x' axes with exp(-ip'x')
        let (fwd, back, sign) = if axis < k {
            (FftDirection::Forward, FftDirection::Inverse, 1.0)
        } else {
            (FftDirection::Inverse, FftDirection::Forward, -1.0)
        };
        let mut c = self.values.clone();
        fft::transform_axis(&mut c, m, 2 * k, axis, fwd);
        let stride = m.pow((2 * k - 1 - axis) as u32);
        let scale = 1.0 / m as f64;
        c.par_iter_mut().enumerate().for_each(|(flat, v)| {
            let i = (flat / stride) % m;
            *v *= Complex64::new(0.0, sign * freq[i] * scale);
        });
        fft::transform_axis(&mut c, m, 2 * k, axis, back);
        Self::from_raw(k, self.grid, c)
    }

    /// Applies `symbol(p)` along a single axis.
    pub(crate) fn axis_multiplier(&self, axis: usize, symbol: impl Fn(f64) -> f64 + Sync) -> Self {
        let k = self.order;
        let m = self.grid.points();
        let freq = self.grid.frequencies();
        let (fwd, back) = if axis < k {
            (FftDirection::Forward, FftDirection::Inverse)
        } else {
            (FftDirection::Inverse, FftDirection::Forward)
        };
        let mut c = self.values.clone();
        fft::transform_axis(&mut c, m, 2 * k, axis, fwd);
        let stride = m.pow((2 * k - 1 - axis) as u32);
        let scale = 1.0 / m as f64;
        c.par_iter_mut().enumerate().for_each(|(flat, v)| {
            let i = (flat / stride) % m;
            *v *= symbol(freq[i]) * scale;
        });
        fft::transform_axis(&mut c, m, 2 * k, axis, back);
        Self::from_raw(k, self.grid, c)
    }

    /// The kernel as an `m^k x m^k` matrix.
    pub fn to_matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.side();
        nalgebra::DMatrix::from_row_slice(n, n, &self.values)
    }
}

/// Row-major digits of `flat` in base `m`.
pub(crate) fn unravel(mut flat: usize, m: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % m;
        flat /= m;
    }
}

/// The `k`-fold tensor power `phi(x_1) ... phi(x_k)` in row-major order.
pub(crate) fn tensor_power(phi: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        v = v.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
    }
    v
}

/// The rank-one product kernel `prod_j phi(x_j) conj(phi(x'_j))`.
pub fn factorized_kernel(phi: &Field, k: usize) -> Result<DenseKernel> {
    check_budget(k, phi.grid(), MAX_DENSE_ENTRIES)?;
    let v = tensor_power(phi.values(), k);
    let values = v.iter().flat_map(|a| v.iter().map(move |b| a * b.conj())).collect();
    Ok(DenseKernel::from_raw(k, *phi.grid(), values))
}

/// Integrates out the last particle: `h sum_y gamma(x, y; x', y)`.
pub fn partial_trace(g: &DenseKernel) -> Result<DenseKernel> {
    if g.order() < 2 {
        return Err(Error::OrderTooLow { got: g.order(), need: 2 });
    }
    if !g.is_finite() {
        return Err(Error::NonFinite { what: "kernel entry", location: "partial trace input".into() });
    }
    let m = g.grid().points();
    let k = g.order() - 1;
    let side = m.pow(k as u32);
    let h = g.grid().spacing();
    let src = g.values();
    let side_in = side * m;
    let mut out = vec![Complex64::default(); side * side];
    out.par_chunks_mut(side).enumerate().for_each(|(r, row)| {
        for (c, slot) in row.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for y in 0..m {
                acc += src[(r * m + y) * side_in + c * m + y];
            }
            *slot = acc * h;
        }
    });
    Ok(DenseKernel::from_raw(k, *g.grid(), out))
}

/// Hermitian and permutation defects of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub hermitian_defect: f64,
    pub permutation_defect: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.hermitian_defect.max(self.permutation_defect)
    }
}

pub fn symmetry_report(g: &DenseKernel) -> SymmetryReport {
    SymmetryReport { hermitian_defect: g.hermitian_defect(), permutation_defect: g.permutation_defect() }
}
