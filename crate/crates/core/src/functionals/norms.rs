use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DenseKernel, ProductMixture};

/// `||S_s^(k) gamma||_L2` with `S_s^(k) = prod_j (1 + |p_j|^2)^(s/2) (1 + |p'_j|^2)^(s/2)`.
pub fn kernel_hs_norm(g: &DenseKernel, s: f64) -> f64 {
    let k = g.order();
    let m = g.grid().points();
    let freq = g.grid().frequencies();
    let w1: Vec<f64> = freq.iter().map(|p| (1.0 + p * p).powf(s)).collect();
    let c = g.momentum_raw();
    let mut digits = vec![0; 2 * k];
    let mut total = 0.0;
    for (flat, v) in c.iter().enumerate() {
        crate::state::unravel(flat, m, &mut digits);
        let w: f64 = digits.iter().map(|&d| w1[d]).product();
        total += w * v.norm_sqr();
    }
    let scale = g.grid().spacing().powi(2 * k as i32) / (c.len() as f64);
    (scale * total).sqrt()
}

/// `||gamma^(k)||_{H^s_k}` of a mixture from the Gram identity
/// `sum_ab w_a w_b |<S^s phi_a, S^s phi_b>|^(2k)`.
pub fn mixture_hs_norm(mix: &ProductMixture, k: usize, s: f64) -> f64 {
    let gram = mix.hs_gram(s);
    let w = mix.weights();
    let mut total = 0.0;
    for a in 0..w.len() {
        for b in 0..w.len() {
            total += w[a] * w[b] * gram[a][b].norm_sqr().powi(k as i32);
        }
    }
    total.max(0.0).sqrt()
}

/// Model for the levels beyond the recorded head of a norm sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ratio", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    /// `a_k = a_K rho^(k-K)` for `k > K`.
    Geometric(f64),
}

/// Level norms `a_1..a_K` with a tail model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSequence {
    head: Vec<f64>,
    tail: Tail,
}

impl NormSequence {
    pub fn new(head: Vec<f64>, tail: Tail) -> Result<Self> {
        if let Some((i, a)) = head.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidArgument(format!("level norm a_{} = {a} must be finite and non-negative", i + 1)));
        }
        if let Tail::Geometric(r) = tail {
            if r.is_nan() || r < 0.0 {
                return Err(Error::InvalidArgument(format!("tail ratio {r} must be non-negative")));
            }
        }
        Ok(Self { head, tail })
    }

    /// Geometric tail fitted from the last two levels (zero tail if fewer
    /// than two levels or a vanishing penultimate level).
    pub fn with_fitted_tail(head: Vec<f64>) -> Result<Self> {
        let tail = match head.len() {
            0 | 1 => Tail::Zero,
            n if head[n - 2] > 0.0 => Tail::Geometric(head[n - 1] / head[n - 2]),
            _ => Tail::Zero,
        };
        Self::new(head, tail)
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    fn last(&self) -> f64 {
        self.head.last().copied().unwrap_or(0.0)
    }

    /// `sum a_k lambda^-k`, infinite when the tail diverges.
    pub fn weighted_sum(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        let mut pow = 1.0;
        for a in &self.head {
            pow /= lambda;
            total += a * pow;
        }
        if let Tail::Geometric(r) = self.tail {
            let a = self.last();
            if a > 0.0 && r > 0.0 {
                let q = r / lambda;
                if q >= 1.0 {
                    return f64::INFINITY;
                }
                total += a * pow * q / (1.0 - q);
            }
        }
        total
    }
}

/// `inf { lambda > 0 : sum_k a_k lambda^-k <= 1 }`.
pub fn seq_quasinorm(a: &NormSequence) -> Result<f64> {
    let ratio = match a.tail {
        Tail::Zero => 0.0,
        Tail::Geometric(r) => r,
    };
    if !ratio.is_finite() {
        return Err(Error::Divergent(format!("tail ratio {ratio} diverges for every lambda")));
    }
    if a.head.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let effective_ratio = if a.last() > 0.0 { ratio } else { 0.0 };
    // a_k <= c^k for every k, so the sum is at most (c/l)/(1 - c/l) = 1 at l = 2c
    let c = a
        .head
        .iter()
        .enumerate()
        .map(|(i, v)| v.powf(1.0 / (i + 1) as f64))
        .fold(effective_ratio, f64::max);
    if is_exact_geometric(a) {
        return Ok(2.0 * a.head[0]);
    }
    let (mut lo, mut hi) = (c, 2.0 * c);
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if a.weighted_sum(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn is_exact_geometric(a: &NormSequence) -> bool {
    let c = a.head[0];
    match a.tail {
        Tail::Geometric(r) if r == c && c > 0.0 => {
            a.head.iter().enumerate().all(|(i, v)| (v - c.powi(i as i32 + 1)).abs() <= 4.0 * f64::EPSILON * v)
        }
        _ => false,
    }
}

/// `sum_k xi^k a_k`.
pub fn xi_norm(a: &NormSequence, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidArgument(format!("xi = {xi} must lie in (0, 1)")));
    }
    let mut total = 0.0;
    let mut pow = 1.0;
    for v in &a.head {
        pow *= xi;
        total += v * pow;
    }
    if let Tail::Geometric(r) = a.tail {
        let last = a.last();
        if last > 0.0 && r > 0.0 {
            let q = xi * r;
            if q >= 1.0 {
                return Err(Error::Divergent(format!("xi * rho = {q} >= 1")));
            }
            total += last * pow * q / (1.0 - q);
        }
    }
    Ok(total)
}

/// An order-`k` level of either representation.
#[derive(Debug, Clone, Copy)]
pub enum Level<'a> {
    Dense(&'a DenseKernel),
    Mixture(&'a ProductMixture, usize),
}

impl<'a> From<&'a DenseKernel> for Level<'a> {
    fn from(g: &'a DenseKernel) -> Self {
        Level::Dense(g)
    }
}

/// Hermiticity tolerance for [`trace_norm_k`], relative to the largest entry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// `Tr |S gamma^(k) S|` with `S = prod_j (1 - Laplacian_j)^(1/2)`.
///
/// Dense levels use a singular value decomposition of the sandwiched kernel;
/// mixtures use `sum_r w_r ||phi_r||_{H^1}^(2k)`, valid because every
/// component is positive.
pub fn trace_norm_k<'a>(level: impl Into<Level<'a>>) -> Result<f64> {
    match level.into() {
        Level::Mixture(mix, k) => Ok(mix.components().map(|(w, f)| w * f.hs_norm_sq(1.0).powi(k as i32)).sum()),
        Level::Dense(g) => {
            let defect = g.hermitian_defect();
            if defect > HERMITIAN_TOLERANCE * g.max_abs().max(1.0) {
                return Err(Error::NotHermitian { defect });
            }
            let m = sandwiched_matrix(g);
            Ok(m.singular_values().iter().sum())
        }
    }
}

/// `h^k (S gamma S)` as a matrix acting on grid functions.
pub fn sandwiched_matrix(g: &DenseKernel) -> DMatrix<Complex64> {
    let sandwiched = g.apply_symbol(|p, pp| {
        let w: f64 = p.iter().chain(pp).map(|q| (1.0 + q * q).sqrt()).product();
        Complex64::new(w, 0.0)
    });
    sandwiched.to_matrix() * Complex64::new(g.grid().spacing().powi(g.order() as i32), 0.0)
}
