//! Collision operators `B^(k)` (cubic) and `Q^(k)` (quintic).
//!
//! Delta functions are exact index restrictions on the grid: `B_{j,+}` feeds
//! `x_j` into the extra pair of arguments, `B_{j,-}` feeds `x'_j`, and `Q_{j,±}`
//! does the same for two extra pairs.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Power, Side};
use crate::state::{check_budget, tensor_power, unravel, DenseKernel, ProductMixture, MAX_DENSE_ENTRIES};

/// Largest operation count accepted by [`apply_b_momentum`].
pub const MAX_MOMENTUM_COST: u128 = 1 << 22;

/// Output of a full collision operator.
#[derive(Debug, Clone)]
pub struct CollisionResult {
    pub kernel: DenseKernel,
    pub source_order: usize,
    pub j_range: RangeInclusive<usize>,
}

fn restrict(g: &DenseKernel, extra: usize, j: usize, side: Side) -> Result<DenseKernel> {
    let need = extra + 1;
    if g.order() < need {
        return Err(Error::OrderTooLow { got: g.order(), need });
    }
    let k = g.order() - extra;
    if j == 0 || j > k {
        return Err(Error::IndexOutOfRange { index: j, max: k });
    }
    let m = g.grid().points();
    let side_out = m.pow(k as u32);
    let lift = m.pow(extra as u32);
    // a * (1 + m + ... + m^(extra-1)) places digit a in every extra slot
    let repeat: usize = (0..extra).map(|i| m.pow(i as u32)).sum();
    let digit_stride = m.pow((k - j) as u32);
    let side_in = side_out * lift;
    let src = g.values();
    let mut out = vec![Complex64::default(); side_out * side_out];
    out.par_chunks_mut(side_out).enumerate().for_each(|(r, row)| {
        let ar = (r / digit_stride) % m;
        for (c, slot) in row.iter_mut().enumerate() {
            let a = match side {
                Side::Plus => ar,
                Side::Minus => (c / digit_stride) % m,
            };
            *slot = src[(r * lift + a * repeat) * side_in + c * lift + a * repeat];
        }
    });
    DenseKernel::new(k, *g.grid(), out)
}

/// `B_{j,±} gamma^(k+1)`, an order-`k` kernel.
pub fn apply_b_half(g: &DenseKernel, j: usize, side: Side) -> Result<DenseKernel> {
    restrict(g, 1, j, side)
}

/// `Q_{j,±} gamma^(k+2)`, an order-`k` kernel.
pub fn apply_q_half(g: &DenseKernel, j: usize, side: Side) -> Result<DenseKernel> {
    restrict(g, 2, j, side)
}

/// The collision half-operator for `power`.
pub fn apply_half(g: &DenseKernel, j: usize, side: Side, power: Power) -> Result<DenseKernel> {
    restrict(g, power.order_offset(), j, side)
}

/// `sum_j (C_{j,+} - C_{j,-}) g` for the collision family of `power`.
pub fn apply_collision(g: &DenseKernel, power: Power) -> Result<CollisionResult> {
    let extra = power.order_offset();
    if g.order() < extra + 1 {
        return Err(Error::OrderTooLow { got: g.order(), need: extra + 1 });
    }
    let k = g.order() - extra;
    let mut acc = DenseKernel::zeros(k, *g.grid())?;
    for j in 1..=k {
        let plus = restrict(g, extra, j, Side::Plus)?;
        let minus = restrict(g, extra, j, Side::Minus)?;
        acc.values_mut()
            .iter_mut()
            .zip(plus.values().iter().zip(minus.values()))
            .for_each(|(a, (p, q))| *a += p - q);
    }
    Ok(CollisionResult { kernel: acc, source_order: g.order(), j_range: 1..=k })
}

/// `B^(k) gamma^(k+1)`.
pub fn apply_b(g: &DenseKernel) -> Result<CollisionResult> {
    apply_collision(g, Power::Cubic)
}

/// `Q^(k) gamma^(k+2)`.
pub fn apply_q(g: &DenseKernel) -> Result<CollisionResult> {
    apply_collision(g, Power::Quintic)
}

/// `B^(k) gamma^(k+1)` evaluated as a shifted double sum over momenta.
///
/// With `gamma` expanded as `sum c(P; P') exp(i P.x - i P'.x')`, contracting
/// the extra pair onto `x_j` shifts the `j`-th momentum:
/// `c_out(p; p') = sum_{q,q'} c(.., p_j - q + q', .., q; p', q')`, and onto
/// `x'_j` shifts the primed one: `c(p, q; .., p'_j + q - q', .., q')`.
/// Independent of [`apply_b`]; intended as a cross-check at small sizes.
pub fn apply_b_momentum(g: &DenseKernel) -> Result<DenseKernel> {
    if g.order() < 2 {
        return Err(Error::OrderTooLow { got: g.order(), need: 2 });
    }
    let big_k = g.order();
    let k = big_k - 1;
    let m = g.grid().points();
    let cost = (m as u128).pow(2 * big_k as u32) * k as u128;
    if cost > MAX_MOMENTUM_COST {
        return Err(Error::Budget { required: cost, available: MAX_MOMENTUM_COST });
    }
    let c = g.momentum_raw();
    let stride = |axis: usize| m.pow((2 * big_k - 1 - axis) as u32);
    let s_q = stride(k);
    let s_qp = stride(2 * big_k - 1);
    let norm = 1.0 / (m * m) as f64;
    let out_len = m.pow(2 * k as u32);
    let out: Vec<Complex64> = (0..out_len)
        .into_par_iter()
        .map(|flat| {
            let mut digits = vec![0; 2 * k];
            unravel(flat, m, &mut digits);
            let base: usize = (0..k).map(|i| digits[i] * stride(i) + digits[k + i] * stride(big_k + i)).sum();
            let mut acc = Complex64::default();
            for j in 0..k {
                let (pj, sj) = (digits[j], stride(j));
                let (ppj, spj) = (digits[k + j], stride(big_k + j));
                for q in 0..m {
                    for qp in 0..m {
                        let extra = q * s_q + qp * s_qp;
                        let shifted = (pj + m + qp - q) % m;
                        let plus = base - pj * sj + shifted * sj + extra;
                        let shifted_p = (ppj + m + q - qp) % m;
                        let minus = base - ppj * spj + shifted_p * spj + extra;
                        acc += c[plus] - c[minus];
                    }
                }
            }
            acc * norm
        })
        .collect();
    Ok(DenseKernel::from_momentum_raw(k, *g.grid(), out))
}

/// `Tr[C_{1,+} gamma^(k+offset)]` for a mixture, in closed form:
/// `sum_r w_r ||phi_r||^(2(k-1)) ||phi_r||_{L^(2 sigma + 2)}^(2 sigma + 2)`.
pub fn interaction_trace_mixture(mix: &ProductMixture, k: usize, power: Power) -> f64 {
    let p = 2 * power.sigma() + 2;
    mix.level_sum(k, |phi| phi.lp_pow(p))
}

/// `Tr[C_{j,+} g]` on the dense path, the diagonal trace of the restricted
/// kernel.
pub fn interaction_trace_dense(g: &DenseKernel, j: usize, power: Power) -> Result<f64> {
    Ok(apply_half(g, j, Side::Plus, power)?.trace().re)
}

/// `C^(k) gamma^(k+offset)` for a mixture, built directly from the
/// components without materializing the higher level:
/// `sum_r w_r (a_r(x) - a_r(x')) prod_j phi_r(x_j) conj(phi_r(x'_j))` with
/// `a_r(x) = sum_j |phi_r(x_j)|^(2 sigma)`.
pub fn mixture_collision_dense(mix: &ProductMixture, k: usize, power: Power) -> Result<DenseKernel> {
    let len = check_budget(k, mix.grid(), MAX_DENSE_ENTRIES)?;
    let m = mix.grid().points();
    let sigma = power.sigma();
    let mut out = vec![Complex64::default(); len];
    for (w, phi) in mix.components() {
        let density: Vec<f64> = phi.values().iter().map(|v| v.norm_sqr().powi(sigma)).collect();
        let v = tensor_power(phi.values(), k);
        let side = v.len();
        let a: Vec<f64> = (0..side)
            .map(|r| {
                let mut digits = vec![0; k];
                unravel(r, m, &mut digits);
                digits.iter().map(|&d| density[d]).sum()
            })
            .collect();
        out.par_chunks_mut(side).enumerate().for_each(|(r, row)| {
            let vr = v[r] * w;
            for (c, slot) in row.iter_mut().enumerate() {
                *slot += vr * v[c].conj() * (a[r] - a[c]);
            }
        });
    }
    DenseKernel::new(k, *mix.grid(), out)
}
