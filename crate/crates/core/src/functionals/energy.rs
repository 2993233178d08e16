use serde::{Deserialize, Serialize};

use crate::collision::{interaction_trace_dense, interaction_trace_mixture};
use crate::error::{Error, Result};
use crate::model::{Power, Sign};
use crate::spectral::{quadrature_inner, Field};
use crate::state::{DenseKernel, HierarchyTruncation, ProductMixture, StateRef};

/// Largest relative disagreement accepted between the two kinetic forms.
pub const KINETIC_FORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticForm {
    GradientPairing,
    Laplacian,
}

/// Energy `E_k` split into its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub k: usize,
    /// `1/2 sum_j Tr[grad_{x_j} . grad_{x'_j} gamma^(k)]`.
    pub kinetic: f64,
    /// The same quantity from `-1/2 sum_j Tr[Laplacian_{x_j} gamma^(k)]`.
    pub kinetic_laplacian: f64,
    /// `sum_j Tr[C_{j,+} gamma^(k+offset)]`.
    pub interaction: f64,
    /// `kinetic + mu c interaction` with `c = 1/4` (cubic) or `1/6` (quintic).
    pub total: f64,
    pub form_used: KineticForm,
    /// Relative difference between the two kinetic forms.
    pub form_defect: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// One-particle kinetic energy `||grad phi||^2` as a position-space
/// quadrature of spectral derivatives.
fn gradient_pairing(phi: &Field) -> f64 {
    (0..phi.grid().dim())
        .map(|axis| {
            let d = phi.derivative(axis).expect("axis in range");
            quadrature_inner(&d, &d).expect("same grid").re
        })
        .sum()
}

/// Summed kinetic traces of a dense level in the gradient-pairing form
/// `Tr[d_j d'_j gamma]` and the Laplacian forms on either argument block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticForms {
    pub gradient_pairing: f64,
    pub laplacian: f64,
    pub laplacian_primed: f64,
}

impl KineticForms {
    /// Largest relative disagreement between the gradient pairing and either
    /// Laplacian form.
    pub fn defect(&self) -> f64 {
        relative(self.gradient_pairing, self.laplacian).max(relative(self.gradient_pairing, self.laplacian_primed))
    }
}

pub fn kinetic_forms(g: &DenseKernel) -> KineticForms {
    let k = g.order();
    let mut out = KineticForms { gradient_pairing: 0.0, laplacian: 0.0, laplacian_primed: 0.0 };
    for j in 0..k {
        out.gradient_pairing += g.derivative(j).derivative(k + j).trace().re;
        out.laplacian += g.axis_multiplier(j, |p| p * p).trace().re;
        out.laplacian_primed += g.axis_multiplier(k + j, |p| p * p).trace().re;
    }
    out
}

fn dense_interaction(t: &HierarchyTruncation, k: usize, power: Power) -> Result<f64> {
    let upper = t.level(k + power.order_offset())?;
    (1..=k).map(|j| interaction_trace_dense(upper, j, power)).sum()
}

/// The conserved energy `E_k`.
pub fn energy<'a>(state: impl Into<StateRef<'a>>, k: usize, mu: Sign, power: Power) -> Result<EnergyReport> {
    if k == 0 {
        return Err(Error::LevelUnavailable(0));
    }
    let (kinetic, kinetic_laplacian, form_defect, interaction) = match state.into() {
        StateRef::Mixture(mix) => {
            let kf = k as f64;
            let grad = 0.5 * kf * mix.level_sum(k, gradient_pairing);
            let lap = 0.5 * kf * mix.level_sum(k, Field::kinetic);
            let inter = kf * interaction_trace_mixture(mix, k, power);
            (grad, lap, relative(grad, lap), inter)
        }
        StateRef::Truncation(t) => {
            let g = t.level(k)?;
            let inter = dense_interaction(t, k, power)?;
            let forms = kinetic_forms(g);
            (0.5 * forms.gradient_pairing, 0.5 * forms.laplacian, forms.defect(), inter)
        }
    };
    if form_defect > KINETIC_FORM_TOLERANCE {
        return Err(Error::Invariant(format!(
            "kinetic forms disagree: gradient pairing {kinetic:e}, laplacian {kinetic_laplacian:e} (relative {form_defect:e})"
        )));
    }
    let total = kinetic + mu.value() * power.energy_prefactor() * interaction;
    Ok(EnergyReport { k, kinetic, kinetic_laplacian, interaction, total, form_used: KineticForm::GradientPairing, form_defect })
}

/// One-particle energy `1/2 ||grad phi||^2 + mu c ||phi||_{2 sigma + 2}^{2 sigma + 2}`.
pub fn nls_energy(f: &Field, mu: Sign, power: Power) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::NonFinite { what: "field value", location: "energy input".into() });
    }
    let p = 2 * power.sigma() + 2;
    Ok(0.5 * f.kinetic() + mu.value() * power.energy_prefactor() * f.lp_pow(p))
}

/// `V_k = Tr[|x_k|^2 gamma^(k)]`.
pub fn virial<'a>(state: impl Into<StateRef<'a>>, k: usize) -> Result<f64> {
    match state.into() {
        StateRef::Mixture(mix) => Ok(k as f64 * mix.level_sum(k, Field::second_moment)),
        StateRef::Truncation(t) => {
            let g = t.level(k)?;
            let x = g.grid().coordinates();
            Ok(g.weighted_trace(|d| d.iter().map(|&i| x[i] * x[i]).sum()).re)
        }
    }
}

/// `dV_k/dt = 2 sum_j integral x_j P_j` with the current
/// `P_j = (p_j + p'_j) gamma^(k)` restricted to the diagonal.
pub fn virial_dt<'a>(state: impl Into<StateRef<'a>>, k: usize) -> Result<f64> {
    match state.into() {
        StateRef::Mixture(mix) => Ok(k as f64 * mix.level_sum(k, Field::current_moment)),
        StateRef::Truncation(t) => {
            let g = t.level(k)?;
            let x = g.grid().coordinates();
            let mut total = 0.0;
            for j in 0..k {
                let current = g.apply_symbol(|p, pp| (p[j] + pp[j]).into());
                total += current.weighted_trace(|d| x[d[j]]).re;
            }
            Ok(2.0 * total)
        }
    }
}

/// Right side of the virial identity:
/// `8 sum_j Tr[-Lap_j gamma^(k)] + n mu c' sum_j Tr[C_{j,+} gamma^(k+offset)]`
/// with `c' = 2` (cubic) or `8/3` (quintic).
pub fn virial_rhs<'a>(state: impl Into<StateRef<'a>>, k: usize, mu: Sign, power: Power) -> Result<f64> {
    let state = state.into();
    let report = energy(state, k, mu, power)?;
    let n = match state {
        StateRef::Mixture(mix) => mix.grid().dim(),
        StateRef::Truncation(t) => t.grid().dim(),
    } as f64;
    Ok(16.0 * report.kinetic + n * mu.value() * power.virial_prefactor() * report.interaction)
}

/// `sum_j Tr[-Lap_j gamma^(k)]` for a mixture, the quantity the uncertainty
/// principle bounds below by `1/V_k`.
pub fn kinetic_trace(mix: &ProductMixture, k: usize) -> f64 {
    k as f64 * mix.level_sum(k, Field::kinetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_reference, Grid, Reference};
    use std::f64::consts::PI;

    fn unit_gaussian() -> Field {
        make_reference(&Reference::gaussian(1, 1.0, 1.0), &Grid::new(1, 256, 16.0).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_energy() {
        let want = 0.5 + 0.25 / PI.sqrt();
        let f = unit_gaussian();
        assert!((nls_energy(&f, Sign::Defocusing, Power::Cubic).unwrap() - want).abs() < 1e-7);
        let mix = ProductMixture::single(f);
        let rep = energy(&mix, 1, Sign::Defocusing, Power::Cubic).unwrap();
        assert!((rep.total - want).abs() < 1e-7);
        let rep3 = energy(&mix, 3, Sign::Defocusing, Power::Cubic).unwrap();
        assert!((rep3.total - 3.0 * want).abs() < 1e-7);
    }

    #[test]
    fn zero_state_energy() {
        let z = Field::zeros(Grid::new(1, 32, 4.0).unwrap());
        assert_eq!(nls_energy(&z, Sign::Focusing, Power::Quintic).unwrap(), 0.0);
    }

    #[test]
    fn soliton_energy_two_ways() {
        let f = make_reference(&Reference::Soliton { scale: 1.0 }, &Grid::new(1, 512, 24.0).unwrap()).unwrap();
        let momentum = nls_energy(&f, Sign::Focusing, Power::Cubic).unwrap();
        let position = 0.5 * gradient_pairing(&f) - 0.25 * f.lp_pow(4);
        assert!((momentum - position).abs() < 1e-10);
        // analytic: ||phi'||^2 = 4/3, ||phi||_4^4 = 16/3, E = 2/3 - 4/3
        assert!((momentum + 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_virial() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let mix = ProductMixture::single(unit_gaussian());
        assert!((virial(&mix, 1).unwrap() - 0.25).abs() < 1e-8);
        assert!((virial(&mix, 2).unwrap() - 0.5).abs() < 1e-8);
        let c = 1.5;
        let shifted = make_reference(&Reference::Gaussian { center: vec![c], width: 1.0, amplitude: 1.0, chirp: 0.0 }, &g).unwrap();
        assert!((virial(&ProductMixture::single(shifted.clone()), 1).unwrap() - (0.25 + c * c)).abs() < 1e-8);
        assert!(virial_dt(&ProductMixture::single(shifted), 1).unwrap().abs() < 1e-10);
        let boosted = make_reference(&Reference::gaussian(1, 1.0, 1.0), &g).unwrap();
        let p0 = g.frequency(5);
        let moving = Field::from_fn(g, |x| Complex64::from_polar(1.0, p0 * x[0])).unwrap();
        let product = Field::new(g, boosted.values().iter().zip(moving.values()).map(|(a, b)| a * b).collect()).unwrap();
        assert!(virial_dt(&ProductMixture::single(product), 1).unwrap().abs() < 1e-10);
    }

    use num_complex::Complex64;

    #[test]
    fn one_particle_virial_rhs() {
        let f = unit_gaussian();
        let mix = ProductMixture::single(f.clone());
        let got = virial_rhs(&mix, 1, Sign::Focusing, Power::Cubic).unwrap();
        let want = 8.0 * f.kinetic() - 2.0 * f.lp_pow(4);
        assert!((got - want).abs() < 1e-10);
    }
}
