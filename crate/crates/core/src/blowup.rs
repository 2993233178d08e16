//! Glassey bounds, blowup-time detection and rate fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy, Diagnostic};
use crate::model::{Power, Sign};
use crate::spectral::Field;
use crate::state::ProductMixture;
use crate::trajectory::TrajectoryRecord;

/// Tolerance on the fitted exponent when comparing with a lower bound.
pub const RATE_TOLERANCE: f64 = 0.05;

/// Outcome of the Glassey argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum GlasseyBound {
    /// `V(t) <= v0 + vdot0 t + 8 e0 t^2` vanishes no later than this time.
    Finite(f64),
    /// Non-negative energy: the argument gives no bound.
    NotApplicable,
}

impl GlasseyBound {
    pub fn time(&self) -> Option<f64> {
        match self {
            GlasseyBound::Finite(t) => Some(*t),
            GlasseyBound::NotApplicable => None,
        }
    }
}

/// Positive root of `v0 + vdot0 t + 8 e0 t^2` for `e0 < 0`.
pub fn glassey_bound(e0: f64, v0: f64, vdot0: f64) -> Result<GlasseyBound> {
    if !(e0.is_finite() && v0.is_finite() && vdot0.is_finite()) {
        return Err(Error::InvalidArgument("Glassey inputs must be finite".into()));
    }
    if !(v0 > 0.0) {
        return Err(Error::InvalidArgument(format!("V(0) = {v0} must be positive")));
    }
    if e0 >= 0.0 {
        return Ok(GlasseyBound::NotApplicable);
    }
    let a = 8.0 * e0;
    let disc = vdot0 * vdot0 - 4.0 * a * v0;
    // a < 0 and v0 > 0 make the discriminant positive and the roots of opposite sign
    Ok(GlasseyBound::Finite((-vdot0 - disc.sqrt()) / (2.0 * a)))
}

/// Blowup-rate regimes with their lower-bound exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateRegime {
    /// Cubic, `s > n/2`: rate `(T - t)^-1`.
    #[serde(rename = "cubic_s_gt_n2")]
    CubicHighRegularity,
    /// Cubic, `s > (n-1)/2`: rate `(T - t)^-1/2`.
    #[serde(rename = "cubic_s_gt_nm1_2")]
    CubicLowRegularity,
    /// Quintic, `s > n/2`: rate `(T - t)^-1/2`.
    #[serde(rename = "quintic_s_gt_n2")]
    QuinticHighRegularity,
    /// Quintic, `s > (n-1)/2`: rate `(T - t)^-1/4`.
    #[serde(rename = "quintic_s_gt_nm1_2")]
    QuinticLowRegularity,
}

impl RateRegime {
    pub const ALL: [RateRegime; 4] = [
        RateRegime::CubicHighRegularity,
        RateRegime::CubicLowRegularity,
        RateRegime::QuinticHighRegularity,
        RateRegime::QuinticLowRegularity,
    ];

    pub fn bound_exponent(self) -> f64 {
        match self {
            RateRegime::CubicHighRegularity => 1.0,
            RateRegime::CubicLowRegularity | RateRegime::QuinticHighRegularity => 0.5,
            RateRegime::QuinticLowRegularity => 0.25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RateRegime::CubicHighRegularity => "cubic_s_gt_n2",
            RateRegime::CubicLowRegularity => "cubic_s_gt_nm1_2",
            RateRegime::QuinticHighRegularity => "quintic_s_gt_n2",
            RateRegime::QuinticLowRegularity => "quintic_s_gt_nm1_2",
        }
    }

    /// The strongest bound that applies to `power` at regularity `s` in
    /// dimension `dim`, if any.
    pub fn applicable(power: Power, s: f64, dim: usize) -> Option<Self> {
        let n = dim as f64;
        let (high, low) = match power {
            Power::Cubic => (RateRegime::CubicHighRegularity, RateRegime::CubicLowRegularity),
            Power::Quintic => (RateRegime::QuinticHighRegularity, RateRegime::QuinticLowRegularity),
        };
        if s > n / 2.0 {
            Some(high)
        } else if s > (n - 1.0) / 2.0 {
            Some(low)
        } else {
            None
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rate regime '{name}'")))
    }
}

/// Estimated blowup time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detection {
    Blowup {
        t_star: f64,
        /// `R^2` of the linear fit of `N^(-1/p)` against `t`.
        confidence: f64,
        /// Trial exponent with the best linear fit.
        exponent: f64,
    },
    NoBlowup,
}

/// Least-squares line `y = a + b x`, returning `(a, b, r2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

/// Samples `(t, N)` in the final decade of norm growth: the trailing run
/// with `N >= N_final / 10`.
fn final_decade(times: &[f64], norms: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let last = *norms.last().expect("non-empty series");
    let floor = last / 10.0;
    let start = norms.iter().rposition(|&v| v < floor).map_or(0, |i| i + 1);
    (times[start..].to_vec(), norms[start..].to_vec())
}

/// Series name used for the `ℋ^s` norm of a trajectory.
pub fn norm_series_name(s: f64) -> String {
    Diagnostic::QuasiNorm(s).to_string()
}

fn norm_series(traj: &TrajectoryRecord, s: f64) -> Result<Vec<f64>> {
    if let Ok(series) = traj.series(&norm_series_name(s)) {
        return Ok(series.to_vec());
    }
    if traj.states.len() == traj.times.len() && !traj.states.is_empty() {
        return traj
            .states
            .iter()
            .map(|st| {
                let mix = st
                    .as_mixture()
                    .ok_or_else(|| Error::InvalidArgument("norm series needs mixture states".into()))?;
                Diagnostic::QuasiNorm(s).evaluate(&mix, traj.mu, traj.power)
            })
            .collect();
    }
    Err(Error::InvalidArgument(format!("trajectory records neither '{}' nor its states", norm_series_name(s))))
}

/// Estimates `T*` by extrapolating `N(t)^(-1/p)` linearly to zero, for the
/// trial `p` whose final-decade fit is most linear.
pub fn detect_blowup(traj: &TrajectoryRecord, s: f64) -> Result<Detection> {
    if traj.halted.is_none() {
        return Ok(Detection::NoBlowup);
    }
    let norms = norm_series(traj, s)?;
    let (t, n) = final_decade(&traj.times, &norms);
    if t.len() < 10 {
        return Err(Error::InsufficientSamples { got: t.len(), need: 10 });
    }
    if !(n[n.len() - 1] > n[0]) {
        return Ok(Detection::NoBlowup);
    }
    let fit = |p: f64| {
        let y: Vec<f64> = n.iter().map(|v| v.powf(-1.0 / p)).collect();
        let (a, b, r2) = linear_fit(&t, &y);
        (b < 0.0).then_some((p, -a / b, r2))
    };
    let better = |cand: Option<(f64, f64, f64)>, best: Option<(f64, f64, f64)>| match (cand, best) {
        (Some(c), Some(b)) if c.2 <= b.2 => Some(b),
        (Some(c), _) => Some(c),
        (None, b) => b,
    };
    let step = 0.005;
    let mut best = None;
    let mut p = 0.1;
    while p <= 3.0 + 1e-9 {
        best = better(fit(p), best);
        p += step;
    }
    // golden-section refinement between the neighbouring trial exponents
    if let Some((p0, _, _)) = best {
        let r2 = |p: f64| fit(p).map_or(f64::NEG_INFINITY, |f| f.2);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = ((p0 - step).max(0.05), p0 + step);
        for _ in 0..60 {
            let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if r2(c) >= r2(d) {
                hi = d;
            } else {
                lo = c;
            }
        }
        best = better(fit(0.5 * (lo + hi)), best);
    }
    match best {
        Some((exponent, t_star, confidence)) => Ok(Detection::Blowup { t_star, confidence, exponent }),
        None => Ok(Detection::NoBlowup),
    }
}

/// Result of fitting `N(t) = c (T* - t)^-p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub t_star: f64,
    pub t_bound: Option<f64>,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    pub r_squared: f64,
    pub regime: RateRegime,
    pub bound_exponent: f64,
    pub verdict: bool,
    pub samples_used: usize,
}

/// Log-log regression of the `ℋ^s` norm against `T* - t` over the final
/// decade of growth.
pub fn fit_rate(traj: &TrajectoryRecord, t_star: f64, s: f64, regime: RateRegime) -> Result<BlowupReport> {
    let norms = norm_series(traj, s)?;
    let (t, n) = final_decade(&traj.times, &norms);
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&n)
        .filter(|(ti, v)| **ti < t_star && **v > 0.0)
        .map(|(ti, v)| ((t_star - ti).ln(), v.ln()))
        .unzip();
    if x.len() < 8 {
        return Err(Error::InsufficientSamples { got: x.len(), need: 8 });
    }
    let (a, b, r2) = linear_fit(&x, &y);
    let fitted_exponent = -b;
    let bound_exponent = regime.bound_exponent();
    Ok(BlowupReport {
        t_star,
        t_bound: None,
        fitted_exponent,
        fitted_constant: a.exp(),
        r_squared: r2,
        regime,
        bound_exponent,
        verdict: fitted_exponent >= bound_exponent - RATE_TOLERANCE,
        samples_used: x.len(),
    })
}

/// Relative amplitude margin above the zero-energy threshold.
pub const AMPLITUDE_MARGIN: f64 = 0.10;

/// Finds the amplitude `A` at which `E_k(A base)` crosses zero for the
/// focusing equation and returns `(1 + margin) A` with the scaled state.
pub fn negative_energy_state(base: &Field, k: usize, power: Power) -> Result<(f64, ProductMixture)> {
    if base.mass() == 0.0 {
        return Err(Error::InvalidArgument("base field is zero".into()));
    }
    let e = |a: f64| -> Result<f64> {
        let mix = ProductMixture::single(base.scaled(a.into()));
        Ok(energy(&mix, k, Sign::Focusing, power)?.total)
    };
    // at small amplitude the kinetic term dominates, so E > 0
    let mut lo = 1e-3;
    if e(lo)? <= 0.0 {
        lo = 1e-9;
    }
    let mut hi = 1.0;
    while e(hi)? >= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidArgument("energy stays non-negative at every amplitude".into()));
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if e(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let amplitude = hi * (1.0 + AMPLITUDE_MARGIN);
    Ok((amplitude, ProductMixture::single(base.scaled(amplitude.into()))))
}

/// Largest excess of the discrete second derivative of `V` over `bound`,
/// over interior triples whose spacings both exceed `min_spacing`.
///
/// Nonuniform triples use the three-point formula
/// `2 [ (V2 - V1)/h2 - (V1 - V0)/h1 ] / (h1 + h2)`.
pub fn concavity_excess(times: &[f64], v: &[f64], bound: f64, min_spacing: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..times.len().saturating_sub(1) {
        let h1 = times[i] - times[i - 1];
        let h2 = times[i + 1] - times[i];
        if h1 < min_spacing || h2 < min_spacing {
            continue;
        }
        let d2 = 2.0 * ((v[i + 1] - v[i]) / h2 - (v[i] - v[i - 1]) / h1) / (h1 + h2);
        worst = worst.max(d2 - bound);
    }
    worst
}
