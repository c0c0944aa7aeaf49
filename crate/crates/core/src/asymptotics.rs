//! Dimension asymptotics of the discrepancy constants `K_{α,p}(d)` and
//! `L_{α,p}(d)`, i.e. the best constants in
//! `sup_t t^{1/(p−1)} e^{−t(−Δ)^{α/2}} μ (0)` for `μ = u_∞` and for the
//! normalized surface measure on the unit sphere.
//!
//! Everything is evaluated through logarithms so `d` in the thousands
//! neither overflows nor underflows.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::kernels::{ln_subordinator_density, StableProfile};
use crate::quad::{ln_integral_exp, maximize_log_scan};
use crate::specfun::{ln_gamma_unchecked, ln_sphere_area, Dimension};
use crate::stationary::ln_singular_constant_pow;

/// Argument tolerance of every sup computed here.
pub const ARGMAX_TOLERANCE: f64 = 1e-10;

/// A supremum together with where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supremum {
    pub ln_value: f64,
    /// Optimal `t` (Gaussian quantities) or `ρ` (profile quantities).
    pub argmax: f64,
}

impl Supremum {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!("p must exceed 1, got {p}"));
    }
    Ok(())
}

/// `ln K_{2,p}(d) = ln[s(2,d,p) 2^{−2/(p−1)} Γ(d/2 − 1/(p−1)) / Γ(d/2)]`.
pub fn ln_k_gaussian(d: Dimension, p: f64) -> Result<f64> {
    check_p(p)?;
    let half_d = 0.5 * d.as_f64();
    let g = 1.0 / (p - 1.0);
    if !(half_d - g > 0.0) {
        return domain(format!("d/2 − 1/(p−1) = {} is not positive", half_d - g));
    }
    let ln_s = ln_singular_constant_pow(2.0, d, p)? / (p - 1.0);
    Ok(
        ln_s - 2.0 * g * std::f64::consts::LN_2 + ln_gamma_unchecked(half_d - g)
            - ln_gamma_unchecked(half_d),
    )
}

pub fn k_gaussian(d: Dimension, p: f64) -> Result<f64> {
    Ok(ln_k_gaussian(d, p)?.exp())
}

/// `ln ∫_0^∞ R(ρ/scale) ρ^{e−1} dρ` in the variable `y = ln ρ`. Outside a
/// window carrying all but `e^{−60}` of the mass, the integrand is closed
/// off by its power-law asymptotics `ρ^{e}` at the origin and `ρ^{e−d−α}`
/// at infinity.
fn ln_profile_moment(profile: &StableProfile, e: f64, scale: f64) -> Result<f64> {
    let d = profile.dim().as_f64();
    let decay = d + profile.alpha() - e;
    if !(e > 0.0 && decay > 0.0) {
        return domain(format!("profile moment of order {e} diverges"));
    }
    let ls = scale.ln();
    let g = |y: f64| {
        profile
            .ln_value((y - ls).exp())
            .unwrap_or(f64::NEG_INFINITY)
            + e * y
    };
    let bulk = ls + 0.5 * (1.0 + d).ln();
    let lo = bulk - 70.0 / e - 2.0;
    // the subordination table is reliable up to ρ ~ e^{40}
    let hi = (bulk + 70.0 / decay + 2.0).min(ls + 40.0);
    let core = ln_integral_exp(g, lo, hi, 600, 1e-12)?;
    let head = g(lo) - e.ln();
    let tail = g(hi) - decay.ln();
    let top = core.max(head).max(tail);
    Ok(top + ((core - top).exp() + (head - top).exp() + (tail - top).exp()).ln())
}

/// `ln K_{α,p}(d) = ln[s(α,d,p) σ_d ∫_0^∞ R(ρ) ρ^{d−1−α/(p−1)} dρ]`.
pub fn ln_k_fractional(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    ln_k_fractional_at(alpha, d, p, 1.0)
}

pub fn k_fractional(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    Ok(ln_k_fractional(alpha, d, p)?.exp())
}

/// The expression under the sup, `t^{1/(p−1)} (P_t ∗ u_∞)(0)`, before the
/// scale invariance is used. Equal to `K_{α,p}(d)` for every `t`.
pub fn ln_k_fractional_at(alpha: f64, d: Dimension, p: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    let ln_s = ln_singular_constant_pow(alpha, d, p)? / (p - 1.0);
    let profile = StableProfile::new(alpha, d)?;
    let a = alpha / (p - 1.0);
    let dd = d.as_f64();
    let scale = t.powf(1.0 / alpha);
    let moment = ln_profile_moment(&profile, dd - a, scale)?;
    Ok(ln_s + ln_sphere_area(d) + t.ln() / (p - 1.0) - dd * scale.ln() + moment)
}

/// `e^{tΔ}(dS/σ_d)(0) = (4πt)^{−d/2} e^{−1/(4t)}`.
pub fn sphere_measure_evolution(d: Dimension, t: f64) -> f64 {
    (-0.5 * d.as_f64() * (4.0 * std::f64::consts::PI * t).ln() - 0.25 / t).exp()
}

/// `L_{2,p}(d) = 4^{−1/(p−1)} π^{−d/2} (γ/e)^γ` with `γ = d/2 − 1/(p−1)`,
/// attained at `t₀ = 1/(4γ)`.
pub fn l_gaussian(d: Dimension, p: f64) -> Result<Supremum> {
    check_p(p)?;
    let g = 1.0 / (p - 1.0);
    let gamma = 0.5 * d.as_f64() - g;
    if !(gamma > 0.0) {
        return domain(format!("d/2 − 1/(p−1) = {gamma} is not positive"));
    }
    let ln_value =
        -g * 4f64.ln() - 0.5 * d.as_f64() * std::f64::consts::PI.ln() + gamma * (gamma.ln() - 1.0);
    Ok(Supremum {
        ln_value,
        argmax: 0.25 / gamma,
    })
}

/// Both sides of the bracket on `L_{α,p}(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalL {
    /// `sup_ρ ρ^{d−α/(p−1)} R(ρ)`, computed directly.
    pub sup: Supremum,
    /// `4^{−κ} π^{−d/2} S Γ(d/2 − κ)` with `κ = α/(2(p−1))` and
    /// `S = sup_λ λ^{1−κ} f_{1,α}(λ)`.
    pub ln_upper: f64,
}

impl FractionalL {
    pub fn value(&self) -> f64 {
        self.sup.value()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
}

/// `β = d/2 − α/(2(p−1)) − 1`, required positive by the lower bound.
pub fn window_exponent(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    check_p(p)?;
    let beta = 0.5 * d.as_f64() - alpha / (2.0 * (p - 1.0)) - 1.0;
    if !(beta > 0.0) {
        return domain(format!(
            "β = d/2 − α/(2(p−1)) − 1 = {beta} is not positive: need p > 1 + α/(d − 2)"
        ));
    }
    Ok(beta)
}

pub fn l_fractional(alpha: f64, d: Dimension, p: f64) -> Result<FractionalL> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    window_exponent(alpha, d, p)?;
    let profile = StableProfile::new(alpha, d)?;
    let sup = ln_profile_sup(&profile, d.as_f64() - alpha / (p - 1.0));

    let kappa = alpha / (2.0 * (p - 1.0));
    let (_, ln_s) = maximize_log_scan(
        |l| ln_subordinator_density(alpha, l).unwrap_or(f64::NEG_INFINITY) + (1.0 - kappa) * l.ln(),
        1e-4,
        1e4,
        400,
        ARGMAX_TOLERANCE,
    );
    let half_d = 0.5 * d.as_f64();
    let ln_upper = -kappa * 4f64.ln() - half_d * std::f64::consts::PI.ln()
        + ln_s
        + ln_gamma_unchecked(half_d - kappa);
    Ok(FractionalL { sup, ln_upper })
}

/// `sup_ρ ρ^{e} R(ρ)` in log form.
fn ln_profile_sup(profile: &StableProfile, e: f64) -> Supremum {
    let bulk = (1.0 + profile.dim().as_f64()).sqrt();
    let (argmax, ln_value) = maximize_log_scan(
        |rho| profile.ln_value(rho).unwrap_or(f64::NEG_INFINITY) + e * rho.ln(),
        1e-4 * bulk,
        1e4 * bulk,
        400,
        ARGMAX_TOLERANCE,
    );
    Supremum { ln_value, argmax }
}

/// `η = min_{[τ₀, τ₀+h]} e^{−τ}τ^β / max_τ e^{−τ}τ^β` with `τ₀ = β` and
/// `h = √(2β)`. The log of `e^{−τ}τ^β` is concave, so the min over the
/// window sits at an end, and at `τ₀` the ratio is 1.
pub fn window_lower_bound(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    let beta = window_exponent(alpha, d, p)?;
    Ok(window_ratio(beta))
}

pub(crate) fn window_ratio(beta: f64) -> f64 {
    let h = (2.0 * beta).sqrt();
    (-h + beta * (h / beta).ln_1p()).exp().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    K,
    L,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::K => "K",
            Quantity::L => "L",
        }
    }
}

/// One row of a sweep over `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub d: u32,
    pub ln_value: f64,
    /// The value divided by its predicted order in `d`:
    /// `K` itself, `L_{2,p} σ_d d^{1/(p−1)−1/2}`, or `L_{α,p} σ_d d^{α/(2(p−1))}`.
    pub normalized: f64,
    /// `t₀` for `L_{2,p}`, the maximizing `ρ` for `L_{α,p}`, absent for `K`.
    pub argmax: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub quantity: Quantity,
    pub alpha: f64,
    pub p: f64,
    pub rows: Vec<AsymptoticRow>,
    pub verdict: ScalingVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingVerdict {
    /// `normalized[last] / normalized[last − 1]`.
    pub last_ratio: f64,
    pub max_over_min: f64,
    /// Least-squares slope of `ln(value)` (for `K`) or `ln(value·σ_d)`
    /// (for `L`) against `ln d`.
    pub fitted_slope: f64,
    pub predicted_slope: f64,
}

impl AsymptoticReport {
    pub fn d_values(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.d).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ln_value.exp()).collect()
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.normalized).collect()
    }
}

/// The exponent `θ` of the predicted order `d^θ` of the quantity, with the
/// `1/σ_d` factor of `L` taken out.
pub fn predicted_slope(quantity: Quantity, alpha: f64, p: f64) -> f64 {
    match (quantity, alpha == 2.0) {
        (Quantity::K, _) => 0.0,
        (Quantity::L, true) => 0.5 - 1.0 / (p - 1.0),
        (Quantity::L, false) => -alpha / (2.0 * (p - 1.0)),
    }
}

fn sweep_row(quantity: Quantity, alpha: f64, p: f64, d: u32) -> Result<AsymptoticRow> {
    let dim = Dimension::new(d)?;
    let ln_d = f64::from(d).ln();
    let theta = predicted_slope(quantity, alpha, p);
    let (ln_value, argmax) = match (quantity, alpha == 2.0) {
        (Quantity::K, true) => (ln_k_gaussian(dim, p)?, None),
        (Quantity::K, false) => (ln_k_fractional(alpha, dim, p)?, None),
        (Quantity::L, true) => {
            let s = l_gaussian(dim, p)?;
            (s.ln_value, Some(s.argmax))
        }
        (Quantity::L, false) => {
            let l = l_fractional(alpha, dim, p)?;
            (l.sup.ln_value, Some(l.sup.argmax))
        }
    };
    let sigma = if quantity == Quantity::L {
        ln_sphere_area(dim)
    } else {
        0.0
    };
    let normalized = (ln_value + sigma - theta * ln_d).exp();
    Ok(AsymptoticRow {
        d,
        ln_value,
        normalized,
        argmax,
    })
}

/// Evaluate a quantity over `d_values` (in parallel) and summarize how it
/// scales.
pub fn sweep(quantity: Quantity, alpha: f64, p: f64, d_values: &[u32]) -> Result<AsymptoticReport> {
    if d_values.len() < 2 || d_values.windows(2).any(|w| w[1] <= w[0]) {
        return domain("dimension list must be increasing with at least two entries");
    }
    let rows = d_values
        .par_iter()
        .map(|&d| sweep_row(quantity, alpha, p, d))
        .collect::<Result<Vec<_>>>()?;

    let n = rows.len();
    let norm: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
    let max = norm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = norm.iter().copied().fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = rows.iter().map(|r| f64::from(r.d).ln()).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| {
            let sigma = if quantity == Quantity::L {
                ln_sphere_area(Dimension::new(r.d).unwrap())
            } else {
                0.0
            };
            r.ln_value + sigma
        })
        .collect();
    let verdict = ScalingVerdict {
        last_ratio: norm[n - 1] / norm[n - 2],
        max_over_min: max / min,
        fitted_slope: least_squares_slope(&xs, &ys),
        predicted_slope: predicted_slope(quantity, alpha, p),
    };
    Ok(AsymptoticReport {
        quantity,
        alpha,
        p,
        rows,
        verdict,
    })
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
