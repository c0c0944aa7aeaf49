//! Radial profiles `R` of the fractional heat kernel
//! `P_{t,α}(x) = t^{−d/α} R(|x| t^{−1/α})` and the one-sided stable density
//! that subordinates them to the Gaussian.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use std::sync::Arc;

use crate::quad::{composite_kronrod, tanh_sinh};
use crate::specfun::{ln_gamma_unchecked, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMethod {
    Gaussian,
    Poisson,
    Subordination,
}

/// Radial profile of `e^{−t(−Δ)^{α/2}}` at `t = 1`.
#[derive(Debug, Clone)]
pub struct StableProfile {
    alpha: f64,
    d: Dimension,
    method: ProfileMethod,
    table: Option<Arc<SubordinationTable>>,
}

impl PartialEq for StableProfile {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.d == other.d && self.method == other.method
    }
}

/// `ln f(λ) + y`, `y = ln λ`, tabulated on a composite Kronrod rule in `y`
/// so that each profile value is a plain weighted sum.
#[derive(Debug)]
struct SubordinationTable {
    nodes: Vec<(f64, f64)>,
    ln_density: Vec<f64>,
}

/// Upper end of the `ln λ` range; the integrand decays like
/// `λ^{−β−d/2}` there.
const LN_LAMBDA_MAX: f64 = 90.0;
const PANEL_WIDTH: f64 = 0.5;

impl SubordinationTable {
    fn build(alpha: f64) -> Result<Self> {
        let g = |y: f64| ln_subordinator_density_unchecked(alpha, y.exp()) + y;
        // the peak sits near λ = 1; left of it f falls off like
        // exp(−c λ^{−β/(1−β)}), a wall that steepens as α → 2
        let (mut y_peak, mut g_peak) = (0.0, g(0.0));
        for i in -300..=300 {
            let y = 0.01 * f64::from(i);
            let v = g(y);
            if v > g_peak {
                (y_peak, g_peak) = (y, v);
            }
        }
        // left end: 60 nats below the peak
        let mut lo = y_peak;
        let mut step = 0.01;
        while lo > -200.0 && !(g(lo) < g_peak - 60.0) {
            lo -= step;
            step *= 1.5;
        }
        let wall = y_peak - lo;
        let fine = (wall / 12.0).min(PANEL_WIDTH);
        let split = (y_peak + 4.0 * wall).min(LN_LAMBDA_MAX);
        let mut nodes = composite_kronrod(lo, split, ((split - lo) / fine).ceil() as usize);
        if split < LN_LAMBDA_MAX {
            nodes.extend(composite_kronrod(
                split,
                LN_LAMBDA_MAX,
                ((LN_LAMBDA_MAX - split) / PANEL_WIDTH).ceil() as usize,
            ));
        }
        let ln_density: Vec<f64> = nodes
            .iter()
            .map(|&(y, _)| ln_subordinator_density_unchecked(alpha, y.exp()) + y)
            .collect();
        if ln_density.iter().any(|v| v.is_nan()) {
            // close to α = 2 the density collapses onto λ = 1 faster than
            // the ln λ panels can follow
            return Err(Error::Unsupported(format!(
                "the subordinator density is not resolvable at alpha = {alpha}"
            )));
        }
        Ok(Self { nodes, ln_density })
    }

    fn ln_profile(&self, d: f64, rho: f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.ln_density)
            .map(|(&(y, _), &lg)| {
                // at ρ = 0 the Gaussian factor is 1 even where e^{−y} overflows
                let spread = if rho == 0.0 {
                    0.0
                } else {
                    0.25 * rho * rho * (-y).exp()
                };
                lg - 0.5 * d * ((4.0 * PI).ln() + y) - spread
            })
            .collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms
            .iter()
            .zip(&self.nodes)
            .map(|(t, (_, w))| w * (t - top).exp())
            .sum();
        top + sum.ln()
    }
}

impl StableProfile {
    /// Closed forms for `α ∈ {1, 2}`, subordination otherwise.
    pub fn new(alpha: f64, d: Dimension) -> Result<Self> {
        check_alpha(alpha)?;
        let method = if alpha == 2.0 {
            ProfileMethod::Gaussian
        } else if alpha == 1.0 {
            ProfileMethod::Poisson
        } else {
            ProfileMethod::Subordination
        };
        let table = match method {
            ProfileMethod::Subordination => Some(Arc::new(SubordinationTable::build(alpha)?)),
            _ => None,
        };
        Ok(Self {
            alpha,
            d,
            method,
            table,
        })
    }

    /// Always integrate against the subordinator, even where a closed
    /// form exists.
    pub fn by_subordination(alpha: f64, d: Dimension) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha == 2.0 {
            return domain("alpha = 2 has no subordinator; the profile is Gaussian");
        }
        let table = Some(Arc::new(SubordinationTable::build(alpha)?));
        Ok(Self {
            alpha,
            d,
            method: ProfileMethod::Subordination,
            table,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn method(&self) -> ProfileMethod {
        self.method
    }

    /// `ln R(ρ)`.
    pub fn ln_value(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return domain(format!("profile radius must be nonnegative, got {rho}"));
        }
        let d = self.d.as_f64();
        match self.method {
            ProfileMethod::Gaussian => Ok(-0.5 * d * (4.0 * PI).ln() - 0.25 * rho * rho),
            ProfileMethod::Poisson => {
                let e = 0.5 * (d + 1.0);
                Ok(ln_gamma_unchecked(e) - e * PI.ln() - e * (rho * rho).ln_1p())
            }
            ProfileMethod::Subordination => {
                let table = self
                    .table
                    .as_ref()
                    .expect("subordination profiles carry a table");
                Ok(table.ln_profile(d, rho))
            }
        }
    }

    pub fn value(&self, rho: f64) -> Result<f64> {
        Ok(self.ln_value(rho)?.exp())
    }

    /// `R′(ρ)` where a closed form exists.
    pub fn derivative(&self, rho: f64) -> Option<f64> {
        let r = self.value(rho).ok()?;
        match self.method {
            ProfileMethod::Gaussian => Some(-0.5 * rho * r),
            ProfileMethod::Poisson => Some(-(self.d.as_f64() + 1.0) * rho / (1.0 + rho * rho) * r),
            ProfileMethod::Subordination => None,
        }
    }

    /// `P_{t,α}` at distance `r`, through the self-similar form.
    pub fn heat_kernel(&self, t: f64, r: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("kernel time must be positive, got {t}"));
        }
        let scale = t.powf(1.0 / self.alpha);
        Ok((self.ln_value(r / scale)? - self.d.as_f64() * scale.ln()).exp())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    Ok(())
}

/// Density at `λ` of the one-sided stable law of index `β = α/2` with
/// Laplace transform `e^{−s^β}`.
pub fn subordinator_density(alpha: f64, lambda: f64) -> Result<f64> {
    Ok(ln_subordinator_density(alpha, lambda)?.exp())
}

pub fn ln_subordinator_density(alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!(
            "subordinator index needs alpha in (0, 2), got {alpha}"
        ));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!(
            "subordinator argument must be positive, got {lambda}"
        ));
    }
    Ok(ln_subordinator_density_unchecked(alpha, lambda))
}

/// Switch to the tail series once `λ^{−β}` drops below this.
const SERIES_THRESHOLD: f64 = 0.2;
const NEAR_GAUSSIAN_SERIES_THRESHOLD: f64 = 0.6;

fn ln_subordinator_density_unchecked(alpha: f64, x: f64) -> f64 {
    let beta = 0.5 * alpha;
    // as β → 1 the Kanter integrand spikes at u = 1 while the series
    // coefficients stay tame, so the series takes over earlier
    let threshold = if beta > 0.9 {
        NEAR_GAUSSIAN_SERIES_THRESHOLD
    } else {
        SERIES_THRESHOLD
    };
    if x.powf(-beta) <= threshold {
        tail_series(beta, x).ln()
    } else {
        ln_kanter(beta, x)
    }
}

/// `(1/π) Σ_k (−1)^{k+1} Γ(kβ+1)/k! sin(kπβ) x^{−kβ−1}`.
fn tail_series(beta: f64, x: f64) -> f64 {
    let lz = -beta * x.ln();
    let mut sum = 0.0;
    let mut ln_fact = 0.0;
    for k in 1..80 {
        let kf = k as f64;
        ln_fact += kf.ln();
        let mag = (ln_gamma_unchecked(kf * beta + 1.0) - ln_fact + kf * lz).exp();
        let term = if k % 2 == 1 { mag } else { -mag } * (kf * PI * beta).sin();
        sum += term;
        if mag < 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (PI * x)
}

/// Kanter's integral representation:
/// `f(x) = β/(1−β) x^{−1/(1−β)} ∫₀¹ A(u) e^{−A(u) z} du`, `z = x^{−β/(1−β)}`,
/// with `A(u) = [sin(βπu)/sin(πu)]^{1/(1−β)} sin((1−β)πu)/sin(βπu)`.
/// The factor `e^{−A(0) z}` is taken out before integrating.
fn ln_kanter(beta: f64, x: f64) -> f64 {
    let q = 1.0 / (1.0 - beta);
    let z = x.powf(-beta * q);
    let a0 = (1.0 - beta) * beta.powf(beta * q);
    let prefactor = (beta * q).ln() - q * x.ln() - a0 * z;
    // the integral is at most a0 once a0 z ≥ 1
    if a0 * z >= 1.0 && prefactor + a0.ln() < -800.0 {
        return f64::NEG_INFINITY;
    }
    let kernel = |u: f64| {
        let a = ((beta * PI * u).sin() / (PI * u).sin()).powf(q) * ((1.0 - beta) * PI * u).sin()
            / (beta * PI * u).sin();
        let excess = z * (a - a0);
        if !(excess < 700.0) {
            0.0
        } else {
            a * (-excess).exp()
        }
    };
    // the integrand peaks at u = 0 with width ~ z^{−1/2}; split there
    let split = (4.0 / z.sqrt()).min(0.5);
    let integral = [(0.0, split), (split, 1.0)]
        .iter()
        .map(|&(a, b)| {
            // deep in the left tail, where z is huge, 1e-13 is out of reach
            tanh_sinh(kernel, a, b, 1e-13)
                .or_else(|_| tanh_sinh(kernel, a, b, 1e-8))
                .map(|e| e.value)
                .unwrap_or(f64::NAN)
        })
        .sum::<f64>();
    prefactor + integral.ln()
}

/// Outcome of checking `R(ρ) ≤ C (1+ρ)^{−d}` on a sample of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBoundReport {
    /// Smallest `C` valid on the sample.
    pub constant: f64,
    pub constant_argmax: f64,
    pub min_value: f64,
    /// `max |R′(ρ)|(1+ρ)^{d+1}` for the closed-form profiles.
    pub gradient_constant: Option<f64>,
    /// Local decay exponent `−Δ ln R / Δ ln ρ` at the two largest radii.
    pub decay_exponent: Option<f64>,
}

pub fn verify_kernel_bounds(
    profile: &StableProfile,
    rho_grid: &[f64],
) -> Result<KernelBoundReport> {
    if rho_grid.is_empty() {
        return domain("kernel bound check needs at least one radius");
    }
    let d = profile.dim().as_f64();
    let mut constant = (0.0, 0.0);
    let mut min_value = f64::INFINITY;
    let mut grad: Option<f64> = Some(0.0);
    let mut logs = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let r = profile.value(rho)?;
        let c = r * (1.0 + rho).powf(d);
        if c > constant.0 {
            constant = (c, rho);
        }
        min_value = min_value.min(r);
        grad = match (grad, profile.derivative(rho)) {
            (Some(g), Some(dr)) => Some(g.max(dr.abs() * (1.0 + rho).powf(d + 1.0))),
            _ => None,
        };
        logs.push((rho, r));
    }
    let mut positive: Vec<(f64, f64)> = logs
        .into_iter()
        .filter(|(rho, r)| *rho > 0.0 && *r > 0.0)
        .collect();
    positive.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decay_exponent = match positive.as_slice() {
        [.., (r1, v1), (r2, v2)] if r2 > r1 => Some(-(v2.ln() - v1.ln()) / (r2.ln() - r1.ln())),
        _ => None,
    };
    Ok(KernelBoundReport {
        constant: constant.0,
        constant_argmax: constant.1,
        min_value,
        gradient_constant: grad,
        decay_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, Tolerance};

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn levy(x: f64) -> f64 {
        x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * PI.sqrt())
    }

    #[test]
    fn near_gaussian_profiles_match_the_value_at_the_origin() {
        // R(0) = (2π)^{−d} σ_d Γ(d/α)/α
        for alpha in [1.9, 1.95, 1.98, 1.99] {
            let exact =
                (2.0 * PI).powi(-3) * 4.0 * PI * ln_gamma_unchecked(3.0 / alpha).exp() / alpha;
            let got = StableProfile::new(alpha, dim(3))
                .unwrap()
                .value(0.0)
                .unwrap();
            assert!(
                (got / exact - 1.0).abs() < 1e-9,
                "alpha = {alpha}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn unresolvable_subordinator_is_an_error() {
        assert!(matches!(
            StableProfile::new(1.9999, dim(3)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn half_stable_matches_levy_on_both_branches() {
        for x in [0.02, 0.1, 0.5, 1.0, 3.0, 24.0, 26.0, 200.0, 1e4] {
            let got = subordinator_density(1.0, x).unwrap();
            assert!(
                (got / levy(x) - 1.0).abs() < 1e-10,
                "x={x}: {got} vs {}",
                levy(x)
            );
        }
        assert!((subordinator_density(1.0, 1.0).unwrap() - 0.219_695_644_733_861_3).abs() < 1e-12);
    }

    #[test]
    fn series_and_integral_agree_near_switch() {
        for alpha in [0.3, 0.8, 1.5, 1.9] {
            let beta = 0.5 * alpha;
            let x = SERIES_THRESHOLD.powf(-1.0 / beta) * 1.5;
            let s = tail_series(beta, x).ln();
            let k = ln_kanter(beta, x);
            assert!((s - k).abs() < 1e-9, "alpha={alpha}: {s} vs {k}");
        }
    }

    #[test]
    fn closed_form_profiles() {
        let g = StableProfile::new(2.0, dim(1)).unwrap();
        assert!((g.value(0.0).unwrap() - (4.0 * PI).powf(-0.5)).abs() < 1e-15);
        let p = StableProfile::new(1.0, dim(1)).unwrap();
        assert!((p.value(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let p3 = StableProfile::new(1.0, dim(3)).unwrap();
        assert!((p3.value(1.0).unwrap() - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!(StableProfile::new(2.5, dim(1)).is_err());
        assert!(StableProfile::new(0.0, dim(1)).is_err());
    }

    #[test]
    fn subordination_reproduces_gaussian_limit_shape() {
        // R integrates to one: σ_1 ∫₀^∞ R dρ = 1 for α = 1.4, d = 1
        let p = StableProfile::new(1.4, dim(1)).unwrap();
        let m = adaptive(
            |r: f64| p.value(r).unwrap(),
            0.0,
            50.0,
            &[1.0, 5.0],
            Tolerance::rel(1e-9),
        )
        .unwrap()
        .value;
        // heavy tail beyond 50: R ~ c ρ^{−1−α}
        let tail_c = PI.recip() * crate::specfun::gamma(2.4).unwrap() * (0.7 * PI).sin();
        let tail = tail_c * 50f64.powf(-1.4) / 1.4;
        assert!((2.0 * (m + tail) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn kernel_bound_poisson_line() {
        let p = StableProfile::new(1.0, dim(1)).unwrap();
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.005).collect();
        let rep = verify_kernel_bounds(&p, &grid).unwrap();
        let exact = 2f64.sqrt() / (PI * (4.0 - 2.0 * 2f64.sqrt()));
        assert!((rep.constant - exact).abs() < 1e-6);
        assert!((rep.constant_argmax - (2f64.sqrt() - 1.0)).abs() < 5e-3);
        assert!(rep.min_value > 0.0);
        assert!(rep.gradient_constant.unwrap().is_finite());
        // local slope of ln(1 + ρ²) near ρ = 20
        assert!((rep.decay_exponent.unwrap() - 800.0 / 401.0).abs() < 1e-3);
    }

    #[test]
    fn self_similar_kernel() {
        let p = StableProfile::new(1.0, dim(2)).unwrap();
        let t: f64 = 3.0;
        let direct = p.heat_kernel(t, 2.0).unwrap();
        let manual = t.powf(-2.0) * p.value(2.0 / t).unwrap();
        assert!((direct - manual).abs() < 1e-15 * manual);
    }
}
