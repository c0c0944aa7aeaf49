//! The singular stationary solution `u_∞(x) = s(α,d,p) |x|^{−α/(p−1)}` of
//! `(−Δ)^{α/2} u = u^p`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::norms::RadialProfile;
use crate::quad::{adaptive, adaptive_best_effort, tanh_sinh, Tolerance};
use crate::specfun::{ln_gamma_unchecked, ln_sphere_area_real, sphere_area, Dimension};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSolution {
    alpha: f64,
    d: Dimension,
    p: f64,
    s_value: f64,
}

/// `ln s(α,d,p)^{p−1}`, with the validity checks on every gamma argument.
pub fn ln_singular_constant_pow(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!("p must exceed 1, got {p}"));
    }
    let kappa = alpha / (2.0 * (p - 1.0));
    let half_d = 0.5 * d.as_f64();
    let outer = half_d - kappa;
    let inner = half_d - p * kappa;
    if !(outer > 0.0) {
        return domain(format!(
            "gamma argument d/2 − α/(2(p−1)) = {outer} is not positive (d = {d}, alpha = {alpha}, p = {p})"
        ));
    }
    if !(inner > 0.0) {
        return domain(format!(
            "gamma argument d/2 − pα/(2(p−1)) = {inner} is not positive: need p > 1 + α/(d − α) \
             (d = {d}, alpha = {alpha}, p = {p})"
        ));
    }
    Ok(
        alpha * std::f64::consts::LN_2 + ln_gamma_unchecked(outer) + ln_gamma_unchecked(p * kappa)
            - ln_gamma_unchecked(kappa)
            - ln_gamma_unchecked(inner),
    )
}

/// `s(α,d,p)`.
pub fn singular_constant(alpha: f64, d: Dimension, p: f64) -> Result<f64> {
    Ok((ln_singular_constant_pow(alpha, d, p)? / (p - 1.0)).exp())
}

/// Normalizing constant of `(−Δ)^{α/2}` as a hypersingular integral,
/// `C_{d,α} = α 2^{α−1} Γ((d+α)/2) / (π^{d/2} Γ(1 − α/2))`.
pub fn fractional_laplacian_constant(alpha: f64, d: Dimension) -> f64 {
    let dd = d.as_f64();
    (alpha.ln() + (alpha - 1.0) * std::f64::consts::LN_2 + ln_gamma_unchecked(0.5 * (dd + alpha))
        - 0.5 * dd * PI.ln()
        - ln_gamma_unchecked(1.0 - 0.5 * alpha))
    .exp()
}

impl SingularSolution {
    pub fn new(alpha: f64, d: Dimension, p: f64) -> Result<Self> {
        let s_value = singular_constant(alpha, d, p)?;
        Ok(Self {
            alpha,
            d,
            p,
            s_value,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s_value(&self) -> f64 {
        self.s_value
    }

    /// Homogeneity degree `α/(p−1)`.
    pub fn decay(&self) -> f64 {
        self.alpha / (self.p - 1.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.s_value * r.powf(-self.decay())
    }

    /// Samples on the given radii, with the exact tail exponent.
    pub fn profile(&self, radii: Vec<f64>) -> Result<RadialProfile> {
        Ok(RadialProfile::from_fn(self.d, radii, |r| self.value(r))?
            .with_tail_exponent(self.decay()))
    }

    /// Closed-form Morrey norm of order `d(p−1)/α` and integrability `q`:
    /// `(σ_d / (d − qα/(p−1)))^{1/q} s`.
    pub fn morrey_norm(&self, q: f64) -> Result<f64> {
        let gap = self.d.as_f64() - q * self.decay();
        if !(q >= 1.0) {
            return domain(format!("q must be at least 1, got {q}"));
        }
        if !(gap > 0.0) {
            return domain(format!(
                "u_∞^q is not locally integrable: q·α/(p−1) = {} ≥ d",
                q * self.decay()
            ));
        }
        Ok((sphere_area(self.d) / gap).powf(1.0 / q) * self.s_value)
    }

    /// Relative mismatch between the numerically evaluated multiplier of
    /// `(−Δ)^{α/2} |x|^{−α/(p−1)}` at `|x| = probe_radius` and `s^{p−1}`.
    pub fn stationary_residual(&self, probe_radius: f64) -> Result<ResidualReport> {
        if !(probe_radius > 0.0) {
            return domain(format!("probe radius must be positive, got {probe_radius}"));
        }
        let target = self.s_value.powf(self.p - 1.0);
        let a = self.decay();
        let r = probe_radius;
        let (multiplier, achieved) = if self.alpha == 2.0 {
            // −(u″ + (d−1)u′/r) for u = r^{−a}
            let d = self.d.as_f64();
            let u1 = -a * r.powf(-a - 1.0);
            let u2 = a * (a + 1.0) * r.powf(-a - 2.0);
            (-(u2 + (d - 1.0) * u1 / r) * r.powf(a + 2.0), 0.0)
        } else {
            if self.d.get() < 2 {
                return domain("the hypersingular residual is implemented for d >= 2");
            }
            hypersingular_multiplier(self.alpha, self.d, a, r)?
        };
        Ok(ResidualReport {
            multiplier,
            target,
            relative_residual: (multiplier - target).abs() / target,
            achieved_tolerance: achieved,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub multiplier: f64,
    /// `s^{p−1}`.
    pub target: f64,
    pub relative_residual: f64,
    /// Relative error estimate of the quadrature (0 for the symbolic path).
    pub achieved_tolerance: f64,
}

/// Angular kernel `K(r, ρ) = ∫_{S^{d−1}} |r ω₀ − ρ ω|^{−d−α} dω`.
fn angular_kernel(alpha: f64, d: Dimension, r: f64, rho: f64) -> Result<f64> {
    if d.get() == 3 {
        let e = 1.0 + alpha;
        return Ok(2.0 * PI / (e * r * rho) * ((r - rho).abs().powf(-e) - (r + rho).powf(-e)));
    }
    let dd = d.as_f64();
    let ln_sigma = ln_sphere_area_real(dd - 1.0)?;
    // |rω₀ − ρω|² = (r − ρ)² + 4rρ sin²(θ/2), free of cancellation near θ = 0
    let f = |t: f64| {
        let h = (0.5 * t).sin();
        ((r - rho).powi(2) + 4.0 * r * rho * h * h).powf(-0.5 * (dd + alpha))
            * t.sin().powf(dd - 2.0)
    };
    // peak of width |r − ρ|/r at θ = 0
    let w = ((r - rho).abs() / r.max(rho)).max(1e-300);
    // algebraic decay away from the peak: geometric panels up to π
    let breaks: Vec<f64> = (0..60)
        .map(|k| w * 2f64.powi(k))
        .take_while(|&b| b < PI)
        .collect();
    let est = adaptive_best_effort(f, 0.0, PI, &breaks, Tolerance::new(0.0, 1e-13));
    if !(est.error <= 1e-9 * est.value.abs()) {
        return Err(Error::Quadrature {
            achieved: est.error / est.value.abs(),
            requested: 1e-9,
        });
    }
    Ok(ln_sigma.exp() * est.value)
}

/// `ρ^{d−1} K(r, ρ)`, evaluated after rescaling by `max(r, ρ)` so neither
/// factor overflows on its own.
fn weighted_angular_kernel(alpha: f64, d: Dimension, r: f64, rho: f64) -> Result<f64> {
    let m = r.max(rho);
    let (r1, rho1) = (r / m, rho / m);
    let k = angular_kernel(alpha, d, r1, rho1)?;
    Ok(rho1.powf(d.as_f64() - 1.0) * k * m.powf(-1.0 - alpha))
}

/// Returns `(multiplier, relative error estimate)`.
fn hypersingular_multiplier(alpha: f64, d: Dimension, a: f64, r: f64) -> Result<(f64, f64)> {
    let u = |x: f64| x.powf(-a);
    let ur = u(r);
    let integrand = |rho: f64| -> f64 {
        // the ends contribute O(ρ^{d−a}) and O(ρ^{−α}) there
        if !(1e-150..=1e150).contains(&rho) {
            return 0.0;
        }
        let k = weighted_angular_kernel(alpha, d, r, rho).unwrap_or(f64::NAN);
        (ur - u(rho)) * k
    };

    let delta = 0.5 * r;
    let eta0 = 1e-4 * r;
    let mut err = 0.0;

    // ρ ∈ (0, r − δ): integrable singularity ρ^{d−1−a} at the origin
    let near_origin = tanh_sinh(integrand, 0.0, r - delta, 1e-12)?;
    err += near_origin.error;

    // ρ ∈ (r + δ, ∞) with ρ = (r + δ)/v; integrand ~ ρ^{−1−α}
    let far = tanh_sinh(
        |v: f64| {
            let rho = (r + delta) / v;
            let f = integrand(rho);
            if f == 0.0 {
                0.0
            } else {
                f * rho * rho / (r + delta)
            }
        },
        0.0,
        1.0,
        1e-12,
    )?;
    err += far.error;

    // symmetric pairs around ρ = r cancel the odd singular part
    let sym = |eta: f64| integrand(r + eta) + integrand(r - eta);
    let breaks: Vec<f64> = (1..12)
        .map(|k| eta0 * 2f64.powi(k))
        .filter(|&b| b < delta)
        .collect();
    let middle = adaptive(sym, eta0, delta, &breaks, Tolerance::new(0.0, 1e-10))?;
    err += middle.error;

    // Taylor piece: the pair sum behaves like c η^{1−α} on (0, η0)
    let c = sym(eta0) / eta0.powf(1.0 - alpha);
    let inner = c * eta0.powf(2.0 - alpha) / (2.0 - alpha);

    let total = near_origin.value + far.value + middle.value + inner;
    let scale = fractional_laplacian_constant(alpha, d) * r.powf(a + alpha);
    if !total.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            requested: 1e-10,
        });
    }
    Ok((scale * total, err / total.abs()))
}

/// `s(α,d,p) / d^{α/(2(p−1))}` along increasing `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularAsymptotics {
    pub alpha: f64,
    pub p: f64,
    /// `(d, s, s/d^{α/(2(p−1))})`
    pub rows: Vec<(u32, f64, f64)>,
    /// Relative change of the ratio between the last two dimensions.
    pub last_relative_change: f64,
}

pub fn singular_asymptotics_check(
    alpha: f64,
    p: f64,
    d_list: &[u32],
) -> Result<SingularAsymptotics> {
    if d_list.len() < 2 || d_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("dimension list must be increasing with at least two entries");
    }
    let power = alpha / (2.0 * (p - 1.0));
    let mut rows = Vec::with_capacity(d_list.len());
    for &d in d_list {
        let dim = Dimension::new(d)?;
        let ln_s = ln_singular_constant_pow(alpha, dim, p)? / (p - 1.0);
        rows.push((d, ln_s.exp(), (ln_s - power * f64::from(d).ln()).exp()));
    }
    let n = rows.len();
    let last_relative_change = (rows[n - 1].2 / rows[n - 2].2 - 1.0).abs();
    Ok(SingularAsymptotics {
        alpha,
        p,
        rows,
        last_relative_change,
    })
}
