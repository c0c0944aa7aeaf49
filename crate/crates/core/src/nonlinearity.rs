//! Convex sources `F`, the Osgood transform `h(w) = ∫_w^∞ du / F(u)` and its
//! inverse, plus the exponent and threshold constants tied to power sources.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::specfun::Dimension;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Built-in source families plus an escape hatch for library callers.
#[derive(Clone)]
pub enum SourceKind {
    /// `c · u^p`
    Power { coeff: f64, exponent: f64 },
    /// `Σ c_i · u^{p_i}`
    PowerSum { terms: Vec<(f64, f64)> },
    /// `c · (e^u − 1)`
    Exponential { coeff: f64 },
    Custom {
        value: ScalarFn,
        derivative: ScalarFn,
    },
}

impl fmt::Debug for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { coeff, exponent } => {
                write!(f, "Power {{ coeff: {coeff}, exponent: {exponent} }}")
            }
            Self::PowerSum { terms } => write!(f, "PowerSum {{ terms: {terms:?} }}"),
            Self::Exponential { coeff } => write!(f, "Exponential {{ coeff: {coeff} }}"),
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// A convex, nondecreasing source with `F(0) = 0` satisfying the Osgood
/// condition `∫^∞ du/F(u) < ∞`. Constructors run both audits.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    kind: SourceKind,
    label: String,
}

/// Sample points for the convexity and monotonicity audit.
fn audit_points() -> impl Iterator<Item = f64> {
    (-24..=24).map(|k| 10f64.powf(f64::from(k) / 4.0))
}

impl Nonlinearity {
    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return domain(format!("power source needs c > 0, got {coeff}"));
        }
        if !(exponent > 1.0) || !exponent.is_finite() {
            return Err(Error::CriterionInapplicable(format!(
                "power source u^{exponent} violates the Osgood condition (needs p > 1)"
            )));
        }
        Ok(Self {
            kind: SourceKind::Power { coeff, exponent },
            label: format!("{coeff}*u^{exponent}"),
        })
    }

    pub fn power_sum(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return domain("power sum needs at least one term");
        }
        for &(c, p) in &terms {
            if !(c > 0.0) || !(p >= 1.0) {
                return domain(format!(
                    "power-sum term {c}*u^{p} must have c > 0 and p >= 1"
                ));
            }
        }
        let top = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if !(top > 1.0) {
            return Err(Error::CriterionInapplicable(
                "power sum with all exponents equal to 1 violates the Osgood condition".into(),
            ));
        }
        let label = terms
            .iter()
            .map(|(c, p)| format!("{c}*u^{p}"))
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self {
            kind: SourceKind::PowerSum { terms },
            label,
        })
    }

    pub fn exponential(coeff: f64) -> Result<Self> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return domain(format!("exponential source needs c > 0, got {coeff}"));
        }
        Ok(Self {
            kind: SourceKind::Exponential { coeff },
            label: format!("{coeff}*(exp(u)-1)"),
        })
    }

    /// Arbitrary source given as closures; audited for `F(0) = 0`, convexity,
    /// monotonicity and a superlinear tail.
    pub fn custom<F, D>(label: impl Into<String>, value: F, derivative: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let n = Self {
            kind: SourceKind::Custom {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
            label: label.into(),
        };
        if n.value(0.0) != 0.0 {
            return domain(format!("source {} must vanish at 0", n.label));
        }
        n.audit_convexity()?;
        n.audit_osgood()?;
        Ok(n)
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(c, p)` when the source is a pure power.
    pub fn power_parameters(&self) -> Option<(f64, f64)> {
        match self.kind {
            SourceKind::Power { coeff, exponent } => Some((coeff, exponent)),
            _ => None,
        }
    }

    /// `F(u)` for `u ≥ 0`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return domain(format!("source evaluated at negative argument {u}"));
        }
        Ok(self.value(u))
    }

    /// Unchecked `F(u)`; the hot path of the solver, which clips to `u ≥ 0`.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        match &self.kind {
            SourceKind::Power { coeff, exponent } => coeff * u.powf(*exponent),
            SourceKind::PowerSum { terms } => terms.iter().map(|(c, p)| c * u.powf(*p)).sum(),
            SourceKind::Exponential { coeff } => coeff * u.exp_m1(),
            SourceKind::Custom { value, .. } => value(u),
        }
    }

    /// `F′(u)`.
    pub fn derivative(&self, u: f64) -> f64 {
        match &self.kind {
            SourceKind::Power { coeff, exponent } => coeff * exponent * u.powf(exponent - 1.0),
            SourceKind::PowerSum { terms } => {
                terms.iter().map(|(c, p)| c * p * u.powf(p - 1.0)).sum()
            }
            SourceKind::Exponential { coeff } => coeff * u.exp(),
            SourceKind::Custom { derivative, .. } => derivative(u),
        }
    }

    /// Sampled second differences must be ≥ −1e-10 (relative to the local
    /// scale) and first differences ≥ 0.
    pub fn audit_convexity(&self) -> Result<()> {
        for u in audit_points() {
            let h = 1e-3 * u;
            let (a, b, c) = (self.value(u - h), self.value(u), self.value(u + h));
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                continue;
            }
            let scale = 1.0 + a.abs().max(b.abs()).max(c.abs());
            if a - 2.0 * b + c < -1e-10 * scale {
                return domain(format!(
                    "source {} is not convex near u = {u:e}",
                    self.label
                ));
            }
            if c < a - 1e-12 * scale {
                return domain(format!(
                    "source {} is decreasing near u = {u:e}",
                    self.label
                ));
            }
        }
        Ok(())
    }

    /// Tail audit: the local growth exponent `log₂ F(2u)/F(u)` must exceed 1
    /// at large `u`, and the tail integral past `u = 1e8` must be finite.
    pub fn audit_osgood(&self) -> Result<()> {
        for &u in &[1e4, 1e8, 1e12] {
            let (a, b) = (self.value(u), self.value(2.0 * u));
            if b.is_infinite() {
                return Ok(());
            }
            let q = (b / a).log2();
            if !(q > 1.0 + 1e-3) {
                return Err(Error::CriterionInapplicable(format!(
                    "source {} grows like u^{q:.4} at u = {u:e}; the Osgood integral diverges",
                    self.label
                )));
            }
        }
        let tail = OsgoodTransform::new(self.clone()).h_quadrature(1e8)?;
        if !tail.is_finite() {
            return Err(Error::CriterionInapplicable(format!(
                "source {}: tail of the Osgood integral is not finite",
                self.label
            )));
        }
        Ok(())
    }
}

/// `h(w) = ∫_w^∞ du / F(u)` and its inverse.
#[derive(Clone, Debug)]
pub struct OsgoodTransform {
    source: Nonlinearity,
    tolerance: f64,
}

impl OsgoodTransform {
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    pub fn new(source: Nonlinearity) -> Self {
        Self {
            source,
            tolerance: Self::DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(source: Nonlinearity, tolerance: f64) -> Self {
        Self { source, tolerance }
    }

    pub fn source(&self) -> &Nonlinearity {
        &self.source
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `h(w)` for `w > 0`.
    pub fn h(&self, w: f64) -> Result<f64> {
        if !(w > 0.0) {
            return domain(format!("h(w) needs w > 0, got {w}"));
        }
        match self.source.kind {
            SourceKind::Power { coeff, exponent } => {
                Ok(w.powf(1.0 - exponent) / (coeff * (exponent - 1.0)))
            }
            _ if w < 1.0 => Ok(self.h_head(w)? + self.h_quadrature(1.0)?),
            _ => self.h_quadrature(w),
        }
    }

    /// `∫_w^1 du / F(u)` in `y = ln u`, where the integrand `u/F(u)` stays
    /// smooth even when `F'(0) > 0` makes `h` grow like `ln(1/w)`.
    fn h_head(&self, w: f64) -> Result<f64> {
        let f = &self.source;
        let integrand = |y: f64| {
            let u = y.exp();
            u / f.value(u)
        };
        let est = quad::tanh_sinh(integrand, w.ln(), 0.0, self.tolerance).map_err(|e| match e {
            Error::Quadrature { achieved, .. } => Error::CriterionInapplicable(format!(
                "Osgood integral for {} did not converge near 0 (relative change {achieved:e})",
                f.label
            )),
            other => other,
        })?;
        Ok(est.value)
    }

    /// Quadrature of the compactified integral `∫_0^1 w / (s² F(w/s)) ds`.
    fn h_quadrature(&self, w: f64) -> Result<f64> {
        let f = &self.source;
        let integrand = |s: f64| {
            let u = w / s;
            let fu = f.value(u);
            if fu.is_infinite() {
                return 0.0;
            }
            // u²/(w F(u)) arranged to avoid overflow of u²
            (u / fu) * (u / w)
        };
        let est = quad::tanh_sinh(integrand, 0.0, 1.0, self.tolerance).map_err(|e| match e {
            Error::Quadrature { achieved, .. } => Error::CriterionInapplicable(format!(
                "Osgood integral for {} did not converge (relative change {achieved:e})",
                f.label
            )),
            other => other,
        })?;
        if !est.value.is_finite() || est.value < 0.0 {
            return Err(Error::CriterionInapplicable(format!(
                "Osgood integral for {} is not finite at w = {w}",
                f.label
            )));
        }
        Ok(est.value)
    }

    /// `w` with `h(w) = t`, to relative tolerance 1e-10 in `t` or better.
    pub fn h_inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return domain(format!("h^-1(T) needs T > 0, got {t}"));
        }
        if let SourceKind::Power { coeff, exponent } = self.source.kind {
            return Ok((coeff * (exponent - 1.0) * t).powf(-1.0 / (exponent - 1.0)));
        }
        // seed from the power law F ≈ c u^q fitted at u = 1
        let f = &self.source;
        let q = (f.value(2.0) / f.value(1.0)).log2().max(1.0 + 1e-3);
        let c = f.value(1.0);
        let seed = (c * (q - 1.0) * t).powf(-1.0 / (q - 1.0));
        let (mut lo, mut hi) = (seed, seed);
        // h decreasing: need h(lo) ≥ t ≥ h(hi)
        // sources with F'(0) > 0 put h^{-1}(T) near e^{−F'(0)T}, so the lower
        // search runs down to the subnormal range
        while self.h(lo)? < t {
            lo *= 0.25;
            if lo == 0.0 {
                return domain(format!("h^-1({t}) is below the smallest positive double"));
            }
        }
        while self.h(hi)? > t {
            hi *= 4.0;
            if !hi.is_finite() {
                return domain(format!("could not bracket h^-1({t}) from above"));
            }
        }
        // bisection in ln w down to a few ulps
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.h(m.exp())? > t {
                a = m;
            } else {
                b = m;
            }
            if (b - a) < 1e-15 * (1.0 + a.abs()) {
                break;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }
}

/// Fujita exponent `p_F = 1 + α/d`.
pub fn fujita_exponent(alpha: f64, d: Dimension) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    Ok(1.0 + alpha / d.as_f64())
}

/// Where a threshold constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdSource {
    /// `(1/(p−1))^{1/(p−1)}`, known for the Laplacian.
    Closed,
    /// Fractional case: no value is known; the Laplacian value is used.
    DefaultUnspecified,
    Override,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstant {
    pub value: f64,
    pub source: ThresholdSource,
}

/// Constant `c_{α,p}` in `sup_t t^{1/(p−1)} e^{−t(−Δ)^{α/2}} u0(0) > c_{α,p}`.
pub fn threshold_constant_c(alpha: f64, p: f64) -> Result<ThresholdConstant> {
    threshold_constant_with(alpha, p, None)
}

/// As [`threshold_constant_c`], with a caller-supplied value for `α < 2`.
pub fn threshold_constant_with(
    alpha: f64,
    p: f64,
    override_value: Option<f64>,
) -> Result<ThresholdConstant> {
    if !(p > 1.0) {
        return domain(format!("threshold constant needs p > 1, got {p}"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return domain(format!("alpha must lie in (0, 2], got {alpha}"));
    }
    let closed = (1.0 / (p - 1.0)).powf(1.0 / (p - 1.0));
    if alpha == 2.0 {
        return Ok(ThresholdConstant {
            value: closed,
            source: ThresholdSource::Closed,
        });
    }
    Ok(match override_value {
        Some(v) if v > 0.0 => ThresholdConstant {
            value: v,
            source: ThresholdSource::Override,
        },
        Some(v) => return domain(format!("threshold override must be positive, got {v}")),
        None => ThresholdConstant {
            value: closed,
            source: ThresholdSource::DefaultUnspecified,
        },
    })
}
