//! Dispersal kernels `J`, their Fourier symbols, the semigroup kernels
//! `k_t = F⁻¹(e^{t(Ĵ−1)})` and the fractional heat kernel profiles.
//!
//! Fourier convention: `Ĵ(ξ) = ∫ J(x) e^{−iξ·x} dx`, so `Ĵ(0) = 1`.

mod semigroup;
mod stable;

use std::f64::consts::PI;

pub use semigroup::{ResolutionPolicy, SemigroupKernel};
pub use stable::{
    ln_subordinator_density, subordinator_density, verify_kernel_bounds, KernelBoundReport,
    ProfileMethod, StableProfile,
};

use crate::error::{domain, Result};
use crate::grid::{roll_half, Grid, Spectral};
use crate::quad::{adaptive, gk15, Tolerance};
use crate::specfun::{gamma, ln_beta, sphere_area, Dimension};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `J = (4πa)^{−d/2} e^{−|x|²/4a}`, `Ĵ = e^{−a|ξ|²}`.
    GaussianLike { a: f64 },
    /// `J ∝ (1 − |x|²/R²)²` on the ball of radius `R`.
    CompactBump { radius: f64 },
    /// `J = ((n−1)/2)(1 + |x|)^{−n}` on the line, `1 < n < 3`.
    HeavyTail { n: f64 },
    /// No `J`; the generator is `−a|ξ|^α` directly.
    PureFractional { alpha: f64, coeff: f64 },
}

/// A dispersal kernel family together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    dim: Dimension,
}

/// Value of a symbol at a frequency. The fractional generator has no
/// bounded `Ĵ`; its propagator `e^{−ta|ξ|^α}` is used directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    Value(f64),
    FractionalGenerator { alpha: f64, coeff: f64 },
}

impl KernelSpec {
    pub fn gaussian_like(dim: Dimension, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return domain(format!("symbol coefficient must be positive, got {a}"));
        }
        Ok(Self {
            kind: KernelKind::GaussianLike { a },
            dim,
        })
    }

    pub fn compact_bump(dim: Dimension, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return domain(format!("bump radius must be positive, got {radius}"));
        }
        Ok(Self {
            kind: KernelKind::CompactBump { radius },
            dim,
        })
    }

    pub fn heavy_tail(dim: Dimension, n: f64) -> Result<Self> {
        if dim.get() != 1 {
            return domain("heavy-tailed kernels are implemented on the line only");
        }
        if !(n > 1.0 && n < 3.0) {
            return domain(format!("tail order must lie in (d, d+2) = (1, 3), got {n}"));
        }
        Ok(Self {
            kind: KernelKind::HeavyTail { n },
            dim,
        })
    }

    pub fn pure_fractional(dim: Dimension, alpha: f64) -> Result<Self> {
        Self::pure_fractional_scaled(dim, alpha, 1.0)
    }

    pub fn pure_fractional_scaled(dim: Dimension, alpha: f64, coeff: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return domain(format!("alpha must lie in (0, 2], got {alpha}"));
        }
        if !(coeff > 0.0) || !coeff.is_finite() {
            return domain(format!("symbol coefficient must be positive, got {coeff}"));
        }
        Ok(Self {
            kind: KernelKind::PureFractional { alpha, coeff },
            dim,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    /// True when the generator is `J ∗ u − u`, i.e. `k_t` carries an atom.
    pub fn is_nonlocal(&self) -> bool {
        !matches!(self.kind, KernelKind::PureFractional { .. })
    }

    /// Exponent `α` in `Ĵ(ξ) = 1 − A|ξ|^α + o(|ξ|^α)`.
    pub fn alpha_effective(&self) -> f64 {
        match self.kind {
            KernelKind::GaussianLike { .. } | KernelKind::CompactBump { .. } => 2.0,
            KernelKind::HeavyTail { n } => n - self.dim.as_f64(),
            KernelKind::PureFractional { alpha, .. } => alpha,
        }
    }

    /// Coefficient `A` in `Ĵ(ξ) = 1 − A|ξ|^α + o(|ξ|^α)`.
    pub fn symbol_coefficient(&self) -> f64 {
        let d = self.dim.as_f64();
        match self.kind {
            KernelKind::GaussianLike { a } => a,
            // second moment R² d/(d+6), divided by 2d
            KernelKind::CompactBump { radius } => radius * radius / (2.0 * (d + 6.0)),
            KernelKind::HeavyTail { n } => {
                // 2c ∫ (1 − cos y) y^{−n} dy with c = (n−1)/2
                let a = n - 1.0;
                a * PI / (2.0 * gamma(n).unwrap_or(f64::NAN) * (0.5 * PI * a).sin())
            }
            KernelKind::PureFractional { coeff, .. } => coeff,
        }
    }

    /// Radial density `J(r)`; `None` for the fractional generator.
    pub fn density(&self, r: f64) -> Option<f64> {
        let d = self.dim.as_f64();
        match self.kind {
            KernelKind::GaussianLike { a } => {
                Some((4.0 * PI * a).powf(-0.5 * d) * (-r * r / (4.0 * a)).exp())
            }
            KernelKind::CompactBump { radius } => {
                let t = 1.0 - (r / radius).powi(2);
                if t <= 0.0 {
                    return Some(0.0);
                }
                let ln_norm = std::f64::consts::LN_2
                    - sphere_area(self.dim).ln()
                    - d * radius.ln()
                    - ln_beta(0.5 * d, 3.0).unwrap_or(f64::NAN);
                Some(ln_norm.exp() * t * t)
            }
            KernelKind::HeavyTail { n } => Some(0.5 * (n - 1.0) * (1.0 + r.abs()).powf(-n)),
            KernelKind::PureFractional { .. } => None,
        }
    }

    /// Pointwise symbol `Ĵ(ξ)`.
    pub fn fourier_symbol(&self, xi: &[f64]) -> Result<Symbol> {
        let k = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self.kind {
            KernelKind::GaussianLike { a } => Ok(Symbol::Value((-a * k * k).exp())),
            KernelKind::CompactBump { radius } => {
                if k == 0.0 {
                    return Ok(Symbol::Value(1.0));
                }
                let sigma = sphere_area(self.dim);
                let d = self.dim.as_f64();
                let integrand = |r: f64| {
                    sigma
                        * self.density(r).unwrap_or(0.0)
                        * r.powf(d - 1.0)
                        * sphere_average(self.dim, k * r)
                };
                let est = adaptive(integrand, 0.0, radius, &[], Tolerance::new(1e-15, 1e-12))?;
                Ok(Symbol::Value(est.value))
            }
            KernelKind::HeavyTail { n } => Ok(Symbol::Value(1.0 - heavy_tail_defect(n, k))),
            KernelKind::PureFractional { alpha, coeff } => {
                Ok(Symbol::FractionalGenerator { alpha, coeff })
            }
        }
    }

    /// Generator symbol `ψ(ξ)` on the DFT frequencies of `grid`, so that the
    /// propagator over time `t` is `e^{tψ}`. For Gaussian and fractional
    /// kinds the analytic symbol is used; bumps and heavy tails use the DFT
    /// of the sampled kernel, normalized to unit discrete mass.
    pub fn generator_on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        if grid.dim() as u32 != self.dim.get() {
            return domain(format!(
                "kernel dimension {} does not match grid dimension {}",
                self.dim,
                grid.dim()
            ));
        }
        let modulus = (0..grid.len()).map(|k| grid.frequency_modulus(k));
        match self.kind {
            KernelKind::GaussianLike { a } => Ok(modulus.map(|m| (-a * m * m).exp_m1()).collect()),
            KernelKind::PureFractional { alpha, coeff } => {
                Ok(modulus.map(|m| -coeff * m.powf(alpha)).collect())
            }
            KernelKind::CompactBump { radius } => {
                if radius < 4.0 * grid.spacing() {
                    return Err(crate::grid::resolution_error(
                        format!("bump radius {radius} spans fewer than four cells"),
                        grid,
                        false,
                    ));
                }
                Ok(self.sampled_generator(grid))
            }
            KernelKind::HeavyTail { .. } => {
                if grid.spacing() > 0.25 {
                    return Err(crate::grid::resolution_error(
                        "heavy-tailed kernel needs spacing at most 1/4",
                        grid,
                        false,
                    ));
                }
                Ok(self.sampled_generator(grid))
            }
        }
    }

    fn sampled_generator(&self, grid: &Grid) -> Vec<f64> {
        let samples: Vec<f64> = (0..grid.len())
            .map(|k| self.density(grid.radius(k)).unwrap_or(0.0))
            .collect();
        let mut spectral = Spectral::new(*grid);
        let spec = spectral.forward(&roll_half(grid, &samples));
        let total = spec[0].re;
        spec.iter().map(|c| c.re / total - 1.0).collect()
    }
}

/// `1 − Ĵ(ξ)` for the heavy-tailed kernel:
/// `2c ξ^{n−1} ∫₀^∞ (1 − cos y)(ξ + y)^{−n} dy`, integrated period by period
/// with a two-term asymptotic tail.
fn heavy_tail_defect(n: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    const PERIODS: usize = 400;
    let c = 0.5 * (n - 1.0);
    let mut f = |y: f64| (1.0 - y.cos()) * (xi + y).powf(-n);
    let mut acc = 0.0;
    for j in 0..2 * PERIODS {
        let a = j as f64 * PI;
        acc += gk15(&mut f, a, a + PI).0;
    }
    let big = xi + 2.0 * PI * PERIODS as f64;
    acc += big.powf(1.0 - n) / (n - 1.0) - n * big.powf(-n - 1.0);
    2.0 * c * xi.powf(n - 1.0) * acc
}

/// Mean of `cos(z ω₁)` over the unit sphere `S^{d−1}`.
pub(crate) fn sphere_average(d: Dimension, z: f64) -> f64 {
    match d.get() {
        1 => z.cos(),
        3 => {
            if z.abs() < 1e-4 {
                1.0 - z * z / 6.0
            } else {
                z.sin() / z
            }
        }
        _ => {
            let m = d.as_f64() - 2.0;
            let weight = |t: f64| t.sin().powf(m);
            let norm = adaptive(weight, 0.0, PI, &[], Tolerance::rel(1e-13))
                .map(|e| e.value)
                .unwrap_or(f64::NAN);
            let num = adaptive(
                |t: f64| (z * t.cos()).cos() * t.sin().powf(m),
                0.0,
                PI,
                &[],
                Tolerance::new(1e-15, 1e-12),
            )
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
            num / norm
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn gaussian_symbol_normalized_and_quadratic() {
        let s = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
        assert_eq!(s.fourier_symbol(&[0.0]).unwrap(), Symbol::Value(1.0));
        for xi in [0.1, 0.05, 0.025] {
            let Symbol::Value(v) = s.fourier_symbol(&[xi]).unwrap() else {
                panic!()
            };
            assert!(((1.0 - v) / (xi * xi) - 1.0).abs() < xi * xi);
        }
    }

    #[test]
    fn bump_symbol_matches_second_moment() {
        for d in [1, 2, 3] {
            let s = KernelSpec::compact_bump(dim(d), 1.5).unwrap();
            let a = s.symbol_coefficient();
            let xi = 1e-2;
            let Symbol::Value(v) = s.fourier_symbol(&[xi, 0.0]).unwrap() else {
                panic!()
            };
            assert!(((1.0 - v) / (xi * xi) / a - 1.0).abs() < 1e-3, "d={d}");
            // unit mass by radial quadrature
            let sigma = sphere_area(dim(d));
            let m = adaptive(
                |r: f64| sigma * s.density(r).unwrap() * r.powi(d as i32 - 1),
                0.0,
                1.5,
                &[],
                Tolerance::rel(1e-13),
            )
            .unwrap()
            .value;
            assert!((m - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_tail_defect_small_xi() {
        let s = KernelSpec::heavy_tail(dim(1), 2.0).unwrap();
        let a = s.symbol_coefficient();
        assert!((a - PI / 2.0).abs() < 1e-12);
        let Symbol::Value(v) = s.fourier_symbol(&[1e-4]).unwrap() else {
            panic!()
        };
        assert!(((1.0 - v) / 1e-4 / a - 1.0).abs() < 1e-2);
        assert!(KernelSpec::heavy_tail(dim(2), 2.5).is_err());
        assert!(KernelSpec::heavy_tail(dim(1), 3.0).is_err());
    }

    #[test]
    fn heavy_tail_symbol_against_cosine_integral() {
        // ∫₀^∞ cos(ξx)(1+x)^{−2} dx by brute composite Simpson on a long range
        let xi: f64 = 0.7;
        let h = 1e-3;
        let n = 4_000_000usize;
        let f = |x: f64| (xi * x).cos() / (1.0 + x).powi(2);
        let mut s = f(0.0) + f(n as f64 * h);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let tail_start = n as f64 * h;
        // tail by parts: ∫_X^∞ cos(ξx)g ≈ −sin(ξX)g(X)/ξ
        let tail = -(xi * tail_start).sin() / (xi * (1.0 + tail_start).powi(2));
        let brute = 2.0 * 0.5 * (s * h / 3.0 + tail);
        let spec = KernelSpec::heavy_tail(dim(1), 2.0).unwrap();
        let Symbol::Value(v) = spec.fourier_symbol(&[xi]).unwrap() else {
            panic!()
        };
        assert!((v - brute).abs() < 1e-7, "{v} vs {brute}");
    }

    #[test]
    fn sampled_generator_vanishes_at_zero() {
        let g = Grid::new(1, 256, 16.0).unwrap();
        let s = KernelSpec::compact_bump(dim(1), 1.0).unwrap();
        let psi = s.generator_on_grid(&g).unwrap();
        assert_eq!(psi[0], 0.0);
        assert!(psi.iter().all(|v| *v <= 1e-14 && *v >= -2.0 - 1e-14));
        let coarse = Grid::new(1, 16, 16.0).unwrap();
        assert!(matches!(
            s.generator_on_grid(&coarse),
            Err(crate::Error::Resolution { .. })
        ));
    }

    #[test]
    fn sphere_average_general_dimension() {
        // d = 2: J0(z); d = 5 is a spherical Bessel: 3(sin z − z cos z)/z³
        let z: f64 = 2.3;
        let j0 = 0.055_539_784_445_602; // J0(2.3)
        assert!((sphere_average(dim(2), z) - j0).abs() < 1e-9);
        let exact = 3.0 * (z.sin() - z * z.cos()) / z.powi(3);
        assert!((sphere_average(dim(5), z) - exact).abs() < 1e-11);
    }
}
