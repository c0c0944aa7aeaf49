//! Morrey norms, radial concentrations and the heat-semigroup
//! characterization `sup_t t^γ ‖e^{−t(−Δ)^{α/2}} u‖_∞`.
//!
//! Radial profiles are interpolated as a power law between neighbouring
//! samples (linearly where a sample vanishes), which makes every ball
//! integral of a homogeneous profile exact. Below the first sample the
//! first segment's exponent is continued; above the last one the tail
//! exponent hint is used if given, else the last segment's exponent.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::{roll_half, GridFunction, Spectral};
use crate::kernels::{KernelSpec, StableProfile};
use crate::quad::{adaptive, adaptive_best_effort, golden_max, Tolerance};
use crate::specfun::{sphere_area, Dimension};

/// A singular measure carried alongside the density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    PointMass {
        mass: f64,
    },
    /// Uniform measure of total mass `mass` on the sphere `|x| = radius`.
    Sphere {
        radius: f64,
        mass: f64,
    },
}

/// Radial function `r ↦ u(r)` in nominal dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    d: Dimension,
    r: Vec<f64>,
    u: Vec<f64>,
    tail_exponent: Option<f64>,
    atom: Option<Atom>,
    /// `∫_{r_0}^{r_i} u ρ^{d−1} dρ`.
    cumulative: Vec<f64>,
}

impl RadialProfile {
    pub fn new(d: Dimension, r: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != u.len() {
            return domain(format!(
                "need at least two (r, u) pairs of equal length, got {} and {}",
                r.len(),
                u.len()
            ));
        }
        if !(r[0] > 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) || !r[r.len() - 1].is_finite() {
            return domain("radii must be positive, finite and strictly increasing");
        }
        if u.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return domain("profile values must be finite and nonnegative");
        }
        let mut p = Self {
            d,
            r,
            u,
            tail_exponent: None,
            atom: None,
            cumulative: Vec::new(),
        };
        p.cumulative = p.prefix_integrals(1.0);
        Ok(p)
    }

    pub fn from_fn(d: Dimension, r: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let u = r.iter().map(|&x| f(x)).collect();
        Self::new(d, r, u)
    }

    /// `n` radii log-spaced over `[lo, hi]`.
    pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// A bare atom, with a zero density on the radii `r`.
    pub fn atom_only(d: Dimension, r: Vec<f64>, atom: Atom) -> Result<Self> {
        let n = r.len();
        Self::new(d, r, vec![0.0; n])?.with_atom(atom)
    }

    pub fn with_atom(mut self, atom: Atom) -> Result<Self> {
        let ok = match atom {
            Atom::PointMass { mass } => mass >= 0.0,
            Atom::Sphere { radius, mass } => mass >= 0.0 && radius > 0.0,
        };
        if !ok {
            return domain("atom mass must be nonnegative and sphere radius positive");
        }
        self.atom = Some(atom);
        Ok(self)
    }

    /// Decay `u(r) ∝ r^{−e}` beyond the last sample.
    pub fn with_tail_exponent(mut self, e: f64) -> Self {
        self.tail_exponent = Some(e);
        self
    }

    pub fn dim(&self) -> Dimension {
        self.d
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn atom(&self) -> Option<Atom> {
        self.atom
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let mut p = Self::new(
            self.d,
            self.r.clone(),
            self.u.iter().map(|v| v * lambda).collect(),
        )?;
        p.tail_exponent = self.tail_exponent;
        if let Some(a) = self.atom {
            p = p.with_atom(match a {
                Atom::PointMass { mass } => Atom::PointMass {
                    mass: mass * lambda,
                },
                Atom::Sphere { radius, mass } => Atom::Sphere {
                    radius,
                    mass: mass * lambda,
                },
            })?;
        }
        Ok(p)
    }

    fn segment_exponent(&self, i: usize) -> Option<f64> {
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        (u0 > 0.0 && u1 > 0.0).then(|| (u1 / u0).ln() / (self.r[i + 1] / self.r[i]).ln())
    }

    fn inner_exponent(&self) -> Option<f64> {
        self.segment_exponent(0)
    }

    fn outer_exponent(&self) -> Option<f64> {
        match self.tail_exponent {
            Some(e) => Some(-e),
            None => self.segment_exponent(self.r.len() - 2),
        }
    }

    /// Interpolated value.
    pub fn value(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return match self.inner_exponent() {
                Some(k) => self.u[0] * (x / self.r[0]).powf(k),
                None => self.u[0],
            };
        }
        if x >= self.r[n - 1] {
            return match self.outer_exponent() {
                Some(k) if self.u[n - 1] > 0.0 => self.u[n - 1] * (x / self.r[n - 1]).powf(k),
                _ => 0.0,
            };
        }
        let i = self.r.partition_point(|&ri| ri <= x) - 1;
        match self.segment_exponent(i) {
            Some(k) => self.u[i] * (x / self.r[i]).powf(k),
            None => {
                let w = (x - self.r[i]) / (self.r[i + 1] - self.r[i]);
                self.u[i] + w * (self.u[i + 1] - self.u[i])
            }
        }
    }

    /// `∫_a^b u^q ρ^{d−1} dρ` for `[a, b]` inside one interpolation piece
    /// anchored at `(r_i, u_i)` with exponent `k` (power-law piece) or with
    /// linear data `(r_i, u_i)–(r_{i+1}, u_{i+1})`.
    fn piece_integral(&self, a: f64, b: f64, anchor: (f64, f64), shape: Piece, q: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let d = self.d.as_f64();
        match shape {
            Piece::Power(k) => {
                let (r0, u0) = anchor;
                if u0 == 0.0 {
                    return 0.0;
                }
                // u0^q ∫_a^b (ρ/r0)^{qk} ρ^{d−1} dρ, anchored at a so steep
                // pieces neither overflow nor form ∞·0
                let scale = u0.powf(q) * (a / r0).powf(q * k) * a.powf(d);
                if scale == 0.0 {
                    return 0.0;
                }
                scale * power_integral_rel(a, b, q * k + d)
            }
            Piece::Linear { r1, u1 } => {
                let (r0, u0) = anchor;
                if q == 1.0 {
                    // ∫ (c0 + c1 ρ) ρ^{d−1}
                    let c1 = (u1 - u0) / (r1 - r0);
                    let c0 = u0 - c1 * r0;
                    c0 * (b.powf(d) - a.powf(d)) / d
                        + c1 * (b.powf(d + 1.0) - a.powf(d + 1.0)) / (d + 1.0)
                } else {
                    let f = |rho: f64| {
                        let w = (rho - r0) / (r1 - r0);
                        (u0 + w * (u1 - u0)).powf(q) * rho.powf(d - 1.0)
                    };
                    adaptive(f, a, b, &[], Tolerance::new(0.0, 1e-13))
                        .map(|e| e.value)
                        .unwrap_or(f64::NAN)
                }
            }
        }
    }

    fn interior_piece(&self, i: usize) -> Piece {
        match self.segment_exponent(i) {
            Some(k) => Piece::Power(k),
            None => Piece::Linear {
                r1: self.r[i + 1],
                u1: self.u[i + 1],
            },
        }
    }

    fn prefix_integrals(&self, q: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.r.len()];
        for i in 0..self.r.len() - 1 {
            let piece = self.interior_piece(i);
            acc[i + 1] = acc[i]
                + self.piece_integral(self.r[i], self.r[i + 1], (self.r[i], self.u[i]), piece, q);
        }
        acc
    }

    /// `∫_0^x u^q ρ^{d−1} dρ` of the density alone; `+∞` when the inner
    /// continuation is not integrable.
    fn radial_integral(&self, x: f64, q: f64, prefix: &[f64]) -> f64 {
        let d = self.d.as_f64();
        let n = self.r.len();
        let inner_k = self.inner_exponent().unwrap_or(0.0);
        let inner_total = if self.u[0] == 0.0 {
            0.0
        } else if q * inner_k + d <= 0.0 {
            f64::INFINITY
        } else {
            // from 0
            self.u[0].powf(q) * self.r[0].powf(d) / (q * inner_k + d)
        };
        if x <= self.r[0] {
            if self.u[0] == 0.0 {
                return 0.0;
            }
            if q * inner_k + d <= 0.0 {
                return f64::INFINITY;
            }
            return self.u[0].powf(q) * self.r[0].powf(-q * inner_k) * x.powf(q * inner_k + d)
                / (q * inner_k + d);
        }
        if x >= self.r[n - 1] {
            let mut total = inner_total + prefix[n - 1];
            if let Some(k) = self.outer_exponent() {
                total += self.piece_integral(
                    self.r[n - 1],
                    x,
                    (self.r[n - 1], self.u[n - 1]),
                    Piece::Power(k),
                    q,
                );
            }
            return total;
        }
        let i = self.r.partition_point(|&ri| ri <= x) - 1;
        inner_total
            + prefix[i]
            + self.piece_integral(
                self.r[i],
                x,
                (self.r[i], self.u[i]),
                self.interior_piece(i),
                q,
            )
    }

    /// Mass of the closed ball `B_x`, atoms included.
    pub fn ball_mass(&self, x: f64) -> f64 {
        let density = sphere_area(self.d) * self.radial_integral(x, 1.0, &self.cumulative);
        density
            + match self.atom {
                Some(Atom::PointMass { mass }) => mass,
                Some(Atom::Sphere { radius, mass }) if radius <= x => mass,
                _ => 0.0,
            }
    }

    /// `∫_{B_x} u^q` of the density; atoms are rejected for `q > 1`.
    pub fn ball_power_integral(&self, x: f64, q: f64) -> Result<f64> {
        if q == 1.0 {
            return Ok(self.ball_mass(x));
        }
        if self.atom.is_some() {
            return domain("atoms have no finite L^q norm for q > 1");
        }
        let prefix = self.prefix_integrals(q);
        Ok(sphere_area(self.d) * self.radial_integral(x, q, &prefix))
    }

    /// `σ_d ∫_0^∞ k(ρ) u(ρ) ρ^{d−1} dρ` plus the atoms paired with `k`.
    pub fn pair_with(&self, k: impl Fn(f64) -> f64) -> Result<f64> {
        let d = self.d.as_f64();
        let n = self.r.len();
        let lo = self.r[0].ln() - 60.0;
        let hi = self.r[n - 1].ln() + 60.0;
        let integrand = |y: f64| {
            let rho = y.exp();
            let v = self.value(rho);
            if v == 0.0 {
                0.0
            } else {
                k(rho) * v * (d * y).exp()
            }
        };
        // every sample is a kink of the interpolant
        let mut breaks: Vec<f64> = self.r.iter().map(|r| r.ln()).collect();
        breaks.extend((0..24).map(|i| lo + (hi - lo) * i as f64 / 24.0));
        let est = adaptive_best_effort(integrand, lo, hi, &breaks, Tolerance::new(0.0, 1e-12));
        if !est.value.is_finite() || est.error > PAIRING_TOLERANCE * est.value.abs() {
            return Err(Error::Quadrature {
                achieved: est.error / est.value.abs(),
                requested: PAIRING_TOLERANCE,
            });
        }
        let atoms = match self.atom {
            Some(Atom::PointMass { mass }) => mass * k(0.0),
            Some(Atom::Sphere { radius, mass }) => mass * k(radius),
            None => 0.0,
        };
        Ok(sphere_area(self.d) * est.value + atoms)
    }
}

/// Relative error accepted from radial pairings.
const PAIRING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
enum Piece {
    Power(f64),
    Linear { r1: f64, u1: f64 },
}

/// `a^{−m} ∫_a^b ρ^{m−1} dρ`, stable near `m = 0`.
fn power_integral_rel(a: f64, b: f64, m: f64) -> f64 {
    let l = (b / a).ln();
    let x = m * l;
    if x.abs() < 1e-8 {
        l * (1.0 + 0.5 * x)
    } else {
        x.exp_m1() / m
    }
}

/// A Morrey-type supremum over ball radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorreyResult {
    pub s_order: f64,
    pub q: f64,
    pub value: f64,
    pub argmax: f64,
    /// The functional still grows by more than 5% per decade at an end of
    /// the radius range.
    pub divergent: bool,
}

/// Growth per decade above which a supremum is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 1.05;

/// `sup_r r^{α/(p−1)−d} ∫_{B_r} u`.
pub fn radial_concentration(u: &RadialProfile, p: f64, alpha: f64) -> Result<MorreyResult> {
    if !(p > 1.0) || !(alpha > 0.0) {
        return domain(format!(
            "concentration needs p > 1 and alpha > 0, got p = {p}, alpha = {alpha}"
        ));
    }
    let s_order = u.dim().as_f64() * (p - 1.0) / alpha;
    centered_sup(u, s_order, 1.0)
}

/// `sup_R R^{d(1/s−1/q)} ‖u‖_{L^q(B_R)}` over centered balls, exact for
/// radial nonincreasing profiles.
pub fn morrey_norm(u: &RadialProfile, s_order: f64, q: f64) -> Result<MorreyResult> {
    if !(q >= 1.0) || !(s_order >= q) {
        return domain(format!(
            "Morrey norm needs 1 <= q <= s, got q = {q}, s = {s_order}"
        ));
    }
    centered_sup(u, s_order, q)
}

fn centered_sup(u: &RadialProfile, s_order: f64, q: f64) -> Result<MorreyResult> {
    let d = u.dim().as_f64();
    let e = d * (1.0 / s_order - 1.0 / q);
    let prefix = if q == 1.0 {
        None
    } else {
        Some(u.prefix_integrals(q))
    };
    if q > 1.0 && u.atom.is_some() {
        return domain("atoms have no finite L^q norm for q > 1");
    }
    let ball = |x: f64| -> f64 {
        match &prefix {
            None => u.ball_mass(x),
            Some(pre) => sphere_area(u.d) * u.radial_integral(x, q, pre),
        }
    };
    let functional = |x: f64| x.powf(e) * ball(x).powf(1.0 / q);

    let radii = u.radii();
    let (lo, hi) = (radii[0], radii[radii.len() - 1]);
    let mut best = (lo, f64::NEG_INFINITY);
    let mut samples: Vec<f64> = radii.to_vec();
    if let Some(Atom::Sphere { radius, .. }) = u.atom {
        samples.push(radius);
        samples.sort_by(f64::total_cmp);
    }
    for &x in &samples {
        let v = functional(x);
        if v.is_nan() {
            return Err(Error::Domain(
                "Morrey functional is undefined on the sample".into(),
            ));
        }
        if v > best.1 {
            best = (x, v);
        }
    }
    // refine in ln r between the argmax's neighbours
    let i = samples.iter().position(|&x| x == best.0).unwrap_or(0);
    let a = samples[i.saturating_sub(1)].ln();
    let b = samples[(i + 1).min(samples.len() - 1)].ln();
    if b > a {
        let (y, v) = golden_max(|y| functional(y.exp()), a, b, 1e-12);
        if v > best.1 {
            best = (y.exp(), v);
        }
    }

    let growth_top = functional(hi) / functional(hi / 10.0);
    let growth_bottom = functional(lo) / functional(lo * 10.0);
    let divergent = best.1.is_infinite()
        || (growth_top.is_finite() && growth_top > DIVERGENCE_RATIO)
        || (growth_bottom.is_finite() && growth_bottom > DIVERGENCE_RATIO)
        || growth_bottom.is_infinite();
    Ok(MorreyResult {
        s_order,
        q,
        value: best.1.max(0.0),
        argmax: best.0,
        divergent,
    })
}

/// Supremum of `t^γ (P_{t,α} ∗ u)` over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatCharacterization {
    pub value: f64,
    pub argmax_t: f64,
    /// The maximum is not attained at an end of the time grid.
    pub interior: bool,
    pub curve: Vec<(f64, f64)>,
}

fn summarize(curve: Vec<(f64, f64)>) -> HeatCharacterization {
    let (idx, &(t, v)) = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty time grid");
    let interior = idx > 0 && idx + 1 < curve.len();
    HeatCharacterization {
        value: v.max(0.0),
        argmax_t: t,
        interior,
        curve,
    }
}

fn check_times(gamma: f64, t_grid: &[f64]) -> Result<()> {
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !(*t > 0.0))
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return domain("time grid must be nonempty, positive and increasing");
    }
    Ok(())
}

/// `max_t t^γ (P_{t,α} ∗ u)(0)` for a radial profile.
pub fn heat_characterization(
    u: &RadialProfile,
    alpha: f64,
    gamma: f64,
    t_grid: &[f64],
) -> Result<HeatCharacterization> {
    check_times(gamma, t_grid)?;
    let profile = StableProfile::new(alpha, u.dim())?;
    let mut curve = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let w = u.pair_with(|r| profile.heat_kernel(t, r).unwrap_or(0.0))?;
        curve.push((t, t.powf(gamma) * w));
    }
    Ok(summarize(curve))
}

/// `max_t t^γ sup_x (k_t ∗ u)(x)` on the grid, for the semigroup of `spec`.
pub fn heat_characterization_grid(
    u: &GridFunction,
    spec: &KernelSpec,
    gamma: f64,
    t_grid: &[f64],
) -> Result<HeatCharacterization> {
    check_times(gamma, t_grid)?;
    let grid = *u.grid();
    let psi = spec.generator_on_grid(&grid)?;
    let mut spectral = Spectral::new(grid);
    let spectrum = spectral.forward(u.values());
    let mut curve = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let evolved: Vec<Complex64> = spectrum
            .iter()
            .zip(&psi)
            .map(|(c, p)| c * (t * p).exp())
            .collect();
        let sup = spectral
            .inverse_real(evolved)
            .into_iter()
            .fold(0.0, f64::max);
        curve.push((t, t.powf(gamma) * sup));
    }
    Ok(summarize(curve))
}

/// Morrey norm of grid data: sup over grid centers and the given radii.
pub fn morrey_norm_grid(
    u: &GridFunction,
    s_order: f64,
    q: f64,
    radii: &[f64],
) -> Result<MorreyResult> {
    if !(q >= 1.0) || !(s_order >= q) {
        return domain(format!(
            "Morrey norm needs 1 <= q <= s, got q = {q}, s = {s_order}"
        ));
    }
    if radii.is_empty() {
        return domain("Morrey norm needs at least one radius");
    }
    let grid = *u.grid();
    let d = grid.dim() as f64;
    let e = d * (1.0 / s_order - 1.0 / q);
    let powered: Vec<f64> = u.values().iter().map(|v| v.powf(q)).collect();
    let mut spectral = Spectral::new(grid);
    let data = spectral.forward(&powered);
    let vol = grid.cell_volume();
    let mut best = (radii[0], 0.0);
    for &radius in radii {
        let ball: Vec<f64> = (0..grid.len())
            .map(|k| if grid.radius(k) <= radius { 1.0 } else { 0.0 })
            .collect();
        let ball_hat = spectral.forward(&roll_half(&grid, &ball));
        let conv: Vec<Complex64> = data.iter().zip(&ball_hat).map(|(a, b)| a * b).collect();
        let local = spectral.inverse_real(conv).into_iter().fold(0.0, f64::max) * vol;
        let v = radius.powf(e) * local.max(0.0).powf(1.0 / q);
        if v > best.1 {
            best = (radius, v);
        }
    }
    Ok(MorreyResult {
        s_order,
        q,
        value: best.1,
        argmax: best.0,
        divergent: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn homogeneous_profile_ball_mass_is_exact() {
        // u = r^{−1} in d = 5: ∫_{B_R} u = σ_5 R^4 / 4
        let r = RadialProfile::log_radii(1e-2, 1e2, 41);
        let u = RadialProfile::from_fn(dim(5), r, |x| 1.0 / x).unwrap();
        for x in [1e-4f64, 0.37, 5.0, 1e3] {
            let exact = sphere_area(dim(5)) * x.powi(4) / 4.0;
            assert!((u.ball_mass(x) / exact - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn linear_pieces_around_zeros() {
        // u = max(1 − r, 0) on [0.001, 2] in d = 1: ∫_0^1 (1−r)·2 dr = 1
        let r: Vec<f64> = (1..=2000).map(|i| i as f64 * 1e-3).collect();
        let u = RadialProfile::from_fn(dim(1), r, |x| (1.0 - x).max(0.0)).unwrap();
        assert!((u.ball_mass(2.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_profile_has_zero_norms() {
        let r = RadialProfile::log_radii(1e-2, 1e2, 20);
        let u = RadialProfile::from_fn(dim(3), r, |_| 0.0).unwrap();
        assert_eq!(radial_concentration(&u, 3.0, 2.0).unwrap().value, 0.0);
        assert_eq!(morrey_norm(&u, 3.0, 2.0).unwrap().value, 0.0);
        let h = heat_characterization(&u, 2.0, 0.5, &[0.1, 1.0, 10.0]).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn point_mass_concentration_diverges() {
        let r = RadialProfile::log_radii(1e-3, 1e3, 31);
        let u = RadialProfile::atom_only(dim(1), r, Atom::PointMass { mass: 1.0 }).unwrap();
        let res = radial_concentration(&u, 2.0, 2.0).unwrap();
        assert!(res.divergent);
    }

    #[test]
    fn q_above_s_is_rejected() {
        let r = RadialProfile::log_radii(1e-2, 1e2, 10);
        let u = RadialProfile::from_fn(dim(2), r, |x| (-x).exp()).unwrap();
        assert!(morrey_norm(&u, 1.5, 2.0).is_err());
    }

    #[test]
    fn homogeneous_q2_norm_closed_form() {
        // u = r^{−1}, d = 5, q = 2, s = 5: R^{−3/2} (σ_5 R³/3)^{1/2}
        let r = RadialProfile::log_radii(1e-2, 1e2, 41);
        let u = RadialProfile::from_fn(dim(5), r, |x| 1.0 / x).unwrap();
        let m = morrey_norm(&u, 5.0, 2.0).unwrap();
        assert!((m.value - (sphere_area(dim(5)) / 3.0).sqrt()).abs() < 1e-10);
        assert!(!m.divergent);
    }

    #[test]
    fn pairing_gaussian_with_gaussian() {
        // (G_t ∗ e^{−|x|²})(0) in d = 3 = (1 + 4t)^{−3/2}
        // the interpolant is second order in the log spacing h, error ~ h²r²/2
        let r = RadialProfile::log_radii(1e-3, 12.0, 20_000);
        let u = RadialProfile::from_fn(dim(3), r, |x| (-x * x).exp())
            .unwrap()
            .with_tail_exponent(60.0);
        let t: f64 = 0.7;
        let v = u
            .pair_with(|rho| (4.0 * PI * t).powf(-1.5) * (-rho * rho / (4.0 * t)).exp())
            .unwrap();
        let exact = (1.0 + 4.0 * t).powf(-1.5);
        assert!((v / exact - 1.0).abs() < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn sphere_atom_pairs_at_its_radius() {
        let r = RadialProfile::log_radii(1e-2, 1e2, 10);
        let u = RadialProfile::atom_only(
            dim(4),
            r,
            Atom::Sphere {
                radius: 1.0,
                mass: 1.0,
            },
        )
        .unwrap();
        let v = u.pair_with(|rho| (-rho).exp()).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(u.ball_mass(0.5), 0.0);
        assert_eq!(u.ball_mass(1.0), 1.0);
    }
}
