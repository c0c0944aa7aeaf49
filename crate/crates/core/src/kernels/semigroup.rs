use crate::error::{Error, Result};
use crate::grid::{resolution_error, roll_half, Grid, Spectral};

use super::KernelSpec;

/// Tolerances a sampled semigroup kernel must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionPolicy {
    /// Largest admissible `∫ |k_t|` over the outer shell of the box.
    pub boundary_mass: f64,
    /// Largest admissible propagator value at the Nyquist frequency,
    /// relative to its value at `ξ = 0`. Only applied to analytic symbols.
    pub spectral_tail: f64,
    /// Negative undershoot allowed, relative to `sup k_t`.
    pub negativity: f64,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            boundary_mass: 1e-8,
            spectral_tail: 1e-10,
            negativity: 1e-9,
        }
    }
}

/// Samples of `k_t` on a periodic grid, centered at the origin site.
///
/// For the nonlocal kinds `k_t = e^{−t}δ + k_t^reg`; the atom is kept
/// separately and folded into [`values`](Self::values) as a single-site
/// spike of height `e^{−t}/|cell|`.
#[derive(Debug, Clone)]
pub struct SemigroupKernel {
    spec: KernelSpec,
    t: f64,
    grid: Grid,
    regular: Vec<f64>,
    atom: f64,
    boundary_mass: f64,
}

impl SemigroupKernel {
    pub fn new(spec: KernelSpec, t: f64, grid: Grid) -> Result<Self> {
        Self::with_policy(spec, t, grid, &ResolutionPolicy::default())
    }

    pub fn with_policy(
        spec: KernelSpec,
        t: f64,
        grid: Grid,
        policy: &ResolutionPolicy,
    ) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "kernel time must be positive, got {t}"
            )));
        }
        let psi = spec.generator_on_grid(&grid)?;
        let atom = if spec.is_nonlocal() { (-t).exp() } else { 0.0 };
        let multiplier: Vec<f64> = psi.iter().map(|v| (t * v).exp() - atom).collect();

        if !spec.is_nonlocal() || matches!(spec.kind(), super::KernelKind::GaussianLike { .. }) {
            let n = grid.points();
            let nyquist = (0..grid.len())
                .filter(|&k| grid.axes(k).iter().take(grid.dim()).any(|&i| i == n / 2))
                .map(|k| multiplier[k].abs())
                .fold(0.0, f64::max);
            if nyquist > policy.spectral_tail * multiplier[0].abs() {
                return Err(resolution_error(
                    format!("propagator at Nyquist is {nyquist:.3e} of its mean"),
                    &grid,
                    false,
                ));
            }
        }

        let mut spectral = Spectral::new(grid);
        let spectrum = multiplier
            .iter()
            .map(|&m| num_complex::Complex64::new(m, 0.0))
            .collect();
        let vol = grid.cell_volume();
        let raw: Vec<f64> = spectral
            .inverse_real(spectrum)
            .into_iter()
            .map(|v| v / vol)
            .collect();
        let mut regular = roll_half(&grid, &raw);
        symmetrize(&grid, &mut regular);

        let sup = regular.iter().copied().fold(0.0, f64::max) + atom / vol;
        let min = regular.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -policy.negativity * sup {
            return Err(resolution_error(
                format!("kernel undershoots to {min:.3e}"),
                &grid,
                false,
            ));
        }
        let boundary_mass = regular
            .iter()
            .enumerate()
            .filter(|(k, _)| grid.in_outer_shell(*k))
            .map(|(_, v)| v.abs())
            .sum::<f64>()
            * vol;
        if boundary_mass > policy.boundary_mass {
            return Err(resolution_error(
                format!("kernel mass {boundary_mass:.3e} in the outer shell of the box"),
                &grid,
                true,
            ));
        }
        Ok(Self {
            spec,
            t,
            grid,
            regular,
            atom,
            boundary_mass,
        })
    }

    /// Retry on resolution failures with the suggested grid, at most
    /// `max_doublings` times.
    pub fn resolved(
        spec: KernelSpec,
        t: f64,
        mut grid: Grid,
        policy: &ResolutionPolicy,
        max_doublings: usize,
    ) -> Result<Self> {
        let mut attempt = 0;
        loop {
            match Self::with_policy(spec, t, grid, policy) {
                Err(Error::Resolution {
                    suggested_half_width,
                    suggested_points,
                    ..
                }) if attempt < max_doublings => {
                    grid = Grid::new(grid.dim(), suggested_points, suggested_half_width)?;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Weight of the `δ` component (`e^{−t}` for nonlocal kinds, else 0).
    pub fn atom(&self) -> f64 {
        self.atom
    }

    /// `k_t` with the atom removed.
    pub fn regular_part(&self) -> &[f64] {
        &self.regular
    }

    /// Samples of `k_t` including the atom spike at the origin site.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.regular.clone();
        v[self.grid.origin()] += self.atom / self.grid.cell_volume();
        v
    }

    pub fn mass(&self) -> f64 {
        self.regular.iter().sum::<f64>() * self.grid.cell_volume() + self.atom
    }

    pub fn boundary_mass(&self) -> f64 {
        self.boundary_mass
    }
}

/// Average with the reflection `x ↦ −x` so the kernel is exactly even.
fn symmetrize(grid: &Grid, values: &mut [f64]) {
    let n = grid.points();
    let mirror = |i: usize| (n - i) % n;
    let copy = values.to_vec();
    for (k, v) in values.iter_mut().enumerate() {
        let [i, j] = grid.axes(k);
        let m = if grid.dim() == 1 {
            [mirror(i), 0]
        } else {
            [mirror(i), mirror(j)]
        };
        *v = 0.5 * (copy[k] + copy[grid.flat(m)]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::Dimension;

    fn gauss(d: u32) -> KernelSpec {
        KernelSpec::gaussian_like(Dimension::new(d).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn unit_mass_and_even() {
        let g = Grid::new(1, 512, 40.0).unwrap();
        let k = SemigroupKernel::new(gauss(1), 2.0, g).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-12);
        let v = k.values();
        let n = g.points();
        for i in 1..n {
            assert_eq!(v[i], v[n - i]);
        }
        assert!((k.atom() - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn small_box_is_rejected_with_enlargement() {
        let g = Grid::new(1, 64, 4.0).unwrap();
        match SemigroupKernel::new(gauss(1), 4.0, g) {
            Err(Error::Resolution {
                suggested_half_width,
                ..
            }) => assert_eq!(suggested_half_width, 8.0),
            other => panic!("expected a resolution error, got {other:?}"),
        }
        let k =
            SemigroupKernel::resolved(gauss(1), 4.0, g, &ResolutionPolicy::default(), 4).unwrap();
        assert!(k.grid().half_width() > 4.0);
    }

    #[test]
    fn fractional_alpha_two_is_a_gaussian() {
        let d = Dimension::new(2).unwrap();
        let spec = KernelSpec::pure_fractional(d, 2.0).unwrap();
        let g = Grid::new(2, 64, 12.0).unwrap();
        let k = SemigroupKernel::new(spec, 1.0, g).unwrap();
        let v = k.values();
        for site in [g.origin(), g.origin() + 3, g.flat([40, 35])] {
            let r = g.radius(site);
            let exact = (-r * r / 4.0).exp() / (4.0 * std::f64::consts::PI);
            assert!((v[site] - exact).abs() < 1e-12);
        }
        assert_eq!(k.atom(), 0.0);
    }
}
