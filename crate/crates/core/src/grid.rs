//! Periodic lattices in one or two dimensions, sampled fields on them and
//! the FFT plumbing used to apply Fourier multipliers.
//!
//! Samples sit at `x_j = −L + j·Δx`, `j = 0..n`, with `Δx = 2L/n`, so the
//! origin is index `n/2` on each axis. Two-dimensional data are row-major
//! with the first coordinate varying fastest. Discrete transforms use the
//! usual signed index ordering; because every multiplier used here is real
//! and even, the layout of the samples never matters for convolution.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

/// Tolerated negative undershoot before a value counts as invalid.
pub const NEGATIVE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return domain(format!("grids are one- or two-dimensional, got d = {dim}"));
        }
        if points < 4 || !points.is_power_of_two() {
            return domain(format!(
                "points per axis must be a power of two >= 4, got {points}"
            ));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return domain(format!("half-width must be positive, got {half_width}"));
        }
        Ok(Self {
            dim,
            points,
            half_width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of lattice sites.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Per-axis indices of a flat index.
    pub fn axes(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat % self.points, flat / self.points]
        }
    }

    pub fn flat(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[1] * self.points + axes[0]
        }
    }

    /// Physical position of a site; the second entry is 0 in one dimension.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.axes(flat);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    pub fn radius(&self, flat: usize) -> f64 {
        let [x, y] = self.position(flat);
        x.hypot(y)
    }

    pub fn origin(&self) -> usize {
        let c = self.points / 2;
        self.flat([c, c])
    }

    /// Site closest to a physical point.
    pub fn nearest(&self, point: &[f64]) -> usize {
        let idx = |x: f64| {
            let k = ((x + self.half_width) / self.spacing()).round() as i64;
            k.rem_euclid(self.points as i64) as usize
        };
        let ix = idx(point.first().copied().unwrap_or(0.0));
        let iy = if self.dim == 2 {
            idx(point.get(1).copied().unwrap_or(0.0))
        } else {
            0
        };
        self.flat([ix, iy])
    }

    /// Signed angular wavenumber of DFT index `k` along one axis.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.points as i64;
        let signed = if (k as i64) < n / 2 {
            k as i64
        } else {
            k as i64 - n
        };
        2.0 * PI * signed as f64 / (n as f64 * self.spacing())
    }

    /// `|ξ|` at flat DFT index `k`.
    pub fn frequency_modulus(&self, k: usize) -> f64 {
        let [a, b] = self.axes(k);
        if self.dim == 1 {
            self.wavenumber(a).abs()
        } else {
            self.wavenumber(a).hypot(self.wavenumber(b))
        }
    }

    /// Nyquist wavenumber `π/Δx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Sites with some coordinate in the outer quarter `|x_i| ≥ 3L/4`.
    pub fn in_outer_shell(&self, flat: usize) -> bool {
        let [x, y] = self.position(flat);
        let edge = 0.75 * self.half_width;
        x.abs() >= edge || (self.dim == 2 && y.abs() >= edge)
    }

    /// Same spacing, twice the half-width.
    pub fn enlarged(&self) -> Self {
        Self {
            dim: self.dim,
            points: 2 * self.points,
            half_width: 2.0 * self.half_width,
        }
    }

    /// Same box, twice the points per axis.
    pub fn refined(&self) -> Self {
        Self {
            points: 2 * self.points,
            ..*self
        }
    }
}

/// Nonnegative samples of a field on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Values in `[NEGATIVE_FLOOR, 0)` are clipped to zero; anything more
    /// negative, or non-finite, is rejected.
    pub fn new(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            ));
        }
        for v in values.iter_mut() {
            if !v.is_finite() {
                return domain("grid samples must be finite");
            }
            if *v < 0.0 {
                if *v < NEGATIVE_FLOOR {
                    return domain(format!("grid samples must be nonnegative, found {v}"));
                }
                *v = 0.0;
            }
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.position(k))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    /// Used by the solver after clipping; skips validation.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (k, v);
            }
        }
        best.0
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * lambda).collect())
    }

    /// Periodic shift by a whole number of lattice cells per axis.
    pub fn shifted(&self, cells: [i64; 2]) -> Self {
        let n = self.grid.points as i64;
        let mut out = vec![0.0; self.values.len()];
        for (k, &v) in self.values.iter().enumerate() {
            let [i, j] = self.grid.axes(k);
            let ni = (i as i64 + cells[0]).rem_euclid(n) as usize;
            let nj = if self.grid.dim == 2 {
                (j as i64 + cells[1]).rem_euclid(n) as usize
            } else {
                0
            };
            out[self.grid.flat([ni, nj])] = v;
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// Embed into the centered [`Grid::enlarged`] box, padding with zeros.
    pub fn padded(&self) -> Self {
        let big = self.grid.enlarged();
        let off = self.grid.points / 2;
        let mut out = vec![0.0; big.len()];
        for (k, &v) in self.values.iter().enumerate() {
            let [i, j] = self.grid.axes(k);
            let target = if big.dim == 1 {
                [i + off, 0]
            } else {
                [i + off, j + off]
            };
            out[big.flat(target)] = v;
        }
        Self {
            grid: big,
            values: out,
        }
    }

    /// Largest value on the outer shell of the box.
    pub fn outer_shell_max(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.in_outer_shell(*k))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

/// Forward and inverse FFTs for one grid, with reusable buffers.
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    column: Vec<Complex64>,
    scratch: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points;
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let roots = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        Self {
            grid,
            forward,
            inverse,
            column: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
            roots,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let n = self.grid.points;
        let plan = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        for row in data.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        if self.grid.dim == 2 {
            for c in 0..n {
                for r in 0..n {
                    self.column[r] = data[r * n + c];
                }
                plan.process_with_scratch(&mut self.column, &mut self.scratch);
                for r in 0..n {
                    data[r * n + c] = self.column[r];
                }
            }
        }
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse DFT normalized by `1/N`, real part only.
    pub fn inverse_real(&mut self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, true);
        let norm = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|c| c.re * norm).collect()
    }

    /// `IDFT(m · DFT(u))` for a real multiplier `m` in DFT order.
    pub fn apply_multiplier(&mut self, values: &[f64], multiplier: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        for (c, m) in spec.iter_mut().zip(multiplier) {
            *c *= *m;
        }
        self.inverse_real(spec)
    }

    /// Single-site inverse transform `(1/N) Σ_k m_k û_k e^{2πi k·j/N}`.
    pub fn evaluate_at(&self, spectrum: &[Complex64], multiplier: &[f64], site: usize) -> f64 {
        let n = self.grid.points;
        let [ja, jb] = self.grid.axes(site);
        let mut acc = 0.0;
        for (k, (c, m)) in spectrum.iter().zip(multiplier).enumerate() {
            let [ka, kb] = self.grid.axes(k);
            let phase = if self.grid.dim == 1 {
                self.roots[(ka * ja) % n]
            } else {
                self.roots[(ka * ja + kb * jb) % n]
            };
            acc += m * (c * phase).re;
        }
        acc / self.grid.len() as f64
    }
}

/// Move the origin from index `n/2` to index 0 on every axis, or back.
pub fn roll_half(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let n = grid.points;
    let h = n / 2;
    let mut out = vec![0.0; values.len()];
    for (k, &v) in values.iter().enumerate() {
        let [i, j] = grid.axes(k);
        let target = if grid.dim == 1 {
            [(i + h) % n, 0]
        } else {
            [(i + h) % n, (j + h) % n]
        };
        out[grid.flat(target)] = v;
    }
    out
}

pub(crate) fn resolution_error(reason: impl Into<String>, grid: &Grid, bigger_box: bool) -> Error {
    let suggestion = if bigger_box {
        grid.enlarged()
    } else {
        grid.refined()
    };
    Error::Resolution {
        reason: reason.into(),
        suggested_half_width: suggestion.half_width,
        suggested_points: suggestion.points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_origin() {
        let g = Grid::new(2, 8, 4.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.position(g.origin()), [0.0, 0.0]);
        assert_eq!(g.nearest(&[1.0, -2.0]), g.flat([5, 2]));
        assert!(g.in_outer_shell(g.flat([0, 4])));
        assert!(!g.in_outer_shell(g.origin()));
        assert!(Grid::new(3, 8, 1.0).is_err());
        assert!(Grid::new(1, 12, 1.0).is_err());
    }

    #[test]
    fn roll_is_an_involution() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|k| k as f64).collect();
        assert_eq!(roll_half(&g, &roll_half(&g, &v)), v);
    }

    #[test]
    fn transform_round_trip_and_point_evaluation() {
        for dim in [1, 2] {
            let g = Grid::new(dim, 16, 3.0).unwrap();
            let f = GridFunction::from_fn(g, |[x, y]| (-(x * x + y * y)).exp()).unwrap();
            let mut s = Spectral::new(g);
            let spec = s.forward(f.values());
            let back = s.inverse_real(spec.clone());
            for (a, b) in back.iter().zip(f.values()) {
                assert!((a - b).abs() < 1e-14);
            }
            let ones = vec![1.0; g.len()];
            for site in [0, 5, g.origin()] {
                assert!((s.evaluate_at(&spec, &ones, site) - f.values()[site]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn padding_preserves_mass_and_center() {
        let g = Grid::new(1, 16, 2.0).unwrap();
        let f = GridFunction::from_fn(g, |[x, _]| (-x * x).exp()).unwrap();
        let p = f.padded();
        assert_eq!(p.grid().points(), 32);
        assert!((p.mass() - f.mass()).abs() < 1e-15);
        assert_eq!(p.values()[p.grid().origin()], f.values()[g.origin()]);
    }

    #[test]
    fn rejects_negative_samples() {
        let g = Grid::new(1, 4, 1.0).unwrap();
        assert!(GridFunction::new(g, vec![0.0, -1e-3, 0.0, 0.0]).is_err());
        let ok = GridFunction::new(g, vec![0.0, -1e-13, 1.0, 0.0]).unwrap();
        assert_eq!(ok.values()[1], 0.0);
    }
}
