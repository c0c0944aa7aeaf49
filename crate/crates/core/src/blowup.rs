//! The moment functional `W_T(0) = (k_T ∗ u0)(x*)` and the blowup criterion
//! `W_T(0) / h⁻¹(T) > 1`, plus the Morrey-norm form of the same condition.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::asymptotics::least_squares_slope;
use crate::error::{domain, Error, Result};
use crate::grid::{GridFunction, Spectral};
use crate::kernels::{KernelKind, KernelSpec, SemigroupKernel, StableProfile};
use crate::nonlinearity::{fujita_exponent, Nonlinearity, OsgoodTransform};
use crate::norms::{morrey_norm_grid, radial_concentration, RadialProfile};
use crate::specfun::{ln_sphere_area, Dimension};

/// Initial data, either sampled on a periodic grid or radial.
#[derive(Debug, Clone)]
pub enum InitialData {
    Grid(GridFunction),
    Radial(RadialProfile),
}

impl InitialData {
    pub fn dim(&self) -> Result<Dimension> {
        match self {
            InitialData::Grid(u) => Dimension::new(u.grid().dim() as u32),
            InitialData::Radial(u) => Ok(u.dim()),
        }
    }

    /// Bounded and integrable. Grid data always is; radial data is not when
    /// it carries an atom or grows at the origin.
    pub fn bounded_integrable(&self) -> bool {
        match self {
            InitialData::Grid(_) => true,
            InitialData::Radial(u) => {
                let v = u.values();
                u.atom().is_none() && v.len() > 1 && v[0] <= v[1] * (1.0 + 1e-9)
            }
        }
    }
}

/// `W_T(0)` and the center it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    /// Grid site maximizing `k_T ∗ u0` (absent for radial data, where the
    /// center is the origin).
    pub center: Option<usize>,
}

/// `max_x (k_T ∗ u0)(x)` on grids, `(P_T ∗ u0)(0)` for radial data.
///
/// The grid route checks that `k_T` itself is resolved by the grid of
/// `u0` and propagates the resolution error otherwise. The radial route is
/// available for the pure fractional generator only.
pub fn moment_at_zero(u0: &InitialData, kernel: &KernelSpec, t: f64) -> Result<Moment> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("T must be positive, got {t}"));
    }
    match u0 {
        InitialData::Grid(u) => GridMoment::new(u, kernel)?.at(t),
        InitialData::Radial(u) => radial_moment(u, kernel, t).map(|value| Moment {
            value,
            center: None,
        }),
    }
}

fn radial_moment(u: &RadialProfile, kernel: &KernelSpec, t: f64) -> Result<f64> {
    let KernelKind::PureFractional { alpha, coeff } = kernel.kind() else {
        return Err(Error::Unsupported(
            "radial data needs the pure fractional generator; sample other kernels on a grid"
                .into(),
        ));
    };
    if kernel.dim() != u.dim() {
        return domain(format!(
            "kernel dimension {} differs from data dimension {}",
            kernel.dim(),
            u.dim()
        ));
    }
    let profile = StableProfile::new(alpha, u.dim())?;
    let tau = coeff * t;
    u.pair_with(|r| profile.heat_kernel(tau, r).unwrap_or(0.0))
}

/// FFT of the data computed once, reused across `T`.
struct GridMoment<'a> {
    u: &'a GridFunction,
    kernel: KernelSpec,
    psi: Vec<f64>,
    spectrum: Vec<Complex64>,
}

impl<'a> GridMoment<'a> {
    fn new(u: &'a GridFunction, kernel: &KernelSpec) -> Result<Self> {
        let grid = *u.grid();
        if kernel.dim().get() as usize != grid.dim() {
            return domain(format!(
                "kernel dimension {} differs from grid dimension {}",
                kernel.dim(),
                grid.dim()
            ));
        }
        let psi = kernel.generator_on_grid(&grid)?;
        let spectrum = Spectral::new(grid).forward(u.values());
        Ok(Self {
            u,
            kernel: *kernel,
            psi,
            spectrum,
        })
    }

    fn at(&self, t: f64) -> Result<Moment> {
        let grid = *self.u.grid();
        SemigroupKernel::new(self.kernel, t, grid)?;
        let evolved: Vec<Complex64> = self
            .spectrum
            .iter()
            .zip(&self.psi)
            .map(|(c, p)| c * (t * p).exp())
            .collect();
        let values = Spectral::new(grid).inverse_real(evolved);
        let (center, value) = values.iter().copied().enumerate().fold(
            (grid.origin(), f64::NEG_INFINITY),
            |best, (k, v)| if v > best.1 { (k, v) } else { best },
        );
        Ok(Moment {
            value: value.max(0.0),
            center: Some(center),
        })
    }
}

/// 40 points log-spaced over `[1e-3, 1e3]`.
pub fn default_t_grid() -> Vec<f64> {
    log_spaced(1e-3, 1e3, 40)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Maximum number of decades the default grid is extended by while the
/// ratio is still rising at its right end.
pub const MAX_EXTENSION_DECADES: usize = 3;

#[derive(Debug, Clone)]
pub struct CriterionInput {
    pub u0: InitialData,
    pub kernel: KernelSpec,
    pub nonlinearity: Nonlinearity,
    pub t_grid: Vec<f64>,
    /// Extend `t_grid` by decades while the ratio still rises at its end.
    pub extend: bool,
    pub threshold: f64,
}

impl CriterionInput {
    /// Default `T` grid (extendable) and threshold 1.
    pub fn new(u0: InitialData, kernel: KernelSpec, nonlinearity: Nonlinearity) -> Self {
        Self {
            u0,
            kernel,
            nonlinearity,
            t_grid: default_t_grid(),
            extend: true,
            threshold: 1.0,
        }
    }

    pub fn with_t_grid(mut self, t_grid: Vec<f64>) -> Self {
        self.t_grid = t_grid;
        self.extend = false;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionPoint {
    pub t: f64,
    pub moment: f64,
    pub h_inverse: f64,
    pub ratio: f64,
    /// `T^{1/(p−1)} W_T(0)` for power sources.
    pub power_form: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    CriterionMet,
    NotMetOnGrid,
    /// Not met, and `p > 1 + α/d`: small data may exist globally.
    FujitaSupercriticalSmallData,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::CriterionMet => "criterion_met",
            Classification::NotMetOnGrid => "not_met_on_grid",
            Classification::FujitaSupercriticalSmallData => "fujita_supercritical_small_data",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupVerdict {
    pub curve: Vec<CriterionPoint>,
    /// Least `T` on the grid with ratio above the threshold.
    pub t_star: Option<f64>,
    pub threshold: f64,
    /// The maximizing grid site at `T*` (or at the best `T` when not met).
    pub center: Option<usize>,
    pub morrey_value: Option<f64>,
    pub classification: Classification,
    /// Whether the data is bounded and integrable, the regime in which the
    /// criterion is stated. Fourier integrability is not checked.
    pub bounded_integrable: bool,
    /// Grid times dropped because `k_T` outgrew the box.
    pub unresolved: Vec<f64>,
}

impl BlowupVerdict {
    pub fn max_ratio(&self) -> f64 {
        self.curve.iter().map(|c| c.ratio).fold(0.0, f64::max)
    }
}

pub fn evaluate_criterion(input: &CriterionInput) -> Result<BlowupVerdict> {
    if !(input.threshold > 0.0) {
        return domain(format!(
            "threshold must be positive, got {}",
            input.threshold
        ));
    }
    let ts = &input.t_grid;
    if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) || ts.windows(2).any(|w| w[1] <= w[0]) {
        return domain("T grid must be nonempty, positive and increasing");
    }
    input.nonlinearity.audit_osgood()?;
    let osgood = OsgoodTransform::new(input.nonlinearity.clone());
    let power = input.nonlinearity.power_parameters();

    let mut t_grid = ts.clone();
    let mut curve: Vec<CriterionPoint> = Vec::new();
    let mut centers: Vec<Option<usize>> = Vec::new();
    let mut unresolved = Vec::new();
    let mut pending = t_grid.clone();
    let mut extensions = 0;
    loop {
        let evaluated: Vec<(f64, Result<Moment>)> = match &input.u0 {
            InitialData::Grid(u) => {
                let base = GridMoment::new(u, &input.kernel)?;
                pending.par_iter().map(|&t| (t, base.at(t))).collect()
            }
            InitialData::Radial(_) => pending
                .par_iter()
                .map(|&t| (t, moment_at_zero(&input.u0, &input.kernel, t)))
                .collect(),
        };
        let mut hit_box = false;
        for (t, m) in evaluated {
            match m {
                Ok(m) => {
                    let h_inverse = osgood.h_inverse(t)?;
                    curve.push(CriterionPoint {
                        t,
                        moment: m.value,
                        h_inverse,
                        ratio: m.value / h_inverse,
                        power_form: power.map(|(_, p)| t.powf(1.0 / (p - 1.0)) * m.value),
                    });
                    centers.push(m.center);
                }
                Err(Error::Resolution { .. }) if !curve.is_empty() || t > t_grid[0] => {
                    unresolved.push(t);
                    hit_box = true;
                }
                Err(e) => return Err(e),
            }
        }
        let n = curve.len();
        let rising = n >= 2 && curve[n - 1].ratio > curve[n - 2].ratio;
        let met = curve.iter().any(|c| c.ratio > input.threshold);
        if !input.extend || hit_box || met || !rising || extensions >= MAX_EXTENSION_DECADES {
            break;
        }
        let last = *t_grid.last().unwrap();
        pending = log_spaced(last, last * 10.0, 8)
            .into_iter()
            .skip(1)
            .collect();
        t_grid.extend(&pending);
        extensions += 1;
    }
    if curve.is_empty() {
        return Err(Error::Resolution {
            reason: "no T on the grid is resolved by the box".into(),
            suggested_half_width: 0.0,
            suggested_points: 0,
        });
    }

    let star = curve.iter().position(|c| c.ratio > input.threshold);
    let t_star = star.map(|i| curve[i].t);
    let best = star.unwrap_or_else(|| {
        curve
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio))
            .map(|(i, _)| i)
            .unwrap()
    });
    let center = centers[best];
    let d = input.u0.dim()?;
    let alpha = input.kernel.alpha_effective();
    let classification = match (t_star, power) {
        (Some(_), _) => Classification::CriterionMet,
        (None, Some((_, p))) if p > fujita_exponent(alpha, d)? => {
            Classification::FujitaSupercriticalSmallData
        }
        (None, _) => Classification::NotMetOnGrid,
    };
    let morrey_value = match power {
        Some((_, p)) if p > fujita_exponent(alpha, d)? => {
            Some(morrey_sufficient_condition(&input.u0, alpha, p, f64::INFINITY)?.value)
        }
        _ => None,
    };
    Ok(BlowupVerdict {
        curve,
        t_star,
        threshold: input.threshold,
        center,
        morrey_value,
        classification,
        bounded_integrable: input.u0.bounded_integrable(),
        unresolved,
    })
}

/// The Morrey (concentration) form of the criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorreyCondition {
    /// `sup_r r^{α/(p−1)−d} ∫_{B_r(x)} u0`, the `q = 1` Morrey norm of
    /// order `d(p−1)/α`.
    pub value: f64,
    pub threshold: f64,
    pub met: bool,
    /// `value / (σ_d d^{α/(2(p−1))})`.
    pub kappa: f64,
}

/// Radii for grid data: from one cell to half the box half-width.
fn grid_radii(u: &GridFunction) -> Vec<f64> {
    let g = u.grid();
    log_spaced(g.spacing(), 0.5 * g.half_width(), 48)
}

pub fn morrey_sufficient_condition(
    u0: &InitialData,
    alpha: f64,
    p: f64,
    c_threshold: f64,
) -> Result<MorreyCondition> {
    let d = u0.dim()?;
    let p_f = fujita_exponent(alpha, d)?;
    if !(p > p_f) {
        return domain(format!(
            "the Morrey form needs p > 1 + α/d = {p_f}, got {p}"
        ));
    }
    let s_order = d.as_f64() * (p - 1.0) / alpha;
    let value = match u0 {
        InitialData::Radial(u) => radial_concentration(u, p, alpha)?.value,
        InitialData::Grid(u) => morrey_norm_grid(u, s_order.max(1.0), 1.0, &grid_radii(u))?.value,
    };
    let ln_scale = ln_sphere_area(d) + alpha / (2.0 * (p - 1.0)) * d.as_f64().ln();
    Ok(MorreyCondition {
        value,
        threshold: c_threshold,
        met: value > c_threshold,
        kappa: value / ln_scale.exp(),
    })
}

/// Growth of `T^{1/(p−1)} W_T(0)` along an expanding `T` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FujitaGrowth {
    pub curve: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    /// `1/(p−1) − d/α`, positive below the Fujita exponent.
    pub predicted_exponent: f64,
}

pub fn fujita_growth(
    u0: &InitialData,
    kernel: &KernelSpec,
    p: f64,
    t_grid: &[f64],
) -> Result<FujitaGrowth> {
    if t_grid.len() < 2 {
        return domain("growth fit needs at least two times");
    }
    let d = u0.dim()?.as_f64();
    let alpha = kernel.alpha_effective();
    let curve = t_grid
        .par_iter()
        .map(|&t| {
            Ok((
                t,
                t.powf(1.0 / (p - 1.0)) * moment_at_zero(u0, kernel, t)?.value,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = curve.iter().map(|c| c.0.ln()).collect();
    let ys: Vec<f64> = curve.iter().map(|c| c.1.ln()).collect();
    Ok(FujitaGrowth {
        fitted_exponent: least_squares_slope(&xs, &ys),
        predicted_exponent: 1.0 / (p - 1.0) - d / alpha,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::stationary::SingularSolution;
    use std::f64::consts::PI;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn gaussian_data(grid: Grid, mass: f64, sigma: f64) -> GridFunction {
        let d = grid.dim() as i32;
        GridFunction::from_fn(grid, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            mass * (2.0 * PI * sigma * sigma).powf(-0.5 * f64::from(d))
                * (-r2 / (2.0 * sigma * sigma)).exp()
        })
        .unwrap()
    }

    #[test]
    fn kernel_snapshot_gives_semigroup_value() {
        let grid = Grid::new(1, 1024, 60.0).unwrap();
        let spec = KernelSpec::pure_fractional(dim(1), 2.0).unwrap();
        let ks = SemigroupKernel::new(spec, 0.8, grid).unwrap();
        let u0 = InitialData::Grid(GridFunction::new(grid, ks.values()).unwrap());
        let m = moment_at_zero(&u0, &spec, 1.7).unwrap();
        let exact = (4.0 * PI * 2.5f64).powf(-0.5);
        assert!((m.value - exact).abs() < 1e-12, "{} vs {exact}", m.value);
        assert_eq!(m.center, Some(grid.origin()));
    }

    #[test]
    fn gaussian_gaussian_convolution() {
        // M N(0, σ²) evolved by e^{TΔ} is M N(0, σ² + 2T) in d = 2
        let grid = Grid::new(2, 128, 20.0).unwrap();
        let spec = KernelSpec::pure_fractional(dim(2), 2.0).unwrap();
        let (m, sigma, t) = (3.0, 0.9, 1.3);
        let u0 = InitialData::Grid(gaussian_data(grid, m, sigma));
        let w = moment_at_zero(&u0, &spec, t).unwrap().value;
        let exact = m / (2.0 * PI * (sigma * sigma + 2.0 * t));
        assert!((w / exact - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_data() {
        let grid = Grid::new(1, 256, 30.0).unwrap();
        let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
        let u0 = InitialData::Grid(GridFunction::zeros(grid));
        assert_eq!(moment_at_zero(&u0, &spec, 1.0).unwrap().value, 0.0);
        let input = CriterionInput::new(u0, spec, Nonlinearity::power(1.0, 2.0).unwrap())
            .with_t_grid(log_spaced(0.01, 10.0, 12));
        let v = evaluate_criterion(&input).unwrap();
        assert!(v.t_star.is_none());
        assert_ne!(v.classification, Classification::CriterionMet);
    }

    #[test]
    fn ratio_is_t_times_moment_for_u_squared() {
        let grid = Grid::new(1, 512, 40.0).unwrap();
        let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
        let u0 = InitialData::Grid(gaussian_data(grid, 10.0, 1.0));
        let input = CriterionInput::new(u0, spec, Nonlinearity::power(1.0, 2.0).unwrap())
            .with_t_grid(log_spaced(0.01, 50.0, 30));
        let v = evaluate_criterion(&input).unwrap();
        for c in &v.curve {
            assert!((c.ratio - c.t * c.moment).abs() < 1e-12 * c.ratio.max(1.0));
            assert_eq!(c.power_form, Some(c.t * c.moment));
        }
        let star = v.t_star.unwrap();
        let first = v.curve.iter().find(|c| c.ratio > 1.0).unwrap();
        assert_eq!(first.t, star);
    }

    #[test]
    fn scaled_singular_solution_meets_the_criterion_above_the_predicted_mass() {
        // ratio of M u_∞ is M K_{2,3}(5) (p−1)^{1/(p−1)} for every T
        let sol = SingularSolution::new(2.0, dim(5), 3.0).unwrap();
        let k = crate::asymptotics::k_gaussian(dim(5), 3.0).unwrap();
        let spec = KernelSpec::pure_fractional(dim(5), 2.0).unwrap();
        let profile = sol
            .profile(RadialProfile::log_radii(1e-6, 1e6, 1200))
            .unwrap();
        for (m, met) in [(1.0, false), (1.4, true)] {
            let u0 = InitialData::Radial(profile.scaled(m).unwrap());
            let input = CriterionInput::new(u0, spec, Nonlinearity::power(1.0, 3.0).unwrap())
                .with_t_grid(vec![0.1, 1.0, 10.0]);
            let v = evaluate_criterion(&input).unwrap();
            for c in &v.curve {
                assert!(
                    (c.ratio / (m * k * 2f64.sqrt()) - 1.0).abs() < 1e-6,
                    "{c:?}"
                );
            }
            assert_eq!(v.t_star.is_some(), met);
        }
    }

    #[test]
    fn radial_route_matches_heat_characterization() {
        let r = RadialProfile::log_radii(1e-4, 40.0, 4000);
        let u = RadialProfile::from_fn(dim(3), r, |x| (-x * x).exp())
            .unwrap()
            .with_tail_exponent(60.0);
        let spec = KernelSpec::pure_fractional(dim(3), 1.0).unwrap();
        let gamma = 0.5;
        let ts = [0.3, 2.0];
        let h = crate::norms::heat_characterization(&u, 1.0, gamma, &ts).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let w = moment_at_zero(&InitialData::Radial(u.clone()), &spec, t)
                .unwrap()
                .value;
            assert!((t.powf(gamma) * w - h.curve[i].1).abs() < 1e-8 * h.curve[i].1);
        }
    }

    #[test]
    fn morrey_condition_of_scaled_u_infinity() {
        let sol = SingularSolution::new(2.0, dim(5), 3.0).unwrap();
        let profile = sol
            .profile(RadialProfile::log_radii(1e-3, 1e3, 400))
            .unwrap();
        let norm = sol.morrey_norm(1.0).unwrap();
        for n in [0.5, 2.0] {
            let u0 = InitialData::Radial(profile.scaled(n).unwrap());
            let c = morrey_sufficient_condition(&u0, 2.0, 3.0, norm).unwrap();
            assert!((c.value / (n * norm) - 1.0).abs() < 1e-9);
            assert_eq!(c.met, n > 1.0);
            let scale = crate::specfun::sphere_area(dim(5)) * 5f64.powf(0.5);
            assert!((c.kappa - c.value / scale).abs() < 1e-12);
        }
        let zero = RadialProfile::from_fn(dim(5), RadialProfile::log_radii(1e-2, 1e2, 10), |_| 0.0)
            .unwrap();
        let c = morrey_sufficient_condition(&InitialData::Radial(zero), 2.0, 3.0, 1.0).unwrap();
        assert_eq!((c.value, c.met), (0.0, false));
    }

    #[test]
    fn fujita_subcritical_growth() {
        let r = RadialProfile::log_radii(1e-4, 30.0, 3000);
        let u = RadialProfile::from_fn(dim(1), r, |x| (-x * x).exp())
            .unwrap()
            .with_tail_exponent(60.0);
        let spec = KernelSpec::pure_fractional(dim(1), 2.0).unwrap();
        let g = fujita_growth(
            &InitialData::Radial(u),
            &spec,
            2.5,
            &log_spaced(10.0, 1e4, 16),
        )
        .unwrap();
        assert!(
            (g.fitted_exponent / g.predicted_exponent - 1.0).abs() < 0.05,
            "{g:?}"
        );
    }

    #[test]
    fn radial_route_rejects_other_kernels() {
        let r = RadialProfile::log_radii(1e-2, 1e2, 10);
        let u = InitialData::Radial(RadialProfile::from_fn(dim(1), r, |x| (-x).exp()).unwrap());
        let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
        assert!(matches!(
            moment_at_zero(&u, &spec, 1.0),
            Err(Error::Unsupported(_))
        ));
    }
}
