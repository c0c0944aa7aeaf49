//! Spectral integrating-factor solver for `u_t = 𝒜u + F(u)` on periodic
//! grids in one and two dimensions.
//!
//! One step of size `dt` with propagators `E(s) = e^{sψ(ξ)}`:
//!
//! ```text
//! u_half = E(dt/2) [u + dt/2 F(u)]
//! u_new  = E(dt) u + dt E(dt/2) F(u_half)
//! ```
//!
//! The linear part is exact, so mass changes only through `F`, and the
//! moments `W_T(t) = ⟨k_{T−t}(x* − ·), u(t)⟩` obey a discrete Jensen
//! inequality step by step.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::asymptotics::least_squares_slope;
use crate::blowup::{evaluate_criterion, CriterionInput, InitialData};
use crate::error::{domain, Error, Result};
use crate::grid::{resolution_error, Grid, GridFunction, Spectral};
use crate::kernels::KernelSpec;
use crate::nonlinearity::{Nonlinearity, OsgoodTransform};

/// Default blowup threshold on `sup u`.
pub const DEFAULT_U_MAX: f64 = 1e8;
/// Cumulative mass defect, relative to the current mass, that aborts a run.
pub const MASS_DEFECT_LIMIT: f64 = 1e-4;
/// Values above this count as support in the box audit.
pub const SUPPORT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub kernel: KernelSpec,
    pub nonlinearity: Nonlinearity,
    pub dt_init: f64,
    pub dt_min: f64,
    pub u_max: f64,
    pub t_end: f64,
    pub moment_targets: Vec<f64>,
    /// Center `x*` of the tracked moments; the argmax of `u0` when absent.
    pub center: Option<[f64; 2]>,
    /// Box doublings allowed by the support audit.
    pub max_enlargements: usize,
}

impl SimConfig {
    pub fn new(kernel: KernelSpec, nonlinearity: Nonlinearity, t_end: f64) -> Self {
        Self {
            kernel,
            nonlinearity,
            dt_init: 1e-2,
            dt_min: 1e-12,
            u_max: DEFAULT_U_MAX,
            t_end,
            moment_targets: Vec::new(),
            center: None,
            max_enlargements: 4,
        }
    }

    pub fn validate(&self, u0: &GridFunction) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init) {
            return domain(format!(
                "need 0 < dt_min < dt_init, got {} and {}",
                self.dt_min, self.dt_init
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return domain(format!("horizon must be positive, got {}", self.t_end));
        }
        if !(self.u_max > u0.sup()) {
            return domain(format!(
                "u_max = {} does not exceed sup u0 = {}",
                self.u_max,
                u0.sup()
            ));
        }
        if self.kernel.dim().get() as usize != u0.grid().dim() {
            return domain("kernel and grid dimensions differ");
        }
        if self.moment_targets.iter().any(|t| !(*t > 0.0)) {
            return domain("moment targets must be positive");
        }
        Ok(())
    }
}

/// Integrating-factor stepper with the generator and transforms of one grid.
struct Stepper {
    grid: Grid,
    psi: Vec<f64>,
    spectral: Spectral,
    cached_dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

/// One accepted step: the new state, its spectrum, and `∫F(u_half)`.
struct Advance {
    values: Vec<f64>,
    spectrum: Vec<Complex64>,
    source_integral: f64,
    clipped: f64,
}

impl Stepper {
    fn new(grid: Grid, kernel: &KernelSpec) -> Result<Self> {
        let psi = kernel.generator_on_grid(&grid)?;
        Ok(Self {
            grid,
            psi,
            spectral: Spectral::new(grid),
            cached_dt: f64::NAN,
            full: Vec::new(),
            half: Vec::new(),
        })
    }

    fn propagators(&mut self, dt: f64) {
        if dt != self.cached_dt {
            self.full = self.psi.iter().map(|p| (dt * p).exp()).collect();
            self.half = self.psi.iter().map(|p| (0.5 * dt * p).exp()).collect();
            self.cached_dt = dt;
        }
    }

    /// `None` when the update is not finite.
    fn advance(
        &mut self,
        u: &[f64],
        u_hat: &[Complex64],
        f: &Nonlinearity,
        dt: f64,
    ) -> Option<Advance> {
        self.propagators(dt);
        let vol = self.grid.cell_volume();
        let fu: Vec<f64> = u.iter().map(|&v| f.value(v)).collect();
        let f_hat = self.spectral.forward(&fu);
        let stage: Vec<Complex64> = u_hat
            .iter()
            .zip(&f_hat)
            .zip(&self.half)
            .map(|((a, b), e)| (a + b * (0.5 * dt)) * e)
            .collect();
        let u_half = self.spectral.inverse_real(stage);
        // checked before clamping: NaN.max(0.0) is 0 and would switch the
        // source off instead of signalling blowup
        if u_half.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let g: Vec<f64> = u_half.iter().map(|&v| f.value(v.max(0.0))).collect();
        let source_integral = g.iter().sum::<f64>() * vol;
        let g_hat = self.spectral.forward(&g);
        let next: Vec<Complex64> = u_hat
            .iter()
            .zip(&g_hat)
            .zip(self.full.iter().zip(&self.half))
            .map(|((a, b), (e, eh))| a * e + b * (dt * eh))
            .collect();
        let mut values = self.spectral.inverse_real(next);
        if values.iter().any(|v| !v.is_finite()) || !source_integral.is_finite() {
            return None;
        }
        let mut clipped = 0.0;
        for v in values.iter_mut() {
            if *v < 0.0 {
                clipped -= *v;
                *v = 0.0;
            }
        }
        let spectrum = self.spectral.forward(&values);
        Some(Advance {
            values,
            spectrum,
            source_integral,
            clipped: clipped * vol,
        })
    }
}

/// One integrating-factor midpoint step. `None` signals a non-finite
/// update, i.e. blowup within the step.
pub fn step(u: &GridFunction, cfg: &SimConfig, dt: f64) -> Result<Option<GridFunction>> {
    if !(dt >= cfg.dt_min && dt <= cfg.dt_init) {
        return domain(format!(
            "dt = {dt} outside [{}, {}]",
            cfg.dt_min, cfg.dt_init
        ));
    }
    let mut stepper = Stepper::new(*u.grid(), &cfg.kernel)?;
    let u_hat = stepper.spectral.forward(u.values());
    Ok(stepper
        .advance(u.values(), &u_hat, &cfg.nonlinearity, dt)
        .map(|a| GridFunction::from_raw(*u.grid(), a.values)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub sup: f64,
    pub mass: f64,
    /// Size of the step that led here (0 for the initial sample).
    pub dt: f64,
    /// `∫F(u)` at the stage that drove the step into this sample.
    pub source_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub target: f64,
    /// `(t, W_T(t))` for `t < T`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenRow {
    pub t: f64,
    pub w: f64,
    pub f_of_w: f64,
    /// Forward difference to the next record.
    pub dw_dt: f64,
}

impl MomentSeries {
    pub fn jensen_rows(&self, f: &Nonlinearity) -> Vec<JensenRow> {
        self.points
            .windows(2)
            .map(|w| JensenRow {
                t: w[0].0,
                w: w[0].1,
                f_of_w: f.value(w[0].1),
                dw_dt: (w[1].1 - w[0].1) / (w[1].0 - w[0].0),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    BlewUp { t_obs: f64 },
    ReachedHorizon,
    DtUnderflow { t: f64 },
}

impl Outcome {
    /// Threshold crossing and step-size underflow both count as blowup.
    pub fn blowup_time(&self) -> Option<f64> {
        match *self {
            Outcome::BlewUp { t_obs } => Some(t_obs),
            Outcome::DtUnderflow { t } => Some(t),
            Outcome::ReachedHorizon => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::BlewUp { .. } => "blew_up",
            Outcome::ReachedHorizon => "reached_horizon",
            Outcome::DtUnderflow { .. } => "dt_underflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportAudit {
    pub enlargements: usize,
    /// Support stayed a quarter box away from the boundary throughout.
    pub reliable: bool,
    /// Largest value seen on the outer shell relative to `sup u`.
    pub worst_shell_ratio: f64,
    /// Cumulative `|ΔM − dt ∫F|` relative to the final mass.
    pub mass_defect: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub moments: Vec<MomentSeries>,
    pub outcome: Outcome,
    pub audit: SupportAudit,
    pub center: [f64; 2],
    pub final_state: GridFunction,
}

impl Trajectory {
    /// `sup_t t^{1/(p−1)} ‖u(t)‖_∞` over samples with `t ≥ t_from`, and the
    /// log-log slope of `t^{1/(p−1)} ‖u(t)‖_∞` there.
    pub fn decay_profile(&self, p: f64, t_from: f64) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .samples
            .iter()
            .filter(|s| s.t >= t_from && s.sup > 0.0)
            .map(|s| (s.t.ln(), s.t.powf(1.0 / (p - 1.0)) * s.sup))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let sup = pts.iter().map(|x| x.1).fold(0.0, f64::max);
        let xs: Vec<f64> = pts.iter().map(|x| x.0).collect();
        let ys: Vec<f64> = pts.iter().map(|x| x.1.ln()).collect();
        Some((sup, least_squares_slope(&xs, &ys)))
    }
}

/// Threshold the outer shell may not exceed: the support floor plus the
/// transform round-off carried by every site.
fn shell_threshold(sup: f64) -> f64 {
    SUPPORT_FLOOR + 64.0 * f64::EPSILON * sup
}

/// Evolve `u0` until blowup, the horizon, or step underflow.
pub fn run(u0: &GridFunction, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate(u0)?;
    let f = &cfg.nonlinearity;
    let mut u = u0.clone();
    let center = cfg
        .center
        .unwrap_or_else(|| u0.grid().position(u0.argmax()));
    let mut enlargements = 0;
    let mut worst_shell_ratio: f64 = 0.0;
    let mut reliable = true;

    // grow the box until the initial data clears the outer shell
    while u.outer_shell_max() > shell_threshold(u.sup()) {
        if enlargements == cfg.max_enlargements {
            reliable = false;
            break;
        }
        u = u.padded();
        enlargements += 1;
    }

    let mut stepper = Stepper::new(*u.grid(), &cfg.kernel)?;
    let mut site = u.grid().nearest(&center);
    let mut u_hat = stepper.spectral.forward(u.values());
    let vol = u.grid().cell_volume();
    let mass0 = u.mass();
    let mut samples = vec![Sample {
        t: 0.0,
        sup: u.sup(),
        mass: mass0,
        dt: 0.0,
        source_integral: 0.0,
    }];
    let mut moments: Vec<MomentSeries> = cfg
        .moment_targets
        .iter()
        .map(|&target| MomentSeries {
            target,
            points: Vec::new(),
        })
        .collect();
    let record_moments = |moments: &mut Vec<MomentSeries>,
                          stepper: &Stepper,
                          u_hat: &[Complex64],
                          site: usize,
                          t: f64| {
        for m in moments.iter_mut().filter(|m| t < m.target) {
            let mult: Vec<f64> = stepper
                .psi
                .iter()
                .map(|p| ((m.target - t) * p).exp())
                .collect();
            m.points
                .push((t, stepper.spectral.evaluate_at(u_hat, &mult, site)));
        }
    };
    record_moments(&mut moments, &stepper, &u_hat, site, 0.0);

    let mut t = 0.0;
    let mut defect = 0.0;
    let mut mass = mass0;
    let mut values = u.values().to_vec();
    let outcome = loop {
        let remaining = cfg.t_end - t;
        if remaining <= 1e-12 * cfg.t_end {
            break Outcome::ReachedHorizon;
        }
        let sup = values.iter().copied().fold(0.0, f64::max);
        let stiff = f.derivative(sup);
        let mut dt = cfg.dt_init;
        if stiff > 0.0 {
            dt = dt.min(0.5 / stiff);
        }
        // only the stability limit signals a singularity; the final step
        // may be cut arbitrarily short by the horizon
        if dt < cfg.dt_min {
            break Outcome::DtUnderflow { t };
        }
        dt = dt.min(remaining);
        let Some(adv) = stepper.advance(&values, &u_hat, f, dt) else {
            break Outcome::BlewUp { t_obs: t };
        };
        let new_mass = adv.spectrum[0].re * vol;
        defect += (new_mass - mass - dt * adv.source_integral).abs() + adv.clipped;
        if defect > MASS_DEFECT_LIMIT * new_mass.abs().max(f64::MIN_POSITIVE) {
            return Err(resolution_error(
                format!(
                    "mass defect {:.3e} relative at t = {t:.6}",
                    defect / new_mass.abs()
                ),
                &stepper.grid,
                false,
            ));
        }
        t += dt;
        values = adv.values;
        u_hat = adv.spectrum;
        mass = new_mass;
        let sup = values.iter().copied().fold(0.0, f64::max);
        samples.push(Sample {
            t,
            sup,
            mass,
            dt,
            source_integral: adv.source_integral,
        });
        if sup > cfg.u_max {
            break Outcome::BlewUp { t_obs: t };
        }
        record_moments(&mut moments, &stepper, &u_hat, site, t);

        // support audit
        let grid = stepper.grid;
        let shell = values
            .iter()
            .enumerate()
            .filter(|(k, _)| grid.in_outer_shell(*k))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        if shell > shell_threshold(sup) {
            if enlargements < cfg.max_enlargements {
                let big = GridFunction::from_raw(grid, std::mem::take(&mut values)).padded();
                enlargements += 1;
                stepper = Stepper::new(*big.grid(), &cfg.kernel)?;
                site = big.grid().nearest(&center);
                u_hat = stepper.spectral.forward(big.values());
                values = big.into_values();
            } else {
                reliable = false;
                worst_shell_ratio = worst_shell_ratio.max(shell / sup);
            }
        }
    };
    let grid = stepper.grid;
    Ok(Trajectory {
        samples,
        moments,
        outcome,
        audit: SupportAudit {
            enlargements,
            reliable,
            worst_shell_ratio,
            mass_defect: defect / mass.abs().max(f64::MIN_POSITIVE),
        },
        center,
        final_state: GridFunction::from_raw(grid, values),
    })
}

/// Checks of the differential inequality `dW_T/dt ≥ F(W_T)` along a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenReport {
    pub target: f64,
    pub steps: usize,
    /// Share of steps with `dW/dt ≥ F(W) − 1e-6 (1 + F(W))`.
    pub satisfied_fraction: f64,
    /// `min_t (h(W_T(0)) − h(W_T(t))) / t`.
    pub integrated_ratio: f64,
}

pub fn jensen_check(series: &MomentSeries, f: &Nonlinearity) -> Result<JensenReport> {
    let rows = series.jensen_rows(f);
    if rows.is_empty() {
        return domain(format!("no recorded steps before T = {}", series.target));
    }
    let ok = rows
        .iter()
        .filter(|r| r.dw_dt >= r.f_of_w - 1e-6 * (1.0 + r.f_of_w))
        .count();
    let h = OsgoodTransform::new(f.clone());
    let (t0, w0) = series.points[0];
    let h0 = h.h(w0)?;
    let mut ratio = f64::INFINITY;
    for &(t, w) in &series.points[1..] {
        ratio = ratio.min((h0 - h.h(w)?) / (t - t0));
    }
    Ok(JensenReport {
        target: series.target,
        steps: rows.len(),
        satisfied_fraction: ok as f64 / rows.len() as f64,
        integrated_ratio: ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DichotomyClass {
    BlewUp,
    /// Reached the horizon with `t^{1/(p−1)}‖u‖_∞` not growing.
    Survived,
    /// Reached the horizon without a decay verdict.
    Censored,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyRun {
    pub lambda: f64,
    pub class: DichotomyClass,
    pub outcome: Outcome,
    /// `sup_t t^{1/(p−1)}‖u(t)‖_∞` over the last decade of the run.
    pub decay_sup: Option<f64>,
    pub decay_slope: Option<f64>,
    /// `T*` of the moment criterion for `λ u0`.
    pub t_star: Option<f64>,
    /// `t_obs ≤ 1.1 T*` whenever both exist.
    pub within_prediction: Option<bool>,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomySummary {
    pub runs: Vec<DichotomyRun>,
    /// No blowup at a scale below a survival.
    pub monotone: bool,
    /// `(largest survived λ, smallest blown-up λ)` after bisection.
    pub bracket: Option<(f64, f64)>,
}

/// Slope of `t^{1/(p−1)}‖u‖_∞` above which a run is not called decaying.
pub const DECAY_SLOPE_LIMIT: f64 = 0.02;

fn classify_run(lambda: f64, base: &GridFunction, cfg: &SimConfig, p: f64) -> Result<DichotomyRun> {
    let u0 = base.scaled(lambda)?;
    let traj = run(&u0, cfg)?;
    let input = CriterionInput::new(InitialData::Grid(u0), cfg.kernel, cfg.nonlinearity.clone());
    let t_star = evaluate_criterion(&input)?.t_star;
    let (decay_sup, decay_slope) = match traj.decay_profile(p, 0.1 * cfg.t_end) {
        Some((s, k)) if traj.outcome == Outcome::ReachedHorizon => (Some(s), Some(k)),
        _ => (None, None),
    };
    let class = match (traj.outcome.blowup_time(), decay_slope) {
        (Some(_), _) => DichotomyClass::BlewUp,
        (None, Some(k)) if k <= DECAY_SLOPE_LIMIT => DichotomyClass::Survived,
        _ => DichotomyClass::Censored,
    };
    let within_prediction = traj
        .outcome
        .blowup_time()
        .zip(t_star)
        .map(|(t_obs, ts)| t_obs <= 1.1 * ts);
    Ok(DichotomyRun {
        lambda,
        class,
        outcome: traj.outcome,
        decay_sup,
        decay_slope,
        t_star,
        within_prediction,
        reliable: traj.audit.reliable,
    })
}

/// Run `λ·base` for every `λ` (concurrently), then bisect the gap between
/// the largest survival and the smallest blowup `bisection_steps` times.
pub fn dichotomy_experiment(
    scales: &[f64],
    base: &GridFunction,
    cfg: &SimConfig,
    bisection_steps: usize,
) -> Result<DichotomySummary> {
    let Some((_, p)) = cfg.nonlinearity.power_parameters() else {
        return Err(Error::Unsupported(
            "the dichotomy experiment needs a power source".into(),
        ));
    };
    let mut sorted = scales.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut runs = sorted
        .par_iter()
        .map(|&l| classify_run(l, base, cfg, p))
        .collect::<Result<Vec<_>>>()?;

    let bracket_of = |runs: &[DichotomyRun]| {
        let lo = runs
            .iter()
            .filter(|r| r.class == DichotomyClass::Survived)
            .map(|r| r.lambda)
            .fold(f64::NAN, f64::max);
        let hi = runs
            .iter()
            .filter(|r| r.class == DichotomyClass::BlewUp)
            .map(|r| r.lambda)
            .fold(f64::NAN, f64::min);
        (lo.is_finite() && hi.is_finite() && lo < hi).then_some((lo, hi))
    };
    let mut bracket = bracket_of(&runs);
    for _ in 0..bisection_steps {
        let Some((lo, hi)) = bracket else { break };
        let mid = (lo * hi).sqrt();
        let r = classify_run(mid, base, cfg, p)?;
        bracket = match r.class {
            DichotomyClass::Survived => Some((mid, hi)),
            DichotomyClass::BlewUp => Some((lo, mid)),
            DichotomyClass::Censored => None,
        };
        runs.push(r);
    }
    runs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let first_blowup = runs.iter().position(|r| r.class == DichotomyClass::BlewUp);
    let monotone = match first_blowup {
        Some(i) => runs[i..]
            .iter()
            .all(|r| r.class != DichotomyClass::Survived),
        None => true,
    };
    Ok(DichotomySummary {
        runs,
        monotone,
        bracket,
    })
}
