//! Named experiments, one per acceptance criterion. A preset binds numeric
//! parameters (overridable with `--set key=value`), runs library
//! operations, writes its tables and checks the measured quantities.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use nonlocal_blowup::asymptotics::{self, Quantity};
use nonlocal_blowup::blowup::{self, CriterionInput, InitialData};
use nonlocal_blowup::csv_row;
use nonlocal_blowup::csvio::CsvTable;
use nonlocal_blowup::grid::{roll_half, Spectral};
use nonlocal_blowup::nonlinearity::threshold_constant_c;
use nonlocal_blowup::norms::radial_concentration;
use nonlocal_blowup::solver::{self, jensen_check, Outcome, SimConfig};
use nonlocal_blowup::specfun::sphere_area;
use nonlocal_blowup::stationary::{singular_constant, SingularSolution};
use nonlocal_blowup::{
    Dimension, Grid, GridFunction, KernelSpec, Nonlinearity, OsgoodTransform, RadialProfile,
    SemigroupKernel, StableProfile,
};
use serde::Serialize;
use serde_json::json;

use crate::commands;
use crate::output::OutDir;

/// Bumped whenever a preset tolerance changes.
pub const TOLERANCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparison {
    /// `|value − target| ≤ tol`
    Near {
        target: f64,
        tol: f64,
    },
    /// `|value/target − 1| ≤ tol`
    Relative {
        target: f64,
        tol: f64,
    },
    AtMost {
        bound: f64,
    },
    AtLeast {
        bound: f64,
    },
    /// A flag measured as 1 (true) or 0 (false).
    Holds,
}

impl Comparison {
    pub fn accepts(self, v: f64) -> bool {
        match self {
            Comparison::Near { target, tol } => (v - target).abs() <= tol,
            Comparison::Relative { target, tol } => (v / target - 1.0).abs() <= tol,
            Comparison::AtMost { bound } => v <= bound,
            Comparison::AtLeast { bound } => v >= bound,
            Comparison::Holds => v == 1.0,
        }
    }

    fn describe(self) -> String {
        match self {
            Comparison::Near { target, tol } => format!("within {tol:e} of {target}"),
            Comparison::Relative { target, tol } => format!("within {}% of {target}", 100.0 * tol),
            Comparison::AtMost { bound } => format!("≤ {bound}"),
            Comparison::AtLeast { bound } => format!("≥ {bound}"),
            Comparison::Holds => "holds".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpectedCheck {
    pub quantity: &'static str,
    pub comparison: Comparison,
}

const fn check(quantity: &'static str, comparison: Comparison) -> ExpectedCheck {
    ExpectedCheck {
        quantity,
        comparison,
    }
}

pub type Params = BTreeMap<String, f64>;
pub type Measured = BTreeMap<String, f64>;
type Runner = fn(&Params, &OutDir) -> Result<Measured>;

pub struct ExperimentPreset {
    pub name: &'static str,
    pub criterion: u8,
    pub summary: &'static str,
    pub targets: &'static [&'static str],
    pub bindings: &'static [(&'static str, f64)],
    pub checks: fn() -> Vec<ExpectedCheck>,
    run: Runner,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub quantity: String,
    pub comparison: Comparison,
    pub measured: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetReport {
    pub preset: String,
    pub criterion: u8,
    pub module_targets: Vec<String>,
    pub parameters: Params,
    pub tolerance_version: u32,
    pub checks: Vec<CheckOutcome>,
    pub measured: Measured,
    pub passed: bool,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn dim(d: u32) -> Result<Dimension> {
    Ok(Dimension::new(d)?)
}

fn param(p: &Params, key: &str) -> f64 {
    p[key]
}

fn gaussian_1d(grid: Grid, mass: f64, sigma: f64) -> Result<GridFunction> {
    Ok(GridFunction::from_fn(grid, |x| {
        mass / (2.0 * PI * sigma * sigma).sqrt() * (-x[0] * x[0] / (2.0 * sigma * sigma)).exp()
    })?)
}

fn measured(pairs: impl IntoIterator<Item = (&'static str, f64)>) -> Measured {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn run_constants(p: &Params, out: &OutDir) -> Result<Measured> {
    let d = param(p, "d") as u32;
    let sigma3 = sphere_area(dim(3)?);
    let s = singular_constant(2.0, dim(d)?, param(p, "p"))?;
    let c = threshold_constant_c(2.0, 2.0)?.value;
    let mut t = CsvTable::new(["quantity", "value"]);
    t.push(csv_row!["sigma_3", sigma3])?;
    t.push(csv_row![format!("s(2,{d},{})", param(p, "p")), s])?;
    t.push(csv_row!["c_2,2", c])?;
    out.table("constants.csv", &t)?;
    Ok(measured([("sigma_3", sigma3), ("s", s), ("c_2_2", c)]))
}

fn run_osgood(_: &Params, out: &OutDir) -> Result<Measured> {
    let sources = [
        Nonlinearity::power(1.0, 2.0)?,
        Nonlinearity::power(0.3, 3.5)?,
        Nonlinearity::power_sum(vec![(1.0, 2.0), (1.0, 3.0)])?,
        Nonlinearity::exponential(0.5)?,
    ];
    let mut table = CsvTable::new(["source", "T", "h_inverse", "relative_error"]);
    let mut worst: f64 = 0.0;
    for f in sources {
        let h = OsgoodTransform::new(f);
        for t in blowup::log_spaced(1e-3, 1e3, 61) {
            let w = h.h_inverse(t)?;
            let err = (h.h(w)? / t - 1.0).abs();
            worst = worst.max(err);
            table.push(csv_row![h.source().label(), t, w, err])?;
        }
    }
    out.table("osgood_roundtrip.csv", &table)?;
    Ok(measured([("max_relative_error", worst)]))
}

fn run_kernel_laws(p: &Params, out: &OutDir) -> Result<Measured> {
    let (t, s) = (param(p, "t"), param(p, "s"));
    let g1 = Grid::new(1, 1024, 64.0)?;
    let g2 = Grid::new(2, 128, 24.0)?;
    let specs = [
        (KernelSpec::gaussian_like(dim(1)?, 1.0)?, g1),
        (KernelSpec::compact_bump(dim(1)?, 2.0)?, g1),
        (KernelSpec::gaussian_like(dim(2)?, 0.5)?, g2),
        (KernelSpec::compact_bump(dim(2)?, 2.0)?, g2),
        (KernelSpec::pure_fractional(dim(2)?, 2.0)?, g2),
    ];
    let mut table = CsvTable::new(["kernel", "d", "mass_error", "semigroup_error"]);
    let (mut mass_err, mut sg_err): (f64, f64) = (0.0, 0.0);
    for (spec, grid) in specs {
        let kt = SemigroupKernel::new(spec, t, grid)?;
        let ks = SemigroupKernel::new(spec, s, grid)?;
        let kts = SemigroupKernel::new(spec, t + s, grid)?;
        let mut fft = Spectral::new(grid);
        let a = fft.forward(&kt.values());
        let b = fft.forward(&roll_half(&grid, &ks.values()));
        let prod = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let conv = fft.inverse_real(prod);
        let err = conv
            .iter()
            .zip(kts.values())
            .map(|(c, e)| (c * grid.cell_volume() - e).abs())
            .fold(0.0, f64::max);
        let m = (kt.mass() - 1.0).abs();
        mass_err = mass_err.max(m);
        sg_err = sg_err.max(err);
        table.push(csv_row![format!("{:?}", spec.kind()), grid.dim(), m, err])?;
    }
    out.table("kernel_laws.csv", &table)?;

    let d3 = dim(3)?;
    let poisson = StableProfile::new(1.0, d3)?;
    let sub = StableProfile::by_subordination(1.0, d3)?;
    let one = RadialProfile::from_fn(d3, RadialProfile::log_radii(1e-3, 1e3, 10), |_| 1.0)?
        .with_tail_exponent(0.0);
    let poisson_mass = one.pair_with(|r| poisson.value(r).unwrap_or(f64::NAN))?;
    mass_err = mass_err.max((poisson_mass - 1.0).abs());
    let mut table = CsvTable::new(["rho", "poisson", "subordinated"]);
    let mut gap: f64 = 0.0;
    for i in 0..=1000 {
        let rho = 0.01 * f64::from(i);
        let (a, b) = (poisson.value(rho)?, sub.value(rho)?);
        gap = gap.max((a - b).abs());
        if i % 10 == 0 {
            table.push(csv_row![rho, a, b])?;
        }
    }
    out.table("subordination.csv", &table)?;
    Ok(measured([
        ("mass_error", mass_err),
        ("semigroup_error", sg_err),
        ("subordination_gap", gap),
    ]))
}

fn run_heat_approximation(p: &Params, out: &OutDir) -> Result<Measured> {
    let a = param(p, "a");
    let grid = Grid::new(1, param(p, "points") as usize, param(p, "half_width"))?;
    let spec = KernelSpec::gaussian_like(dim(1)?, a)?;
    let mut table = CsvTable::new(["t", "scaled_sup_gap"]).meta("a", a);
    let mut seq = Vec::new();
    for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let k = SemigroupKernel::new(spec, t, grid)?;
        let sup = k
            .regular_part()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = grid.position(i)[0];
                (v - (4.0 * PI * a * t).powf(-0.5) * (-x * x / (4.0 * a * t)).exp()).abs()
            })
            .fold(0.0, f64::max);
        seq.push(t.sqrt() * sup);
        table.push(csv_row![t, t.sqrt() * sup])?;
    }
    out.table("heat_approximation.csv", &table)?;
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
    Ok(measured([
        ("strictly_decreasing", flag(decreasing)),
        ("gap_at_t16", seq[4]),
    ]))
}

fn run_jensen(p: &Params, out: &OutDir) -> Result<Measured> {
    let grid = Grid::new(1, 512, 32.0)?;
    let spec = KernelSpec::gaussian_like(dim(1)?, 1.0)?;
    let f = Nonlinearity::power(1.0, 2.0)?;
    let mut cfg = SimConfig::new(spec, f.clone(), 10.0);
    cfg.moment_targets = vec![param(p, "t1"), param(p, "t2"), param(p, "t3")];
    let traj = solver::run(&gaussian_1d(grid, param(p, "mass"), 1.0)?, &cfg)?;
    let mut table = CsvTable::new(["T", "steps", "satisfied_fraction", "integrated_ratio"]);
    let (mut frac, mut ratio) = (f64::INFINITY, f64::INFINITY);
    for series in &traj.moments {
        let r = jensen_check(series, &f)?;
        frac = frac.min(r.satisfied_fraction);
        ratio = ratio.min(r.integrated_ratio);
        table.push(csv_row![
            r.target,
            r.steps,
            r.satisfied_fraction,
            r.integrated_ratio
        ])?;
    }
    out.table("jensen.csv", &table)?;
    commands::trajectory_tables(&traj, &f, out)?;
    Ok(measured([
        ("min_satisfied_fraction", frac),
        ("min_integrated_ratio", ratio),
    ]))
}

fn run_soundness(p: &Params, out: &OutDir) -> Result<Measured> {
    let grid = Grid::new(1, 1024, 64.0)?;
    let spec = KernelSpec::gaussian_like(dim(1)?, 1.0)?;
    let f = Nonlinearity::power(1.0, 2.0)?;
    let u0 = gaussian_1d(grid, param(p, "mass"), 1.0)?;
    let verdict = blowup::evaluate_criterion(&CriterionInput::new(
        InitialData::Grid(u0.clone()),
        spec,
        f.clone(),
    ))?;
    out.table(
        "criterion_curve.csv",
        &commands::criterion_table(&verdict, f.label())?,
    )?;
    let t_star = verdict
        .t_star
        .context("the criterion is not met on the T grid")?;
    let mut cfg = SimConfig::new(spec, f, 2.0 * t_star);
    cfg.center = verdict.center.map(|c| grid.position(c));
    let traj = solver::run(&u0, &cfg)?;
    let t_obs = traj.outcome.blowup_time().unwrap_or(f64::INFINITY);
    Ok(measured([
        ("t_star", t_star),
        ("t_obs", t_obs),
        ("t_obs_over_t_star", t_obs / t_star),
        ("support_reliable", flag(traj.audit.reliable)),
    ]))
}

fn run_fujita(p: &Params, out: &OutDir) -> Result<Measured> {
    let grid = Grid::new(1, 8192, 2048.0)?;
    let spec = KernelSpec::gaussian_like(dim(1)?, 1.0)?;
    let u0 = InitialData::Grid(gaussian_1d(grid, 1.0, 1.0)?);
    let g = blowup::fujita_growth(
        &u0,
        &spec,
        param(p, "p"),
        &blowup::log_spaced(10.0, 1e4, 16),
    )?;
    let mut table =
        CsvTable::new(["T", "scaled_moment"]).meta("fitted_exponent", g.fitted_exponent);
    for &(t, v) in &g.curve {
        table.push(csv_row![t, v])?;
    }
    out.table("fujita_growth.csv", &table)?;
    Ok(measured([
        ("fitted_exponent", g.fitted_exponent),
        ("predicted_exponent", g.predicted_exponent),
    ]))
}

fn run_decay(p: &Params, out: &OutDir) -> Result<Measured> {
    let grid = Grid::new(1, 2048, 512.0)?;
    let spec = KernelSpec::gaussian_like(dim(1)?, 1.0)?;
    let pow = param(p, "p");
    let mut cfg = SimConfig::new(spec, Nonlinearity::power(1.0, pow)?, param(p, "t_end"));
    cfg.dt_init = 0.1;
    let traj = solver::run(&gaussian_1d(grid, param(p, "mass"), 1.0)?, &cfg)?;
    let mut table =
        CsvTable::new(["t", "sup_u", "scaled_sup"]).meta("outcome", traj.outcome.label());
    for s in traj.samples.iter().step_by(10) {
        table.push(csv_row![s.t, s.sup, s.t.powf(1.0 / (pow - 1.0)) * s.sup])?;
    }
    out.table("decay.csv", &table)?;
    let (sup, slope) = traj
        .decay_profile(pow, 0.1 * cfg.t_end)
        .unwrap_or((f64::NAN, f64::NAN));
    Ok(measured([
        (
            "reached_horizon",
            flag(traj.outcome == Outcome::ReachedHorizon),
        ),
        ("decay_slope", slope),
        ("scaled_sup", sup),
        ("support_reliable", flag(traj.audit.reliable)),
    ]))
}

fn run_morrey(_: &Params, out: &OutDir) -> Result<Measured> {
    let d5 = dim(5)?;
    let sol = SingularSolution::new(2.0, d5, 3.0)?;
    let u = sol.profile(RadialProfile::log_radii(1e-3, 1e3, 601))?;
    let conc = radial_concentration(&u, 3.0, 2.0)?;
    let mut table = CsvTable::new(["r", "normalized_ball_mass"]);
    let radii = blowup::log_spaced(0.1, 10.0, 21);
    let vals: Vec<f64> = radii
        .iter()
        .map(|&r| r.powf(-4.0) * u.ball_mass(r))
        .collect();
    for (r, v) in radii.iter().zip(&vals) {
        table.push(csv_row![*r, *v])?;
    }
    out.table("morrey.csv", &table)?;
    let spread = vals
        .iter()
        .map(|v| (v / vals[0] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(measured([
        ("concentration", conc.value),
        ("radial_spread", spread),
    ]))
}

fn run_stationary(_: &Params, out: &OutDir) -> Result<Measured> {
    let frac = SingularSolution::new(1.0, dim(3)?, 3.0)?.stationary_residual(1.0)?;
    let classical = SingularSolution::new(2.0, dim(5)?, 3.0)?.stationary_residual(1.0)?;
    let mut table = CsvTable::new([
        "alpha",
        "d",
        "p",
        "multiplier",
        "target",
        "relative_residual",
    ]);
    table.push(csv_row![
        1.0,
        3u32,
        3.0,
        frac.multiplier,
        frac.target,
        frac.relative_residual
    ])?;
    table.push(csv_row![
        2.0,
        5u32,
        3.0,
        classical.multiplier,
        classical.target,
        classical.relative_residual
    ])?;
    out.table("stationary.csv", &table)?;
    Ok(measured([
        ("fractional_residual", frac.relative_residual),
        ("classical_residual", classical.relative_residual),
    ]))
}

fn run_asymptotics(_: &Params, out: &OutDir) -> Result<Measured> {
    let k = asymptotics::sweep(Quantity::K, 2.0, 3.0, &[400, 800])?;
    out.table("sweep_K_2_3.csv", &commands::sweep_table(&k)?)?;
    let (mut ratio_gap, mut slope_gap): (f64, f64) = (0.0, 0.0);
    for p in [2.0, 3.0, 5.0] {
        let r = asymptotics::sweep(Quantity::L, 2.0, p, &[400, 800])?;
        ratio_gap = ratio_gap.max((r.verdict.last_ratio - 1.0).abs());
        let ds: Vec<u32> = (1..=10).map(|i| 100 * i).collect();
        let r = asymptotics::sweep(Quantity::L, 2.0, p, &ds)?;
        slope_gap = slope_gap.max((r.verdict.fitted_slope - r.verdict.predicted_slope).abs());
        out.table(&format!("sweep_L_2_{p}.csv"), &commands::sweep_table(&r)?)?;
    }
    let band = asymptotics::sweep(Quantity::L, 1.0, 3.0, &(3..=50).collect::<Vec<u32>>())?;
    out.table("sweep_L_1_3.csv", &commands::sweep_table(&band)?)?;
    let tail = asymptotics::sweep(Quantity::L, 1.0, 3.0, &(10..=50).collect::<Vec<u32>>())?;
    Ok(measured([
        ("k_ratio_gap", (k.verdict.last_ratio - 1.0).abs()),
        ("l_gaussian_ratio_gap", ratio_gap),
        ("l_gaussian_slope_gap", slope_gap),
        ("l_fractional_max_over_min", band.verdict.max_over_min),
        (
            "l_fractional_slope_gap",
            (tail.verdict.fitted_slope - tail.verdict.predicted_slope).abs(),
        ),
    ]))
}

fn run_window(p: &Params, out: &OutDir) -> Result<Measured> {
    let (alpha, pow) = (param(p, "alpha"), param(p, "p"));
    let mut table = CsvTable::new(["d", "eta"]);
    let mut worst = f64::INFINITY;
    for d in (10..=1000).step_by(10) {
        let eta = asymptotics::window_lower_bound(alpha, dim(d)?, pow)?;
        worst = worst.min(eta);
        table.push(csv_row![d, eta])?;
    }
    out.table("window.csv", &table)?;
    Ok(measured([("min_eta", worst)]))
}

pub fn registry() -> Vec<ExperimentPreset> {
    use Comparison::*;
    vec![
        ExperimentPreset {
            name: "constants",
            criterion: 1,
            summary: "σ_3, s(2,5,3) and c_2,2",
            targets: &["specfun", "stationary", "nonlinearity"],
            bindings: &[("d", 5.0), ("p", 3.0)],
            checks: || {
                vec![
                    check(
                        "sigma_3",
                        Near {
                            target: 4.0 * PI,
                            tol: 1e-12,
                        },
                    ),
                    check(
                        "s",
                        Near {
                            target: 2f64.sqrt(),
                            tol: 1e-12,
                        },
                    ),
                    check(
                        "c_2_2",
                        Near {
                            target: 1.0,
                            tol: 0.0,
                        },
                    ),
                ]
            },
            run: run_constants,
        },
        ExperimentPreset {
            name: "osgood-roundtrip",
            criterion: 2,
            summary: "h(h⁻¹(T)) = T over T ∈ [1e-3, 1e3]",
            targets: &["nonlinearity"],
            bindings: &[],
            checks: || vec![check("max_relative_error", AtMost { bound: 1e-9 })],
            run: run_osgood,
        },
        ExperimentPreset {
            name: "kernel-laws",
            criterion: 3,
            summary: "unit mass, semigroup property, subordination",
            targets: &["kernels"],
            bindings: &[("t", 1.5), ("s", 2.5)],
            checks: || {
                vec![
                    check("mass_error", AtMost { bound: 1e-8 }),
                    check("semigroup_error", AtMost { bound: 1e-7 }),
                    check("subordination_gap", AtMost { bound: 1e-7 }),
                ]
            },
            run: run_kernel_laws,
        },
        ExperimentPreset {
            name: "heat-approximation",
            criterion: 4,
            summary: "t^1/2 sup|k_t − G_t| decreasing, gaussian J, d = 1",
            targets: &["kernels"],
            bindings: &[("a", 1.0), ("points", 2048.0), ("half_width", 128.0)],
            checks: || vec![check("strictly_decreasing", Holds)],
            run: run_heat_approximation,
        },
        ExperimentPreset {
            name: "jensen-chain",
            criterion: 5,
            summary: "dW_T/dt ≥ F(W_T) along a d = 1 run with F = u²",
            targets: &["solver", "nonlinearity"],
            bindings: &[("mass", 20.0), ("t1", 0.1), ("t2", 0.25), ("t3", 0.5)],
            checks: || {
                vec![
                    check("min_satisfied_fraction", AtLeast { bound: 0.99 }),
                    check("min_integrated_ratio", AtLeast { bound: 0.9999 }),
                ]
            },
            run: run_jensen,
        },
        ExperimentPreset {
            name: "criterion-soundness",
            criterion: 6,
            summary: "solver blowup no later than 1.1 T*",
            targets: &["blowup", "solver"],
            bindings: &[("mass", 5.0)],
            checks: || {
                vec![
                    check("t_obs_over_t_star", AtMost { bound: 1.1 }),
                    check("support_reliable", Holds),
                ]
            },
            run: run_soundness,
        },
        ExperimentPreset {
            name: "fujita-growth",
            criterion: 7,
            summary: "growth exponent of T^{1/(p−1)} W_T(0) below the Fujita exponent",
            targets: &["blowup", "kernels"],
            bindings: &[("p", 2.5)],
            checks: || {
                vec![check(
                    "fitted_exponent",
                    Relative {
                        target: 1.0 / 6.0,
                        tol: 0.05,
                    },
                )]
            },
            run: run_fujita,
        },
        ExperimentPreset {
            name: "decay-branch",
            criterion: 8,
            summary: "small data above the Fujita exponent decay like t^{-1/(p−1)}",
            targets: &["solver"],
            bindings: &[("p", 4.0), ("mass", 0.5), ("t_end", 1000.0)],
            checks: || {
                vec![
                    check("reached_horizon", Holds),
                    check("decay_slope", AtMost { bound: 0.02 }),
                    check("support_reliable", Holds),
                ]
            },
            run: run_decay,
        },
        ExperimentPreset {
            name: "morrey-closed-form",
            criterion: 9,
            summary: "radial concentration of u_∞(2,5,3)",
            targets: &["norms", "stationary"],
            bindings: &[],
            checks: || {
                let sigma5 = 8.0 * PI * PI / 3.0;
                vec![
                    check(
                        "concentration",
                        Near {
                            target: sigma5 * 2f64.sqrt() / 4.0,
                            tol: 1e-5,
                        },
                    ),
                    check("radial_spread", AtMost { bound: 1e-6 }),
                ]
            },
            run: run_morrey,
        },
        ExperimentPreset {
            name: "stationary-residual",
            criterion: 10,
            summary: "u_∞ solves the stationary equation",
            targets: &["stationary"],
            bindings: &[],
            checks: || {
                vec![
                    check("fractional_residual", AtMost { bound: 1e-3 }),
                    check("classical_residual", AtMost { bound: 1e-10 }),
                ]
            },
            run: run_stationary,
        },
        ExperimentPreset {
            name: "asymptotic-orders",
            criterion: 11,
            summary: "large-d orders of K and L",
            targets: &["asymptotics"],
            bindings: &[],
            checks: || {
                vec![
                    check("k_ratio_gap", AtMost { bound: 0.02 }),
                    check("l_gaussian_ratio_gap", AtMost { bound: 0.02 }),
                    check("l_gaussian_slope_gap", AtMost { bound: 0.02 }),
                    check("l_fractional_max_over_min", AtMost { bound: 5.0 }),
                    check("l_fractional_slope_gap", AtMost { bound: 0.05 }),
                ]
            },
            run: run_asymptotics,
        },
        ExperimentPreset {
            name: "window-bound",
            criterion: 12,
            summary: "window lower bound η(d) over d = 10..1000",
            targets: &["asymptotics"],
            bindings: &[("alpha", 1.0), ("p", 3.0)],
            checks: || vec![check("min_eta", AtLeast { bound: 0.05 })],
            run: run_window,
        },
    ]
}

pub fn find(name: &str) -> Result<ExperimentPreset> {
    let all = registry();
    let names: Vec<&str> = all.iter().map(|p| p.name).collect();
    match all.into_iter().find(|p| p.name == name) {
        Some(p) => Ok(p),
        None => bail!(
            "unknown preset '{name}'; known presets: {}",
            names.join(", ")
        ),
    }
}

/// Parse `key=value` overrides against the preset's bindings.
pub fn parse_overrides(preset: &ExperimentPreset, raw: &[String]) -> Result<Params> {
    let mut params: Params = preset
        .bindings
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .with_context(|| format!("override '{item}' is not key=value"))?;
        let slot = params
            .get_mut(k.trim())
            .with_context(|| format!("preset '{}' has no parameter '{k}'", preset.name))?;
        *slot = v
            .trim()
            .parse()
            .with_context(|| format!("'{v}' is not a number"))?;
    }
    Ok(params)
}

impl ExperimentPreset {
    pub fn execute(&self, params: &Params, out: &OutDir) -> Result<PresetReport> {
        let measured = (self.run)(params, out)?;
        let checks: Vec<CheckOutcome> = (self.checks)()
            .into_iter()
            .map(|c| {
                let v = measured.get(c.quantity).copied();
                CheckOutcome {
                    quantity: c.quantity.to_string(),
                    comparison: c.comparison,
                    measured: v,
                    passed: v.is_some_and(|v| c.comparison.accepts(v)),
                }
            })
            .collect();
        let report = PresetReport {
            preset: self.name.to_string(),
            criterion: self.criterion,
            module_targets: self.targets.iter().map(|s| s.to_string()).collect(),
            parameters: params.clone(),
            tolerance_version: TOLERANCE_VERSION,
            passed: checks.iter().all(|c| c.passed),
            checks,
            measured,
        };
        let manifest = json!({ "crate_version": env!("CARGO_PKG_VERSION"), "report": &report });
        out.text(
            "manifest.json",
            &(serde_json::to_string_pretty(&manifest)? + "\n"),
        )?;
        Ok(report)
    }
}

pub fn print_report(report: &PresetReport) {
    for c in &report.checks {
        println!(
            "  {} {}: {} (expected {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.quantity,
            c.measured.map_or("missing".into(), |v| format!("{v:.6e}")),
            c.comparison.describe()
        );
    }
}
