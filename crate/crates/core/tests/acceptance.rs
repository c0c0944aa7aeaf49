//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always
//! printed; the process exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nonlocal_blowup::asymptotics::{self, Quantity};
use nonlocal_blowup::blowup::{self, CriterionInput, InitialData};
use nonlocal_blowup::grid::Spectral;
use nonlocal_blowup::kernels::{KernelSpec, SemigroupKernel, StableProfile};
use nonlocal_blowup::nonlinearity::{threshold_constant_c, Nonlinearity, OsgoodTransform};
use nonlocal_blowup::norms::{radial_concentration, RadialProfile};
use nonlocal_blowup::solver::{self, jensen_check, Outcome, SimConfig};
use nonlocal_blowup::specfun::{sphere_area, Dimension};
use nonlocal_blowup::stationary::{singular_constant, SingularSolution};
use nonlocal_blowup::{Grid, GridFunction};

type Check = Result<String, String>;
/// Name, runtime budget in seconds, and the check itself.
type Criterion = (&'static str, u64, fn() -> Check);

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gaussian_1d(grid: Grid, mass: f64, sigma: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        mass / (2.0 * PI * sigma * sigma).sqrt() * (-x[0] * x[0] / (2.0 * sigma * sigma)).exp()
    })
    .unwrap()
}

fn c1_constants() -> Check {
    let sigma3 = sphere_area(dim(3));
    let s = singular_constant(2.0, dim(5), 3.0).map_err(|e| e.to_string())?;
    let c22 = threshold_constant_c(2.0, 2.0)
        .map_err(|e| e.to_string())?
        .value;
    let detail = format!(
        "|σ_3 − 4π| = {:.1e}, |s − √2| = {:.1e}, c_2,2 = {c22}",
        (sigma3 - 4.0 * PI).abs(),
        (s - 2f64.sqrt()).abs()
    );
    ensure(
        (sigma3 - 4.0 * PI).abs() <= 1e-12 && (s - 2f64.sqrt()).abs() <= 1e-12 && c22 == 1.0,
        detail,
    )
}

fn c2_osgood() -> Check {
    let sources = vec![
        Nonlinearity::power(1.0, 2.0).unwrap(),
        Nonlinearity::power(0.3, 3.5).unwrap(),
        Nonlinearity::custom(
            "u^2 + u^3",
            |u: f64| u * u + u * u * u,
            |u: f64| 2.0 * u + 3.0 * u * u,
        )
        .unwrap(),
        Nonlinearity::custom(
            "u^1.5 (1 + u)",
            |u: f64| u.powf(1.5) * (1.0 + u),
            |u: f64| 1.5 * u.sqrt() + 2.5 * u.powf(1.5),
        )
        .unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for f in sources {
        let h = OsgoodTransform::new(f);
        for k in 0..=60 {
            let t = 10f64.powf(-3.0 + 0.1 * f64::from(k));
            let w = h.h_inverse(t).map_err(|e| e.to_string())?;
            let back = h.h(w).map_err(|e| e.to_string())?;
            worst = worst.max((back / t - 1.0).abs());
        }
    }
    ensure(
        worst <= 1e-9,
        format!("max relative |h(h⁻¹(T)) − T| = {worst:.2e}"),
    )
}

fn c3_kernel_laws() -> Check {
    let mut mass_err: f64 = 0.0;
    let mut semigroup_err: f64 = 0.0;
    let specs = [
        (
            KernelSpec::gaussian_like(dim(1), 1.0).unwrap(),
            Grid::new(1, 1024, 64.0).unwrap(),
        ),
        (
            KernelSpec::compact_bump(dim(1), 2.0).unwrap(),
            Grid::new(1, 1024, 64.0).unwrap(),
        ),
        (
            KernelSpec::gaussian_like(dim(2), 0.5).unwrap(),
            Grid::new(2, 128, 24.0).unwrap(),
        ),
        (
            KernelSpec::compact_bump(dim(2), 2.0).unwrap(),
            Grid::new(2, 128, 24.0).unwrap(),
        ),
        (
            KernelSpec::pure_fractional(dim(2), 2.0).unwrap(),
            Grid::new(2, 128, 24.0).unwrap(),
        ),
    ];
    for (spec, grid) in specs {
        let (t, s) = (1.5, 2.5);
        let kt = SemigroupKernel::new(spec, t, grid).map_err(|e| e.to_string())?;
        let ks = SemigroupKernel::new(spec, s, grid).map_err(|e| e.to_string())?;
        let kts = SemigroupKernel::new(spec, t + s, grid).map_err(|e| e.to_string())?;
        mass_err = mass_err.max((kt.mass() - 1.0).abs());
        // k_t ∗ k_s on the torus, both centered at the origin site
        let mut fft = Spectral::new(grid);
        let a = fft.forward(&kt.values());
        let b = fft.forward(&nonlocal_blowup::grid::roll_half(&grid, &ks.values()));
        let conv: Vec<_> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let conv: Vec<f64> = fft
            .inverse_real(conv)
            .into_iter()
            .map(|v| v * grid.cell_volume())
            .collect();
        let exact = kts.values();
        let err = conv
            .iter()
            .zip(&exact)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        semigroup_err = semigroup_err.max(err);
    }
    // the Poisson kernel has algebraic tails: its unit mass is checked radially
    let poisson = StableProfile::new(1.0, dim(3)).unwrap();
    let radial_mass = {
        let r = RadialProfile::log_radii(1e-3, 1e3, 10);
        let one = RadialProfile::from_fn(dim(3), r, |_| 1.0)
            .unwrap()
            .with_tail_exponent(0.0);
        one.pair_with(|rho| poisson.value(rho).unwrap())
            .map_err(|e| e.to_string())?
    };
    mass_err = mass_err.max((radial_mass - 1.0).abs());

    let sub = StableProfile::by_subordination(1.0, dim(3)).unwrap();
    let mut sub_err: f64 = 0.0;
    for i in 0..=1000 {
        let rho = 0.01 * f64::from(i);
        sub_err = sub_err.max((sub.value(rho).unwrap() - poisson.value(rho).unwrap()).abs());
    }
    let detail = format!("mass {mass_err:.1e}, semigroup {semigroup_err:.1e}, subordination vs Poisson {sub_err:.1e}");
    ensure(
        mass_err <= 1e-8 && semigroup_err <= 1e-7 && sub_err <= 1e-7,
        detail,
    )
}

fn c4_approximation() -> Check {
    let grid = Grid::new(1, 2048, 128.0).unwrap();
    let a = 1.0;
    let spec = KernelSpec::gaussian_like(dim(1), a).unwrap();
    let mut seq = Vec::new();
    for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let k = SemigroupKernel::new(spec, t, grid).map_err(|e| e.to_string())?;
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
    }
    let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
    ensure(
        decreasing,
        format!(
            "t^1/2 sup|k_t − G_t| = {:?}",
            seq.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn c5_jensen() -> Check {
    let grid = Grid::new(1, 512, 32.0).unwrap();
    let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
    let f = Nonlinearity::power(1.0, 2.0).unwrap();
    let mut cfg = SimConfig::new(spec, f.clone(), 10.0);
    cfg.moment_targets = vec![0.1, 0.25, 0.5];
    let traj = solver::run(&gaussian_1d(grid, 20.0, 1.0), &cfg).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    for series in &traj.moments {
        let rep = jensen_check(series, &f).map_err(|e| e.to_string())?;
        ok &= rep.satisfied_fraction >= 0.99 && rep.integrated_ratio >= 0.9999;
        lines.push(format!(
            "T={}: {:.2}% of {} steps, min (h(W0)−h(W))/t = {:.6}",
            rep.target,
            100.0 * rep.satisfied_fraction,
            rep.steps,
            rep.integrated_ratio
        ));
    }
    ensure(ok, lines.join("; "))
}

fn c6_criterion_soundness() -> Check {
    let grid = Grid::new(1, 1024, 64.0).unwrap();
    let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
    let f = Nonlinearity::power(1.0, 2.0).unwrap();
    let u0 = gaussian_1d(grid, 5.0, 1.0);
    let verdict = blowup::evaluate_criterion(&CriterionInput::new(
        InitialData::Grid(u0.clone()),
        spec,
        f.clone(),
    ))
    .map_err(|e| e.to_string())?;
    let Some(t_star) = verdict.t_star else {
        return Err(format!(
            "no T* on the grid, max ratio {:.3}",
            verdict.max_ratio()
        ));
    };
    let mut cfg = SimConfig::new(spec, f, 2.0 * t_star);
    cfg.center = verdict.center.map(|c| grid.position(c));
    let traj = solver::run(&u0, &cfg).map_err(|e| e.to_string())?;
    let Some(t_obs) = traj.outcome.blowup_time() else {
        return Err(format!(
            "no blowup by t = {}, T* = {t_star:.4}",
            2.0 * t_star
        ));
    };
    let detail = format!(
        "T* = {t_star:.4}, t_obs = {t_obs:.4}, ratio {:.3}, support audit {}",
        t_obs / t_star,
        if traj.audit.reliable {
            "passed"
        } else {
            "failed"
        }
    );
    ensure(t_obs <= 1.1 * t_star && traj.audit.reliable, detail)
}

fn c7_fujita() -> Check {
    let grid = Grid::new(1, 8192, 2048.0).unwrap();
    let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
    let u0 = InitialData::Grid(gaussian_1d(grid, 1.0, 1.0));
    let p = 2.5;
    let g = blowup::fujita_growth(&u0, &spec, p, &blowup::log_spaced(10.0, 1e4, 16))
        .map_err(|e| e.to_string())?;
    // independent prediction: 1/(p−1) − d/α with α = 2
    let predicted = 1.0 / (p - 1.0) - 0.5;
    let rel = (g.fitted_exponent / predicted - 1.0).abs();
    ensure(
        rel <= 0.05,
        format!(
            "fitted exponent {:.5}, predicted {predicted:.5}, relative gap {rel:.3}",
            g.fitted_exponent
        ),
    )
}

fn c8_decay() -> Check {
    let grid = Grid::new(1, 2048, 512.0).unwrap();
    let spec = KernelSpec::gaussian_like(dim(1), 1.0).unwrap();
    let p = 4.0;
    let f = Nonlinearity::power(1.0, p).unwrap();
    let mut cfg = SimConfig::new(spec, f, 1e3);
    cfg.dt_init = 0.1;
    let traj = solver::run(&gaussian_1d(grid, 0.5, 1.0), &cfg).map_err(|e| e.to_string())?;
    if traj.outcome != Outcome::ReachedHorizon {
        return Err(format!("outcome {:?}", traj.outcome));
    }
    let (sup, slope) = traj.decay_profile(p, 100.0).ok_or("too few samples")?;
    let detail = format!(
        "sup t^1/3 ‖u‖∞ on [100, 1000] = {sup:.4}, slope {slope:.4}, enlargements {}, audit {}",
        traj.audit.enlargements,
        if traj.audit.reliable {
            "passed"
        } else {
            "failed"
        }
    );
    ensure(
        slope <= 0.02 && sup.is_finite() && traj.audit.reliable,
        detail,
    )
}

fn c9_morrey() -> Check {
    let sol = SingularSolution::new(2.0, dim(5), 3.0).map_err(|e| e.to_string())?;
    let u = sol
        .profile(RadialProfile::log_radii(1e-3, 1e3, 601))
        .map_err(|e| e.to_string())?;
    let conc = radial_concentration(&u, 3.0, 2.0).map_err(|e| e.to_string())?;
    let sigma5 = 8.0 * PI * PI / 3.0;
    let closed = sigma5 * 2f64.sqrt() / 4.0;
    let values: Vec<f64> = [0.1, 0.3, 1.0, 3.0, 10.0]
        .iter()
        .map(|&r: &f64| r.powf(1.0 - 5.0) * u.ball_mass(r))
        .collect();
    let spread = values
        .iter()
        .map(|v| (v / values[0] - 1.0).abs())
        .fold(0.0, f64::max);
    let gap = (conc.value - closed).abs();
    ensure(
        gap <= 1e-5 && spread <= 1e-6,
        format!(
            "concentration {:.7} vs {closed:.7}, spread over r ∈ [0.1, 10] {spread:.1e}",
            conc.value
        ),
    )
}

fn c10_stationary() -> Check {
    let frac = SingularSolution::new(1.0, dim(3), 3.0).map_err(|e| e.to_string())?;
    let rep = frac.stationary_residual(1.0).map_err(|e| e.to_string())?;
    let classical = SingularSolution::new(2.0, dim(5), 3.0).map_err(|e| e.to_string())?;
    let sym = classical
        .stationary_residual(1.0)
        .map_err(|e| e.to_string())?;
    ensure(
        rep.relative_residual <= 1e-3 && sym.relative_residual <= 1e-10,
        format!(
            "α=1 residual {:.2e}, α=2 residual {:.2e}",
            rep.relative_residual, sym.relative_residual
        ),
    )
}

fn c11_asymptotics() -> Check {
    let k = asymptotics::sweep(Quantity::K, 2.0, 3.0, &[400, 800]).map_err(|e| e.to_string())?;
    let k_ratio = (k.verdict.last_ratio - 1.0).abs();
    let mut l2_ratio: f64 = 0.0;
    let mut l2_slope: f64 = 0.0;
    for p in [2.0, 3.0, 5.0] {
        let r = asymptotics::sweep(Quantity::L, 2.0, p, &[400, 800]).map_err(|e| e.to_string())?;
        l2_ratio = l2_ratio.max((r.verdict.last_ratio - 1.0).abs());
        let ds: Vec<u32> = (1..=10).map(|i| 100 * i).collect();
        let r = asymptotics::sweep(Quantity::L, 2.0, p, &ds).map_err(|e| e.to_string())?;
        l2_slope = l2_slope.max((r.verdict.fitted_slope - (0.5 - 1.0 / (p - 1.0))).abs());
    }
    let band = asymptotics::sweep(Quantity::L, 1.0, 3.0, &(3..=50).collect::<Vec<u32>>())
        .map_err(|e| e.to_string())?;
    let frac = asymptotics::sweep(Quantity::L, 1.0, 3.0, &(10..=50).collect::<Vec<u32>>())
        .map_err(|e| e.to_string())?;
    let frac_slope = (frac.verdict.fitted_slope + 0.25).abs();
    let detail = format!(
        "|K(800)/K(400) − 1| = {k_ratio:.4}, L_2 ratio gap {l2_ratio:.4}, L_2 slope gap {l2_slope:.4}, \
         L_1,3 max/min {:.3}, L_1,3 slope {:.4}",
        band.verdict.max_over_min, frac.verdict.fitted_slope
    );
    ensure(
        k_ratio <= 0.02
            && l2_ratio <= 0.02
            && l2_slope <= 0.02
            && band.verdict.max_over_min <= 5.0
            && frac_slope <= 0.05,
        detail,
    )
}

fn c12_window() -> Check {
    let mut worst = f64::INFINITY;
    for d in (10..=1000).step_by(10) {
        worst = worst
            .min(asymptotics::window_lower_bound(1.0, dim(d), 3.0).map_err(|e| e.to_string())?);
    }
    ensure(
        worst >= 0.05,
        format!("min η over d ∈ {{10, 20, …, 1000}} = {worst:.4}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("constants", 1, c1_constants),
        ("Osgood round trip", 1, c2_osgood),
        ("kernel laws", 10, c3_kernel_laws),
        ("approximation by the heat kernel", 30, c4_approximation),
        ("Jensen chain", 60, c5_jensen),
        ("criterion soundness", 120, c6_criterion_soundness),
        ("Fujita regime growth", 60, c7_fujita),
        ("dichotomy decay branch", 120, c8_decay),
        ("Morrey closed form", 5, c9_morrey),
        ("stationary residual", 60, c10_stationary),
        ("asymptotic orders", 60, c11_asymptotics),
        ("window bound", 5, c12_window),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget} s budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} C{:<2} {name}: {detail} [{:.2} s]",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} of 12 criteria failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
