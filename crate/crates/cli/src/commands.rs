//! Subcommand bodies. Each writes its tables into the output directory and
//! prints a short summary to stdout.

use anyhow::{bail, Context, Result};
use nonlocal_blowup::asymptotics::{self, AsymptoticReport, Quantity};
use nonlocal_blowup::blowup::{self, BlowupVerdict, CriterionInput};
use nonlocal_blowup::csv_row;
use nonlocal_blowup::csvio::CsvTable;
use nonlocal_blowup::nonlinearity::{fujita_exponent, threshold_constant_c};
use nonlocal_blowup::solver::{self, DichotomySummary, Trajectory};
use nonlocal_blowup::specfun::sphere_area;
use nonlocal_blowup::stationary::SingularSolution;
use nonlocal_blowup::{Dimension, KernelKind, Nonlinearity, SemigroupKernel, StableProfile};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::OutDir;

/// Parse `a:b`, `a:b:step` or a comma-separated list of dimensions.
pub fn parse_dims(spec: &str) -> Result<Vec<u32>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<u32>()
            .with_context(|| format!("'{s}' is not a dimension"))
    };
    let dims = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [a, b] => (num(a)?..=num(b)?).collect(),
        [a, b, step] => {
            let step = num(step)?;
            if step == 0 {
                bail!("dimension step must be positive");
            }
            (num(a)?..=num(b)?).step_by(step as usize).collect()
        }
        _ => bail!("dimensions are given as a:b, a:b:step or a comma list, got '{spec}'"),
    };
    if dims.is_empty() {
        bail!("empty dimension range '{spec}'");
    }
    Ok(dims)
}

pub fn kernel(cfg: &ExperimentConfig, t: f64, out: &OutDir) -> Result<()> {
    let spec = cfg.kernel()?;
    let grid = cfg.grid.build()?;
    if let KernelKind::PureFractional { alpha, .. } = spec.kind() {
        let profile = StableProfile::new(alpha, spec.dim())?;
        let mut table = CsvTable::new(["rho", "R"])
            .meta("kernel", format!("{:?}", spec.kind()))
            .meta("d", spec.dim())
            .meta(
                "scaling",
                "P_t(x) = (coeff t)^{-d/alpha} R(|x| (coeff t)^{-1/alpha})",
            );
        for rho in blowup::log_spaced(1e-3, 1e3, 121) {
            table.push(csv_row![rho, profile.value(rho)?])?;
        }
        let path = out.table("radial_profile.csv", &table)?;
        println!("radial profile: {}", path.display());
    }
    let k = match SemigroupKernel::new(spec, t, grid) {
        Ok(k) => k,
        Err(e) if spec.is_nonlocal() => return Err(e.into()),
        Err(e) => {
            eprintln!("grid dump skipped: {e}");
            return Ok(());
        }
    };
    let header: Vec<&str> = if grid.dim() == 1 {
        vec!["x", "value"]
    } else {
        vec!["x", "y", "value"]
    };
    let mut table = CsvTable::new(header)
        .meta("kernel", format!("{:?}", spec.kind()))
        .meta("t", t)
        .meta("atom", k.atom())
        .meta("mass", k.mass())
        .meta("boundary_mass", k.boundary_mass());
    for (i, v) in k.regular_part().iter().enumerate() {
        let x = grid.position(i);
        table.push(if grid.dim() == 1 {
            csv_row![x[0], *v]
        } else {
            csv_row![x[0], x[1], *v]
        })?;
    }
    let path = out.table("kernel.csv", &table)?;
    println!(
        "atom e^-t = {}, mass = {}, boundary mass = {:e}",
        k.atom(),
        k.mass(),
        k.boundary_mass()
    );
    println!("kernel: {}", path.display());
    Ok(())
}

/// `s`, `K`, `σ_d` and the related exponents for one `(α, p, d)`.
pub fn constants(alpha: f64, p: f64, d: u32, out: &OutDir) -> Result<()> {
    let dim = Dimension::new(d)?;
    let sol = SingularSolution::new(alpha, dim, p)?;
    let k = asymptotics::k_fractional(alpha, dim, p)?;
    let sigma = sphere_area(dim);
    let p_f = fujita_exponent(alpha, dim)?;
    let c = threshold_constant_c(alpha, p)?;
    let morrey = sol.morrey_norm(1.0).ok();
    println!("s={:.7}", sol.s_value());
    println!("K={k:.7}");
    println!("σ_{d}={sigma:.7}");
    println!("p_F={p_f:.7}");
    println!("c={:.7} ({:?})", c.value, c.source);
    if let Some(m) = morrey {
        println!("morrey_norm={m:.7}");
    }
    let mut table = CsvTable::new(["alpha", "d", "p", "s", "K", "sigma_d", "morrey_norm"]);
    table.push(csv_row![alpha, d, p, sol.s_value(), k, sigma, morrey])?;
    out.table("constants.csv", &table)?;
    Ok(())
}

pub fn verdict_json(v: &BlowupVerdict) -> serde_json::Value {
    json!({
        "classification": v.classification.label(),
        "t_star": v.t_star,
        "threshold": v.threshold,
        "max_ratio": v.max_ratio(),
        "center_index": v.center,
        "morrey_value": v.morrey_value,
        "bounded_integrable": v.bounded_integrable,
        "unresolved_t": v.unresolved,
    })
}

pub fn criterion_table(v: &BlowupVerdict, label: &str) -> Result<CsvTable> {
    let mut table = CsvTable::new(["T", "W", "hinv", "ratio"])
        .meta("source", label)
        .meta("threshold", v.threshold)
        .meta("classification", v.classification.label());
    for pt in &v.curve {
        table.push(csv_row![pt.t, pt.moment, pt.h_inverse, pt.ratio])?;
    }
    Ok(table)
}

pub fn criterion(cfg: &ExperimentConfig, out: &OutDir) -> Result<BlowupVerdict> {
    let f = cfg.source.build()?;
    let mut input = CriterionInput::new(cfg.initial_data()?, cfg.kernel()?, f.clone())
        .with_threshold(cfg.criterion.threshold);
    if let Some(ts) = cfg.t_grid()? {
        input = input.with_t_grid(ts);
    }
    let v = blowup::evaluate_criterion(&input)?;
    out.table("criterion_curve.csv", &criterion_table(&v, f.label())?)?;
    let summary = serde_json::to_string_pretty(&verdict_json(&v))?;
    out.text("verdict.json", &(summary.clone() + "\n"))?;
    println!("{summary}");
    Ok(v)
}

pub fn trajectory_tables(traj: &Trajectory, f: &Nonlinearity, out: &OutDir) -> Result<()> {
    let mut table = CsvTable::new(["t", "sup_u", "mass", "dt"])
        .meta("outcome", traj.outcome.label())
        .meta("support_reliable", traj.audit.reliable)
        .meta("enlargements", traj.audit.enlargements)
        .meta("mass_defect", traj.audit.mass_defect);
    for s in &traj.samples {
        table.push(csv_row![s.t, s.sup, s.mass, s.dt])?;
    }
    out.table("trajectory.csv", &table)?;
    for (i, series) in traj.moments.iter().enumerate() {
        let mut table = CsvTable::new(["t", "W", "F_of_W", "dW_dt_fd"])
            .meta("T", series.target)
            .meta("center", format!("{:?}", traj.center));
        for r in series.jensen_rows(f) {
            table.push(csv_row![r.t, r.w, r.f_of_w, r.dw_dt])?;
        }
        out.table(&format!("moments_{i}.csv"), &table)?;
    }
    let grid = traj.final_state.grid();
    let header: Vec<&str> = if grid.dim() == 1 {
        vec!["x", "u"]
    } else {
        vec!["x", "y", "u"]
    };
    let mut table = CsvTable::new(header).meta("t", traj.samples.last().map_or(0.0, |s| s.t));
    for (i, v) in traj.final_state.values().iter().enumerate() {
        let x = grid.position(i);
        table.push(if grid.dim() == 1 {
            csv_row![x[0], *v]
        } else {
            csv_row![x[0], x[1], *v]
        })?;
    }
    out.table("final_state.csv", &table)?;
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig, out: &OutDir) -> Result<Trajectory> {
    let u0 = cfg.grid_function()?;
    let traj = solver::run(&u0, &cfg.sim_config()?)?;
    trajectory_tables(&traj, &cfg.source.build()?, out)?;
    let last = traj.samples.last().context("empty trajectory")?;
    println!("outcome: {}", traj.outcome.label());
    if let Some(t) = traj.outcome.blowup_time() {
        println!("t_obs = {t}");
    }
    println!(
        "final t = {}, sup u = {}, mass = {}",
        last.t, last.sup, last.mass
    );
    println!(
        "support audit: {} ({} enlargements, worst shell ratio {:e}, mass defect {:e})",
        if traj.audit.reliable {
            "reliable"
        } else {
            "unreliable"
        },
        traj.audit.enlargements,
        traj.audit.worst_shell_ratio,
        traj.audit.mass_defect
    );
    Ok(traj)
}

pub fn sweep_table(r: &AsymptoticReport) -> Result<CsvTable> {
    let mut table = CsvTable::new([
        "quantity",
        "alpha",
        "p",
        "d",
        "value",
        "normalized",
        "t0_or_rho0",
    ])
    .meta("fitted_slope", r.verdict.fitted_slope)
    .meta("predicted_slope", r.verdict.predicted_slope)
    .meta("max_over_min", r.verdict.max_over_min)
    .meta("last_ratio", r.verdict.last_ratio);
    for row in &r.rows {
        table.push(csv_row![
            r.quantity.label(),
            r.alpha,
            r.p,
            row.d,
            row.ln_value.exp(),
            row.normalized,
            row.argmax
        ])?;
    }
    Ok(table)
}

pub fn sweep(
    quantity: Quantity,
    alpha: f64,
    p: f64,
    dims: &[u32],
    out: &OutDir,
) -> Result<AsymptoticReport> {
    let r = asymptotics::sweep(quantity, alpha, p, dims)?;
    let name = format!("sweep_{}.csv", quantity.label());
    out.table(&name, &sweep_table(&r)?)?;
    for row in &r.rows {
        println!(
            "d={:<5} value={:.6e} normalized={:.6}",
            row.d,
            row.ln_value.exp(),
            row.normalized
        );
    }
    println!(
        "fitted slope {:.4} (predicted {:.4})",
        r.verdict.fitted_slope, r.verdict.predicted_slope
    );
    println!(
        "max/min of normalized values {:.4}, last ratio {:.4}",
        r.verdict.max_over_min, r.verdict.last_ratio
    );
    Ok(r)
}

pub fn dichotomy(cfg: &ExperimentConfig, out: &OutDir) -> Result<DichotomySummary> {
    let base = cfg.grid_function()?;
    let summary = solver::dichotomy_experiment(
        &cfg.dichotomy.scales,
        &base,
        &cfg.sim_config()?,
        cfg.dichotomy.bisection_steps,
    )?;
    let mut table = CsvTable::new([
        "lambda",
        "class",
        "outcome",
        "t_obs",
        "t_star",
        "decay_sup",
        "decay_slope",
        "within_prediction",
        "reliable",
    ])
    .meta("monotone", summary.monotone)
    .meta("bracket", format!("{:?}", summary.bracket));
    for r in &summary.runs {
        table.push(csv_row![
            r.lambda,
            format!("{:?}", r.class),
            r.outcome.label(),
            r.outcome.blowup_time(),
            r.t_star,
            r.decay_sup,
            r.decay_slope,
            r.within_prediction.map(|b| b.to_string()),
            r.reliable.to_string()
        ])?;
        println!(
            "λ={:<10} {:<9} t_obs={:<12} T*={:<12} decay slope={}",
            r.lambda,
            format!("{:?}", r.class),
            r.outcome
                .blowup_time()
                .map_or("-".into(), |t| format!("{t:.5}")),
            r.t_star.map_or("-".into(), |t| format!("{t:.5}")),
            r.decay_slope.map_or("-".into(), |k| format!("{k:.4}"))
        );
    }
    out.table("dichotomy.csv", &table)?;
    println!(
        "monotone: {}, bracket: {:?}",
        summary.monotone, summary.bracket
    );
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_ranges() {
        assert_eq!(parse_dims("3:6").unwrap(), vec![3, 4, 5, 6]);
        assert_eq!(parse_dims("10:50:20").unwrap(), vec![10, 30, 50]);
        assert_eq!(parse_dims("400,800").unwrap(), vec![400, 800]);
        assert!(parse_dims("5:3").is_err());
        assert!(parse_dims("a:b").is_err());
        assert!(parse_dims("1:2:0").is_err());
    }
}
