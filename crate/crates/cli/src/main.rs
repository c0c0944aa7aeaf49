//! `nlblow`: experiment runner for the nonlocal-blowup library.
//!
//! Tables go to the directory named by `NLBLOW_OUT_DIR` (default
//! `./nlblow-out`).

// `!(x > 0.0)` is how NaN is rejected alongside the range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use nonlocal_blowup::asymptotics::Quantity;

use config::ExperimentConfig;
use output::OutDir;

#[derive(Parser)]
#[command(
    name = "nlblow",
    version,
    about = "Blowup experiments for semilinear nonlocal diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Kernel selection shared by several subcommands.
#[derive(Args, Clone)]
struct KernelArgs {
    /// gaussian, bump, heavy_tail or fractional
    #[arg(long, default_value = "gaussian")]
    kernel: String,
    /// Width parameter of the gaussian kernel
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Support radius of the bump kernel
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// Tail exponent of the heavy-tailed kernel
    #[arg(long, default_value_t = 2.5)]
    n: f64,
    /// Order of the fractional generator
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, default_value_t = 1024)]
    points: usize,
    #[arg(long, default_value_t = 64.0)]
    half_width: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Sample k_t on a grid (and the radial profile for fractional kernels)
    Kernel {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// s(α,d,p), K, σ_d, the Fujita exponent and the threshold constant
    Constants {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        d: u32,
    },
    /// Evaluate the moment criterion T ↦ W_T(0)/h⁻¹(T) for initial data
    Criterion {
        /// gauss, bump, singular (multiple of u_∞) or file (radial CSV)
        #[arg(long, default_value = "gauss")]
        profile: String,
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Exponent of the power source c·u^p
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        coeff: f64,
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the spectral solver from a configuration file
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep K over dimensions
    #[command(name = "sweep-K")]
    SweepK {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        /// a:b, a:b:step or a comma list
        #[arg(long)]
        d: String,
    },
    /// Sweep L over dimensions
    #[command(name = "sweep-L")]
    SweepL {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        /// a:b, a:b:step or a comma list
        #[arg(long)]
        d: String,
    },
    /// Classify runs of λ·u0 as decaying or blowing up and bracket the switch
    Dichotomy {
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        /// Comma-separated scale factors λ
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.3, 1.0, 3.0, 10.0])]
        scales: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        bisection_steps: usize,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every preset and report one PASS/FAIL line per criterion
    Selftest,
    /// Run or list named presets
    Preset {
        /// Preset name; omit to list the registry
        name: Option<String>,
        /// Parameter override, repeatable: --set key=value
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
}

fn kernel_config(k: &KernelArgs) -> config::KernelConfig {
    config::KernelConfig {
        kind: k.kernel.clone(),
        a: k.a,
        radius: k.radius,
        n: k.n,
        alpha: k.alpha,
        ..Default::default()
    }
}

fn grid_config(g: &GridArgs) -> config::GridConfig {
    config::GridConfig {
        dim: g.d,
        points: g.points,
        half_width: g.half_width,
    }
}

fn run_preset(
    preset: &presets::ExperimentPreset,
    params: &presets::Params,
    out: &OutDir,
) -> Result<bool> {
    let start = Instant::now();
    let dir = out.sub(preset.name)?;
    match preset.execute(params, &dir) {
        Ok(report) => {
            println!(
                "{} C{:<2} {} [{:.2} s]",
                if report.passed { "PASS" } else { "FAIL" },
                preset.criterion,
                preset.name,
                start.elapsed().as_secs_f64()
            );
            presets::print_report(&report);
            Ok(report.passed)
        }
        Err(e) => {
            println!("FAIL C{:<2} {}: {e:#}", preset.criterion, preset.name);
            Ok(false)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let out = OutDir::from_env()?;
    match cli.command {
        Command::Kernel {
            kernel,
            grid,
            t,
            config,
        } => {
            let cfg = ExperimentConfig {
                kernel: kernel_config(&kernel),
                grid: grid_config(&grid),
                ..Default::default()
            }
            .overlay(config.as_deref())?;
            commands::kernel(&cfg, t, &out)?;
        }
        Command::Constants { alpha, p, d } => commands::constants(alpha, p, d, &out)?,
        Command::Criterion {
            profile,
            path,
            mass,
            width,
            p,
            coeff,
            threshold,
            kernel,
            grid,
            config,
        } => {
            let mut cfg = ExperimentConfig {
                kernel: kernel_config(&kernel),
                grid: grid_config(&grid),
                ..Default::default()
            };
            cfg.initial = config::InitialConfig {
                profile,
                mass,
                width,
                path,
            };
            cfg.source.p = p;
            cfg.source.coeff = coeff;
            cfg.criterion.threshold = threshold;
            commands::criterion(&cfg.overlay(config.as_deref())?, &out)?;
        }
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::default().overlay_file(&config)?;
            commands::simulate(&cfg, &out)?;
        }
        Command::SweepK { alpha, p, d } => {
            commands::sweep(Quantity::K, alpha, p, &commands::parse_dims(&d)?, &out)?;
        }
        Command::SweepL { alpha, p, d } => {
            commands::sweep(Quantity::L, alpha, p, &commands::parse_dims(&d)?, &out)?;
        }
        Command::Dichotomy {
            p,
            scales,
            bisection_steps,
            t_end,
            config,
        } => {
            let mut cfg = ExperimentConfig::default();
            cfg.source.p = p;
            cfg.dichotomy = config::DichotomyConfig {
                scales,
                bisection_steps,
            };
            cfg.run.t_end = t_end;
            cfg.run.dt_init = 0.05;
            commands::dichotomy(&cfg.overlay(config.as_deref())?, &out)?;
        }
        Command::Selftest => {
            let mut failed = 0;
            for preset in presets::registry() {
                let params = presets::parse_overrides(&preset, &[])?;
                if !run_preset(&preset, &params, &out)? {
                    failed += 1;
                }
            }
            println!("{} of 12 criteria passed", 12 - failed);
            return Ok(failed == 0);
        }
        Command::Preset { name: None, .. } => {
            for p in presets::registry() {
                let bindings: Vec<String> =
                    p.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!(
                    "{:<22} C{:<2} {} [{}]",
                    p.name,
                    p.criterion,
                    p.summary,
                    bindings.join(", ")
                );
            }
        }
        Command::Preset {
            name: Some(name),
            overrides,
        } => {
            let preset = presets::find(&name)?;
            let params = presets::parse_overrides(&preset, &overrides)?;
            return run_preset(&preset, &params, &out);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
