//! Experiment configuration: a TOML document with optional sections
//! `[kernel]`, `[source]`, `[grid]`, `[initial]`, `[run]`, `[criterion]`
//! and `[dichotomy]`. Every key has a default, so a file only lists what
//! it changes. Flags build the same document; a `--config` file is merged
//! over it key by key.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nonlocal_blowup::blowup::{self, InitialData};
use nonlocal_blowup::csvio::read_profile;
use nonlocal_blowup::solver::SimConfig;
use nonlocal_blowup::stationary::SingularSolution;
use nonlocal_blowup::{
    Dimension, Grid, GridFunction, KernelKind, KernelSpec, Nonlinearity, RadialProfile,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    /// gaussian | bump | heavy_tail | fractional
    pub kind: String,
    pub a: f64,
    pub radius: f64,
    pub n: f64,
    pub alpha: f64,
    pub coeff: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: "gaussian".into(),
            a: 1.0,
            radius: 2.0,
            n: 2.5,
            alpha: 2.0,
            coeff: 1.0,
        }
    }
}

impl KernelConfig {
    pub fn build(&self, d: u32) -> Result<KernelSpec> {
        let dim = Dimension::new(d)?;
        Ok(match self.kind.as_str() {
            "gaussian" => KernelSpec::gaussian_like(dim, self.a)?,
            "bump" => KernelSpec::compact_bump(dim, self.radius)?,
            "heavy_tail" => KernelSpec::heavy_tail(dim, self.n)?,
            "fractional" => KernelSpec::pure_fractional_scaled(dim, self.alpha, self.coeff)?,
            other => {
                bail!("unknown kernel kind '{other}' (gaussian, bump, heavy_tail, fractional)")
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// power | power_sum | exponential
    pub kind: String,
    pub coeff: f64,
    pub p: f64,
    /// `[coefficient, exponent]` pairs for `power_sum`.
    pub terms: Vec<[f64; 2]>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            kind: "power".into(),
            coeff: 1.0,
            p: 2.0,
            terms: Vec::new(),
        }
    }
}

impl SourceConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        Ok(match self.kind.as_str() {
            "power" => Nonlinearity::power(self.coeff, self.p)?,
            "power_sum" => {
                Nonlinearity::power_sum(self.terms.iter().map(|t| (t[0], t[1])).collect())?
            }
            "exponential" => Nonlinearity::exponential(self.coeff)?,
            other => bail!("unknown source kind '{other}' (power, power_sum, exponential)"),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: u32,
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            points: 1024,
            half_width: 64.0,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Ok(Grid::new(self.dim as usize, self.points, self.half_width)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// gauss | bump | singular | file
    pub profile: String,
    /// Total mass for gauss and bump; multiple of `u_∞` for singular; a
    /// plain factor for file profiles.
    pub mass: f64,
    pub width: f64,
    /// Radial profile CSV with columns `r` and `u`.
    pub path: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            profile: "gauss".into(),
            mass: 1.0,
            width: 1.0,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub u_max: f64,
    pub moment_targets: Vec<f64>,
    pub max_enlargements: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt_init: 1e-2,
            dt_min: 1e-12,
            u_max: 1e8,
            moment_targets: Vec::new(),
            max_enlargements: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct CriterionConfig {
    pub threshold: f64,
    /// `[lo, hi, n]` log-spaced; empty means the default extendable grid.
    pub t_grid: Vec<f64>,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            t_grid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyConfig {
    pub scales: Vec<f64>,
    pub bisection_steps: usize,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        Self {
            scales: vec![0.1, 0.3, 1.0, 3.0, 10.0],
            bisection_steps: 3,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelConfig,
    pub source: SourceConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub run: RunConfig,
    pub criterion: CriterionConfig,
    pub dichotomy: DichotomyConfig,
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl ExperimentConfig {
    /// Overlay the keys present in the file at `path` onto `self`.
    pub fn overlay_file(self, path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let over: toml::Value =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let mut base = toml::Value::try_from(&self)?;
        merge(&mut base, over);
        base.try_into()
            .with_context(|| format!("invalid configuration in {}", path.display()))
    }

    pub fn overlay(self, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => self.overlay_file(p),
            None => Ok(self),
        }
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        self.kernel.build(self.grid.dim)
    }

    pub fn grid_function(&self) -> Result<GridFunction> {
        let grid = self.grid.build()?;
        let init = &self.initial;
        let w = init.width;
        if !(w > 0.0) {
            bail!("initial width must be positive, got {w}");
        }
        let r2 = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1];
        let raw = match init.profile.as_str() {
            "gauss" => GridFunction::from_fn(grid, |x| (-r2(x) / (2.0 * w * w)).exp())?,
            "bump" => GridFunction::from_fn(grid, |x| (1.0 - r2(x) / (w * w)).max(0.0).powi(2))?,
            "file" => {
                let (r, u) = self.profile_table()?;
                let lerp = |x: f64| {
                    let i = r.partition_point(|&ri| ri <= x);
                    if i == 0 {
                        u[0]
                    } else if i == r.len() {
                        0.0
                    } else {
                        let w = (x - r[i - 1]) / (r[i] - r[i - 1]);
                        u[i - 1] + w * (u[i] - u[i - 1])
                    }
                };
                return Ok(GridFunction::from_fn(grid, |x| {
                    init.mass * lerp(r2(x).sqrt())
                })?);
            }
            "singular" => bail!(
                "singular data is unbounded; use it with the fractional kernel (radial route)"
            ),
            other => bail!("unknown initial profile '{other}' (gauss, bump, singular, file)"),
        };
        let mass = raw.mass();
        if !(mass > 0.0) {
            bail!(
                "initial profile vanishes on the grid (width {w} vs spacing {})",
                grid.spacing()
            );
        }
        Ok(raw.scaled(init.mass / mass)?)
    }

    /// The `(r, u)` columns of the profile file, sorted by `r`.
    fn profile_table(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let path = self
            .initial
            .path
            .as_ref()
            .context("profile 'file' needs initial.path (--path)")?;
        let (r, u) = read_profile(path)?;
        if r.is_empty() || r.windows(2).any(|w| !(w[1] > w[0])) || r[0] < 0.0 {
            bail!(
                "{}: r must be nonnegative and strictly increasing",
                path.display()
            );
        }
        Ok((r, u))
    }

    /// Radial profiles from a file or the singular stationary solution.
    pub fn radial_profile(&self) -> Result<RadialProfile> {
        let dim = Dimension::new(self.grid.dim)?;
        match self.initial.profile.as_str() {
            "file" => {
                // the radial type works in ln r, so a sample at the origin is dropped
                let (r, u): (Vec<f64>, Vec<f64>) = {
                    let (r, u) = self.profile_table()?;
                    r.into_iter().zip(u).filter(|(r, _)| *r > 0.0).unzip()
                };
                Ok(RadialProfile::new(dim, r, u)?.scaled(self.initial.mass)?)
            }
            "singular" => {
                let Some((_, p)) = self.source.build()?.power_parameters() else {
                    bail!("the singular profile needs a power source");
                };
                let sol =
                    SingularSolution::new(self.kernel().map(|k| k.alpha_effective())?, dim, p)?;
                Ok(sol
                    .profile(RadialProfile::log_radii(1e-4, 1e4, 801))?
                    .scaled(self.initial.mass)?)
            }
            other => bail!("profile '{other}' has no radial form"),
        }
    }

    /// Radial data go through the radial route when the generator is the
    /// pure fractional one; everything else is sampled on the grid.
    pub fn initial_data(&self) -> Result<InitialData> {
        let radial = matches!(self.initial.profile.as_str(), "file" | "singular");
        if radial && matches!(self.kernel()?.kind(), KernelKind::PureFractional { .. }) {
            return Ok(InitialData::Radial(self.radial_profile()?));
        }
        Ok(InitialData::Grid(self.grid_function()?))
    }

    pub fn t_grid(&self) -> Result<Option<Vec<f64>>> {
        match self.criterion.t_grid.as_slice() {
            [] => Ok(None),
            [lo, hi, n] if *lo > 0.0 && hi > lo && *n >= 2.0 => {
                Ok(Some(blowup::log_spaced(*lo, *hi, *n as usize)))
            }
            other => bail!(
                "criterion.t_grid must be [lo, hi, n] with 0 < lo < hi and n ≥ 2, got {other:?}"
            ),
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let r = &self.run;
        let mut cfg = SimConfig::new(self.kernel()?, self.source.build()?, r.t_end);
        cfg.dt_init = r.dt_init;
        cfg.dt_min = r.dt_min;
        cfg.u_max = r.u_max;
        cfg.moment_targets = r.moment_targets.clone();
        cfg.max_enlargements = r.max_enlargements;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(
            toml::from_str::<ExperimentConfig>("").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn overlay_keeps_unlisted_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[source]\np = 3.0\n[grid]\npoints = 256\n").unwrap();
        let mut base = ExperimentConfig::default();
        base.source.coeff = 2.0;
        let merged = base.overlay_file(&path).unwrap();
        assert_eq!(merged.source.p, 3.0);
        assert_eq!(merged.source.coeff, 2.0);
        assert_eq!(merged.grid.points, 256);
        assert_eq!(merged.grid.half_width, 64.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[grid]\npoint = 3\n").is_err());
        assert!(toml::from_str::<ExperimentConfig>("[kernal]\n").is_err());
    }

    #[test]
    fn gauss_profile_carries_the_requested_mass() {
        let mut c = ExperimentConfig::default();
        c.initial.mass = 7.0;
        let u = c.grid_function().unwrap();
        assert!((u.mass() - 7.0).abs() < 1e-12);
    }
}
