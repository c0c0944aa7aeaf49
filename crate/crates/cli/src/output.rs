use std::path::PathBuf;

use anyhow::{Context, Result};
use nonlocal_blowup::csvio::CsvTable;

/// Environment variable naming the directory artifacts are written to.
pub const OUT_DIR_VAR: &str = "NLBLOW_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "nlblow-out";

#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn from_env() -> Result<Self> {
        let root = std::env::var_os(OUT_DIR_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|| DEFAULT_OUT_DIR.into());
        Self::at(root)
    }

    pub fn at(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root })
    }

    pub fn sub(&self, name: &str) -> Result<Self> {
        Self::at(self.root.join(name))
    }

    pub fn table(&self, name: &str, table: &CsvTable) -> Result<PathBuf> {
        let path = self.root.join(name);
        table
            .write(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
