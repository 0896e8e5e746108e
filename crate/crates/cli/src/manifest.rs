//! Run manifest: tool version, config hash and wall-clock per stage.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub parallel: bool,
    pub stages: Vec<Stage>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: String) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            parallel: hartree::par::is_parallel(),
            stages: vec![],
        }
    }

    /// Run `f` as a named stage and record its wall-clock time.
    pub fn stage<T>(&mut self, name: impl Into<String>, f: impl FnOnce() -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        let out = f();
        self.stages.push(Stage { name: name.into(), seconds: t.elapsed().as_secs_f64(), ok: out.is_ok() });
        out
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(dir.join("manifest.toml"), text)?;
        Ok(())
    }
}
