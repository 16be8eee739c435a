//! Deterministic output writers: CSV with fixed float formatting, JSON
//! exports, and the per-command manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;

/// 17 significant digits; identical configs and seeds give byte-identical
/// files.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "config error: {m}"),
            CmdError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CmdError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<bipolaron::Error> for CmdError {
    fn from(e: bipolaron::Error) -> Self {
        CmdError::Numerical(e.to_string())
    }
}

impl From<crate::config::ConfigError> for CmdError {
    fn from(e: crate::config::ConfigError) -> Self {
        CmdError::Config(e.0)
    }
}

/// Collects output files for one command run and writes the manifest.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CmdError> {
        fs::create_dir_all(dir)
            .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write_text(&mut self, name: &str, content: &str) -> Result<PathBuf, CmdError> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path)
            .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(content.as_bytes())
            .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CmdError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CmdError::Io(format!("serialization: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Write `<command>_manifest.json`; every output is reproducible from
    /// the echoed config plus the seed.
    pub fn write_manifest(
        &mut self,
        command: &str,
        config: &RunConfig,
        seed: u64,
        threads: Option<usize>,
        wall_time_ms: u128,
    ) -> Result<(), CmdError> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            seed: u64,
            threads: Option<usize>,
            versions: Versions,
            wall_time_ms: u128,
            outputs: Vec<String>,
            config: &'a RunConfig,
        }
        #[derive(Serialize)]
        struct Versions {
            bipolaron: &'static str,
        }
        let manifest = Manifest {
            command,
            seed,
            threads,
            versions: Versions {
                bipolaron: env!("CARGO_PKG_VERSION"),
            },
            wall_time_ms,
            outputs: self.written.clone(),
            config,
        };
        self.write_json(&format!("{command}_manifest.json"), &manifest)?;
        Ok(())
    }
}

/// Build a CSV from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Filename-safe label for a temperature in microkelvin.
pub fn temperature_label(t_uk: f64) -> String {
    format!("{t_uk}").replace('.', "p").replace('-', "m")
}
