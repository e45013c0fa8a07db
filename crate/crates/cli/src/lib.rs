//! Batch experiment runner for `ris-ho-core`: config parsing, experiment
//! dispatch, CSV/SVG artifacts and run manifests.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::table::{Column, CSV_SCHEMA_VERSION};

pub const TOOL_NAME: &str = "ris-ho-sim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{operation} failed: {source}")]
    Numerical {
        operation: &'static str,
        source: ris_ho_core::Error,
    },
    #[error("non-finite value in row {row}, column `{column}`")]
    NonFinite { row: usize, column: &'static str },
    #[error("plot rendering failed: {0}")]
    Plot(#[from] plot::PlotError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } | CliError::NonFinite { .. } | CliError::Plot(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", path.display())]))?;
    config::validate_config(&text).map_err(CliError::Validation)
}

/// Hex SHA-256 of the normalized config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub config: String,
    pub csv_schema_version: u32,
    pub columns: Vec<Column>,
    pub rows: usize,
    pub artifacts: Vec<String>,
    pub summary: std::collections::BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub plots: bool,
}

/// Runs the experiment and writes `<experiment>.csv`, the optional
/// `<experiment>.svg` and `manifest.json` into `cfg.output_dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Manifest, CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let out = experiments::run_experiment(cfg)?;
    let name = cfg.experiment.as_str();
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;

    let csv_text = out.table.to_csv();
    let mut artifacts = vec![format!("{name}.csv")];
    let csv_path = dir.join(&artifacts[0]);
    std::fs::write(&csv_path, &csv_text).map_err(io_err(&csv_path))?;
    if opts.plots && cfg.plots {
        if let Some(svg) = plot::render(cfg.experiment, &csv_text)? {
            let svg_name = format!("{name}.svg");
            let svg_path = dir.join(&svg_name);
            std::fs::write(&svg_path, svg).map_err(io_err(&svg_path))?;
            artifacts.push(svg_name);
        }
    }
    let manifest = Manifest {
        tool: TOOL_NAME,
        version: VERSION,
        experiment: name,
        seed: cfg.seed,
        config_sha256: config_hash(cfg),
        config: cfg.to_toml(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        columns: out.table.columns.clone(),
        rows: out.table.rows.len(),
        artifacts,
        summary: out.summary,
        notes: out.notes,
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    };
    let manifest_path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))?;
    Ok(manifest)
}
