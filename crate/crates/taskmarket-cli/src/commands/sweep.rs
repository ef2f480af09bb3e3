//! `taskmarket sweep`: capability sweep to CSV and SVG.

use std::path::{Path, PathBuf};

use taskmarket::cutoff::sweep_theta_with;

use crate::config::load_config;
use crate::output::{sweep_csv, write_atomic};
use crate::svg::sweep_svg;
use crate::CliError;

pub fn run(config_path: &Path, out_dir: Option<PathBuf>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let economy = config
        .economy
        .as_ref()
        .ok_or_else(|| CliError::usage("config is missing the `economy` section"))?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::usage("config is missing the `sweep` section"))?;
    let thetas = sweep.thetas.materialize()?;

    let table = sweep_theta_with(economy, &thetas, sweep.scan_points, sweep.tolerance)
        .map_err(|e| CliError::runtime(format!("sweep failed: {e}")))?;

    let dir = out_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("create {}: {e}", dir.display())))?;

    write_atomic(&dir.join("sweep.csv"), sweep_csv(economy, &table).as_bytes())?;
    write_atomic(&dir.join("sweep.svg"), sweep_svg(economy, &table).as_bytes())?;
    eprintln!(
        "sweep: {} capability levels -> {}",
        table.rows.len(),
        dir.display()
    );
    Ok(())
}
