//! `taskmarket panel generate|estimate`: synthetic panel emission and
//! specification-driven estimation with the derived-instrument variants.

use std::path::{Path, PathBuf};

use taskmarket::econ::{estimate_spec, DesignSpec, EstimateResult, InstrumentSpec, PanelDataset};
use taskmarket::error::EconError;
use taskmarket::metrics::{lag_series, leave_one_out_mean};
use taskmarket::synth::generate_panel;

use crate::config::{load_config, EstimationEntry, Variant};
use crate::output::{results_csv, write_atomic, ResultRow};
use crate::CliError;

pub fn generate(config_path: &Path, out_dir: Option<PathBuf>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let economy = config
        .economy
        .as_ref()
        .ok_or_else(|| CliError::usage("config is missing the `economy` section"))?;
    let synth = config
        .panel
        .as_ref()
        .and_then(|p| p.synth.as_ref())
        .ok_or_else(|| CliError::usage("config is missing the `panel.synth` section"))?;

    let (panel, manifest) = generate_panel(synth, economy)
        .map_err(|e| CliError::runtime(format!("generation failed: {e}")))?;

    let dir = out_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("create {}: {e}", dir.display())))?;
    let csv = panel
        .to_csv_string()
        .map_err(|e| CliError::runtime(format!("panel csv: {e}")))?;
    write_atomic(&dir.join("panel.csv"), csv.as_bytes())?;
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::runtime(format!("manifest: {e}")))?
        + "\n";
    write_atomic(&dir.join("manifest.json"), manifest_json.as_bytes())?;
    eprintln!(
        "panel: {} rows -> {}",
        panel.n_rows(),
        dir.display()
    );
    Ok(())
}

fn map_econ_error(e: EconError) -> CliError {
    match e {
        EconError::UnknownColumn(_) | EconError::OutcomeAmongRegressors(_) => {
            CliError::usage(e.to_string())
        }
        other => CliError::runtime(other.to_string()),
    }
}

/// Builds the leave-one-out group-mean column of `source` and registers it
/// as `<source>_loo`; singleton groups are missing.
fn add_loo_column(
    panel: &mut PanelDataset,
    source: &str,
    group_columns: &[String],
) -> Result<String, CliError> {
    let values = panel.column(source).map_err(map_econ_error)?.to_vec();
    let groups: Vec<Vec<i64>> = group_columns
        .iter()
        .map(|name| panel.factor(name).map_err(map_econ_error))
        .collect::<Result<_, _>>()?;
    let rows: Vec<(Vec<i64>, usize, f64)> = (0..panel.n_rows())
        .map(|row| {
            (
                groups.iter().map(|g| g[row]).collect(),
                row,
                values[row],
            )
        })
        .collect();
    let instrument = leave_one_out_mean(&rows)
        .map_err(|e| CliError::runtime(format!("leave-one-out instrument: {e}")))?;
    let name = format!("{source}_loo");
    panel
        .add_column(
            &name,
            instrument
                .into_iter()
                .map(|(_, _, v)| v.unwrap_or(f64::NAN))
                .collect(),
        )
        .map_err(map_econ_error)?;
    Ok(name)
}

/// Builds lagged columns `<source>_lag<k>` keyed by (firm, year).
fn add_lag_columns(
    panel: &mut PanelDataset,
    source: &str,
    lags: &[u32],
) -> Result<Vec<String>, CliError> {
    let values = panel.column(source).map_err(map_econ_error)?.to_vec();
    let rows: Vec<(i64, i64, f64)> = (0..panel.n_rows())
        .map(|row| (panel.firm[row], panel.year[row], values[row]))
        .collect();
    let mut names = Vec::new();
    for &lag in lags {
        let lagged = lag_series(&rows, lag)
            .map_err(|e| CliError::runtime(format!("lagged instrument: {e}")))?;
        let name = format!("{source}_lag{lag}");
        panel
            .add_column(
                &name,
                lagged.into_iter().map(|(_, _, v)| v.unwrap_or(f64::NAN)).collect(),
            )
            .map_err(map_econ_error)?;
        names.push(name);
    }
    Ok(names)
}

fn push_rows(rows: &mut Vec<ResultRow>, spec_name: &str, model: &str, result: &EstimateResult) {
    for term in &result.terms {
        rows.push(ResultRow {
            spec: spec_name.to_string(),
            model: model.to_string(),
            term: term.term.clone(),
            coefficient: term.coefficient,
            se: term.se,
            stars: term.stars().to_string(),
            n: result.n_used,
            r2_within: result.r2_within,
            first_stage_f: result.first_stage_f,
            weak_instrument: result.weak_instrument,
            dropped_rows: result.dropped_rows,
        });
    }
}

fn run_entry(
    panel: &mut PanelDataset,
    entry: &EstimationEntry,
    rows: &mut Vec<ResultRow>,
) -> Result<(), CliError> {
    let base = DesignSpec {
        name: entry.name.clone(),
        outcome: entry.outcome.clone(),
        regressors: entry.regressors.clone(),
        fe_factors: entry.fe_factors.clone(),
        cluster: entry.cluster.clone(),
        instruments: entry.instruments.clone(),
    };
    for variant in &entry.variants {
        let spec = match variant {
            Variant::Ols => DesignSpec {
                instruments: entry.instruments.clone(),
                ..base.clone()
            },
            Variant::IvLoo => {
                let name = add_loo_column(panel, &entry.endogenous, &entry.loo_group)?;
                DesignSpec {
                    instruments: Some(InstrumentSpec {
                        endogenous: entry.endogenous.clone(),
                        instruments: vec![name],
                    }),
                    ..base.clone()
                }
            }
            Variant::IvLagged => {
                let names = add_lag_columns(panel, &entry.endogenous, &entry.lags)?;
                DesignSpec {
                    instruments: Some(InstrumentSpec {
                        endogenous: entry.endogenous.clone(),
                        instruments: names,
                    }),
                    ..base.clone()
                }
            }
        };
        let result = estimate_spec(panel, &spec).map_err(map_econ_error)?;
        push_rows(rows, &entry.name, variant.label(), &result);
    }
    Ok(())
}

pub fn estimate(
    config_path: &Path,
    panel_path: &Path,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let entries = config
        .panel
        .as_ref()
        .map(|p| p.estimations.clone())
        .unwrap_or_default();
    if entries.is_empty() {
        return Err(CliError::usage(
            "config has no `panel.estimations` entries to run",
        ));
    }
    let mut panel = PanelDataset::read_csv_path(panel_path)
        .map_err(|e| CliError::usage(format!("panel {}: {e}", panel_path.display())))?;

    let mut rows = Vec::new();
    for entry in &entries {
        run_entry(&mut panel, entry, &mut rows)?;
    }

    let body = results_csv(&rows);
    match out {
        Some(path) => write_atomic(&path, body.as_bytes())?,
        None => print!("{body}"),
    }
    eprintln!("estimated {} specification variants", rows.len());
    Ok(())
}
