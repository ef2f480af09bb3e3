//! `taskmarket metrics ...`: measurement operations over plain CSV files.
//! Each operation appends derived columns and writes the table back out.

use std::collections::BTreeMap;
use std::path::Path;

use taskmarket::metrics::{
    hhi, lag_series, leave_one_out_mean, task_scores, PostingCounts, TaskWeights, winsorize,
};
use taskmarket::model::OccupationKind;
use taskmarket::numfmt::fmt_sig;

use crate::output::write_atomic;
use crate::CliError;

struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| CliError::usage(format!("bad csv header: {e}")))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::usage(format!("bad csv row: {e}")))?;
            rows.push(record.iter().map(|s| s.to_string()).collect());
        }
        Ok(Self { header, rows })
    }

    fn column_index(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::usage(format!("column {name:?} not found in input")))
    }

    fn numeric_column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .map(|row| {
                let raw = row.get(idx).map(|s| s.trim()).unwrap_or("");
                raw.parse::<f64>()
                    .map_err(|_| CliError::usage(format!("bad number {raw:?} in column {name:?}")))
            })
            .collect()
    }

    fn string_column(&self, name: &str) -> Result<Vec<String>, CliError> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|row| row[idx].clone()).collect())
    }

    fn push_column(&mut self, name: &str, values: Vec<String>) {
        self.header.push(name.to_string());
        for (row, value) in self.rows.iter_mut().zip(values) {
            row.push(value);
        }
    }

    fn render(&self) -> String {
        let quote = |f: &str| {
            if f.contains(',') || f.contains('"') || f.contains('\n') {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.to_string()
            }
        };
        let mut lines = vec![self.header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",")];
        for row in &self.rows {
            lines.push(row.iter().map(|f| quote(f)).collect::<Vec<_>>().join(","));
        }
        lines.join("\n") + "\n"
    }

    fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        let body = self.render();
        match out {
            Some(path) => write_atomic(path, body.as_bytes()),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

fn load_weights(config: Option<&Path>) -> Result<TaskWeights, CliError> {
    let weights = match config {
        Some(path) => crate::config::load_config(path)?
            .metrics
            .and_then(|m| m.weights)
            .unwrap_or_default(),
        None => TaskWeights::default(),
    };
    weights
        .validate()
        .map_err(|e| CliError::usage(format!("task weights: {e}")))?;
    Ok(weights)
}

/// Appends score_routine / score_abstract / score_manual computed from the
/// per-occupation count columns (named by kind label).
pub fn task_score_cmd(input: &Path, out: Option<&Path>, config: Option<&Path>) -> Result<(), CliError> {
    let mut table = CsvTable::read(input)?;
    let weights = load_weights(config)?;
    let mut count_cols: BTreeMap<OccupationKind, Vec<f64>> = BTreeMap::new();
    for kind in OccupationKind::ALL {
        if table.column_index(kind.label()).is_ok() {
            count_cols.insert(kind, table.numeric_column(kind.label())?);
        }
    }
    if count_cols.is_empty() {
        return Err(CliError::usage(
            "input needs at least one of the count columns phys, aux, tech, prof, mgmt",
        ));
    }
    let n = table.rows.len();
    let mut routine = Vec::with_capacity(n);
    let mut abstract_ = Vec::with_capacity(n);
    let mut manual = Vec::with_capacity(n);
    for row in 0..n {
        let counts = PostingCounts {
            counts: count_cols
                .iter()
                .map(|(kind, col)| {
                    let v = col[row];
                    if v < 0.0 || v.fract() != 0.0 {
                        Err(CliError::usage(format!(
                            "count for {kind} in row {row} is not a nonnegative integer: {v}"
                        )))
                    } else {
                        Ok((*kind, v as u64))
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        let scores = task_scores(&weights, &counts)
            .map_err(|e| CliError::runtime(format!("row {row}: {e}")))?;
        routine.push(fmt_sig(scores.routine));
        abstract_.push(fmt_sig(scores.abstract_));
        manual.push(fmt_sig(scores.manual));
    }
    table.push_column("score_routine", routine);
    table.push_column("score_abstract", abstract_);
    table.push_column("score_manual", manual);
    table.emit(out)
}

/// Appends an `hhi` column: the sum of squared values of the listed share
/// columns per row.
pub fn hhi_cmd(input: &Path, columns: &str, out: Option<&Path>) -> Result<(), CliError> {
    let mut table = CsvTable::read(input)?;
    let names: Vec<&str> = columns.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::usage("--columns must list at least one column"));
    }
    let cols: Vec<Vec<f64>> = names
        .iter()
        .map(|name| table.numeric_column(name))
        .collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let shares: Vec<f64> = cols.iter().map(|c| c[row]).collect();
        let value = hhi(&shares).map_err(|e| CliError::runtime(format!("row {row}: {e}")))?;
        values.push(fmt_sig(value));
    }
    table.push_column("hhi", values);
    table.emit(out)
}

/// Appends `<column>_winsorized` clamped at the configured percentiles.
pub fn winsorize_cmd(
    input: &Path,
    column: &str,
    p_lo: Option<f64>,
    p_hi: Option<f64>,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<(), CliError> {
    let mut table = CsvTable::read(input)?;
    let section = match config {
        Some(path) => crate::config::load_config(path)?.metrics,
        None => None,
    };
    let lo = p_lo.or(section.as_ref().map(|m| m.winsor_lo)).unwrap_or(0.01);
    let hi = p_hi.or(section.as_ref().map(|m| m.winsor_hi)).unwrap_or(0.99);
    let values = table.numeric_column(column)?;
    let clamped = winsorize(&values, lo, hi)
        .map_err(|e| CliError::usage(format!("winsorize: {e}")))?;
    table.push_column(
        &format!("{column}_winsorized"),
        clamped.into_iter().map(fmt_sig).collect(),
    );
    table.emit(out)
}

/// Appends `<value>_loo`: the group mean excluding the row itself; empty
/// for singleton groups.
pub fn loo_mean_cmd(
    input: &Path,
    group: &str,
    unit: &str,
    value: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut table = CsvTable::read(input)?;
    let group_names: Vec<&str> = group.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if group_names.is_empty() {
        return Err(CliError::usage("--group must list at least one column"));
    }
    let group_cols: Vec<Vec<String>> = group_names
        .iter()
        .map(|name| table.string_column(name))
        .collect::<Result<_, _>>()?;
    let units = table.string_column(unit)?;
    let values = table.numeric_column(value)?;
    let rows: Vec<(Vec<String>, String, f64)> = (0..table.rows.len())
        .map(|row| {
            (
                group_cols.iter().map(|c| c[row].clone()).collect(),
                units[row].clone(),
                values[row],
            )
        })
        .collect();
    let instruments = leave_one_out_mean(&rows)
        .map_err(|e| CliError::usage(format!("leave-one-out: {e}")))?;
    table.push_column(
        &format!("{value}_loo"),
        instruments
            .into_iter()
            .map(|(_, _, v)| v.map(fmt_sig).unwrap_or_default())
            .collect(),
    );
    table.emit(out)
}

/// Appends `<value>_lag<k>`: the unit's value `k` periods back; empty when
/// that period is missing.
pub fn lag_cmd(
    input: &Path,
    unit: &str,
    period: &str,
    value: &str,
    lag: u32,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut table = CsvTable::read(input)?;
    let units = table.string_column(unit)?;
    let periods = table.numeric_column(period)?;
    let values = table.numeric_column(value)?;
    let rows: Vec<(String, i64, f64)> = (0..table.rows.len())
        .map(|row| (units[row].clone(), periods[row] as i64, values[row]))
        .collect();
    let lagged = lag_series(&rows, lag).map_err(|e| CliError::usage(format!("lag: {e}")))?;
    table.push_column(
        &format!("{value}_lag{lag}"),
        lagged
            .into_iter()
            .map(|(_, _, v)| v.map(fmt_sig).unwrap_or_default())
            .collect(),
    );
    table.emit(out)
}
