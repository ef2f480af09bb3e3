//! File emission: atomic writes and the CSV layouts of each artifact.

use std::path::Path;

use taskmarket::cutoff::{Prop1Report, SweepTable};
use taskmarket::model::{EconomyConfig, OccupationKind};
use taskmarket::numfmt::fmt_sig;

use crate::CliError;

/// Writes via a sibling temp file and a rename, so readers never observe a
/// half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{ext}.tmp"),
        None => "tmp".to_string(),
    });
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::runtime(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::runtime(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields
        .iter()
        .map(|f| {
            if f.contains(',') || f.contains('"') || f.contains('\n') {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect();
    quoted.join(",")
}

fn opt_sig(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

/// Sweep CSV: capability, per-occupation cutoffs (empty when the construct
/// does not apply), per-executor masses, per-occupation hiring shares.
pub fn sweep_csv(econ: &EconomyConfig, table: &SweepTable) -> String {
    let kinds: Vec<OccupationKind> = econ.occupations_ordered().iter().map(|o| o.kind).collect();
    let mut header = vec!["theta".to_string()];
    header.extend(kinds.iter().map(|k| format!("cutoff_{k}")));
    header.extend(kinds.iter().map(|k| format!("mass_{k}")));
    header.push("mass_digital".to_string());
    header.extend(kinds.iter().map(|k| format!("share_{k}")));

    let mut lines = vec![csv_line(&header)];
    for row in &table.rows {
        let mut fields = vec![fmt_sig(row.theta)];
        for kind in &kinds {
            fields.push(opt_sig(row.cutoffs.get(kind).copied()));
        }
        for kind in &kinds {
            let mass = row
                .masses
                .get(&taskmarket::assignment::Executor::Labor(*kind))
                .copied()
                .unwrap_or(0.0);
            fields.push(fmt_sig(mass));
        }
        fields.push(fmt_sig(
            row.masses
                .get(&taskmarket::assignment::Executor::Digital)
                .copied()
                .unwrap_or(0.0),
        ));
        for kind in &kinds {
            fields.push(opt_sig(row.shares.get(kind).copied()));
        }
        lines.push(csv_line(&fields));
    }
    lines.join("\n") + "\n"
}

/// Verification report CSV, one row per draw.
pub fn prop1_csv(report: &Prop1Report) -> String {
    let mut lines = vec![csv_line(&[
        "draw".into(),
        "kept".into(),
        "reason".into(),
        "monotone_ok".into(),
        "max_deriv_rel_err".into(),
        "passed".into(),
    ])];
    for row in &report.rows {
        lines.push(csv_line(&[
            row.draw.to_string(),
            row.kept.to_string(),
            row.reason.clone(),
            row.monotone_ok.to_string(),
            opt_sig(row.max_rel_err),
            row.passed.to_string(),
        ]));
    }
    lines.join("\n") + "\n"
}

/// One estimation output row for `results.csv`.
pub struct ResultRow {
    pub spec: String,
    pub model: String,
    pub term: String,
    pub coefficient: f64,
    pub se: f64,
    pub stars: String,
    pub n: usize,
    pub r2_within: f64,
    pub first_stage_f: Option<f64>,
    pub weak_instrument: bool,
    pub dropped_rows: usize,
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut lines = vec![csv_line(&[
        "spec".into(),
        "model".into(),
        "term".into(),
        "coefficient".into(),
        "se".into(),
        "stars".into(),
        "n".into(),
        "r2_within".into(),
        "first_stage_f".into(),
        "weak_instrument".into(),
        "dropped_rows".into(),
    ])];
    for row in rows {
        lines.push(csv_line(&[
            row.spec.clone(),
            row.model.clone(),
            row.term.clone(),
            fmt_sig(row.coefficient),
            fmt_sig(row.se),
            row.stars.clone(),
            row.n.to_string(),
            fmt_sig(row.r2_within),
            opt_sig(row.first_stage_f),
            row.weak_instrument.to_string(),
            row.dropped_rows.to_string(),
        ]));
    }
    lines.join("\n") + "\n"
}
