//! `taskmarket verify-prop1`: Monte Carlo check that the task cutoff falls
//! as digital capability rises, with the analytic derivative validated
//! against finite differences.

use std::path::{Path, PathBuf};

use taskmarket::cutoff::verify_proposition1;

use crate::output::{prop1_csv, write_atomic};
use crate::CliError;

pub fn run(draws: usize, seed: u64, out_dir: Option<&Path>) -> Result<(), CliError> {
    let report = verify_proposition1(draws, seed);

    let dir = out_dir.map(|p| p.to_path_buf()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("create {}: {e}", dir.display())))?;
    write_atomic(&dir.join("prop1_report.csv"), prop1_csv(&report).as_bytes())?;

    if report.kept == 0 {
        eprintln!(
            "warning: no draw passed the regularity filter (draws = {}); \
             the check is vacuous",
            report.draws
        );
    }
    eprintln!(
        "proposition check: draws {} kept {} passed {} (seed {})",
        report.draws, report.kept, report.passed, report.seed
    );
    if report.all_kept_passed() {
        Ok(())
    } else {
        Err(CliError::runtime(format!(
            "{} of {} kept draws failed the monotonicity or derivative check",
            report.kept - report.passed,
            report.kept
        )))
    }
}
