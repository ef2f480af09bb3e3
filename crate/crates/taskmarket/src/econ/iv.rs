//! Two-stage least squares with a first-stage strength diagnostic.

use nalgebra::{DMatrix, DVector};

use crate::error::EconError;

use super::ols::ols;

/// Threshold on the first-stage F statistic below which the instrument set
/// is flagged (reported, never fatal).
pub const WEAK_INSTRUMENT_F: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct TwoSlsFit {
    /// Coefficients ordered `[endogenous, exogenous...]`.
    pub coefficients: DVector<f64>,
    /// Residuals against the actual (not fitted) regressors.
    pub residuals: DVector<f64>,
    /// The second-stage design `[fitted endogenous | exogenous]`, which is
    /// the regressor matrix for covariance computations.
    pub projected_design: DMatrix<f64>,
    /// Joint F of the excluded instruments in the first stage.
    pub first_stage_f: f64,
    pub weak_instrument: bool,
}

fn hcat(left: &DVector<f64>, right: &DMatrix<f64>) -> DMatrix<f64> {
    let n = left.len();
    let mut out = DMatrix::zeros(n, 1 + right.ncols());
    out.set_column(0, left);
    for j in 0..right.ncols() {
        out.set_column(1 + j, &right.column(j).into_owned());
    }
    out
}

/// 2SLS for one endogenous regressor: the first stage projects it on the
/// excluded instruments plus all exogenous regressors; the second stage
/// replaces it with the fitted value. Exactly identified systems reproduce
/// the direct IV estimator; an instrument equal to the regressor reproduces
/// plain least squares.
pub fn two_sls(
    y: &DVector<f64>,
    endogenous: &DVector<f64>,
    exogenous: &DMatrix<f64>,
    instruments: &DMatrix<f64>,
) -> Result<TwoSlsFit, EconError> {
    if instruments.ncols() == 0 {
        return Err(EconError::NoInstruments);
    }
    let n = y.len();
    let m = instruments.ncols();

    // First stage.
    let mut first_design = DMatrix::zeros(n, m + exogenous.ncols());
    for j in 0..m {
        first_design.set_column(j, &instruments.column(j).into_owned());
    }
    for j in 0..exogenous.ncols() {
        first_design.set_column(m + j, &exogenous.column(j).into_owned());
    }
    let first = ols(&first_design, endogenous)?;
    let fitted = &first_design * &first.coefficients;

    // Joint F of the excluded instruments: restricted model drops them.
    let rss_unrestricted = first.rss();
    let rss_restricted = if exogenous.ncols() == 0 {
        endogenous.dot(endogenous)
    } else {
        ols(exogenous, endogenous)?.rss()
    };
    let dof = (n.saturating_sub(first_design.ncols())).max(1) as f64;
    let first_stage_f = if rss_unrestricted > 0.0 {
        ((rss_restricted - rss_unrestricted) / m as f64) / (rss_unrestricted / dof)
    } else {
        f64::INFINITY
    };

    // Second stage.
    let projected_design = hcat(&fitted, exogenous);
    let second = ols(&projected_design, y)?;

    // Residuals use the actual endogenous column.
    let actual_design = hcat(endogenous, exogenous);
    let residuals = y - &actual_design * &second.coefficients;

    Ok(TwoSlsFit {
        coefficients: second.coefficients,
        residuals,
        projected_design,
        first_stage_f,
        weak_instrument: first_stage_f < WEAK_INSTRUMENT_F,
    })
}
