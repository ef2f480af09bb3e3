//! Specification-driven estimation: listwise deletion, fixed-effect
//! absorption, least squares or 2SLS, and the requested covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::EconError;

use super::data::PanelDataset;
use super::fe::within_transform;
use super::iv::two_sls;
use super::ols::{classical_se, cluster_robust_se, ols};

/// Instrumenting plan: which regressor is endogenous and what instruments
/// identify it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentSpec {
    pub endogenous: String,
    pub instruments: Vec<String>,
}

/// One regression specification against a panel.
///
/// Regressor names may contain `*` to denote an elementwise product of
/// columns (an interaction term), e.g. `digital*large`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub name: String,
    pub outcome: String,
    pub regressors: Vec<String>,
    #[serde(default)]
    pub fe_factors: Vec<String>,
    #[serde(default)]
    pub cluster: Option<String>,
    #[serde(default)]
    pub instruments: Option<InstrumentSpec>,
}

/// A coefficient with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermEstimate {
    pub term: String,
    pub coefficient: f64,
    pub se: f64,
}

impl TermEstimate {
    /// Significance stars at 0.05 / 0.01 / 0.001 from a normal-approximation
    /// two-sided test.
    pub fn stars(&self) -> &'static str {
        if self.se <= 0.0 {
            return "";
        }
        let t = (self.coefficient / self.se).abs();
        if t >= 3.2905 {
            "***"
        } else if t >= 2.5758 {
            "**"
        } else if t >= 1.96 {
            "*"
        } else {
            ""
        }
    }
}

/// Estimation output for one specification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub name: String,
    pub terms: Vec<TermEstimate>,
    pub n_used: usize,
    pub r2_within: f64,
    pub demean_sweeps: usize,
    pub dropped_rows: usize,
    pub first_stage_f: Option<f64>,
    pub weak_instrument: bool,
}

impl EstimateResult {
    pub fn term(&self, name: &str) -> Option<&TermEstimate> {
        self.terms.iter().find(|t| t.term == name)
    }
}

/// Resolves a regressor name, multiplying columns across `*`.
fn resolve_column(panel: &PanelDataset, name: &str) -> Result<Vec<f64>, EconError> {
    let mut parts = name.split('*');
    let first = parts.next().expect("split yields at least one part").trim();
    let mut values = panel.column(first)?.to_vec();
    for part in parts {
        let other = panel.column(part.trim())?;
        for (v, o) in values.iter_mut().zip(other) {
            *v *= o;
        }
    }
    Ok(values)
}

/// Runs one specification: drops incomplete rows (with a count), absorbs
/// the fixed effects, then runs least squares or 2SLS with the requested
/// covariance estimator.
pub fn estimate_spec(panel: &PanelDataset, spec: &DesignSpec) -> Result<EstimateResult, EconError> {
    if spec.regressors.iter().any(|r| r == &spec.outcome) {
        return Err(EconError::OutcomeAmongRegressors(spec.outcome.clone()));
    }
    if let Some(iv) = &spec.instruments {
        if iv.instruments.is_empty() {
            return Err(EconError::NoInstruments);
        }
    }

    // Resolve every referenced column up front so unknown names fail fast.
    let outcome_full = resolve_column(panel, &spec.outcome)?;
    let regressors_full: Vec<Vec<f64>> = spec
        .regressors
        .iter()
        .map(|name| resolve_column(panel, name))
        .collect::<Result<_, _>>()?;
    let instruments_full: Vec<Vec<f64>> = match &spec.instruments {
        Some(iv) => {
            if !spec.regressors.iter().any(|r| r == &iv.endogenous) {
                return Err(EconError::UnknownColumn(format!(
                    "endogenous column {:?} must be listed among the regressors",
                    iv.endogenous
                )));
            }
            iv.instruments
                .iter()
                .map(|name| resolve_column(panel, name))
                .collect::<Result<_, _>>()?
        }
        None => Vec::new(),
    };
    let factors_full: Vec<Vec<i64>> = spec
        .fe_factors
        .iter()
        .map(|name| panel.factor(name))
        .collect::<Result<_, _>>()?;
    let cluster_full: Option<Vec<i64>> = spec
        .cluster
        .as_ref()
        .map(|name| panel.factor(name))
        .transpose()?;

    // Listwise deletion over every referenced numeric column.
    let n_all = panel.n_rows();
    let keep: Vec<usize> = (0..n_all)
        .filter(|&i| {
            !outcome_full[i].is_nan()
                && regressors_full.iter().all(|c| !c[i].is_nan())
                && instruments_full.iter().all(|c| !c[i].is_nan())
        })
        .collect();
    let dropped_rows = n_all - keep.len();
    if keep.is_empty() {
        return Err(EconError::EmptySample);
    }
    let take_f64 = |column: &[f64]| -> Vec<f64> { keep.iter().map(|&i| column[i]).collect() };
    let take_i64 = |column: &[i64]| -> Vec<i64> { keep.iter().map(|&i| column[i]).collect() };

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(1 + regressors_full.len() + instruments_full.len());
    columns.push(take_f64(&outcome_full));
    for c in &regressors_full {
        columns.push(take_f64(c));
    }
    for c in &instruments_full {
        columns.push(take_f64(c));
    }
    let factors: Vec<Vec<i64>> = factors_full.iter().map(|f| take_i64(f)).collect();
    let clusters = cluster_full.map(|c| take_i64(&c));

    let demean_sweeps = within_transform(&mut columns, &factors)?;

    let n = keep.len();
    let k = spec.regressors.len();
    let y = DVector::from_vec(columns[0].clone());
    let x = DMatrix::from_fn(n, k, |i, j| columns[1 + j][i]);

    let tss = y.dot(&y);
    let (coefficients, residuals, design_for_se, first_stage_f, weak_instrument) =
        match &spec.instruments {
            None => {
                let fit = ols(&x, &y)?;
                (fit.coefficients, fit.residuals, x.clone(), None, false)
            }
            Some(iv) => {
                let endog_pos = spec
                    .regressors
                    .iter()
                    .position(|r| r == &iv.endogenous)
                    .expect("presence checked above");
                let endogenous = DVector::from_vec(columns[1 + endog_pos].clone());
                let exog_cols: Vec<usize> = (0..k).filter(|&j| j != endog_pos).collect();
                let exogenous =
                    DMatrix::from_fn(n, exog_cols.len(), |i, j| columns[1 + exog_cols[j]][i]);
                let m = iv.instruments.len();
                let instruments = DMatrix::from_fn(n, m, |i, j| columns[1 + k + j][i]);
                let fit = two_sls(&y, &endogenous, &exogenous, &instruments)?;

                // Reorder [endog, exog...] back to the spec's regressor order.
                let mut coefficients = DVector::zeros(k);
                coefficients[endog_pos] = fit.coefficients[0];
                for (out_slot, &j) in exog_cols.iter().enumerate() {
                    coefficients[j] = fit.coefficients[1 + out_slot];
                }
                let mut design = DMatrix::zeros(n, k);
                design.set_column(endog_pos, &fit.projected_design.column(0).into_owned());
                for (out_slot, &j) in exog_cols.iter().enumerate() {
                    design.set_column(j, &fit.projected_design.column(1 + out_slot).into_owned());
                }
                (
                    coefficients,
                    fit.residuals,
                    design,
                    Some(fit.first_stage_f),
                    fit.weak_instrument,
                )
            }
        };

    let se = match &clusters {
        Some(labels) => cluster_robust_se(&design_for_se, &residuals, labels)?,
        None => classical_se(&design_for_se, &residuals)?,
    };

    let rss = residuals.dot(&residuals);
    let r2_within = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    Ok(EstimateResult {
        name: spec.name.clone(),
        terms: spec
            .regressors
            .iter()
            .enumerate()
            .map(|(j, term)| TermEstimate {
                term: term.clone(),
                coefficient: coefficients[j],
                se: se[j],
            })
            .collect(),
        n_used: n,
        r2_within,
        demean_sweeps,
        dropped_rows,
        first_stage_f,
        weak_instrument,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec(outcome: &str, regressors: &[&str], fe: &[&str]) -> DesignSpec {
        DesignSpec {
            name: "test".to_string(),
            outcome: outcome.to_string(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            fe_factors: fe.iter().map(|s| s.to_string()).collect(),
            cluster: None,
            instruments: None,
        }
    }

    fn random_panel(seed: u64, n: usize) -> PanelDataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let firms: Vec<i64> = (0..n as i64).collect();
        let years = vec![2020; n];
        let cities: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let industries: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let provinces: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut panel =
            PanelDataset::new(firms, years, cities, industries, provinces).unwrap();
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                0.7 * x1[i] - 0.3 * x2[i]
                    + 0.5 * panel.industry[i] as f64
                    + rng.gen_range(-0.05..0.05)
            })
            .collect();
        panel.add_column("x1", x1).unwrap();
        panel.add_column("x2", x2).unwrap();
        panel.add_column("y", y).unwrap();
        panel
    }

    #[test]
    fn within_equals_dummy_variable_ols() {
        // Oracle: explicit industry dummies in plain least squares.
        let panel = random_panel(41, 30);
        let result = estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry"])).unwrap();

        let n = panel.n_rows();
        let levels: Vec<i64> = {
            let mut l = panel.industry.clone();
            l.sort_unstable();
            l.dedup();
            l
        };
        let k = 2 + levels.len();
        let x = DMatrix::from_fn(n, k, |i, j| match j {
            0 => panel.column("x1").unwrap()[i],
            1 => panel.column("x2").unwrap()[i],
            _ => (panel.industry[i] == levels[j - 2]) as u8 as f64,
        });
        let y = DVector::from_vec(panel.column("y").unwrap().to_vec());
        let oracle = ols(&x, &y).unwrap();

        assert!((result.term("x1").unwrap().coefficient - oracle.coefficients[0]).abs() <= 1e-8);
        assert!((result.term("x2").unwrap().coefficient - oracle.coefficients[1]).abs() <= 1e-8);
    }

    #[test]
    fn zero_outcome_gives_zero_everything() {
        let mut panel = random_panel(42, 25);
        panel.add_column("zero", vec![0.0; 25]).unwrap();
        let result = estimate_spec(&panel, &spec("zero", &["x1"], &["industry"])).unwrap();
        assert!(result.term("x1").unwrap().coefficient.abs() <= 1e-12);
        assert_eq!(result.r2_within, 0.0);
    }

    #[test]
    fn constant_factor_changes_nothing() {
        let mut panel = random_panel(43, 30);
        panel.add_column("ones", vec![1.0; 30]).unwrap();
        let base = estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry"])).unwrap();
        let extra = estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry", "ones"])).unwrap();
        for term in ["x1", "x2"] {
            assert!(
                (base.term(term).unwrap().coefficient - extra.term(term).unwrap().coefficient)
                    .abs()
                    <= 1e-8
            );
        }
    }

    #[test]
    fn missing_rows_are_dropped_and_counted() {
        let mut panel = random_panel(44, 20);
        let mut x1 = panel.column("x1").unwrap().to_vec();
        x1[3] = f64::NAN;
        x1[7] = f64::NAN;
        panel.add_column("x1", x1).unwrap();
        let result = estimate_spec(&panel, &spec("y", &["x1"], &[])).unwrap();
        assert_eq!(result.dropped_rows, 2);
        assert_eq!(result.n_used, 18);
    }

    #[test]
    fn unknown_column_and_outcome_among_regressors() {
        let panel = random_panel(45, 20);
        assert!(matches!(
            estimate_spec(&panel, &spec("y", &["missing"], &[])),
            Err(EconError::UnknownColumn(_))
        ));
        assert!(matches!(
            estimate_spec(&panel, &spec("y", &["y"], &[])),
            Err(EconError::OutcomeAmongRegressors(_))
        ));
    }

    #[test]
    fn interaction_terms_multiply_columns() {
        let mut panel = random_panel(46, 40);
        let x1 = panel.column("x1").unwrap().to_vec();
        let x2 = panel.column("x2").unwrap().to_vec();
        let y: Vec<f64> = (0..40).map(|i| 2.0 * x1[i] * x2[i]).collect();
        panel.add_column("yi", y).unwrap();
        let result = estimate_spec(&panel, &spec("yi", &["x1*x2"], &[])).unwrap();
        assert!((result.term("x1*x2").unwrap().coefficient - 2.0).abs() <= 1e-8);
    }

    #[test]
    fn row_order_does_not_change_estimates() {
        let panel = random_panel(47, 60);
        let base = estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry", "city"])).unwrap();

        // Rebuild the panel with rows reversed.
        let n = panel.n_rows();
        let reorder: Vec<usize> = (0..n).rev().collect();
        let mut permuted = PanelDataset::new(
            reorder.iter().map(|&i| panel.firm[i]).collect(),
            reorder.iter().map(|&i| panel.year[i]).collect(),
            reorder.iter().map(|&i| panel.city[i]).collect(),
            reorder.iter().map(|&i| panel.industry[i]).collect(),
            reorder.iter().map(|&i| panel.province[i]).collect(),
        )
        .unwrap();
        for name in panel.column_names() {
            let values = panel.column(name).unwrap();
            permuted
                .add_column(name, reorder.iter().map(|&i| values[i]).collect())
                .unwrap();
        }
        let shuffled =
            estimate_spec(&permuted, &spec("y", &["x1", "x2"], &["industry", "city"])).unwrap();
        for term in ["x1", "x2"] {
            assert!(
                (base.term(term).unwrap().coefficient
                    - shuffled.term(term).unwrap().coefficient)
                    .abs()
                    <= 1e-9
            );
        }
    }

    #[test]
    fn planted_slope_recovered_with_fixed_effects() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(48);
        let n = 2000;
        let n_firms = 400;
        let firms: Vec<i64> = (0..n as i64).map(|i| i % n_firms).collect();
        let years: Vec<i64> = (0..n as i64).map(|i| 2016 + i / n_firms).collect();
        let industries: Vec<i64> = (0..n).map(|i| (firms[i] % 10) as i64).collect();
        let mut panel = PanelDataset::new(
            firms.clone(),
            years.clone(),
            vec![0; n],
            industries.clone(),
            vec![0; n],
        )
        .unwrap();
        let digital: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..5.0)).collect();
        let outcome: Vec<f64> = (0..n)
            .map(|i| {
                0.02 * digital[i]
                    + 0.05 * (years[i] - 2016) as f64
                    + 0.03 * industries[i] as f64
                    + 0.01 * rng.gen_range(-1.0..1.0)
            })
            .collect();
        panel.add_column("digital", digital).unwrap();
        panel.add_column("share_prof", outcome).unwrap();
        let result = estimate_spec(
            &panel,
            &spec("share_prof", &["digital"], &["year", "industry"]),
        )
        .unwrap();
        let term = result.term("digital").unwrap();
        assert!(
            (term.coefficient - 0.02).abs() <= 3.0 * term.se,
            "estimate {} +- {}",
            term.coefficient,
            term.se
        );
    }

    #[test]
    fn iv_spec_runs_and_matches_ols_when_instrument_is_regressor() {
        let mut panel = random_panel(49, 100);
        let x1 = panel.column("x1").unwrap().to_vec();
        panel.add_column("z", x1).unwrap();
        let mut iv_spec = spec("y", &["x1", "x2"], &["industry"]);
        iv_spec.instruments = Some(InstrumentSpec {
            endogenous: "x1".to_string(),
            instruments: vec!["z".to_string()],
        });
        let iv_result = estimate_spec(&panel, &iv_spec).unwrap();
        let ols_result = estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry"])).unwrap();
        assert!(
            (iv_result.term("x1").unwrap().coefficient
                - ols_result.term("x1").unwrap().coefficient)
                .abs()
                <= 1e-10
        );
        assert!(iv_result.first_stage_f.unwrap() > 10.0);
    }

    #[test]
    fn stars_thresholds() {
        let make = |coefficient: f64, se: f64| TermEstimate {
            term: "x".into(),
            coefficient,
            se,
        };
        assert_eq!(make(1.0, 1.0).stars(), "");
        assert_eq!(make(2.0, 1.0).stars(), "*");
        assert_eq!(make(2.8, 1.0).stars(), "**");
        assert_eq!(make(4.0, 1.0).stars(), "***");
    }
}
