//! Measurement utilities: task-intensity scores over posting counts,
//! hiring concentration, winsorization, and the leave-one-out and lagged
//! instrument constructions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::OccupationKind;

/// Weight of one occupation group on the three task dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskWeightRow {
    pub routine: f64,
    #[serde(rename = "abstract")]
    pub abstract_: f64,
    pub manual: f64,
}

/// Per-group task weights. The default maps the qualitative plus/minus
/// grid to 1/0 with the crosswalk: management, professional, and technical
/// groups load on abstract work; auxiliary on routine (clerical) work; and
/// physical on the machine-operator pattern (routine and manual).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskWeights {
    pub per_group: BTreeMap<OccupationKind, TaskWeightRow>,
}

impl Default for TaskWeights {
    fn default() -> Self {
        let abstract_row = TaskWeightRow {
            routine: 0.0,
            abstract_: 1.0,
            manual: 0.0,
        };
        let clerical_row = TaskWeightRow {
            routine: 1.0,
            abstract_: 0.0,
            manual: 0.0,
        };
        let operator_row = TaskWeightRow {
            routine: 1.0,
            abstract_: 0.0,
            manual: 1.0,
        };
        let mut per_group = BTreeMap::new();
        per_group.insert(OccupationKind::Mgmt, abstract_row);
        per_group.insert(OccupationKind::Prof, abstract_row);
        per_group.insert(OccupationKind::Tech, abstract_row);
        per_group.insert(OccupationKind::Aux, clerical_row);
        per_group.insert(OccupationKind::Phys, operator_row);
        Self { per_group }
    }
}

impl TaskWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (group, row) in &self.per_group {
            for weight in [row.routine, row.abstract_, row.manual] {
                if !weight.is_finite() || weight < 0.0 {
                    return Err(MetricsError::NegativeWeight {
                        group: *group,
                        weight,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Job posting counts per occupation group for one firm-year.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostingCounts {
    pub counts: BTreeMap<OccupationKind, u64>,
}

impl PostingCounts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Scores on the three task dimensions for one firm-year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskScores {
    pub routine: f64,
    #[serde(rename = "abstract")]
    pub abstract_: f64,
    pub manual: f64,
}

/// Log of one plus the weighted posting count for a single task dimension.
///
/// `weights` must cover every group present in `counts`; weights must be
/// nonnegative.
pub fn task_score(
    weights: &BTreeMap<OccupationKind, f64>,
    counts: &PostingCounts,
) -> Result<f64, MetricsError> {
    let mut weighted = 0.0;
    for (group, &count) in &counts.counts {
        let weight = *weights
            .get(group)
            .ok_or(MetricsError::MissingWeight(*group))?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(MetricsError::NegativeWeight {
                group: *group,
                weight,
            });
        }
        weighted += weight * count as f64;
    }
    Ok((1.0 + weighted).ln())
}

/// All three task scores under a weight table.
pub fn task_scores(weights: &TaskWeights, counts: &PostingCounts) -> Result<TaskScores, MetricsError> {
    weights.validate()?;
    let pick = |f: fn(&TaskWeightRow) -> f64| -> BTreeMap<OccupationKind, f64> {
        weights.per_group.iter().map(|(g, row)| (*g, f(row))).collect()
    };
    Ok(TaskScores {
        routine: task_score(&pick(|r| r.routine), counts)?,
        abstract_: task_score(&pick(|r| r.abstract_), counts)?,
        manual: task_score(&pick(|r| r.manual), counts)?,
    })
}

/// Herfindahl-Hirschman index: the sum of squared shares.
///
/// Shares must be nonnegative and sum to one within 1e-9.
pub fn hhi(shares: &[f64]) -> Result<f64, MetricsError> {
    if shares.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if let Some(bad) = shares.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(MetricsError::NotDistribution(format!(
            "share {bad} is negative or not finite"
        )));
    }
    let total: f64 = shares.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(MetricsError::NotDistribution(format!(
            "shares sum to {total}, not 1"
        )));
    }
    Ok(shares.iter().map(|s| s * s).sum())
}

/// Nearest-rank empirical percentile: the `ceil(p * n)`-th order statistic,
/// 1-indexed, clamped to rank at least 1. A relative guard of 1e-9 keeps
/// products like `0.01 * n` that are mathematically integral from rounding
/// up to the next rank.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let target = p * n as f64;
    let rank = (target - 1e-9 * target.abs().max(1.0)).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Clamps values at the `p_lo` and `p_hi` nearest-rank percentiles,
/// preserving input order.
pub fn winsorize(values: &[f64], p_lo: f64, p_hi: f64) -> Result<Vec<f64>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(0.0..=1.0).contains(&p_lo) || !(0.0..=1.0).contains(&p_hi) || p_lo >= p_hi {
        return Err(MetricsError::BadPercentileBounds { lo: p_lo, hi: p_hi });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let lo = nearest_rank(&sorted, p_lo);
    let hi = nearest_rank(&sorted, p_hi);
    Ok(values.iter().map(|v| v.clamp(lo, hi)).collect())
}

/// Rows of a grouped series: (group key, unit id, value) with unique
/// (group, unit) pairs.
pub type GroupedRow<G, U> = (G, U, f64);

/// For each row, the mean of the other values in its group, or `None` for
/// singleton groups. Output order matches input order.
pub fn leave_one_out_mean<G, U>(
    rows: &[GroupedRow<G, U>],
) -> Result<Vec<(G, U, Option<f64>)>, MetricsError>
where
    G: Ord + Clone + std::fmt::Debug,
    U: Ord + Clone + std::fmt::Debug,
{
    let mut sums: BTreeMap<&G, (f64, usize)> = BTreeMap::new();
    let mut seen: std::collections::BTreeSet<(&G, &U)> = Default::default();
    for (group, unit, value) in rows {
        if !seen.insert((group, unit)) {
            return Err(MetricsError::DuplicateKey(format!("({group:?}, {unit:?})")));
        }
        let entry = sums.entry(group).or_insert((0.0, 0));
        entry.0 += value;
        entry.1 += 1;
    }
    Ok(rows
        .iter()
        .map(|(group, unit, value)| {
            let (sum, count) = sums[group];
            let instrument = if count >= 2 {
                Some((sum - value) / (count as f64 - 1.0))
            } else {
                None
            };
            (group.clone(), unit.clone(), instrument)
        })
        .collect())
}

/// For each (unit, period) row, the unit's value `lag` periods earlier, or
/// `None` when that period is absent. No interpolation across gaps.
pub fn lag_series<U>(
    rows: &[(U, i64, f64)],
    lag: u32,
) -> Result<Vec<(U, i64, Option<f64>)>, MetricsError>
where
    U: Ord + Clone + std::fmt::Debug,
{
    if lag == 0 {
        return Err(MetricsError::ZeroLag);
    }
    let mut by_key: BTreeMap<(&U, i64), f64> = BTreeMap::new();
    for (unit, period, value) in rows {
        if by_key.insert((unit, *period), *value).is_some() {
            return Err(MetricsError::DuplicateKey(format!("({unit:?}, {period})")));
        }
    }
    Ok(rows
        .iter()
        .map(|(unit, period, _)| {
            let lagged = by_key.get(&(unit, period - lag as i64)).copied();
            (unit.clone(), *period, lagged)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(OccupationKind, u64)]) -> PostingCounts {
        PostingCounts {
            counts: pairs.iter().copied().collect(),
        }
    }

    #[test]
    fn task_score_examples() {
        let weights: BTreeMap<OccupationKind, f64> =
            [(OccupationKind::Mgmt, 1.0), (OccupationKind::Prof, 1.0)]
                .into_iter()
                .collect();

        let zero = counts(&[(OccupationKind::Mgmt, 0), (OccupationKind::Prof, 0)]);
        assert_eq!(task_score(&weights, &zero).unwrap(), 0.0);

        let some = counts(&[(OccupationKind::Mgmt, 3), (OccupationKind::Prof, 6)]);
        let score = task_score(&weights, &some).unwrap();
        assert!((score - 10.0f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn managers_only_posting_loads_abstract() {
        let weights = TaskWeights::default();
        let scores = task_scores(&weights, &counts(&[(OccupationKind::Mgmt, 5)])).unwrap();
        assert!((scores.abstract_ - 6.0f64.ln()).abs() <= 1e-12);
        assert_eq!(scores.routine, 0.0);
        assert_eq!(scores.manual, 0.0);
    }

    #[test]
    fn task_score_missing_weight() {
        let weights: BTreeMap<OccupationKind, f64> =
            [(OccupationKind::Mgmt, 1.0)].into_iter().collect();
        assert!(matches!(
            task_score(&weights, &counts(&[(OccupationKind::Phys, 1)])),
            Err(MetricsError::MissingWeight(OccupationKind::Phys))
        ));
        let negative: BTreeMap<OccupationKind, f64> =
            [(OccupationKind::Mgmt, -1.0)].into_iter().collect();
        assert!(matches!(
            task_score(&negative, &counts(&[(OccupationKind::Mgmt, 1)])),
            Err(MetricsError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn task_score_monotone_in_counts() {
        let weights = TaskWeights::default();
        let mut prev = 0.0;
        for n in 0..50 {
            let scores = task_scores(&weights, &counts(&[(OccupationKind::Prof, n)])).unwrap();
            if n > 0 {
                assert!(scores.abstract_ > prev);
            }
            prev = scores.abstract_;
        }
    }

    #[test]
    fn hhi_examples() {
        assert_eq!(hhi(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((hhi(&[0.2; 5]).unwrap() - 0.2).abs() <= 1e-15);
        assert_eq!(hhi(&[0.5, 0.5]).unwrap(), 0.5);
        assert!(matches!(
            hhi(&[0.5, 0.4]),
            Err(MetricsError::NotDistribution(_))
        ));
        assert!(matches!(
            hhi(&[1.5, -0.5]),
            Err(MetricsError::NotDistribution(_))
        ));
    }

    #[test]
    fn hhi_permutation_invariant_and_uniform_minimal() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let mut shares: Vec<f64> = (0..5).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = shares.iter().sum();
            shares.iter_mut().for_each(|s| *s /= total);
            let value = hhi(&shares).unwrap();
            let mut shuffled = shares.clone();
            shuffled.shuffle(&mut rng);
            // Summation order may differ at the last ulp.
            assert!((hhi(&shuffled).unwrap() - value).abs() <= 1e-12);
            assert!(value >= 0.2 - 1e-12);
        }
    }

    #[test]
    fn winsorize_thousand_clamps_to_10_and_990() {
        let values: Vec<f64> = (1..=1000).map(|v| v as f64).collect();
        let clamped = winsorize(&values, 0.01, 0.99).unwrap();
        assert_eq!(clamped[0], 10.0);
        assert_eq!(clamped[999], 990.0);
        assert_eq!(clamped[499], 500.0);
        assert_eq!(clamped.iter().cloned().fold(f64::MIN, f64::max), 990.0);
        assert_eq!(clamped.iter().cloned().fold(f64::MAX, f64::min), 10.0);
    }

    #[test]
    fn winsorize_small_sample_keeps_extremes() {
        // With 99 values, ceil(0.01 * 99) = 1 and ceil(0.99 * 99) = 99, so
        // the 1st and 99th order statistics are the sample extremes.
        let values: Vec<f64> = (1..100).map(|v| v as f64).collect();
        let clamped = winsorize(&values, 0.01, 0.99).unwrap();
        assert_eq!(clamped, values);
    }

    #[test]
    fn winsorize_constant_and_idempotent() {
        let constant = vec![3.0; 10];
        assert_eq!(winsorize(&constant, 0.01, 0.99).unwrap(), constant);

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let values: Vec<f64> = (0..500).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let once = winsorize(&values, 0.05, 0.95).unwrap();
        let twice = winsorize(&once, 0.05, 0.95).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn winsorize_rejects_bad_input() {
        assert!(matches!(
            winsorize(&[], 0.01, 0.99),
            Err(MetricsError::EmptyInput)
        ));
        assert!(matches!(
            winsorize(&[1.0], 0.9, 0.1),
            Err(MetricsError::BadPercentileBounds { .. })
        ));
    }

    #[test]
    fn leave_one_out_examples() {
        let rows = vec![("c1", "a", 1.0), ("c1", "b", 2.0), ("c1", "c", 3.0)];
        let out = leave_one_out_mean(&rows).unwrap();
        assert_eq!(out[0].2, Some(2.5));
        assert_eq!(out[1].2, Some(2.0));
        assert_eq!(out[2].2, Some(1.5));

        let singleton = vec![("c1", "a", 1.0)];
        assert_eq!(leave_one_out_mean(&singleton).unwrap()[0].2, None);

        let equal = vec![("c1", "a", 4.0), ("c1", "b", 4.0), ("c1", "c", 4.0)];
        for (_, _, v) in leave_one_out_mean(&equal).unwrap() {
            assert_eq!(v, Some(4.0));
        }
    }

    #[test]
    fn leave_one_out_group_mean_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut rows = Vec::new();
        for group in 0..10 {
            for unit in 0..rng.gen_range(2..8) {
                rows.push((group, unit, rng.gen_range(-3.0..3.0)));
            }
        }
        let out = leave_one_out_mean(&rows).unwrap();
        for group in 0..10 {
            let raw: Vec<f64> = rows
                .iter()
                .filter(|(g, _, _)| *g == group)
                .map(|(_, _, v)| *v)
                .collect();
            let inst: Vec<f64> = out
                .iter()
                .filter(|(g, _, _)| *g == group)
                .map(|(_, _, v)| v.unwrap())
                .collect();
            let raw_mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let inst_mean = inst.iter().sum::<f64>() / inst.len() as f64;
            assert!((raw_mean - inst_mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn leave_one_out_rejects_duplicates() {
        let rows = vec![("c1", "a", 1.0), ("c1", "a", 2.0)];
        assert!(matches!(
            leave_one_out_mean(&rows),
            Err(MetricsError::DuplicateKey(_))
        ));
    }

    #[test]
    fn lag_examples() {
        let rows = vec![("u", 2016, 1.0), ("u", 2017, 4.0)];
        let lagged = lag_series(&rows, 1).unwrap();
        assert_eq!(lagged[0].2, None);
        assert_eq!(lagged[1].2, Some(1.0));

        let lag2 = lag_series(&rows, 2).unwrap();
        assert!(lag2.iter().all(|(_, _, v)| v.is_none()));
    }

    #[test]
    fn lag_composition_on_gap_free_panel() {
        let rows: Vec<(&str, i64, f64)> = (2016..2023)
            .map(|year| ("u", year, (year - 2015) as f64))
            .collect();
        let once = lag_series(&rows, 1).unwrap();
        let once_rows: Vec<(&str, i64, f64)> = once
            .iter()
            .filter_map(|(u, t, v)| v.map(|v| (*u, *t, v)))
            .collect();
        let twice = lag_series(&once_rows, 1).unwrap();
        let direct = lag_series(&rows, 2).unwrap();
        for (u, t, v) in &twice {
            let d = direct
                .iter()
                .find(|(du, dt, _)| du == u && dt == t)
                .unwrap();
            assert_eq!(&d.2, v);
        }
    }

    #[test]
    fn lag_does_not_bridge_gaps() {
        let rows = vec![("u", 2016, 1.0), ("u", 2018, 9.0)];
        let lagged = lag_series(&rows, 1).unwrap();
        assert_eq!(lagged[1].2, None);
    }
}
