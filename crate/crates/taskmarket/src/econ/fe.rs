//! Fixed-effect absorption by iterated within-group demeaning.

use std::collections::BTreeMap;

use crate::error::EconError;

const DEMEAN_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 1000;

fn group_index(factor: &[i64]) -> BTreeMap<i64, Vec<usize>> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (row, &label) in factor.iter().enumerate() {
        groups.entry(label).or_default().push(row);
    }
    groups
}

/// Demeans every column within the groups of each factor, cycling over
/// factors until the largest cell change in a full sweep is at most 1e-10.
/// A single factor needs exactly one sweep. Returns the number of sweeps.
///
/// With no factors at all, columns are demeaned globally, which absorbs the
/// intercept the same way a single constant factor would.
pub fn within_transform(
    columns: &mut [Vec<f64>],
    factors: &[Vec<i64>],
) -> Result<usize, EconError> {
    let n = match columns.first() {
        Some(c) => c.len(),
        None => return Ok(0),
    };

    let global = vec![0i64; n];
    let effective: Vec<&Vec<i64>> = if factors.is_empty() {
        vec![&global]
    } else {
        factors.iter().collect()
    };

    let mut indexed = Vec::with_capacity(effective.len());
    for factor in &effective {
        if factor.is_empty() {
            return Err(EconError::EmptyFactor("factor with no levels".to_string()));
        }
        if factor.len() != n {
            return Err(EconError::ColumnLengthMismatch {
                name: "factor".to_string(),
                len: factor.len(),
                expected: n,
            });
        }
        indexed.push(group_index(factor));
    }

    for sweep in 1..=MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        for groups in &indexed {
            for rows in groups.values() {
                let inv_len = 1.0 / rows.len() as f64;
                for column in columns.iter_mut() {
                    let mean: f64 = rows.iter().map(|&r| column[r]).sum::<f64>() * inv_len;
                    for &r in rows {
                        column[r] -= mean;
                    }
                    max_change = max_change.max(mean.abs());
                }
            }
        }
        if indexed.len() == 1 || max_change <= DEMEAN_TOL {
            return Ok(sweep);
        }
    }
    Err(EconError::DemeaningDidNotConverge(MAX_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_subtracts_group_means_in_one_sweep() {
        let mut columns = vec![vec![1.0, 3.0, 10.0]];
        let factors = vec![vec![1, 1, 2]];
        let sweeps = within_transform(&mut columns, &factors).unwrap();
        assert_eq!(sweeps, 1);
        assert_eq!(columns[0], vec![-1.0, 1.0, 0.0]);
    }

    #[test]
    fn group_constant_column_is_absorbed() {
        let mut columns = vec![vec![5.0, 5.0, -2.0, -2.0]];
        let factors = vec![vec![1, 1, 2, 2]];
        within_transform(&mut columns, &factors).unwrap();
        assert!(columns[0].iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn no_factors_demeans_globally() {
        let mut columns = vec![vec![1.0, 2.0, 3.0]];
        within_transform(&mut columns, &[]).unwrap();
        assert_eq!(columns[0], vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn two_factors_converge() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let f1: Vec<i64> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let f2: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let mut columns = vec![(0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>()];
        within_transform(&mut columns, &[f1.clone(), f2.clone()]).unwrap();
        // Every group mean of the transformed column is (numerically) zero.
        for factor in [&f1, &f2] {
            for rows in group_index(factor).values() {
                let mean: f64 =
                    rows.iter().map(|&r| columns[0][r]).sum::<f64>() / rows.len() as f64;
                assert!(mean.abs() <= 1e-9);
            }
        }
    }
}
