//! Least squares via Householder QR, with classical and cluster-robust
//! covariance estimators.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::EconError;

/// Relative threshold on the R diagonal below which a column counts as
/// linearly dependent on its predecessors.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
}

impl OlsFit {
    pub fn rss(&self) -> f64 {
        self.residuals.dot(&self.residuals)
    }
}

/// Least-squares solution of `X b = y` through a QR decomposition.
/// Rank deficiency is reported with the index of the first column that is
/// linearly dependent on the columns before it.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit, EconError> {
    let (n, k) = (x.nrows(), x.ncols());
    if n < k {
        return Err(EconError::TooFewRows { rows: n, cols: k });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    for i in 0..k {
        if r[(i, i)].abs() <= RANK_TOL * max_diag.max(f64::MIN_POSITIVE) {
            return Err(EconError::RankDeficient(i));
        }
    }
    let qty = qr.q().transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(EconError::RankDeficient(0))?;
    let residuals = y - x * &coefficients;
    Ok(OlsFit {
        coefficients,
        residuals,
    })
}

/// Classical homoskedastic standard errors: `s^2 (X'X)^-1` with
/// `s^2 = RSS / (n - k)`.
pub fn classical_se(x: &DMatrix<f64>, residuals: &DVector<f64>) -> Result<Vec<f64>, EconError> {
    let (n, k) = (x.nrows(), x.ncols());
    let bread = (x.transpose() * x)
        .try_inverse()
        .ok_or(EconError::RankDeficient(0))?;
    let dof = (n.saturating_sub(k)).max(1) as f64;
    let sigma2 = residuals.dot(residuals) / dof;
    Ok((0..k).map(|j| (sigma2 * bread[(j, j)]).max(0.0).sqrt()).collect())
}

fn cluster_meat(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[i64],
) -> (DMatrix<f64>, usize) {
    let k = x.ncols();
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (row, &label) in clusters.iter().enumerate() {
        groups.entry(label).or_default().push(row);
    }
    let mut meat: DMatrix<f64> = DMatrix::zeros(k, k);
    for rows in groups.values() {
        let mut score: DVector<f64> = DVector::zeros(k);
        for &r in rows {
            for j in 0..k {
                score[j] += x[(r, j)] * residuals[r];
            }
        }
        meat += &score * score.transpose();
    }
    (meat, groups.len())
}

fn cr1_covariance(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[i64],
) -> Result<(DMatrix<f64>, usize), EconError> {
    let (n, k) = (x.nrows(), x.ncols());
    let bread = (x.transpose() * x)
        .try_inverse()
        .ok_or(EconError::RankDeficient(0))?;
    let (meat, g) = cluster_meat(x, residuals, clusters);
    if g < 2 {
        return Err(EconError::SingleCluster(g));
    }
    let scale = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n - k).max(1) as f64);
    Ok((scale * &bread * meat * &bread, g))
}

/// CR1 cluster-robust standard errors:
/// `G/(G-1) * (n-1)/(n-k) * (X'X)^-1 [sum_g X_g'u_g u_g'X_g] (X'X)^-1`.
///
/// With every observation its own cluster this reduces exactly to HC1.
pub fn cluster_robust_se(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    clusters: &[i64],
) -> Result<Vec<f64>, EconError> {
    let (cov, _) = cr1_covariance(x, residuals, clusters)?;
    Ok((0..x.ncols()).map(|j| cov[(j, j)].max(0.0).sqrt()).collect())
}

/// Two-way clustering by inclusion-exclusion:
/// `V = V_a + V_b - V_(a intersect b)`, each a CR1 covariance. Identical
/// factors collapse to one-way clustering. Negative diagonal entries (a
/// known hazard of the formula) are truncated at zero.
pub fn two_way_cluster_se(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    factor_a: &[i64],
    factor_b: &[i64],
) -> Result<Vec<f64>, EconError> {
    let (cov_a, _) = cr1_covariance(x, residuals, factor_a)?;
    let (cov_b, _) = cr1_covariance(x, residuals, factor_b)?;

    let mut pair_ids: BTreeMap<(i64, i64), i64> = BTreeMap::new();
    let intersection: Vec<i64> = factor_a
        .iter()
        .zip(factor_b)
        .map(|(&a, &b)| {
            let next = pair_ids.len() as i64;
            *pair_ids.entry((a, b)).or_insert(next)
        })
        .collect();
    let (cov_ab, _) = cr1_covariance(x, residuals, &intersection)?;

    let cov = cov_a + cov_b - cov_ab;
    Ok((0..x.ncols()).map(|j| cov[(j, j)].max(0.0).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_linear_data() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
        let y = DVector::from_vec(vec![2.0, 4.0, 6.0, 8.0]);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() <= 1e-12);
        assert!(fit.rss() <= 1e-24);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let mut x = DMatrix::zeros(5, 2);
        for i in 0..5 {
            x[(i, 0)] = i as f64 + 1.0;
            x[(i, 1)] = i as f64 + 1.0;
        }
        let y = DVector::from_element(5, 1.0);
        assert!(matches!(ols(&x, &y), Err(EconError::RankDeficient(1))));
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let (n, k) = (50, 3);
        let x = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let fit = ols(&x, &y).unwrap();
        let oracle = (x.transpose() * &x).try_inverse().unwrap() * x.transpose() * &y;
        for j in 0..k {
            assert!((fit.coefficients[j] - oracle[j]).abs() <= 1e-8);
        }
    }

    #[test]
    fn singleton_clusters_reduce_to_hc1() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let (n, k) = (40, 2);
        let x = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-2.0..2.0));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let fit = ols(&x, &y).unwrap();

        let clusters: Vec<i64> = (0..n as i64).collect();
        let cr = cluster_robust_se(&x, &fit.residuals, &clusters).unwrap();

        // HC1: n/(n-k) * (X'X)^-1 [sum_i u_i^2 x_i x_i'] (X'X)^-1.
        let bread = (x.transpose() * &x).try_inverse().unwrap();
        let mut meat = DMatrix::zeros(k, k);
        for i in 0..n {
            let xi = x.row(i).transpose();
            meat += fit.residuals[i].powi(2) * &xi * xi.transpose();
        }
        let hc1 = (n as f64 / (n - k) as f64) * &bread * meat * &bread;
        for j in 0..k {
            assert!((cr[j] - hc1[(j, j)].sqrt()).abs() <= 1e-10);
        }
    }

    #[test]
    fn homoskedastic_clusters_near_classical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let n = 500;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let noise = DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5));
        let y = &x * DVector::from_vec(vec![1.0, -0.5]) + noise;
        let fit = ols(&x, &y).unwrap();
        let clusters: Vec<i64> = (0..n as i64).map(|i| i % 50).collect();
        let cr = cluster_robust_se(&x, &fit.residuals, &clusters).unwrap();
        let classical = classical_se(&x, &fit.residuals).unwrap();
        for j in 0..2 {
            let ratio = cr[j] / classical[j];
            assert!((0.75..=1.25).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn two_way_with_identical_factors_is_one_way() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        let n = 60;
        let x = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let fit = ols(&x, &y).unwrap();
        let factor: Vec<i64> = (0..n as i64).map(|i| i % 6).collect();
        let one_way = cluster_robust_se(&x, &fit.residuals, &factor).unwrap();
        let two_way = two_way_cluster_se(&x, &fit.residuals, &factor, &factor).unwrap();
        for j in 0..2 {
            assert!((one_way[j] - two_way[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_cluster_is_an_error() {
        let x = DMatrix::from_element(4, 1, 1.0);
        let u = DVector::from_element(4, 0.5);
        assert!(matches!(
            cluster_robust_se(&x, &u, &[7, 7, 7, 7]),
            Err(EconError::SingleCluster(1))
        ));
    }
}
