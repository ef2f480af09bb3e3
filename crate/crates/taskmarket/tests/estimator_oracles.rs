//! Estimation engine cross-checks: dummy-variable equivalence of the
//! within estimator and a known-truth endogeneity exercise for 2SLS.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taskmarket::econ::{estimate_spec, ols, DesignSpec, InstrumentSpec, PanelDataset};

fn spec(outcome: &str, regressors: &[&str], fe: &[&str]) -> DesignSpec {
    DesignSpec {
        name: "oracle".to_string(),
        outcome: outcome.to_string(),
        regressors: regressors.iter().map(|s| s.to_string()).collect(),
        fe_factors: fe.iter().map(|s| s.to_string()).collect(),
        cluster: None,
        instruments: None,
    }
}

#[test]
fn within_estimator_equals_dummy_ols_on_many_small_panels() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(60 + seed);
        let n = 30;
        let industries: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let provinces: Vec<i64> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut panel = PanelDataset::new(
            (0..n as i64).collect(),
            vec![2020; n],
            vec![0; n],
            industries.clone(),
            provinces.clone(),
        )
        .unwrap();
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                1.2 * x1[i] - 0.4 * x2[i]
                    + 0.3 * industries[i] as f64
                    + 0.7 * provinces[i] as f64
                    + rng.gen_range(-0.2..0.2)
            })
            .collect();
        panel.add_column("x1", x1.clone()).unwrap();
        panel.add_column("x2", x2.clone()).unwrap();
        panel.add_column("y", y.clone()).unwrap();

        let within =
            estimate_spec(&panel, &spec("y", &["x1", "x2"], &["industry", "province"])).unwrap();

        // Oracle: plain least squares on explicit one-hot factor dummies.
        let industry_levels = {
            let mut l = industries.clone();
            l.sort_unstable();
            l.dedup();
            l
        };
        let province_levels = {
            let mut l = provinces.clone();
            l.sort_unstable();
            l.dedup();
            l
        };
        // Drop one province dummy so the design has full rank.
        let k = 2 + industry_levels.len() + province_levels.len() - 1;
        let x = DMatrix::from_fn(n, k, |i, j| {
            if j == 0 {
                x1[i]
            } else if j == 1 {
                x2[i]
            } else if j < 2 + industry_levels.len() {
                (industries[i] == industry_levels[j - 2]) as u8 as f64
            } else {
                (provinces[i] == province_levels[j - 2 - industry_levels.len() + 1]) as u8 as f64
            }
        });
        let oracle = ols(&x, &DVector::from_vec(y)).unwrap();
        assert!(
            (within.term("x1").unwrap().coefficient - oracle.coefficients[0]).abs() <= 1e-8,
            "seed {seed}"
        );
        assert!(
            (within.term("x2").unwrap().coefficient - oracle.coefficients[1]).abs() <= 1e-8,
            "seed {seed}"
        );
    }
}

#[test]
fn two_sls_beats_ols_under_shared_error_endogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let n = 2000;
    let n_cities = 40;
    let slope = 1.0;

    let firms: Vec<i64> = (0..n as i64).collect();
    let cities: Vec<i64> = (0..n as i64).map(|i| i % n_cities).collect();
    let city_level: Vec<f64> = (0..n_cities).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // x = city component + idiosyncratic e; the outcome error shares e, so
    // least squares is biased upward while the city-mean instrument only
    // picks up the exogenous component.
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let e = rng.gen_range(-1.0..1.0);
        let xi = city_level[(cities[i] % n_cities as i64) as usize] + e;
        let yi = slope * xi + 0.9 * e + 0.2 * rng.gen_range(-1.0..1.0);
        x.push(xi);
        y.push(yi);
    }
    let mut panel = PanelDataset::new(
        firms,
        vec![2020; n],
        cities.clone(),
        vec![0; n],
        vec![0; n],
    )
    .unwrap();
    panel.add_column("x", x.clone()).unwrap();
    panel.add_column("y", y).unwrap();

    // Leave-one-out city mean of x as the instrument.
    let rows: Vec<(i64, usize, f64)> = (0..n).map(|i| (cities[i], i, x[i])).collect();
    let loo = taskmarket::metrics::leave_one_out_mean(&rows).unwrap();
    panel
        .add_column(
            "x_loo",
            loo.into_iter().map(|(_, _, v)| v.unwrap_or(f64::NAN)).collect(),
        )
        .unwrap();

    let ols_fit = estimate_spec(&panel, &spec("y", &["x"], &[])).unwrap();
    let mut iv_spec = spec("y", &["x"], &[]);
    iv_spec.instruments = Some(InstrumentSpec {
        endogenous: "x".to_string(),
        instruments: vec!["x_loo".to_string()],
    });
    let iv_fit = estimate_spec(&panel, &iv_spec).unwrap();

    let ols_bias = (ols_fit.term("x").unwrap().coefficient - slope).abs();
    let iv_bias = (iv_fit.term("x").unwrap().coefficient - slope).abs();
    assert!(
        iv_bias < ols_bias,
        "iv bias {iv_bias} should beat ols bias {ols_bias}"
    );
    assert!(ols_bias > 0.1, "endogeneity should bite; ols bias {ols_bias}");
    assert!(iv_fit.first_stage_f.unwrap() > 10.0);
}
