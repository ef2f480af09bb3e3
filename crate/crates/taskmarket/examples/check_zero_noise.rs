//! Scratch harness: with all outcome noise at zero, the estimated
//! digital-to-share slope should match the manifest ground truth to 1e-6.

use taskmarket::econ::{estimate_spec, DesignSpec};
use taskmarket::model::EconomyConfig;
use taskmarket::synth::{generate_panel, SynthConfig, ThetaProcess};

fn main() {
    let econ: EconomyConfig = serde_json::from_str(include_str!(
        "../fixtures/paper_signs_economy.json"
    ))
    .unwrap();

    let cfg = SynthConfig {
        n_firms: 2500,
        n_years: 2,
        n_cities: 25,
        n_industries: 8,
        n_provinces: 6,
        theta: ThetaProcess {
            base: 3.0,
            firm_sigma: 0.002,
            city_sigma: 0.0,
            persistence: 0.0,
        },
        posting_volume_mean: 0.0,
        share_noise_sigma: 0.0,
        score_noise_sigma: 0.0,
        seed: 31,
        scan_points: 2049,
        tolerance: 1e-11,
    };
    let (panel, manifest) = generate_panel(&cfg, &econ).unwrap();

    for outcome in ["share_prof", "share_phys", "share_aux", "share_tech", "share_mgmt"] {
        let spec = DesignSpec {
            name: outcome.to_string(),
            outcome: outcome.to_string(),
            regressors: vec!["digital".into()],
            fe_factors: vec![],
            cluster: None,
            instruments: None,
        };
        let result = estimate_spec(&panel, &spec).unwrap();
        let est = result.term("digital").unwrap().coefficient;
        let truth = manifest.ground_truth_slopes[outcome];
        println!(
            "{outcome}: est {est:+.9} truth {truth:+.9} diff {:+.2e}",
            est - truth
        );
    }
}
