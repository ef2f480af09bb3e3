//! Scratch harness: measures sign-recovery and 3-SE coverage of the
//! manifest ground-truth slopes across many seeded panels, for calibrating
//! the demo generator configuration.

use taskmarket::econ::{estimate_spec, DesignSpec};
use taskmarket::model::EconomyConfig;
use taskmarket::synth::{generate_panel, SynthConfig, ThetaProcess};

fn main() {
    let econ: EconomyConfig = serde_json::from_str(include_str!(
        "../fixtures/paper_signs_economy.json"
    ))
    .unwrap();

    let replications = 100;
    let mut sign_hits = [0usize; 3];
    let mut cover_hits = [0usize; 3];
    let outcomes = ["share_prof", "share_phys", "score_abstract"];
    let start = std::time::Instant::now();

    for rep in 0..replications {
        let cfg = SynthConfig {
            n_firms: 500,
            n_years: 4,
            n_cities: 20,
            n_industries: 8,
            n_provinces: 6,
            theta: ThetaProcess {
                base: 3.0,
                firm_sigma: 0.18,
                city_sigma: 0.10,
                persistence: 0.4,
            },
            posting_volume_mean: 300.0,
            share_noise_sigma: 0.02,
            score_noise_sigma: 0.08,
            seed: 9_000 + rep as u64,
            scan_points: 513,
            tolerance: 1e-10,
        };
        let (panel, manifest) = generate_panel(&cfg, &econ).unwrap();

        for (slot, outcome) in outcomes.iter().enumerate() {
            let spec = DesignSpec {
                name: outcome.to_string(),
                outcome: outcome.to_string(),
                regressors: vec![
                    "digital".into(),
                    "size".into(),
                    "roa".into(),
                    "cashflow".into(),
                    "ato".into(),
                    "board".into(),
                    "tobinq".into(),
                ],
                fe_factors: vec!["year".into(), "industry".into(), "province".into()],
                cluster: Some("firm".into()),
                instruments: None,
            };
            let result = estimate_spec(&panel, &spec).unwrap();
            let term = result.term("digital").unwrap();
            let truth = manifest.ground_truth_slopes[*outcome];
            if term.coefficient.signum() == truth.signum() {
                sign_hits[slot] += 1;
            }
            if (term.coefficient - truth).abs() <= 3.0 * term.se {
                cover_hits[slot] += 1;
            }
            if rep < 3 {
                println!(
                    "rep {rep} {outcome}: est {:+.5} se {:.5} truth {:+.5} t {:+.1}",
                    term.coefficient,
                    term.se,
                    truth,
                    term.coefficient / term.se
                );
            }
        }
    }

    println!("\nelapsed: {:?}", start.elapsed());
    for (slot, outcome) in outcomes.iter().enumerate() {
        println!(
            "{outcome}: signs {}/{replications}, 3-SE coverage {}/{replications}",
            sign_hits[slot], cover_hits[slot]
        );
    }
}
