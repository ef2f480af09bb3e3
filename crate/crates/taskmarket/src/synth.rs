//! Seeded synthetic firm-year panels whose data-generating process embeds
//! the task-assignment model: each firm-year draws a digital capability,
//! hiring shares come from the model's assignment at that capability, and
//! posting counts, task scores, and accounting controls are layered on top.
//! Every run is reproducible from its manifest.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::assignment::{compute_region_map, hiring_shares, labor_demand};
use crate::econ::PanelDataset;
use crate::error::SynthError;
use crate::metrics::{task_scores, PostingCounts, TaskWeights};
use crate::model::{EconomyConfig, OccupationKind};

/// Firm-level digital capability process: a base level plus a firm AR(1)
/// component (innovation `firm_sigma`, persistence `persistence`, started
/// from its stationary distribution) plus an iid city-year common shock.
/// Values are floored at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaProcess {
    pub base: f64,
    pub firm_sigma: f64,
    pub city_sigma: f64,
    pub persistence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_firms: usize,
    pub n_years: usize,
    pub n_cities: usize,
    pub n_industries: usize,
    pub n_provinces: usize,
    pub theta: ThetaProcess,
    /// Mean of the Poisson posting volume per firm-year.
    pub posting_volume_mean: f64,
    /// Additive Gaussian noise on each hiring share before re-projection
    /// onto the simplex.
    pub share_noise_sigma: f64,
    /// Additive Gaussian noise on each task score.
    pub score_noise_sigma: f64,
    pub seed: u64,
    /// Grid density for the per-row assignment computation.
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_scan_points() -> usize {
    1025
}

fn default_tolerance() -> f64 {
    1e-10
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_firms == 0 || self.n_years == 0 {
            return Err(SynthError::BadConfig("need at least one firm and one year".into()));
        }
        if self.n_cities == 0 || self.n_industries == 0 || self.n_provinces == 0 {
            return Err(SynthError::BadConfig(
                "need at least one city, industry, and province".into(),
            ));
        }
        for (name, sigma) in [
            ("firm_sigma", self.theta.firm_sigma),
            ("city_sigma", self.theta.city_sigma),
            ("share_noise_sigma", self.share_noise_sigma),
            ("score_noise_sigma", self.score_noise_sigma),
        ] {
            if !sigma.is_finite() || sigma < 0.0 {
                return Err(SynthError::BadConfig(format!("{name} must be nonnegative")));
            }
        }
        if !(0.0..1.0).contains(&self.theta.persistence) {
            return Err(SynthError::BadConfig("persistence must lie in [0, 1)".into()));
        }
        if self.posting_volume_mean < 0.0 {
            return Err(SynthError::BadConfig("posting volume mean must be nonnegative".into()));
        }
        Ok(())
    }

    /// Standard deviation of the stationary capability distribution.
    pub fn theta_sd(&self) -> f64 {
        let ar_var =
            self.theta.firm_sigma.powi(2) / (1.0 - self.theta.persistence.powi(2));
        (ar_var + self.theta.city_sigma.powi(2)).sqrt()
    }
}

/// Everything needed to regenerate a panel byte for byte, plus the local
/// ground-truth slopes of each model outcome in the digital index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// RNG algorithm (ChaCha8, seeded with `config.seed`).
    pub generator: String,
    /// How the digital index column maps to the model capability.
    pub digital_transform: String,
    pub config: SynthConfig,
    pub economy: EconomyConfig,
    /// Central-difference slopes of the noise-free outcome curves at the
    /// base capability; the step is sqrt(3) times the capability sd so the
    /// difference matches the least-squares estimand on a Gaussian
    /// regressor through third order.
    pub ground_truth_slopes: BTreeMap<String, f64>,
    pub ground_truth_step: f64,
}

/// Noise-free model outcomes at one capability level: hiring shares and
/// the mean-volume task scores.
fn clean_outcomes(
    econ: &EconomyConfig,
    theta: f64,
    volume_mean: f64,
    weights: &TaskWeights,
    scan_points: usize,
    tol: f64,
) -> Result<BTreeMap<String, f64>, SynthError> {
    let at = econ.with_capability(theta)?;
    let rm = compute_region_map(&at, scan_points, tol)?;
    let demand = labor_demand(&rm);
    let shares = hiring_shares(&demand).map_err(|_| SynthError::AllDigitalAtTheta(theta))?;

    let mut out = BTreeMap::new();
    for occ in econ.occupations_ordered() {
        let share = shares.get(&occ.kind).copied().unwrap_or(0.0);
        out.insert(format!("share_{}", occ.kind.label()), share);
    }
    // Expected counts at the mean volume; continuous stand-in for the
    // multinomial split.
    let weighted = |pick: fn(&crate::metrics::TaskWeightRow) -> f64| -> f64 {
        let mut total = 0.0;
        for occ in econ.occupations_ordered() {
            let share = shares.get(&occ.kind).copied().unwrap_or(0.0);
            if let Some(row) = weights.per_group.get(&occ.kind) {
                total += pick(row) * share * volume_mean;
            }
        }
        (1.0 + total).ln()
    };
    out.insert("score_routine".into(), weighted(|r| r.routine));
    out.insert("score_abstract".into(), weighted(|r| r.abstract_));
    out.insert("score_manual".into(), weighted(|r| r.manual));
    Ok(out)
}

fn multinomial_split(rng: &mut ChaCha8Rng, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = total;
    let mut prob_left = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() || prob_left <= 0.0 {
            counts[i] = remaining;
            break;
        }
        let q = (p / prob_left).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).expect("q lies in [0, 1]").sample(rng);
        counts[i] = draw;
        remaining -= draw;
        prob_left -= p;
    }
    counts
}

/// Generates the panel and its manifest. Columns: the digital index, one
/// hiring share and posting count per occupation, the three task scores,
/// the posting volume, and six accounting controls drawn from fixed
/// normal distributions.
pub fn generate_panel(
    cfg: &SynthConfig,
    econ: &EconomyConfig,
) -> Result<(PanelDataset, Manifest), SynthError> {
    cfg.validate()?;
    econ.validate()?;
    let weights = TaskWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let n_firms = cfg.n_firms;
    let n_years = cfg.n_years;
    let n_rows = n_firms * n_years;

    // Cities round-robin so every city holds several firms (the
    // leave-one-out instrument needs peers); industry and province seeded.
    let city_of: Vec<i64> = (0..n_firms).map(|i| (i % cfg.n_cities) as i64).collect();
    let industry_of: Vec<i64> = (0..n_firms)
        .map(|_| rng.gen_range(0..cfg.n_industries) as i64)
        .collect();
    let province_of: Vec<i64> = (0..n_firms)
        .map(|_| rng.gen_range(0..cfg.n_provinces) as i64)
        .collect();

    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let mut city_shock = vec![vec![0.0f64; n_years]; cfg.n_cities];
    for row in city_shock.iter_mut() {
        for cell in row.iter_mut() {
            *cell = cfg.theta.city_sigma * standard.sample(&mut rng);
        }
    }

    let rho = cfg.theta.persistence;
    let stationary_sd = cfg.theta.firm_sigma / (1.0 - rho * rho).sqrt();
    let mut theta_by_row = vec![0.0f64; n_rows];
    for firm in 0..n_firms {
        let mut ar = stationary_sd * standard.sample(&mut rng);
        for year in 0..n_years {
            if year > 0 {
                ar = rho * ar + cfg.theta.firm_sigma * standard.sample(&mut rng);
            }
            let shock = city_shock[city_of[firm] as usize][year];
            theta_by_row[firm * n_years + year] = (cfg.theta.base + ar + shock).max(0.0);
        }
    }

    let kinds: Vec<OccupationKind> = econ.occupations_ordered().iter().map(|o| o.kind).collect();
    let mut digital = Vec::with_capacity(n_rows);
    let mut share_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n_rows); kinds.len()];
    let mut count_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n_rows); kinds.len()];
    let mut postings = Vec::with_capacity(n_rows);
    let mut score_routine = Vec::with_capacity(n_rows);
    let mut score_abstract = Vec::with_capacity(n_rows);
    let mut score_manual = Vec::with_capacity(n_rows);
    let mut controls: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let control_dists = [
        ("size", 22.3, 1.24),
        ("roa", 0.04, 0.06),
        ("cashflow", 0.05, 0.06),
        ("ato", 0.60, 0.38),
        ("board", 2.10, 0.18),
        ("tobinq", 1.89, 1.05),
    ];

    for (row, &theta) in theta_by_row.iter().enumerate() {
        let at = econ.with_capability(theta)?;
        let rm = compute_region_map(&at, cfg.scan_points, cfg.tolerance)?;
        let shares =
            hiring_shares(&labor_demand(&rm)).map_err(|_| SynthError::AllDigitalAtTheta(theta))?;

        // The digital index is the capability itself (identity transform).
        digital.push(theta);

        let mut noisy: Vec<f64> = kinds
            .iter()
            .map(|kind| {
                let clean = shares.get(kind).copied().unwrap_or(0.0);
                (clean + cfg.share_noise_sigma * standard.sample(&mut rng)).max(0.0)
            })
            .collect();
        let total: f64 = noisy.iter().sum();
        if total > 0.0 {
            noisy.iter_mut().for_each(|s| *s /= total);
        } else {
            noisy = kinds
                .iter()
                .map(|kind| shares.get(kind).copied().unwrap_or(0.0))
                .collect();
        }
        for (col, share) in share_cols.iter_mut().zip(&noisy) {
            col.push(*share);
        }

        let volume = if cfg.posting_volume_mean > 0.0 {
            Poisson::new(cfg.posting_volume_mean)
                .expect("positive mean")
                .sample(&mut rng) as u64
        } else {
            0
        };
        postings.push(volume as f64);
        let counts = multinomial_split(&mut rng, volume, &noisy);
        for (col, count) in count_cols.iter_mut().zip(&counts) {
            col.push(*count as f64);
        }

        let posting_counts = PostingCounts {
            counts: kinds.iter().copied().zip(counts.iter().copied()).collect(),
        };
        let scores = task_scores(&weights, &posting_counts)
            .map_err(|e| SynthError::BadConfig(format!("task weights: {e}")))?;
        score_routine.push(scores.routine + cfg.score_noise_sigma * standard.sample(&mut rng));
        score_abstract.push(scores.abstract_ + cfg.score_noise_sigma * standard.sample(&mut rng));
        score_manual.push(scores.manual + cfg.score_noise_sigma * standard.sample(&mut rng));

        for (name, mean, sd) in control_dists {
            controls
                .entry(name)
                .or_default()
                .push(mean + sd * standard.sample(&mut rng));
        }
        let _ = row;
    }

    let firm: Vec<i64> = (0..n_rows).map(|r| (r / n_years) as i64).collect();
    let year: Vec<i64> = (0..n_rows).map(|r| 2016 + (r % n_years) as i64).collect();
    let city: Vec<i64> = (0..n_rows).map(|r| city_of[r / n_years]).collect();
    let industry: Vec<i64> = (0..n_rows).map(|r| industry_of[r / n_years]).collect();
    let province: Vec<i64> = (0..n_rows).map(|r| province_of[r / n_years]).collect();
    let mut panel = PanelDataset::new(firm, year, city, industry, province)?;
    panel.add_column("digital", digital)?;
    for (kind, col) in kinds.iter().zip(share_cols) {
        panel.add_column(&format!("share_{}", kind.label()), col)?;
    }
    panel.add_column("score_routine", score_routine)?;
    panel.add_column("score_abstract", score_abstract)?;
    panel.add_column("score_manual", score_manual)?;
    panel.add_column("postings", postings)?;
    for (kind, col) in kinds.iter().zip(count_cols) {
        panel.add_column(&format!("count_{}", kind.label()), col)?;
    }
    for (name, _, _) in control_dists {
        panel.add_column(name, controls.remove(name).expect("control generated"))?;
    }

    // Ground-truth local slopes of the noise-free outcome curves.
    let step = (3.0f64.sqrt() * cfg.theta_sd()).max(1e-3);
    let above = clean_outcomes(
        econ,
        cfg.theta.base + step,
        cfg.posting_volume_mean,
        &weights,
        cfg.scan_points,
        cfg.tolerance,
    )?;
    let below = clean_outcomes(
        econ,
        (cfg.theta.base - step).max(0.0),
        cfg.posting_volume_mean,
        &weights,
        cfg.scan_points,
        cfg.tolerance,
    )?;
    let denom = step + (cfg.theta.base - (cfg.theta.base - step).max(0.0));
    let ground_truth_slopes = above
        .iter()
        .map(|(name, hi)| (name.clone(), (hi - below[name]) / denom))
        .collect();

    let manifest = Manifest {
        generator: "chacha8".to_string(),
        digital_transform: "identity".to_string(),
        config: cfg.clone(),
        economy: econ.clone(),
        ground_truth_slopes,
        ground_truth_step: step,
    };
    Ok((panel, manifest))
}

/// Regenerates the exact panel a manifest describes.
pub fn generate_from_manifest(manifest: &Manifest) -> Result<PanelDataset, SynthError> {
    let (panel, _) = generate_panel(&manifest.config, &manifest.economy)?;
    Ok(panel)
}
