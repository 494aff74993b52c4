//! Covariate shift: ideal gas throughout, but the test inputs move.

use serde::{Deserialize, Serialize};

use super::metrics::{ape, mape, CorrelationReport};
use super::split_holdout;
use crate::datagen::{exp2_params, generate, Exp2Params, GasRecord, GasSpec, DEFAULT_SIZE};
use crate::error::Result;
use crate::mlp::{mc_predict, train, NetworkConfig, TrainConfig, TrainedModel, DEFAULT_PASSES};
use crate::ood::{distances, fit_profile, threshold_from_training, GaussianProfile, OodThreshold, DEFAULT_PERCENTILE};
use crate::seed::{derive_seed, Stage};
use crate::similarity::{divergence_report, BinningConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2Config {
    pub seed: u64,
    pub n_samples: usize,
    pub holdout_fraction: f64,
    pub params: Exp2Params,
    pub binning: BinningConfig,
    pub network: NetworkConfig,
    pub training: TrainConfig,
    pub n_passes: usize,
    pub percentile: f64,
}

impl Default for Exp2Config {
    fn default() -> Self {
        Exp2Config {
            seed: 0,
            n_samples: DEFAULT_SIZE,
            holdout_fraction: 0.2,
            params: exp2_params(),
            binning: BinningConfig::default(),
            network: NetworkConfig::default(),
            training: TrainConfig::default(),
            n_passes: DEFAULT_PASSES,
            percentile: DEFAULT_PERCENTILE,
        }
    }
}

impl Exp2Config {
    pub fn data_seeds(&self) -> (u64, u64) {
        (derive_seed(self.seed, Stage::Data, 1), derive_seed(self.seed, Stage::Data, 2))
    }

    /// Dropout seed for the `index`-th test point in output order.
    pub fn mc_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, Stage::McDropout, index as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSet {
    InDistribution,
    OutOfDistribution,
}

impl TestSet {
    pub fn label(self) -> &'static str {
        match self {
            TestSet::InDistribution => "in_distribution",
            TestSet::OutOfDistribution => "out_of_distribution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exp2PointRecord {
    pub set: TestSet,
    pub true_p: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    pub mahalanobis: f64,
    pub ape_pct: f64,
}

/// Divergence of one variable between the training split and a test set,
/// alongside that set's error and OOD statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp2SummaryRow {
    pub set: TestSet,
    pub variable: String,
    pub kl: f64,
    pub js: f64,
    pub mape: f64,
    pub exceedance_rate: f64,
    pub mean_mc_std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exp2Result {
    /// Pressure rows first (in-distribution, then shifted), then per-feature rows.
    pub summary: Vec<Exp2SummaryRow>,
    pub points: Vec<Exp2PointRecord>,
    pub threshold: OodThreshold,
    pub profile: GaussianProfile,
    pub model: TrainedModel,
    /// Mahalanobis distance vs absolute percentage error over all test points.
    pub distance_vs_error: CorrelationReport,
    /// MC standard deviation vs absolute percentage error over all test points.
    pub std_vs_error: CorrelationReport,
}

impl Exp2Result {
    pub fn pressure_row(&self, set: TestSet) -> &Exp2SummaryRow {
        self.summary
            .iter()
            .find(|r| r.set == set && r.variable == "pressure_atm")
            .expect("pressure rows are always present")
    }

    pub fn points_in(&self, set: TestSet) -> impl Iterator<Item = &Exp2PointRecord> {
        self.points.iter().filter(move |p| p.set == set)
    }
}

type Getter = fn(&GasRecord) -> f64;

const VARIABLES: [(&str, Getter); 4] = [
    ("pressure_atm", |r| r.pressure),
    ("temperature_K", |r| r.temperature),
    ("volume_L", |r| r.volume),
    ("moles_mol", |r| r.moles),
];

pub fn run_experiment2(config: &Exp2Config) -> Result<Exp2Result> {
    let ideal = GasSpec::ideal();
    let (seed1, seed2) = config.data_seeds();
    let first = generate(&ideal, &config.params.first, config.n_samples, seed1)?;
    let second = generate(&ideal, &config.params.second, config.n_samples, seed2)?;
    let (train_rows, holdout) = split_holdout(&first.records, config.holdout_fraction)?;

    let training = TrainConfig { seed: config.seed, ..config.training };
    let model = train(train_rows, &config.network, &training)?;

    let train_features: Vec<[f64; 3]> = train_rows.iter().map(GasRecord::features).collect();
    let profile = fit_profile(&train_features)?;
    let threshold = threshold_from_training(&distances(&profile, train_rows), config.percentile)?;

    let mut points = Vec::with_capacity(holdout.len() + second.len());
    for (set, records) in [(TestSet::InDistribution, holdout), (TestSet::OutOfDistribution, &second.records[..])] {
        let dists = distances(&profile, records);
        for (r, d) in records.iter().zip(dists) {
            let summary = mc_predict(&model, r.features(), config.n_passes, config.mc_seed(points.len()))?;
            points.push(Exp2PointRecord {
                set,
                true_p: r.pressure,
                mc_mean: summary.mean,
                mc_std: summary.std,
                mahalanobis: d,
                ape_pct: ape(r.pressure, summary.mean),
            });
        }
    }

    let mut summary = Vec::new();
    for (name, get) in VARIABLES {
        let train_v: Vec<f64> = train_rows.iter().map(get).collect();
        for (set, records) in [(TestSet::InDistribution, holdout), (TestSet::OutOfDistribution, &second.records[..])] {
            let test_v: Vec<f64> = records.iter().map(get).collect();
            let div = divergence_report(&train_v, &test_v, &config.binning)?;
            let pts: Vec<&Exp2PointRecord> = points.iter().filter(|p| p.set == set).collect();
            let truth: Vec<f64> = pts.iter().map(|p| p.true_p).collect();
            let pred: Vec<f64> = pts.iter().map(|p| p.mc_mean).collect();
            summary.push(Exp2SummaryRow {
                set,
                variable: name.to_string(),
                kl: div.kl,
                js: div.js_distance,
                mape: mape(&truth, &pred)?,
                exceedance_rate: threshold.exceedance_rate(&pts.iter().map(|p| p.mahalanobis).collect::<Vec<_>>()),
                mean_mc_std: pts.iter().map(|p| p.mc_std).sum::<f64>() / pts.len() as f64,
                n: pts.len(),
            });
        }
    }

    let dist: Vec<f64> = points.iter().map(|p| p.mahalanobis).collect();
    let stds: Vec<f64> = points.iter().map(|p| p.mc_std).collect();
    let errs: Vec<f64> = points.iter().map(|p| p.ape_pct).collect();
    Ok(Exp2Result {
        distance_vs_error: CorrelationReport::compute(&dist, &errs)?,
        std_vs_error: CorrelationReport::compute(&stds, &errs)?,
        summary,
        points,
        threshold,
        profile,
        model,
    })
}
