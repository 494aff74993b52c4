use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Error, Result};
use crate::seed;

/// Number of stochastic passes used by the experiments.
pub const DEFAULT_PASSES: usize = 100;

/// Mean and population standard deviation of an ensemble of passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSummary {
    pub mean: f64,
    pub std: f64,
    pub n_passes: usize,
}

/// Aggregates pass outputs. Deviations are taken from the first output, so
/// an ensemble of identical values yields exactly that value and `std = 0`.
pub fn summarize(ys: &[f64]) -> Result<PredictiveSummary> {
    let Some(&y0) = ys.first() else {
        return Err(Error::Empty("pass ensemble"));
    };
    let n = ys.len() as f64;
    let mean = y0 + ys.iter().map(|y| y - y0).sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    Ok(PredictiveSummary { mean, std: var.sqrt(), n_passes: ys.len() })
}

/// Raw pressure outputs of `n_passes` forward passes.
///
/// Pass `i` draws its dropout mask from a stream seeded with
/// `derive_index(seed, i)`, so any subset of passes can be recomputed
/// independently. Layers before the dropout layer are evaluated once.
pub fn mc_samples(model: &TrainedModel, x_raw: [f64; 3], n_passes: usize, seed: u64, dropout_on: bool) -> Vec<f64> {
    let z = model.standardizer.transform_x(x_raw);
    let net = &model.params;
    let prefix = net.forward_prefix(&z);
    if !dropout_on {
        let y = model.standardizer.inverse_y(net.forward_suffix(prefix));
        return vec![y; n_passes];
    }
    (0..n_passes as u64)
        .map(|i| {
            let mut rng = seed::stream(seed::derive_index(seed, i));
            let mut act = prefix.clone();
            net.apply_dropout(&mut act, &mut rng);
            model.standardizer.inverse_y(net.forward_suffix(act))
        })
        .collect()
}

pub fn mc_predict_with(
    model: &TrainedModel,
    x_raw: [f64; 3],
    n_passes: usize,
    seed: u64,
    dropout_on: bool,
) -> Result<PredictiveSummary> {
    if n_passes < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 passes, got {n_passes}")));
    }
    summarize(&mc_samples(model, x_raw, n_passes, seed, dropout_on))
}

/// Monte Carlo Dropout prediction in atm.
pub fn mc_predict(model: &TrainedModel, x_raw: [f64; 3], n_passes: usize, seed: u64) -> Result<PredictiveSummary> {
    mc_predict_with(model, x_raw, n_passes, seed, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{NetworkConfig, NetworkParams, Standardizer};

    fn model() -> TrainedModel {
        TrainedModel {
            params: NetworkParams::init(&NetworkConfig::default(), 5).unwrap(),
            standardizer: Standardizer {
                x_mean: [300.0, 50.0, 15.0],
                x_std: [25.0, 5.0, 1.0],
                y_mean: 7.4,
                y_std: 1.1,
            },
            loss_trace: vec![],
        }
    }

    #[test]
    fn identical_passes_have_zero_spread() {
        let s = summarize(&[3.3; 2]).unwrap();
        assert_eq!((s.mean, s.std), (3.3, 0.0));
        let s = summarize(&[0.1; 100]).unwrap();
        assert_eq!((s.mean, s.std), (0.1, 0.0));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn dropout_off_gives_zero_std() {
        let m = model();
        let s = mc_predict_with(&m, [310.0, 48.0, 14.0], 100, 1, false).unwrap();
        assert_eq!(s.std, 0.0);
        assert_eq!(s.mean, crate::mlp::predict_deterministic(&m, [310.0, 48.0, 14.0]));
        assert!(mc_predict(&m, [310.0, 48.0, 14.0], 1, 1).is_err());
    }

    #[test]
    fn passes_match_full_forward() {
        let m = model();
        let x = [290.0, 55.0, 16.0];
        let ys = mc_samples(&m, x, 30, 77, true);
        let z = m.standardizer.transform_x(x);
        for (i, y) in ys.iter().enumerate() {
            let mut rng = seed::stream(seed::derive_index(77, i as u64));
            let full = m.standardizer.inverse_y(m.params.forward(&z, true, &mut rng));
            assert_eq!(*y, full);
        }
        let s = mc_predict(&m, x, 30, 77).unwrap();
        assert!(s.std > 0.0);
        assert_eq!(s.n_passes, 30);
    }

    #[test]
    fn variance_matches_moment_identity() {
        let m = model();
        let ys = mc_samples(&m, [280.0, 45.0, 15.5], 500, 3, true);
        let s = summarize(&ys).unwrap();
        let n = ys.len() as f64;
        let m1 = ys.iter().sum::<f64>() / n;
        let m2 = ys.iter().map(|y| y * y).sum::<f64>() / n;
        assert!((s.std * s.std - (m2 - m1 * m1)).abs() < 1e-10);
    }
}
