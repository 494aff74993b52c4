use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Adam, NetworkConfig, NetworkParams, Standardizer};
use crate::datagen::GasRecord;
use crate::error::{Error, Result};
use crate::seed::{self, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Parent of the init, shuffle and dropout-mask streams.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 200, batch_size: 32, step_size: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParam("epochs and batch size must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidParam(format!("step size must be positive, got {}", self.step_size)));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2) && self.epsilon > 0.0) {
            return Err(Error::InvalidParam("Adam decay rates must lie in [0, 1) and epsilon > 0".into()));
        }
        Ok(())
    }
}

/// Trained weights, the standardizer they expect, and per-epoch mean loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: NetworkParams,
    pub standardizer: Standardizer,
    pub loss_trace: Vec<f64>,
}

/// Fits the standardizer on `records`, then minimizes MSE on standardized
/// targets with Adam over shuffled minibatches, dropout active.
///
/// Weight init, shuffling and dropout masks each draw from their own stream
/// derived from `train_config.seed`, so the result is a pure function of
/// `(records, configs)`.
pub fn train(records: &[GasRecord], net_config: &NetworkConfig, train_config: &TrainConfig) -> Result<TrainedModel> {
    net_config.validate()?;
    train_config.validate()?;
    if net_config.input_dim != 3 {
        return Err(Error::InvalidParam("gas models take exactly 3 inputs".into()));
    }
    if records.len() < train_config.batch_size {
        return Err(Error::InvalidParam(format!(
            "{} training rows is fewer than batch size {}",
            records.len(),
            train_config.batch_size
        )));
    }

    let standardizer = Standardizer::fit(records)?;
    let inputs: Vec<f64> = records.iter().flat_map(|r| standardizer.transform_x(r.features())).collect();
    let targets: Vec<f64> = records.iter().map(|r| standardizer.transform_y(r.pressure)).collect();

    let mut params = NetworkParams::init(net_config, train_config.seed)?;
    let mut opt =
        Adam::new(&params.layers, train_config.step_size, train_config.beta1, train_config.beta2, train_config.epsilon);
    let mut shuffle_rng = seed::stream(seed::derive_seed(train_config.seed, Stage::Shuffle, 0));
    let mut dropout_rng = seed::stream(seed::derive_seed(train_config.seed, Stage::TrainDropout, 0));

    let n = records.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_x = Vec::with_capacity(train_config.batch_size * 3);
    let mut batch_y = Vec::with_capacity(train_config.batch_size);
    let mut loss_trace = Vec::with_capacity(train_config.epochs);

    for epoch in 0..train_config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sse = 0.0;
        for chunk in order.chunks(train_config.batch_size) {
            batch_x.clear();
            batch_y.clear();
            for &i in chunk {
                batch_x.extend_from_slice(&inputs[3 * i..3 * i + 3]);
                batch_y.push(targets[i]);
            }
            let (loss, grads) = params.batch_loss_and_grad(&batch_x, &batch_y, Some(&mut dropout_rng))?;
            sse += loss * chunk.len() as f64;
            opt.step(&mut params.layers, &grads);
        }
        let epoch_loss = sse / n as f64;
        if !epoch_loss.is_finite() || !params.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        loss_trace.push(epoch_loss);
    }

    Ok(TrainedModel { params, standardizer, loss_trace })
}

/// Pressure prediction with dropout off, in atm.
pub fn predict_deterministic(model: &TrainedModel, x_raw: [f64; 3]) -> f64 {
    let z = model.standardizer.transform_x(x_raw);
    // the stream is never read with dropout off
    let mut unused = seed::stream(0);
    let y = model.params.forward(&z, false, &mut unused);
    model.standardizer.inverse_y(y)
}
