//! Feed-forward regression network with Monte Carlo Dropout inference.
//!
//! The default architecture maps standardized `(T, V, N)` through three ELU
//! layers of 64, 64 and 32 units, applies dropout (rate 0.1) to the 32-unit
//! layer, and ends in a single linear output unit predicting standardized
//! pressure.
//!
//! Training minimizes mean squared error with Adam on minibatches, dropout
//! active. At inference the same dropout can be kept on: [`mc_predict`] runs
//! many stochastic passes and reports their mean and population standard
//! deviation in pressure units.

mod adam;
mod checkpoint;
mod mc;
mod network;
mod standardize;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::Adam;
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use mc::{mc_predict, mc_predict_with, mc_samples, summarize, PredictiveSummary, DEFAULT_PASSES};
pub use network::{Dense, NetworkParams};
pub use standardize::Standardizer;
pub use train::{predict_deterministic, train, TrainConfig, TrainedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub elu_alpha: f64,
    pub dropout_rate: f64,
    /// Index into `hidden` of the layer whose outputs are dropped.
    pub dropout_after: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { input_dim: 3, hidden: vec![64, 64, 32], elu_alpha: 1.0, dropout_rate: 0.1, dropout_after: 2 }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidParam(format!(
                "layer widths must be positive (input {}, hidden {:?})",
                self.input_dim, self.hidden
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidParam(format!("dropout rate {} outside [0, 1)", self.dropout_rate)));
        }
        if self.dropout_after >= self.hidden.len() {
            return Err(Error::InvalidParam(format!(
                "dropout layer index {} but only {} hidden layers",
                self.dropout_after,
                self.hidden.len()
            )));
        }
        if !(self.elu_alpha > 0.0 && self.elu_alpha.is_finite()) {
            return Err(Error::InvalidParam("ELU alpha must be positive".into()));
        }
        Ok(())
    }

    /// Same architecture with dropout placed after the last hidden layer.
    pub fn with_hidden(hidden: Vec<usize>) -> Self {
        let dropout_after = hidden.len().saturating_sub(1);
        NetworkConfig { hidden, dropout_after, ..Self::default() }
    }
}
