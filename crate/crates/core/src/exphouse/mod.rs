//! The two shift experiments, their error metrics, and result files.
//!
//! [`run_experiment1`] trains once on ideal-gas data and scores every gas in
//! the built-in table against it, pairing each gas's pressure divergence
//! from the training set with the model's MAPE. [`run_experiment2`] keeps
//! the ideal gas but moves the sampler, then adds Mahalanobis distances and
//! MC Dropout spread for every test point.
//!
//! Everything is derived from one master seed; see [`crate::seed`].

mod exp1;
mod exp2;
mod metrics;
mod output;

pub use exp1::{run_experiment1, Exp1Config, Exp1Result, Exp1Row, SUBSET_LABEL};
pub use exp2::{run_experiment2, Exp2Config, Exp2PointRecord, Exp2Result, Exp2SummaryRow, TestSet};
pub use metrics::{ape, average_ranks, mape, pearson, spearman, CorrelationReport};
pub use output::{
    write_exp1, write_exp2, write_manifest, ManifestEntry, EXP1_FILES, EXP1_TABLE_HEADER, EXP2_FILES,
    EXP2_POINTS_HEADER, EXP2_SUMMARY_HEADER, MANIFEST_FILE,
};

use crate::datagen::GasRecord;
use crate::error::{Error, Result};

/// Splits off the last `round(n * fraction)` records as the holdout.
///
/// Records are i.i.d. draws, so the tail is as random as any subset.
pub fn split_holdout(records: &[GasRecord], fraction: f64) -> Result<(&[GasRecord], &[GasRecord])> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParam(format!("holdout fraction {fraction} outside (0, 1)")));
    }
    let n_hold = (records.len() as f64 * fraction).round() as usize;
    if n_hold == 0 || n_hold == records.len() {
        return Err(Error::InvalidParam(format!(
            "holdout of {fraction} leaves an empty side with {} records",
            records.len()
        )));
    }
    Ok(records.split_at(records.len() - n_hold))
}
