//! Gaussian reference profiles and Mahalanobis scoring.
//!
//! A [`GaussianProfile`] stores the sample mean and covariance of the
//! training features `(T, V, N)` along with the lower Cholesky factor `L`
//! of the covariance (`S = L·Lᵀ`). A point is scored by solving `L·z = x − μ`
//! and taking `‖z‖`, which equals `√((x − μ)ᵀ S⁻¹ (x − μ))` without ever
//! forming `S⁻¹`.
//!
//! Points beyond a high percentile of the training-set distances are treated
//! as outside the training distribution.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::datagen::GasRecord;
use crate::error::{Error, Result};

pub const DEFAULT_PERCENTILE: f64 = 95.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProfile {
    mean: Vector3<f64>,
    cov: Matrix3<f64>,
    chol: Matrix3<f64>,
    ridge: f64,
    n: usize,
}

impl GaussianProfile {
    pub fn mean(&self) -> [f64; 3] {
        self.mean.into()
    }

    /// Sample covariance (divisor `n − 1`), including any ridge that was added.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = self.cov[(i, j)];
            }
        }
        out
    }

    /// Lower-triangular factor `L` with `L·Lᵀ = S`.
    pub fn factor(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = self.chol[(i, j)];
            }
        }
        out
    }

    /// Diagonal ridge added to make the covariance factorizable; usually 0.
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// `(x − μ)ᵀ S⁻¹ (x − μ)` via a forward substitution against `L`.
    pub fn squared_distance(&self, x: [f64; 3]) -> f64 {
        let d = Vector3::from(x) - self.mean;
        let l = &self.chol;
        let z0 = d[0] / l[(0, 0)];
        let z1 = (d[1] - l[(1, 0)] * z0) / l[(1, 1)];
        let z2 = (d[2] - l[(2, 0)] * z0 - l[(2, 1)] * z1) / l[(2, 2)];
        z0 * z0 + z1 * z1 + z2 * z2
    }
}

/// Fits mean and sample covariance of `features` (rows of `(T, V, N)`).
///
/// If the covariance is not numerically positive definite, a ridge of
/// `1e-9·trace(S)/3` is added to the diagonal and the factorization retried
/// once.
pub fn fit_profile(features: &[[f64; 3]]) -> Result<GaussianProfile> {
    let n = features.len();
    if n < 4 {
        return Err(Error::InvalidParam(format!("need at least 4 rows to fit a profile, got {n}")));
    }
    if features.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Domain("features contain non-finite values".into()));
    }

    let mean = features.iter().fold(Vector3::zeros(), |acc, r| acc + Vector3::from(*r)) / n as f64;
    let mut cov = Matrix3::zeros();
    for r in features {
        let d = Vector3::from(*r) - mean;
        cov += d * d.transpose();
    }
    cov /= (n - 1) as f64;
    cov = (cov + cov.transpose()) * 0.5;

    for j in 0..3 {
        if cov[(j, j)] <= 0.0 {
            return Err(Error::Degenerate(format!("feature column {j} has zero variance")));
        }
    }

    if let Some(c) = cov.cholesky() {
        return Ok(GaussianProfile { mean, cov, chol: c.l(), ridge: 0.0, n });
    }
    let ridge = 1e-9 * cov.trace() / 3.0;
    let ridged = cov + Matrix3::identity() * ridge;
    match ridged.cholesky() {
        Some(c) => Ok(GaussianProfile { mean, cov: ridged, chol: c.l(), ridge, n }),
        None => Err(Error::Degenerate("covariance is not positive definite even after ridge".into())),
    }
}

pub fn mahalanobis(profile: &GaussianProfile, x: [f64; 3]) -> f64 {
    profile.squared_distance(x).max(0.0).sqrt()
}

/// Distance of every record's `(T, V, N)` to the profile, in record order.
pub fn distances(profile: &GaussianProfile, records: &[GasRecord]) -> Vec<f64> {
    records.iter().map(|r| mahalanobis(profile, r.features())).collect()
}

/// Empirical percentile with linear interpolation between order statistics:
/// position `h = (n − 1)·p/100` in the sorted sample.
pub fn percentile(values: &[f64], pct: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("percentile input"));
    }
    if !(pct > 0.0 && pct < 100.0) {
        return Err(Error::InvalidParam(format!("percentile must lie in (0, 100), got {pct}")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("percentile input contains NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * pct / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OodThreshold {
    pub percentile: f64,
    pub value: f64,
    pub n_train: usize,
}

impl OodThreshold {
    pub fn is_outside(&self, distance: f64) -> bool {
        distance > self.value
    }

    /// Fraction of `distances` strictly above the cutoff.
    pub fn exceedance_rate(&self, distances: &[f64]) -> f64 {
        if distances.is_empty() {
            return 0.0;
        }
        distances.iter().filter(|&&d| self.is_outside(d)).count() as f64 / distances.len() as f64
    }
}

pub fn threshold_from_training(train_distances: &[f64], pct: f64) -> Result<OodThreshold> {
    Ok(OodThreshold { percentile: pct, value: percentile(train_distances, pct)?, n_train: train_distances.len() })
}
