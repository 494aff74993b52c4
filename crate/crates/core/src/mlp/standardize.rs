use serde::{Deserialize, Serialize};

use crate::datagen::GasRecord;
use crate::error::{Error, Result};

/// Z-score transform of the features and the target, fit on training data.
///
/// Standard deviations use divisor `n`. A constant column gets std 1 so the
/// transform stays invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub x_mean: [f64; 3],
    pub x_std: [f64; 3],
    pub y_mean: f64,
    pub y_std: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}

impl Standardizer {
    pub fn fit(records: &[GasRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("standardizer training data"));
        }
        let n = records.len();
        let mut x_mean = [0.0; 3];
        let mut x_std = [0.0; 3];
        for j in 0..3 {
            (x_mean[j], x_std[j]) = mean_std(records.iter().map(move |r| r.features()[j]), n);
        }
        let (y_mean, y_std) = mean_std(records.iter().map(|r| r.pressure), n);
        let s = Standardizer { x_mean, x_std, y_mean, y_std };
        if !s.is_valid() {
            return Err(Error::Domain("training data contains non-finite values".into()));
        }
        Ok(s)
    }

    pub fn is_valid(&self) -> bool {
        self.x_mean.iter().chain([&self.y_mean]).all(|m| m.is_finite())
            && self.x_std.iter().chain([&self.y_std]).all(|s| s.is_finite() && *s > 0.0)
    }

    pub fn transform_x(&self, x: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|j| (x[j] - self.x_mean[j]) / self.x_std[j])
    }

    pub fn inverse_x(&self, z: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|j| z[j] * self.x_std[j] + self.x_mean[j])
    }

    pub fn transform_y(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_std
    }

    pub fn inverse_y(&self, z: f64) -> f64 {
        z * self.y_std + self.y_mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{exp1_params, generate, GasSpec};

    #[test]
    fn round_trip_and_moments() {
        let d = generate(&GasSpec::ideal(), &exp1_params(), 2000, 3).unwrap();
        let s = Standardizer::fit(&d.records).unwrap();
        let mut sum = [0.0; 3];
        for r in &d.records {
            let z = s.transform_x(r.features());
            let back = s.inverse_x(z);
            for j in 0..3 {
                assert!((back[j] - r.features()[j]).abs() <= 1e-10 * r.features()[j].abs());
                sum[j] += z[j];
            }
            let zy = s.transform_y(r.pressure);
            assert!((s.inverse_y(zy) - r.pressure).abs() < 1e-10);
        }
        assert!(sum.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn constant_column_keeps_unit_std() {
        let recs = vec![GasRecord { temperature: 300.0, volume: 1.0, moles: 2.0, pressure: 5.0 }; 4];
        let s = Standardizer::fit(&recs).unwrap();
        assert_eq!(s.y_std, 1.0);
        assert_eq!(s.transform_y(5.0), 0.0);
        assert!(Standardizer::fit(&[]).is_err());
    }
}
