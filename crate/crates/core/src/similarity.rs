//! Histogram estimates of KL-divergence and Jensen–Shannon distance between
//! two one-dimensional samples.
//!
//! Both samples are binned on one shared, equal-width grid spanning the union
//! of their ranges. Counts are normalized and then additively smoothed so that
//! every bin holds at least `smoothing_eps`, which keeps the divergence finite
//! when one sample has empty tail bins.
//!
//! KL is reported in nats. The JS divergence uses base-2 logarithms, so the
//! distance `√JSD` lies in `[0, 1]`.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub n_bins: usize,
    pub smoothing_eps: f64,
}

impl Default for BinningConfig {
    fn default() -> Self {
        BinningConfig { n_bins: 50, smoothing_eps: 1e-10 }
    }
}

impl BinningConfig {
    pub fn with_bins(n_bins: usize) -> Self {
        BinningConfig { n_bins, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidParam(format!("need at least 2 bins, got {}", self.n_bins)));
        }
        if !(self.smoothing_eps > 0.0 && self.smoothing_eps < 1.0 / self.n_bins as f64) {
            return Err(Error::InvalidParam(format!(
                "smoothing floor {} must lie in (0, 1/n_bins)",
                self.smoothing_eps
            )));
        }
        Ok(())
    }
}

/// Probability mass over `edges.len() - 1` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    probs: Vec<f64>,
}

impl Histogram {
    /// Wraps precomputed probabilities. The probabilities must be nonnegative
    /// and sum to one; no smoothing is applied.
    pub fn from_probs(edges: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if edges.len() != probs.len() + 1 || probs.is_empty() {
            return Err(Error::LengthMismatch { left: edges.len(), right: probs.len() + 1 });
        }
        if edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(Error::InvalidParam("bin edges must be strictly increasing".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParam("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParam(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Histogram { edges, probs })
    }

    /// Unit-spaced edges `0, 1, …, k`, for hand-built distributions.
    pub fn unit_bins(probs: Vec<f64>) -> Result<Self> {
        let edges = (0..=probs.len()).map(|i| i as f64).collect();
        Self::from_probs(edges, probs)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_bins(&self) -> usize {
        self.probs.len()
    }

    fn same_grid(&self, other: &Histogram) -> bool {
        self.edges.len() == other.edges.len()
            && self.edges.iter().zip(&other.edges).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_samples(xs: &[f64], what: &'static str) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty(what));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("{what} contains non-finite values")));
    }
    Ok(())
}

/// Bins `xs` and `ys` on a shared grid over `[min, max]` of their union.
pub fn build_shared_histograms(xs: &[f64], ys: &[f64], config: &BinningConfig) -> Result<(Histogram, Histogram)> {
    config.validate()?;
    check_samples(xs, "first sample")?;
    check_samples(ys, "second sample")?;

    let (lo, hi) = xs.iter().chain(ys).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi <= lo {
        return Err(Error::Degenerate(format!("all samples equal {lo}; cannot bin")));
    }

    let k = config.n_bins;
    let span = hi - lo;
    let mut edges: Vec<f64> = (0..=k).map(|i| lo + span * (i as f64 / k as f64)).collect();
    edges[k] = hi;

    let smooth = |sample: &[f64]| {
        let mut counts = vec![0usize; k];
        for &x in sample {
            let idx = (((x - lo) / span) * k as f64) as usize;
            counts[idx.min(k - 1)] += 1;
        }
        let n = sample.len() as f64;
        let keep = 1.0 - k as f64 * config.smoothing_eps;
        counts.into_iter().map(|c| config.smoothing_eps + keep * (c as f64 / n)).collect::<Vec<f64>>()
    };

    Ok((Histogram { edges: edges.clone(), probs: smooth(xs) }, Histogram { edges, probs: smooth(ys) }))
}

/// `Σ pᵢ·ln(pᵢ/qᵢ)` in nats. Bins with `pᵢ = 0` contribute nothing.
///
/// The sum is clamped at zero to absorb rounding on near-identical inputs.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::EdgeMismatch);
    }
    let kl: f64 = p.probs.iter().zip(&q.probs).filter(|(pi, _)| **pi > 0.0).map(|(pi, qi)| pi * (pi / qi).ln()).sum();
    Ok(kl.max(0.0))
}

/// Square root of the base-2 Jensen–Shannon divergence; in `[0, 1]`.
pub fn js_distance(p: &Histogram, q: &Histogram) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::EdgeMismatch);
    }
    let term = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    // per-bin terms are symmetric in (p, q) so the result is exactly symmetric
    let jsd: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(&pi, &qi)| {
            let m = 0.5 * (pi + qi);
            term(pi, m) + term(qi, m)
        })
        .sum::<f64>()
        * 0.5;
    Ok(jsd.clamp(0.0, 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub kl: f64,
    pub js_distance: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub binning: BinningConfig,
}

/// KL(a‖b) and JS(a, b), with `a` the reference sample.
pub fn divergence_report(sample_a: &[f64], sample_b: &[f64], config: &BinningConfig) -> Result<DivergenceReport> {
    let (p, q) = build_shared_histograms(sample_a, sample_b, config)?;
    Ok(DivergenceReport {
        kl: kl_divergence(&p, &q)?,
        js_distance: js_distance(&p, &q)?,
        n_a: sample_a.len(),
        n_b: sample_b.len(),
        binning: *config,
    })
}

pub const REPORT_HEADER: [&str; 6] = ["dataset", "kl_nats", "js_distance", "n_a", "n_b", "n_bins"];

/// Writes labelled reports as CSV with [`REPORT_HEADER`].
pub fn write_reports<W: Write>(out: W, reports: &[(String, DivergenceReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for (label, r) in reports {
        w.write_record([
            label.clone(),
            r.kl.to_string(),
            r.js_distance.to_string(),
            r.n_a.to_string(),
            r.n_b.to_string(),
            r.binning.n_bins.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(p: &[f64]) -> Histogram {
        Histogram::unit_bins(p.to_vec()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BinningConfig::default().validate().is_ok());
        assert!(BinningConfig::with_bins(1).validate().is_err());
        let bad = BinningConfig { n_bins: 10, smoothing_eps: 0.2 };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identical_samples_identical_histograms() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let (p, q) = build_shared_histograms(&xs, &xs, &BinningConfig::default()).unwrap();
        assert_eq!(p, q);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_symmetric_placement() {
        let (p, q) = build_shared_histograms(&[0.0, 1.0], &[0.0, 1.0], &BinningConfig::with_bins(2)).unwrap();
        for probs in [p.probs(), q.probs()] {
            assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[1] - 0.5).abs() < 1e-12);
        }
        assert_eq!(p.edges(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn disjoint_halves() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 2.0).collect();
        let cfg = BinningConfig::with_bins(4);
        let (p, q) = build_shared_histograms(&xs, &ys, &cfg).unwrap();
        // grid is [0, 2.99] in four bins of width 0.7475
        let lower: f64 = p.probs()[..2].iter().sum();
        let upper: f64 = q.probs()[2..].iter().sum();
        assert!((lower - (1.0 - 2.0 * cfg.smoothing_eps)).abs() < 1e-12);
        assert!((upper - (1.0 - 2.0 * cfg.smoothing_eps)).abs() < 1e-12);
        for &pr in &p.probs()[2..] {
            assert!((pr - cfg.smoothing_eps).abs() < 1e-20);
        }
        for &pr in &q.probs()[..2] {
            assert!((pr - cfg.smoothing_eps).abs() < 1e-20);
        }
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        let cfg = BinningConfig::default();
        assert!(matches!(build_shared_histograms(&[3.0, 3.0], &[3.0], &cfg), Err(Error::Degenerate(_))));
        assert!(matches!(build_shared_histograms(&[], &[1.0, 2.0], &cfg), Err(Error::Empty(_))));
        assert!(build_shared_histograms(&[f64::NAN, 1.0], &[2.0], &cfg).is_err());
    }

    #[test]
    fn kl_hand_values() {
        let p = h(&[0.5, 0.5]);
        let q = h(&[0.25, 0.75]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let forward = kl_divergence(&p, &q).unwrap();
        let backward = kl_divergence(&q, &p).unwrap();
        assert!((forward - (0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln())).abs() < 1e-12);
        assert!((forward - 0.1438).abs() < 1e-4);
        assert!((backward - 0.1308).abs() < 1e-4);
        assert!(forward != backward);
    }

    #[test]
    fn js_hand_values() {
        assert_eq!(js_distance(&h(&[0.3, 0.7]), &h(&[0.3, 0.7])).unwrap(), 0.0);
        assert!((js_distance(&h(&[1.0, 0.0]), &h(&[0.0, 1.0])).unwrap() - 1.0).abs() < 1e-15);
        let d = js_distance(&h(&[1.0, 0.0]), &h(&[0.5, 0.5])).unwrap();
        assert!((d - 0.5579).abs() < 1e-4, "{d}");
    }

    #[test]
    fn edge_mismatch() {
        let p = h(&[0.5, 0.5]);
        let q = Histogram::from_probs(vec![0.0, 1.0, 3.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(kl_divergence(&p, &q), Err(Error::EdgeMismatch)));
        assert!(matches!(js_distance(&p, &q), Err(Error::EdgeMismatch)));
        assert!(Histogram::from_probs(vec![0.0, 1.0], vec![0.4]).is_err());
    }

    #[test]
    fn report_identity_and_symmetry() {
        let a: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x * 1.1 + 3.0).collect();
        let cfg = BinningConfig::default();
        let same = divergence_report(&a, &a, &cfg).unwrap();
        assert_eq!((same.kl, same.js_distance), (0.0, 0.0));
        let ab = divergence_report(&a, &b, &cfg).unwrap();
        let ba = divergence_report(&b, &a, &cfg).unwrap();
        assert_eq!(ab.js_distance, ba.js_distance);
        assert_ne!(ab.kl, ba.kl);
    }

    #[test]
    fn report_csv() {
        let cfg = BinningConfig::default();
        let r = divergence_report(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &cfg).unwrap();
        let mut buf = Vec::new();
        write_reports(&mut buf, &[("x".into(), r)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dataset,kl_nats,js_distance,n_a,n_b,n_bins\nx,"));
        assert!(text.trim_end().ends_with(",3,3,50"));
    }

    fn prob_vec(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, k).prop_map(|w| {
            let s: f64 = w.iter().sum::<f64>() + 1e-3;
            let mut p: Vec<f64> = w.iter().map(|x| (x + 1e-3 / w.len() as f64) / s).collect();
            let t: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= t);
            p
        })
    }

    proptest! {
        #[test]
        fn kl_nonnegative_js_bounded_symmetric(p in prob_vec(8), q in prob_vec(8)) {
            let (p, q) = (h(&p), h(&q));
            prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
            let d = js_distance(&p, &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, js_distance(&q, &p).unwrap());
        }
    }
}
