//! Result files for the experiment pipelines.
//!
//! CSV numbers use [`fmt_decimal`] and JSON objects have sorted keys, so the
//! bytes written depend only on the results.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::exp1::{Exp1Config, Exp1Result};
use super::exp2::{Exp2Config, Exp2Result, TestSet};
use crate::datagen::builtin_gas_table;
use crate::error::{Error, Result};
use crate::io::{create, fmt_decimal};
use crate::seed::{derive_seed, Stage};

pub const EXP1_TABLE_HEADER: [&str; 4] = ["gas", "kl_nats", "js_distance", "mape_pct"];
pub const EXP2_SUMMARY_HEADER: [&str; 8] =
    ["set", "variable", "kl_nats", "js_distance", "mape_pct", "exceedance_rate", "mean_mc_std", "n"];
pub const EXP2_POINTS_HEADER: [&str; 6] = ["set", "true_p", "mc_mean", "mc_std", "mahalanobis", "ape_pct"];
pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const EXP1_FILES: [&str; 2] = ["exp1_table.csv", "exp1_correlation.json"];
pub const EXP2_FILES: [&str; 3] = ["exp2_summary.csv", "exp2_points.csv", "exp2_threshold.json"];

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `exp1_table.csv` and `exp1_correlation.json` into `dir`.
pub fn write_exp1(dir: &Path, result: &Exp1Result) -> Result<Vec<PathBuf>> {
    let table = dir.join(EXP1_FILES[0]);
    let mut w = csv_writer(&table)?;
    w.write_record(EXP1_TABLE_HEADER)?;
    for r in &result.rows {
        w.write_record([r.gas.clone(), fmt_decimal(r.kl), fmt_decimal(r.js), fmt_decimal(r.mape)])?;
    }
    finish(w, &table)?;

    let corr = dir.join(EXP1_FILES[1]);
    write_json(
        &corr,
        &json!({
            "kl_vs_mape": result.kl_vs_mape,
            "js_vs_mape": result.js_vs_mape,
        }),
    )?;
    Ok(vec![table, corr])
}

/// Writes `exp2_summary.csv`, `exp2_points.csv` and `exp2_threshold.json`
/// into `dir`.
pub fn write_exp2(dir: &Path, result: &Exp2Result) -> Result<Vec<PathBuf>> {
    let summary = dir.join(EXP2_FILES[0]);
    let mut w = csv_writer(&summary)?;
    w.write_record(EXP2_SUMMARY_HEADER)?;
    for r in &result.summary {
        w.write_record([
            r.set.label().to_string(),
            r.variable.clone(),
            fmt_decimal(r.kl),
            fmt_decimal(r.js),
            fmt_decimal(r.mape),
            fmt_decimal(r.exceedance_rate),
            fmt_decimal(r.mean_mc_std),
            r.n.to_string(),
        ])?;
    }
    finish(w, &summary)?;

    let points = dir.join(EXP2_FILES[1]);
    let mut w = csv_writer(&points)?;
    w.write_record(EXP2_POINTS_HEADER)?;
    for p in &result.points {
        w.write_record([
            p.set.label().to_string(),
            fmt_decimal(p.true_p),
            fmt_decimal(p.mc_mean),
            fmt_decimal(p.mc_std),
            fmt_decimal(p.mahalanobis),
            fmt_decimal(p.ape_pct),
        ])?;
    }
    finish(w, &points)?;

    let threshold = dir.join(EXP2_FILES[2]);
    let t = &result.threshold;
    write_json(
        &threshold,
        &json!({
            "percentile": t.percentile,
            "value": t.value,
            "n_train": t.n_train,
            "exceedance_in_distribution": result.pressure_row(TestSet::InDistribution).exceedance_rate,
            "exceedance_out_of_distribution": result.pressure_row(TestSet::OutOfDistribution).exceedance_rate,
            "mahalanobis_vs_ape": result.distance_vs_error,
            "mc_std_vs_ape": result.std_vs_error,
        }),
    )?;
    Ok(vec![summary, points, threshold])
}

/// Everything needed to rerun the experiment that produced `dir`'s files.
pub enum ManifestEntry<'a> {
    Exp1(&'a Exp1Config, &'a Exp1Result),
    Exp2(&'a Exp2Config, &'a Exp2Result),
}

impl ManifestEntry<'_> {
    fn key(&self) -> &'static str {
        match self {
            ManifestEntry::Exp1(..) => "exp1",
            ManifestEntry::Exp2(..) => "exp2",
        }
    }

    fn to_value(&self) -> Result<Value> {
        Ok(match self {
            ManifestEntry::Exp1(cfg, res) => json!({
                "config": cfg,
                "seeds": {
                    "master": cfg.seed,
                    "data_by_table_index": (0..builtin_gas_table().len()).map(|i| cfg.data_seed(i)).collect::<Vec<_>>(),
                    "init": derive_seed(cfg.seed, Stage::Init, 0),
                    "shuffle": derive_seed(cfg.seed, Stage::Shuffle, 0),
                    "train_dropout": derive_seed(cfg.seed, Stage::TrainDropout, 0),
                },
                "n_train": res.n_train,
                "n_holdout": res.n_holdout,
                "final_train_loss": res.model.loss_trace.last(),
                "files": EXP1_FILES,
            }),
            ManifestEntry::Exp2(cfg, res) => {
                let (d1, d2) = cfg.data_seeds();
                json!({
                    "config": cfg,
                    "seeds": {
                        "master": cfg.seed,
                        "data_first": d1,
                        "data_second": d2,
                        "init": derive_seed(cfg.seed, Stage::Init, 0),
                        "shuffle": derive_seed(cfg.seed, Stage::Shuffle, 0),
                        "train_dropout": derive_seed(cfg.seed, Stage::TrainDropout, 0),
                        "mc_dropout_rule": "derive_seed(master, mc_dropout, point_index)",
                    },
                    "n_train": res.threshold.n_train,
                    "n_points": res.points.len(),
                    "final_train_loss": res.model.loss_trace.last(),
                    "files": EXP2_FILES,
                })
            }
        })
    }
}

/// Adds or replaces one experiment's entry in `dir/run_manifest.json`,
/// keeping any entry the other experiment already wrote there.
pub fn write_manifest(dir: &Path, entry: ManifestEntry<'_>) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut root = match std::fs::read_to_string(&path) {
        Ok(text) => match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        },
        Err(_) => Map::new(),
    };
    root.insert("crate_version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    root.insert(entry.key().into(), entry.to_value()?);
    write_json(&path, &root)?;
    Ok(path)
}
