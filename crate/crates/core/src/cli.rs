//! The `shiftgauge` command-line driver.
//!
//! Every numeric setting is resolved as flag, then `--config` JSON, then
//! built-in default. Exit codes: 0 success, 1 usage error, 2 data or
//! validation error, 3 numeric failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::datagen::{builtin_gas_table, exp1_params, generate, SamplerParams, DEFAULT_SIZE};
use crate::error::{Error, Result};
use crate::exphouse::{
    run_experiment1, run_experiment2, write_exp1, write_exp2, write_manifest, Exp1Config, Exp2Config, ManifestEntry,
};
use crate::io::{create, fmt_decimal, read_records, read_table, write_dataset, DATASET_COLUMNS};
use crate::mlp::{mc_predict, read_checkpoint, train, write_checkpoint, NetworkConfig, TrainConfig, DEFAULT_PASSES};
use crate::ood::{distances, fit_profile, DEFAULT_PERCENTILE};
use crate::seed::{derive_seed, Stage};
use crate::similarity::{divergence_report, write_reports, BinningConfig};

pub const MODEL_FILE: &str = "model.bin";
pub const PREDICTIONS_FILE: &str = "predictions.csv";

#[derive(Debug, Parser)]
#[command(name = "shiftgauge", version, about = "Distribution-shift experiments on synthetic gas data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in gases and their van der Waals constants.
    Gases,
    /// Sample a gas dataset to CSV with a metadata sidecar.
    Generate(GenerateArgs),
    /// KL divergence and JS distance between one column of two CSV files.
    Metrics(MetricsArgs),
    /// Train a network on a dataset CSV and save a checkpoint.
    Train(TrainArgs),
    /// MC Dropout predictions from a checkpoint.
    Predict(PredictArgs),
    /// Target-drift experiment across all gases.
    Exp1(ExpArgs),
    /// Covariate-shift experiment with Mahalanobis scoring.
    Exp2(Exp2Args),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run configuration; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Gas name or formula, e.g. `Xenon` or `CO2`.
    #[arg(long)]
    pub gas: Option<String>,
    #[arg(short = 'n', long = "samples")]
    pub n: Option<usize>,
    /// File name inside the output directory; defaults to the gas name.
    #[arg(long)]
    pub file: Option<String>,
    #[arg(long)]
    pub mu_t: Option<f64>,
    #[arg(long)]
    pub sigma_t: Option<f64>,
    #[arg(long)]
    pub mu_v: Option<f64>,
    #[arg(long)]
    pub sigma_v: Option<f64>,
    #[arg(long)]
    pub mu_n: Option<f64>,
    #[arg(long)]
    pub sigma_n: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub file_a: PathBuf,
    pub file_b: PathBuf,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV with the four gas columns.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Default)]
pub struct TrainingFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub passes: Option<usize>,
    /// Training CSV; adds a Mahalanobis distance column against it.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ExpArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub holdout: Option<f64>,
    #[command(flatten)]
    pub training: TrainingFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Exp2Args {
    #[arg(long)]
    pub passes: Option<usize>,
    #[arg(long)]
    pub percentile: Option<f64>,
    #[command(flatten)]
    pub exp: ExpArgs,
}

/// Optional settings read from `--config`. Keys a command does not use are
/// ignored by it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub gas: Option<String>,
    pub samples: Option<usize>,
    pub params: Option<SamplerParams>,
    pub column: Option<String>,
    pub bins: Option<usize>,
    pub holdout: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub step_size: Option<f64>,
    pub hidden: Option<Vec<usize>>,
    pub dropout_rate: Option<f64>,
    pub passes: Option<usize>,
    pub percentile: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), reason: e.to_string() })
    }

    fn network(&self) -> NetworkConfig {
        let mut net = match &self.hidden {
            Some(h) => NetworkConfig::with_hidden(h.clone()),
            None => NetworkConfig::default(),
        };
        if let Some(rate) = self.dropout_rate {
            net.dropout_rate = rate;
        }
        net
    }

    fn training(&self, flags: &TrainingFlags, seed: u64) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: flags.epochs.or(self.epochs).unwrap_or(d.epochs),
            batch_size: flags.batch_size.or(self.batch_size).unwrap_or(d.batch_size),
            step_size: flags.step_size.or(self.step_size).unwrap_or(d.step_size),
            seed,
            ..d
        }
    }
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."))
}

fn seed_of(common: &Common, cfg: &RunConfig) -> u64 {
    common.seed.or(cfg.seed).unwrap_or(0)
}

fn file_slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Gases => cmd_gases(out),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Metrics(a) => cmd_metrics(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Exp1(a) => cmd_exp1(&a, out),
        Command::Exp2(a) => cmd_exp2(&a, out),
    }
}

fn cmd_gases(out: &mut dyn Write) -> Result<()> {
    let table = builtin_gas_table();
    writeln!(out, "{:<16} {:<7} {:>8} {:>8}", "name", "formula", "a", "b").map_err(stdout_err)?;
    for g in table.entries() {
        let symbol = if g.symbol.is_empty() { "-" } else { &g.symbol };
        writeln!(out, "{:<16} {:<7} {:>8.3} {:>8.4}", g.name, symbol, g.a, g.b).map_err(stdout_err)?;
    }
    writeln!(out, "R = {} L·atm/(mol·K)", table.gas_constant()).map_err(stdout_err)
}

fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.common.config.as_deref())?;
    let table = builtin_gas_table();
    let gas = table.lookup(a.gas.as_deref().or(cfg.gas.as_deref()).unwrap_or("Ideal Gas"))?;
    let base = cfg.params.unwrap_or_else(exp1_params);
    let params = SamplerParams {
        mu_t: a.mu_t.unwrap_or(base.mu_t),
        sigma_t: a.sigma_t.unwrap_or(base.sigma_t),
        mu_v: a.mu_v.unwrap_or(base.mu_v),
        sigma_v: a.sigma_v.unwrap_or(base.sigma_v),
        mu_n: a.mu_n.unwrap_or(base.mu_n),
        sigma_n: a.sigma_n.unwrap_or(base.sigma_n),
    };
    let n = a.n.or(cfg.samples).unwrap_or(DEFAULT_SIZE);
    let seed = seed_of(&a.common, &cfg);
    let dataset = generate(gas, &params, n, seed)?;
    let file = a.file.clone().unwrap_or_else(|| format!("{}.csv", file_slug(&gas.name)));
    let path = out_dir(&a.common, &cfg).join(file);
    write_dataset(&path, &dataset)?;
    writeln!(out, "wrote {} rows of {} to {}", n, gas.name, path.display()).map_err(stdout_err)
}

fn cmd_metrics(a: &MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.config.as_deref())?;
    let column = a.column.as_deref().or(cfg.column.as_deref()).unwrap_or(DATASET_COLUMNS[3]);
    let binning = BinningConfig::with_bins(a.bins.or(cfg.bins).unwrap_or(BinningConfig::default().n_bins));
    let ta = read_table(&a.file_a)?;
    let tb = read_table(&a.file_b)?;
    let report = divergence_report(ta.column(column)?, tb.column(column)?, &binning)?;
    let label = format!("{}:{column}", a.file_b.display());
    write_reports(&mut *out, &[(label, report)])
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.common.config.as_deref())?;
    let records = read_records(&a.data)?;
    let training = cfg.training(&a.training, seed_of(&a.common, &cfg));
    let model = train(&records, &cfg.network(), &training)?;
    let path = out_dir(&a.common, &cfg).join(MODEL_FILE);
    write_checkpoint(&path, &model)?;
    let loss = model.loss_trace.last().copied().unwrap_or(f64::NAN);
    writeln!(
        out,
        "trained on {} rows for {} epochs, final loss {loss:.6e}; saved {}",
        records.len(),
        training.epochs,
        path.display()
    )
    .map_err(stdout_err)
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.common.config.as_deref())?;
    let model = read_checkpoint(&a.model)?;
    let records = read_records(&a.data)?;
    let passes = a.passes.or(cfg.passes).unwrap_or(DEFAULT_PASSES);
    let seed = seed_of(&a.common, &cfg);
    let dists = match &a.reference {
        Some(r) => {
            let reference: Vec<[f64; 3]> = read_records(r)?.iter().map(|r| r.features()).collect();
            Some(distances(&fit_profile(&reference)?, &records))
        }
        None => None,
    };

    let path = out_dir(&a.common, &cfg).join(PREDICTIONS_FILE);
    let mut w = csv::Writer::from_writer(create(&path)?);
    let mut header = vec!["temperature_K", "volume_L", "moles_mol", "mc_mean", "mc_std"];
    if dists.is_some() {
        header.push("mahalanobis");
    }
    w.write_record(&header)?;
    for (i, r) in records.iter().enumerate() {
        let s = mc_predict(&model, r.features(), passes, derive_seed(seed, Stage::McDropout, i as u64))?;
        let mut row = vec![
            fmt_decimal(r.temperature),
            fmt_decimal(r.volume),
            fmt_decimal(r.moles),
            fmt_decimal(s.mean),
            fmt_decimal(s.std),
        ];
        if let Some(d) = &dists {
            row.push(fmt_decimal(d[i]));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    writeln!(out, "wrote {} predictions to {}", records.len(), path.display()).map_err(stdout_err)
}

fn exp1_config(a: &ExpArgs, cfg: &RunConfig) -> Exp1Config {
    let d = Exp1Config::default();
    let seed = seed_of(&a.common, cfg);
    Exp1Config {
        seed,
        n_samples: a.samples.or(cfg.samples).unwrap_or(d.n_samples),
        holdout_fraction: a.holdout.or(cfg.holdout).unwrap_or(d.holdout_fraction),
        params: cfg.params.unwrap_or(d.params),
        binning: BinningConfig::with_bins(a.bins.or(cfg.bins).unwrap_or(d.binning.n_bins)),
        network: cfg.network(),
        training: cfg.training(&a.training, seed),
    }
}

fn cmd_exp1(a: &ExpArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.common.config.as_deref())?;
    let config = exp1_config(a, &cfg);
    let result = run_experiment1(&config)?;
    let dir = out_dir(&a.common, &cfg);
    let mut files = write_exp1(&dir, &result)?;
    files.push(write_manifest(&dir, ManifestEntry::Exp1(&config, &result))?);

    writeln!(out, "{:<20} {:>10} {:>10} {:>10}", "gas", "kl_nats", "js_dist", "mape_pct").map_err(stdout_err)?;
    for r in &result.rows {
        writeln!(out, "{:<20} {:>10.4} {:>10.4} {:>10.4}", r.gas, r.kl, r.js, r.mape).map_err(stdout_err)?;
    }
    writeln!(
        out,
        "spearman(kl, mape) = {:.4}, spearman(js, mape) = {:.4}",
        result.kl_vs_mape.spearman, result.js_vs_mape.spearman
    )
    .map_err(stdout_err)?;
    list_files(out, &files)
}

fn cmd_exp2(a: &Exp2Args, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(a.exp.common.config.as_deref())?;
    let base = exp1_config(&a.exp, &cfg);
    let d = Exp2Config::default();
    let config = Exp2Config {
        seed: base.seed,
        n_samples: base.n_samples,
        holdout_fraction: base.holdout_fraction,
        params: d.params,
        binning: base.binning,
        network: base.network,
        training: base.training,
        n_passes: a.passes.or(cfg.passes).unwrap_or(DEFAULT_PASSES),
        percentile: a.percentile.or(cfg.percentile).unwrap_or(DEFAULT_PERCENTILE),
    };
    let result = run_experiment2(&config)?;
    let dir = out_dir(&a.exp.common, &cfg);
    let mut files = write_exp2(&dir, &result)?;
    files.push(write_manifest(&dir, ManifestEntry::Exp2(&config, &result))?);

    writeln!(out, "{:<22} {:>10} {:>10} {:>10} {:>10}", "set", "kl_nats", "js_dist", "mape_pct", "exceed")
        .map_err(stdout_err)?;
    for r in result.summary.iter().filter(|r| r.variable == DATASET_COLUMNS[3]) {
        writeln!(
            out,
            "{:<22} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.set.label(),
            r.kl,
            r.js,
            r.mape,
            r.exceedance_rate
        )
        .map_err(stdout_err)?;
    }
    writeln!(
        out,
        "threshold (p{}) = {:.4}; spearman(mahalanobis, ape) = {:.4}",
        result.threshold.percentile, result.threshold.value, result.distance_vs_error.spearman
    )
    .map_err(stdout_err)?;
    list_files(out, &files)
}

fn list_files(out: &mut dyn Write, files: &[PathBuf]) -> Result<()> {
    for f in files {
        writeln!(out, "wrote {}", f.display()).map_err(stdout_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("shiftgauge").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn gases_lists_the_table() {
        let (code, out, _) = run_str(&["gases"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().filter(|l| !l.starts_with("name") && !l.starts_with("R =")).count(), 10);
        let methane = out.lines().find(|l| l.starts_with("Methane")).unwrap();
        assert!(methane.contains("2.250") && methane.contains("0.0428"), "{methane}");
        let ideal = out.lines().find(|l| l.starts_with("Ideal Gas")).unwrap();
        assert!(ideal.contains("0.000") && ideal.contains("0.0000"), "{ideal}");
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_str(&["nonsense"]).0, 1);
        assert_eq!(run_str(&["generate", "--samples", "many"]).0, 1);
        assert_eq!(run_str(&["--help"]).0, 0);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.json");
        std::fs::write(&cfg_path, r#"{"seed": 5, "samples": 40, "epochs": 3, "bins": 10}"#).unwrap();
        let cfg = RunConfig::load(Some(&cfg_path)).unwrap();
        let args = ExpArgs {
            samples: Some(60),
            bins: None,
            holdout: None,
            training: TrainingFlags::default(),
            common: Common { seed: None, out: None, config: Some(cfg_path) },
        };
        let c = exp1_config(&args, &cfg);
        assert_eq!((c.seed, c.n_samples, c.binning.n_bins, c.training.epochs), (5, 60, 10, 3));
        assert_eq!(c.training.seed, 5);
        assert_eq!(c.holdout_fraction, 0.2);

        std::fs::write(dir.path().join("bad.json"), r#"{"sed": 5}"#).unwrap();
        assert!(RunConfig::load(Some(&dir.path().join("bad.json"))).is_err());
    }

    #[test]
    fn slugs() {
        assert_eq!(file_slug("Carbon Dioxide"), "carbon_dioxide");
    }
}
