//! `hmev validate`: score fitted draws against train/test maxima and
//! append the result to a metrics ledger.

use super::{build_predictive, read_dataset};
use crate::config::RunConfig;
use anyhow::{ensure, Context, Result};
use clap::Args;
use hmev::metrics::{evaluate_model, MaximaSample, MetricsReport};
use hmev::sampler::PosteriorDraws;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub draws: PathBuf,
    /// Training dataset (the one the model was fitted on).
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out dataset.
    #[arg(long)]
    pub test: PathBuf,
    /// Metrics ledger CSV to append to.
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub t_tilde: Option<f64>,
    #[arg(long)]
    pub m_g: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Shared with the benchmark harness.
#[allow(clippy::too_many_arguments)]
pub fn validate_draws(
    draws: &PosteriorDraws,
    meta: &std::collections::BTreeMap<String, String>,
    dataset_id: &str,
    train: &hmev::Dataset,
    test: &hmev::Dataset,
    t_tilde: f64,
    band: (f64, f64),
    m_g: usize,
    seed: u64,
) -> Result<MetricsReport> {
    let pred = build_predictive(draws, meta, m_g, seed)?;
    let model = meta.get("model").cloned().unwrap_or_default();
    let train_sample = MaximaSample::new(train.observed_maxima())?;
    let test_sample = MaximaSample::new(test.observed_maxima())?;
    let report = evaluate_model(
        pred.as_block_max(),
        &model,
        dataset_id,
        seed,
        &train_sample,
        &test_sample,
        t_tilde,
        band,
    )?;
    // harmonic-mean CPO can never beat the arithmetic mean (Jensen); a
    // violation means the density matrix is corrupt
    ensure!(
        report.lpml_train <= report.lppd_in + 1e-9,
        "lpml {} exceeds lppd_in {}",
        report.lpml_train,
        report.lppd_in
    );
    Ok(report)
}

pub fn run(args: ValidateArgs) -> Result<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let (draws, meta) = PosteriorDraws::read_csv_path(&args.draws)
        .with_context(|| format!("reading draws {}", args.draws.display()))?;
    let (train, _) = read_dataset(&args.train, None)?;
    let (test, _) = read_dataset(&args.test, None)?;
    let t_tilde = args.t_tilde.unwrap_or(config.metrics.t_tilde);
    let m_g = args.m_g.unwrap_or(config.predict.m_g);
    let band = (config.predict.band_lo, config.predict.band_hi);

    let dataset_id = dataset_label(&args.train);
    let report = validate_draws(
        &draws, &meta, &dataset_id, &train, &test, t_tilde, band, m_g, args.seed,
    )?;
    report.append_to_ledger(&args.ledger)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn dataset_label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
}
