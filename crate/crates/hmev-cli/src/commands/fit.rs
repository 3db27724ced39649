//! `hmev fit`: posterior draws for one model on one dataset.

use super::{ensure_dir, read_dataset};
use crate::config::{metadata, RunConfig};
use crate::ConvergenceFailure;
use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use hmev::model::{threshold_select, GevModel, HmevModel, HmevPriors, PotModel};
use hmev::sampler::{run_hmc, Diagnostics, PosteriorDraws, SamplerConfig};
use serde::Serialize;
use std::path::PathBuf;

/// Largest split R-hat accepted before the command exits nonzero.
pub const RHAT_GATE: f64 = 1.05;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelId {
    Hmev,
    Gev,
    Pot,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Hmev => "hmev",
            ModelId::Gev => "gev",
            ModelId::Pot => "pot",
        }
    }
}

#[derive(Args)]
pub struct FitArgs {
    /// Block dataset CSV (block,event,magnitude).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelId,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Prior configuration TOML (hmev only); default is elicited from the
    /// record.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Days per block when the dataset carries no n_t metadata.
    #[arg(long)]
    pub block_size: Option<u32>,
    /// Fixed POT threshold in data units (overrides the quantile rule).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Serialize)]
struct DiagnosticsFile<'a> {
    model: &'a str,
    seed: u64,
    version: &'a str,
    config_hash: String,
    sampler: &'a SamplerConfig,
    threshold: Option<f64>,
    diagnostics: &'a Diagnostics,
}

/// Library-level fit shared with the benchmark harness.
pub fn fit_model(
    model: ModelId,
    data: &hmev::Dataset,
    priors: Option<&HmevPriors>,
    threshold_quantile: f64,
    threshold_override: Option<f64>,
    sampler: &SamplerConfig,
) -> Result<(PosteriorDraws, Diagnostics, Option<f64>)> {
    match model {
        ModelId::Hmev => {
            let priors = match priors {
                Some(p) => p.clone(),
                None => HmevPriors::from_data(data)?,
            };
            let m = HmevModel::new(data, priors)?;
            let (draws, diag) = run_hmc(&m, sampler)?;
            Ok((draws, diag, None))
        }
        ModelId::Gev => {
            let maxima = data.observed_maxima();
            let m = GevModel::from_maxima(maxima)?;
            let (draws, diag) = run_hmc(&m, sampler)?;
            Ok((draws, diag, None))
        }
        ModelId::Pot => {
            let u = match threshold_override {
                Some(u) => u,
                None => threshold_select(data, threshold_quantile)?,
            };
            let m = PotModel::from_dataset(data, u)?;
            let (draws, diag) = run_hmc(&m, sampler)?;
            Ok((draws, diag, Some(u)))
        }
    }
}

pub fn run(args: FitArgs) -> Result<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let mut sampler = config.sampler.with_seed(args.seed);
    if let Some(c) = args.chains {
        sampler.chains = c;
    }
    if let Some(i) = args.iterations {
        sampler.iterations = i;
    }
    let (data, _meta) = read_dataset(&args.data, args.block_size)?;
    let priors = args
        .priors
        .as_deref()
        .map(|p| -> Result<HmevPriors> {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading priors {}", p.display()))?;
            Ok(HmevPriors::from_toml(&text)?)
        })
        .transpose()?;

    ensure_dir(&args.out)?;
    let fit = fit_model(
        args.model,
        &data,
        priors.as_ref(),
        config.pot.threshold_quantile,
        args.threshold,
        &sampler,
    );
    let (draws, diag, threshold) = match fit {
        Ok(ok) => ok,
        Err(err) => {
            // diagnostic dump before the nonzero exit
            std::fs::write(
                args.out.join("diagnostics.json"),
                serde_json::to_string_pretty(&serde_json::json!({
                    "model": args.model.name(),
                    "seed": args.seed,
                    "error": err.to_string(),
                }))?,
            )?;
            return Err(ConvergenceFailure(format!("sampler aborted: {err}")).into());
        }
    };

    let mut extra = vec![
        ("model", args.model.name().to_string()),
        ("n_t", data.block_size().to_string()),
        ("n_blocks", data.n_blocks().to_string()),
    ];
    if let Some(u) = threshold {
        extra.push(("threshold", u.to_string()));
    }
    let meta = metadata(&config, args.seed, &extra);
    draws.write_csv_path(&args.out.join("draws.csv"), &meta)?;

    let dfile = DiagnosticsFile {
        model: args.model.name(),
        seed: args.seed,
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(args.seed),
        sampler: &sampler,
        threshold,
        diagnostics: &diag,
    };
    std::fs::write(args.out.join("diagnostics.json"), serde_json::to_string_pretty(&dfile)?)?;

    println!(
        "fit {}: {} draws, max rhat {:.4}, min bulk ESS {:.0}, {} divergences",
        args.model.name(),
        draws.n_draws(),
        diag.max_rhat,
        diag.min_ess_bulk,
        diag.divergences
    );
    if diag.max_rhat > RHAT_GATE {
        return Err(ConvergenceFailure(format!(
            "max split R-hat {:.4} exceeds the {RHAT_GATE} gate",
            diag.max_rhat
        ))
        .into());
    }
    Ok(())
}
