//! `hmev predict`: return-level curves with credible bands and posterior
//! predictive check samples.

use super::{build_predictive, ensure_dir};
use crate::config::{metadata, RunConfig};
use anyhow::{Context, Result};
use clap::Args;
use hmev::predictive::{
    quantile_curve, write_replicates_csv, ModelPredictive, PredictiveReplicate, QuantileCurve,
};
use hmev::rng::{derive_rng, domain};
use hmev::sampler::PosteriorDraws;
use std::path::PathBuf;

#[derive(Args)]
pub struct PredictArgs {
    /// Draws CSV produced by `hmev fit`.
    #[arg(long)]
    pub draws: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Future blocks simulated per draw (hierarchical model only).
    #[arg(long)]
    pub m_g: Option<usize>,
    /// Also write posterior predictive check replicates for this many
    /// blocks per sampled draw.
    #[arg(long)]
    pub checks: Option<usize>,
    /// Number of draws replicated for the checks.
    #[arg(long, default_value_t = 100)]
    pub check_draws: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run(args: PredictArgs) -> Result<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let (draws, meta) = PosteriorDraws::read_csv_path(&args.draws)
        .with_context(|| format!("reading draws {}", args.draws.display()))?;
    let m_g = args.m_g.unwrap_or(config.predict.m_g);
    let pred = build_predictive(&draws, &meta, m_g, args.seed)?;

    let t_min = args.t_min.unwrap_or(config.predict.t_min);
    let t_max = args.t_max.unwrap_or(config.predict.t_max);
    let points = args.points.unwrap_or(config.predict.points);
    let band = (config.predict.band_lo, config.predict.band_hi);
    let grid = QuantileCurve::log_grid(t_min, t_max, points);
    let curve = quantile_curve(pred.as_block_max(), &grid, band)?;

    ensure_dir(&args.out)?;
    let model = meta.get("model").cloned().unwrap_or_default();
    let out_meta = metadata(
        &config,
        args.seed,
        &[("model", model.clone()), ("m_g", m_g.to_string()), ("band", format!("{}..{}", band.0, band.1))],
    );
    let curve_path = args.out.join("quantiles.csv");
    let file = std::fs::File::create(&curve_path)?;
    curve.write_csv(std::io::BufWriter::new(file), &out_meta)?;

    if let Some(blocks) = args.checks {
        let reps = simulate_checks(&pred, &draws, blocks, args.check_draws, args.seed)?;
        let file = std::fs::File::create(args.out.join("predictive_checks.csv"))?;
        write_replicates_csv(&reps, std::io::BufWriter::new(file), &out_meta)?;
    }
    println!(
        "predicted {} return-time points for {} into {}",
        curve.return_times.len(),
        model,
        args.out.display()
    );
    Ok(())
}

/// Replicate datasets for a deterministic subsample of draws.
fn simulate_checks(
    pred: &ModelPredictive,
    draws: &PosteriorDraws,
    blocks: usize,
    max_draws: usize,
    seed: u64,
) -> Result<Vec<PredictiveReplicate>> {
    let mut rng = derive_rng(seed, &[domain::PREDICTIVE, 1]);
    let all: Vec<PredictiveReplicate> = match pred {
        ModelPredictive::Hmev(p) => p.simulate_replicates(blocks, &mut rng)?,
        ModelPredictive::Gev(p) => p.simulate_replicates(blocks, &mut rng),
        ModelPredictive::Pot(p) => p.simulate_replicates(blocks, &mut rng),
    };
    // evenly strided subsample keeps the export small and reproducible
    let stride = (draws.n_draws() / max_draws.max(1)).max(1);
    Ok(all.into_iter().step_by(stride).take(max_draws).collect())
}
