//! Subcommand implementations and the glue they share.

pub mod benchmark;
pub mod fit;
pub mod ingest;
pub mod predict;
pub mod simulate;
pub mod validate;

use anyhow::{bail, Context, Result};
use hmev::predictive::{GevPredictive, HmevPredictive, ModelPredictive, PotPredictive};
use hmev::rng::{derive_rng, domain};
use hmev::sampler::PosteriorDraws;
use hmev::Dataset;
use std::collections::BTreeMap;
use std::path::Path;

/// Read `# key=value` metadata lines from the head of a CSV file.
pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    use std::io::BufRead;
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut meta = BTreeMap::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim().split_once('=') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(meta)
}

/// Load a block dataset; the block size comes from the explicit override,
/// the file's `n_t` metadata, or the 366-day default, in that order.
pub fn read_dataset(path: &Path, block_size: Option<u32>) -> Result<(Dataset, BTreeMap<String, String>)> {
    let meta = read_metadata(path)?;
    let n_t = match block_size {
        Some(n) => n,
        None => meta
            .get("n_t")
            .map(|s| s.parse::<u32>().context("bad n_t metadata"))
            .transpose()?
            .unwrap_or(hmev::DEFAULT_BLOCK_SIZE),
    };
    let data = Dataset::read_csv_path(path, n_t)
        .with_context(|| format!("reading dataset {}", path.display()))?;
    Ok((data, meta))
}

/// Rebuild the predictive law of a fitted model from its draws file.
pub fn build_predictive(
    draws: &PosteriorDraws,
    meta: &BTreeMap<String, String>,
    m_g: usize,
    seed: u64,
) -> Result<ModelPredictive> {
    let model = meta
        .get("model")
        .map(String::as_str)
        .context("draws file has no model metadata; re-run fit")?;
    Ok(match model {
        "hmev" => {
            let n_t: u32 = meta
                .get("n_t")
                .and_then(|s| s.parse().ok())
                .unwrap_or(hmev::DEFAULT_BLOCK_SIZE);
            let mut rng = derive_rng(seed, &[domain::PREDICTIVE]);
            ModelPredictive::Hmev(HmevPredictive::from_draws(draws, m_g, n_t, &mut rng)?)
        }
        "gev" => ModelPredictive::Gev(GevPredictive::from_draws(draws)?),
        "pot" => {
            let threshold: f64 = meta
                .get("threshold")
                .and_then(|s| s.parse().ok())
                .context("POT draws are missing the threshold metadata")?;
            ModelPredictive::Pot(PotPredictive::from_draws(draws, threshold)?)
        }
        other => bail!("unknown model {other} in draws metadata"),
    })
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}
