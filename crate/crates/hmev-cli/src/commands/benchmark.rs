//! `hmev benchmark`: the full study matrix — generate scenario replicates,
//! fit every model, score against held-out data, and aggregate.
//!
//! Cells (scenario × training size × replicate) run in a bounded worker
//! pool. Every cell derives its own seeds from the master seed and its
//! coordinates, so results do not depend on scheduling or worker count.
//! Completed cells persist a JSON result and are skipped on re-run; the
//! ledger and summaries are rebuilt from cell results at the end, which
//! makes resumption idempotent.

use super::{ensure_dir, fit::fit_model, fit::ModelId, validate::validate_draws};
use crate::config::RunConfig;
use anyhow::{bail, Result};
use clap::Args;
use hmev::metrics::MetricsReport;
use hmev::rng::derive_seed;
use hmev::synth::{generate_scenario, ScenarioSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Seed-path tags for the benchmark's derived streams.
const TAG_SCENARIO_SEED: u64 = 0x10;
const TAG_FIT_SEED: u64 = 0x20;
const TAG_VALIDATE_SEED: u64 = 0x30;

#[derive(Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated scenario families.
    #[arg(long, default_value = "wei,gam,gp,wei_g", value_delimiter = ',')]
    pub scenarios: Vec<String>,
    /// Replicates per scenario (the desk-scale default; the full study
    /// design uses 100).
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    /// Training sizes, comma separated.
    #[arg(long, default_value = "20,50", value_delimiter = ',')]
    pub m_train: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub m_test: usize,
    /// Models to fit in every cell.
    #[arg(long, default_value = "hmev,gev,pot", value_delimiter = ',')]
    pub models: Vec<String>,
    /// Sampler chains per fit (desk-scale default; raise to 4 for the full
    /// protocol).
    #[arg(long, default_value_t = 2)]
    pub chains: usize,
    /// Sampler iterations per chain (desk-scale default; 2000 for the full
    /// protocol).
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Worker pool size; defaults to HMEV_WORKERS or the rayon default.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub report: Option<MetricsReport>,
    pub max_rhat: Option<f64>,
    pub divergences: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub id: String,
    pub family: String,
    pub m_train: usize,
    pub replicate: usize,
    pub models: BTreeMap<String, ModelOutcome>,
}

struct Cell {
    id: String,
    family_idx: usize,
    family: String,
    m_train: usize,
    replicate: usize,
}

pub fn run(args: BenchmarkArgs) -> Result<()> {
    let config = RunConfig::load(args.config.as_deref())?;
    let models: Vec<ModelId> = args
        .models
        .iter()
        .map(|name| match name.as_str() {
            "hmev" => Ok(ModelId::Hmev),
            "gev" => Ok(ModelId::Gev),
            "pot" => Ok(ModelId::Pot),
            other => bail!("unknown model {other}"),
        })
        .collect::<Result<_>>()?;

    ensure_dir(&args.out)?;
    let cells_dir = args.out.join("cells");
    ensure_dir(&cells_dir)?;

    let mut cells = Vec::new();
    for (family_idx, family) in args.scenarios.iter().enumerate() {
        ScenarioSpec::by_name(family, 0)?; // validate the name up front
        for &m_train in &args.m_train {
            for replicate in 0..args.replicates {
                cells.push(Cell {
                    id: format!("{family}_m{m_train}_r{replicate:03}"),
                    family_idx,
                    family: family.clone(),
                    m_train,
                    replicate,
                });
            }
        }
    }
    println!(
        "benchmark: {} cells x {} models ({} fits)",
        cells.len(),
        models.len(),
        cells.len() * models.len()
    );

    let workers = args
        .workers
        .or_else(|| std::env::var("HMEV_WORKERS").ok().and_then(|v| v.parse().ok()));
    let pool = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build()?,
        None => rayon::ThreadPoolBuilder::new().build()?,
    };

    let manifest_path = args.out.join("manifest.json");
    let manifest: BTreeMap<String, String> = std::fs::read_to_string(&manifest_path)
        .ok()
        .and_then(|text| serde_json::from_str(&text).ok())
        .unwrap_or_default();

    pool.install(|| {
        cells.par_iter().for_each(|cell| {
            let path = cells_dir.join(format!("{}.json", cell.id));
            let done = manifest.get(&cell.id).map(String::as_str) == Some("done");
            if done && load_cell(&path).is_some() {
                return; // resume: manifest marks the cell complete
            }
            let result = run_cell(cell, &models, &args, &config);
            let body = serde_json::to_string_pretty(&result).expect("cell serializes");
            // write-then-rename keeps interrupted runs resumable
            let tmp = path.with_extension("json.tmp");
            if std::fs::write(&tmp, body).and_then(|()| std::fs::rename(&tmp, &path)).is_err() {
                eprintln!("failed to persist cell {}", cell.id);
            }
        });
    });

    // deterministic aggregation in cell order
    let mut results = Vec::with_capacity(cells.len());
    for cell in &cells {
        let path = cells_dir.join(format!("{}.json", cell.id));
        match load_cell(&path) {
            Some(result) => results.push(result),
            None => bail!("cell {} produced no result file", cell.id),
        }
    }
    let manifest: BTreeMap<String, String> = results
        .iter()
        .map(|r| {
            let status = if r.models.values().any(|m| m.error.is_some()) {
                "partial".to_string()
            } else {
                "done".to_string()
            };
            (r.id.clone(), status)
        })
        .collect();
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    write_ledger(&args.out.join("ledger.csv"), &results)?;
    write_summary(&args.out.join("summary.csv"), &results)?;
    write_best_model(&args.out.join("best_model.csv"), &results)?;

    let failures: usize = results
        .iter()
        .map(|r| r.models.values().filter(|m| m.error.is_some()).count())
        .sum();
    println!(
        "benchmark complete: {} cells, {} model failures; outputs in {}",
        results.len(),
        failures,
        args.out.display()
    );
    Ok(())
}

fn load_cell(path: &Path) -> Option<CellResult> {
    let text = std::fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

fn run_cell(cell: &Cell, models: &[ModelId], args: &BenchmarkArgs, config: &RunConfig) -> CellResult {
    let mut out = CellResult {
        id: cell.id.clone(),
        family: cell.family.clone(),
        m_train: cell.m_train,
        replicate: cell.replicate,
        models: BTreeMap::new(),
    };

    let scenario_seed = derive_seed(args.seed, &[TAG_SCENARIO_SEED, cell.family_idx as u64]);
    let mut spec = match ScenarioSpec::by_name(&cell.family, scenario_seed) {
        Ok(s) => s,
        Err(e) => {
            for model in models {
                out.models.insert(
                    model.name().into(),
                    ModelOutcome {
                        report: None,
                        max_rhat: None,
                        divergences: None,
                        error: Some(e.to_string()),
                    },
                );
            }
            return out;
        }
    };
    spec.m_train = cell.m_train;
    spec.m_test = args.m_test;

    let data = generate_scenario(&spec, cell.replicate);
    for (model_idx, model) in models.iter().enumerate() {
        let outcome = (|| -> Result<ModelOutcome> {
            let (train, test) = data.as_ref().map_err(|e| anyhow::anyhow!("{e}"))?;
            let fit_seed = derive_seed(
                args.seed,
                &[
                    TAG_FIT_SEED,
                    cell.family_idx as u64,
                    cell.m_train as u64,
                    cell.replicate as u64,
                    model_idx as u64,
                ],
            );
            let sampler = SamplerOverrides { chains: args.chains, iterations: args.iterations }
                .apply(config, fit_seed);
            let (draws, diag, threshold) =
                fit_model(*model, train, None, config.pot.threshold_quantile, None, &sampler)?;

            let mut meta = BTreeMap::new();
            meta.insert("model".to_string(), model.name().to_string());
            meta.insert("n_t".to_string(), train.block_size().to_string());
            if let Some(u) = threshold {
                meta.insert("threshold".to_string(), u.to_string());
            }
            let validate_seed = derive_seed(
                args.seed,
                &[
                    TAG_VALIDATE_SEED,
                    cell.family_idx as u64,
                    cell.m_train as u64,
                    cell.replicate as u64,
                    model_idx as u64,
                ],
            );
            let report = validate_draws(
                &draws,
                &meta,
                &cell.id,
                train,
                test,
                config.metrics.t_tilde,
                (config.predict.band_lo, config.predict.band_hi),
                config.predict.m_g,
                validate_seed,
            )?;
            Ok(ModelOutcome {
                report: Some(report),
                max_rhat: Some(diag.max_rhat),
                divergences: Some(diag.divergences),
                error: None,
            })
        })();
        out.models.insert(
            model.name().into(),
            outcome.unwrap_or_else(|e| ModelOutcome {
                report: None,
                max_rhat: None,
                divergences: None,
                error: Some(format!("{e:#}")),
            }),
        );
    }
    out
}

struct SamplerOverrides {
    chains: usize,
    iterations: usize,
}

impl SamplerOverrides {
    fn apply(&self, config: &RunConfig, seed: u64) -> hmev::sampler::SamplerConfig {
        let mut s = config.sampler.with_seed(seed);
        s.chains = self.chains;
        s.iterations = self.iterations;
        s
    }
}

fn write_ledger(path: &Path, results: &[CellResult]) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", MetricsReport::CSV_HEADER)?;
    for cell in results {
        for outcome in cell.models.values() {
            if let Some(report) = &outcome.report {
                writeln!(f, "{}", report.csv_row())?;
            }
        }
    }
    Ok(())
}

/// Long-format quantile summary of each metric per (family, m_train, model).
fn write_summary(path: &Path, results: &[CellResult]) -> Result<()> {
    use std::io::Write;
    type Key = (String, usize, String);
    let mut groups: BTreeMap<Key, Vec<&MetricsReport>> = BTreeMap::new();
    for cell in results {
        for (model, outcome) in &cell.models {
            if let Some(report) = &outcome.report {
                groups
                    .entry((cell.family.clone(), cell.m_train, model.clone()))
                    .or_default()
                    .push(report);
            }
        }
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "family,m_train,model,metric,n,q25,median,q75,mean")?;
    let metrics: [(&str, fn(&MetricsReport) -> f64); 8] = [
        ("fse_in", |r| r.fse_in),
        ("fse_out", |r| r.fse_out),
        ("bias_in", |r| r.bias_in),
        ("bias_out", |r| r.bias_out),
        ("width_in", |r| r.width_in),
        ("width_out", |r| r.width_out),
        ("lppd_out", |r| r.lppd_out),
        ("p_eff", |r| r.p_eff),
    ];
    for ((family, m_train, model), reports) in &groups {
        for (name, get) in &metrics {
            let mut values: Vec<f64> = reports.iter().map(|r| get(r)).collect();
            values.sort_by(f64::total_cmp);
            let q = |p: f64| hmev::sampler::empirical_quantile_sorted(&values, p);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            writeln!(
                f,
                "{family},{m_train},{model},{name},{},{},{},{},{}",
                values.len(),
                q(0.25),
                q(0.5),
                q(0.75),
                mean
            )?;
        }
    }
    Ok(())
}

/// Fraction of replicates where each model wins each criterion (lowest FSE
/// or highest predictive density), per family and training size.
fn write_best_model(path: &Path, results: &[CellResult]) -> Result<()> {
    use std::io::Write;
    type Key = (String, usize, String);
    let mut wins: BTreeMap<Key, BTreeMap<String, usize>> = BTreeMap::new();
    let mut totals: BTreeMap<(String, usize, String), usize> = BTreeMap::new();
    let criteria: [(&str, fn(&MetricsReport) -> f64, bool); 4] = [
        ("fse_in", |r| r.fse_in, false),
        ("fse_out", |r| r.fse_out, false),
        ("lppd_in", |r| r.lppd_in, true),
        ("lppd_out", |r| r.lppd_out, true),
    ];
    for cell in results {
        for (name, get, higher_is_better) in &criteria {
            let mut best: Option<(&str, f64)> = None;
            for (model, outcome) in &cell.models {
                if let Some(report) = &outcome.report {
                    let v = get(report);
                    if !v.is_finite() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((_, b)) => {
                            if *higher_is_better {
                                v > b
                            } else {
                                v < b
                            }
                        }
                    };
                    if better {
                        best = Some((model, v));
                    }
                }
            }
            if let Some((winner, _)) = best {
                let key = (cell.family.clone(), cell.m_train, name.to_string());
                *wins.entry(key.clone()).or_default().entry(winner.to_string()).or_default() += 1;
                *totals.entry(key).or_default() += 1;
            }
        }
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "family,m_train,criterion,model,wins,cells,fraction")?;
    for ((family, m_train, criterion), by_model) in &wins {
        let total = totals[&(family.clone(), *m_train, criterion.clone())];
        for (model, count) in by_model {
            writeln!(
                f,
                "{family},{m_train},{criterion},{model},{count},{total},{}",
                *count as f64 / total as f64
            )?;
        }
    }
    Ok(())
}

