//! Adaptive HMC engine over any [`PosteriorModel`].
//!
//! Chains run concurrently, each on an independent derived RNG stream, and
//! results merge by chain index, so a run is bitwise reproducible for a
//! given `(seed, config, data)` regardless of thread scheduling.

mod diagnostics;
mod hmc;

pub use diagnostics::{ess_bulk, split_rhat, Diagnostics};
pub use hmc::leapfrog_energy_error;

use crate::error::HmevError;
use crate::model::PosteriorModel;
use crate::rng::{derive_rng, domain};
use crate::Result;
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Sampler settings. The defaults mirror the reference protocol: four
/// chains, 2000 iterations each, first half discarded as warmup, so a
/// default run retains `B = 4 * 1000 = 4000` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub iterations: usize,
    pub warmup_fraction: f64,
    pub target_accept: f64,
    pub max_leapfrog: usize,
    pub init_jitter: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            iterations: 2000,
            warmup_fraction: 0.5,
            target_accept: 0.8,
            max_leapfrog: 32,
            init_jitter: 0.5,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(HmevError::Config("sampler needs at least one chain".into()));
        }
        if self.iterations < 2 {
            return Err(HmevError::Config("sampler needs at least two iterations".into()));
        }
        if !(self.warmup_fraction > 0.0 && self.warmup_fraction < 1.0) {
            return Err(HmevError::Config("warmup fraction must lie in (0,1)".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(HmevError::Config("target acceptance must lie in (0,1)".into()));
        }
        if self.max_leapfrog == 0 {
            return Err(HmevError::Config("max leapfrog steps must be positive".into()));
        }
        Ok(())
    }

    pub fn warmup_iterations(&self) -> usize {
        ((self.iterations as f64) * self.warmup_fraction).round() as usize
    }

    pub fn retained_per_chain(&self) -> usize {
        self.iterations - self.warmup_iterations()
    }

    pub fn total_retained(&self) -> usize {
        self.chains * self.retained_per_chain()
    }
}

/// Retained posterior draws in the constrained parameterization, stored
/// chain-major, with per-draw log density and per-chain sampling stats.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    param_names: Vec<String>,
    values: Array2<f64>,
    log_density: Vec<f64>,
    chain_index: Vec<u32>,
    iteration: Vec<u32>,
    n_chains: usize,
    divergences: Vec<usize>,
    step_sizes: Vec<f64>,
    accept_rates: Vec<f64>,
}

impl PosteriorDraws {
    pub fn n_draws(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn divergences(&self) -> &[usize] {
        &self.divergences
    }

    pub fn total_divergences(&self) -> usize {
        self.divergences.iter().sum()
    }

    pub fn step_sizes(&self) -> &[f64] {
        &self.step_sizes
    }

    pub fn accept_rates(&self) -> &[f64] {
        &self.accept_rates
    }

    /// Index of a named parameter column.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    /// One draw as a slice (row-major storage).
    pub fn draw(&self, b: usize) -> &[f64] {
        let dim = self.dim();
        let flat = self.values.as_slice().expect("row-major layout");
        &flat[b * dim..(b + 1) * dim]
    }

    /// Per-chain series of one parameter, for diagnostics.
    pub fn chains_of(&self, param: usize) -> Vec<Vec<f64>> {
        let mut chains = vec![Vec::new(); self.n_chains];
        for b in 0..self.n_draws() {
            chains[self.chain_index[b] as usize].push(self.values[[b, param]]);
        }
        chains
    }

    /// Posterior mean of one parameter.
    pub fn mean_of(&self, param: usize) -> f64 {
        self.values.column(param).sum() / self.n_draws() as f64
    }

    /// Empirical central quantile of one parameter over all draws.
    pub fn quantile_of(&self, param: usize, p: f64) -> f64 {
        let mut v: Vec<f64> = self.values.column(param).iter().copied().collect();
        v.sort_by(f64::total_cmp);
        empirical_quantile_sorted(&v, p)
    }

    /// Write `chain,iteration,lp,<params>` rows preceded by `# key=value`
    /// metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W, metadata: &[(String, String)]) -> Result<()> {
        for (k, v) in metadata {
            writeln!(w, "# {k}={v}")?;
        }
        write!(w, "chain,iteration,lp")?;
        for name in &self.param_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for b in 0..self.n_draws() {
            write!(w, "{},{},{}", self.chain_index[b], self.iteration[b], self.log_density[b])?;
            for v in self.draw(b) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &std::path::Path, metadata: &[(String, String)]) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f), metadata)
    }

    /// Read the CSV form back. Per-chain sampling statistics are not part
    /// of the CSV; they come back empty.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, BTreeMap<String, String>)> {
        let mut metadata = BTreeMap::new();
        let mut names: Option<Vec<String>> = None;
        let mut rows: Vec<f64> = Vec::new();
        let mut chain_index = Vec::new();
        let mut iteration = Vec::new();
        let mut log_density = Vec::new();
        let mut dim = 0usize;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if names.is_none() {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() < 4 || cols[0] != "chain" {
                    return Err(HmevError::Parse {
                        line: lineno + 1,
                        message: "expected header starting with chain,iteration,lp".into(),
                    });
                }
                dim = cols.len() - 3;
                names = Some(cols[3..].iter().map(|s| s.to_string()).collect());
                continue;
            }
            let mut fields = line.split(',');
            let bad = |message: &str| HmevError::Parse { line: lineno + 1, message: message.into() };
            let chain: u32 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("chain"))?;
            let iter: u32 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("iteration"))?;
            let lp: f64 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("lp"))?;
            chain_index.push(chain);
            iteration.push(iter);
            log_density.push(lp);
            let mut got = 0;
            for f in fields {
                rows.push(f.parse().map_err(|_| bad("parameter value"))?);
                got += 1;
            }
            if got != dim {
                return Err(bad("row width disagrees with header"));
            }
        }
        let names = names.ok_or_else(|| HmevError::Parse { line: 0, message: "empty draws file".into() })?;
        let n = log_density.len();
        let n_chains = chain_index.iter().copied().max().map_or(0, |c| c as usize + 1);
        let values = Array2::from_shape_vec((n, dim), rows)
            .map_err(|e| HmevError::Parse { line: 0, message: e.to_string() })?;
        Ok((
            PosteriorDraws {
                param_names: names,
                values,
                log_density,
                chain_index,
                iteration,
                n_chains,
                divergences: Vec::new(),
                step_sizes: Vec::new(),
                accept_rates: Vec::new(),
            },
            metadata,
        ))
    }

    pub fn read_csv_path(path: &std::path::Path) -> Result<(Self, BTreeMap<String, String>)> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Empirical quantile (type-7) of an ascending-sorted slice.
pub fn empirical_quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Jittered starting point for one chain: the model's moment-based state
/// plus `jitter`-scaled normal noise in unconstrained space, re-drawn until
/// the target is finite there.
pub fn initialize_chain<M: PosteriorModel + ?Sized>(
    model: &M,
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let base = model.initial_state()?;
    for _ in 0..100 {
        let mut z = base.clone();
        for zi in z.iter_mut() {
            let n: f64 = StandardNormal.sample(rng);
            *zi += jitter * n;
        }
        if model.log_posterior(&z).is_finite() {
            return Ok(z);
        }
    }
    // fall back to the unjittered state if the neighborhood keeps rejecting
    if model.log_posterior(&base).is_finite() {
        return Ok(base);
    }
    Err(HmevError::Sampler("could not find a finite starting state".into()))
}

/// Run adaptive HMC and return retained draws plus diagnostics.
pub fn run_hmc<M: PosteriorModel + ?Sized>(
    model: &M,
    config: &SamplerConfig,
) -> Result<(PosteriorDraws, Diagnostics)> {
    config.validate()?;
    let dim = model.dim();
    let keep = config.retained_per_chain();

    let outputs: Vec<Result<hmc::ChainOutput>> = (0..config.chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_rng(config.seed, &[domain::CHAIN, c as u64]);
            let init = initialize_chain(model, config.init_jitter, &mut rng)?;
            hmc::run_chain(model, config, &init, &mut rng)
        })
        .collect();

    let mut values = Vec::with_capacity(config.total_retained() * dim);
    let mut log_density = Vec::with_capacity(config.total_retained());
    let mut chain_index = Vec::with_capacity(config.total_retained());
    let mut iteration = Vec::with_capacity(config.total_retained());
    let mut divergences = Vec::with_capacity(config.chains);
    let mut step_sizes = Vec::with_capacity(config.chains);
    let mut accept_rates = Vec::with_capacity(config.chains);

    for (c, out) in outputs.into_iter().enumerate() {
        let out = out.map_err(|e| HmevError::Sampler(format!("chain {c}: {e}")))?;
        debug_assert_eq!(out.log_density.len(), keep);
        values.extend_from_slice(&out.constrained);
        log_density.extend_from_slice(&out.log_density);
        chain_index.extend(std::iter::repeat(c as u32).take(keep));
        iteration.extend(0..keep as u32);
        divergences.push(out.divergences);
        step_sizes.push(out.step_size);
        accept_rates.push(out.accept_rate);
    }

    let draws = PosteriorDraws {
        param_names: model.param_names(),
        values: Array2::from_shape_vec((config.total_retained(), dim), values)
            .expect("chain outputs have a fixed width"),
        log_density,
        chain_index,
        iteration,
        n_chains: config.chains,
        divergences,
        step_sizes,
        accept_rates,
    };
    let diag = compute_diagnostics(&draws);
    Ok((draws, diag))
}

/// Split R-hat and bulk ESS for every parameter of a finished run.
pub fn compute_diagnostics(draws: &PosteriorDraws) -> Diagnostics {
    let dim = draws.dim();
    let mut rhat = Vec::with_capacity(dim);
    let mut ess = Vec::with_capacity(dim);
    for p in 0..dim {
        let chains = draws.chains_of(p);
        rhat.push(split_rhat(&chains));
        ess.push(ess_bulk(&chains));
    }
    let max_rhat = rhat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_ess = ess.iter().copied().fold(f64::INFINITY, f64::min);
    Diagnostics {
        param_names: draws.param_names().to_vec(),
        rhat,
        ess_bulk: ess,
        divergences: draws.total_divergences(),
        step_sizes: draws.step_sizes().to_vec(),
        accept_rates: draws.accept_rates().to_vec(),
        max_rhat,
        min_ess_bulk: min_ess,
    }
}
