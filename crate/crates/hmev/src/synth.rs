//! Synthetic-benchmark scenario generator.
//!
//! Four event-magnitude families — generalized Pareto (GP), gamma (GAM),
//! fixed-parameter Weibull (WEI) and the dynamic Weibull whose per-block
//! parameters follow Gumbel laws (WEI_G) — paired with an overdispersed
//! beta-binomial count model. Each replicate yields an independent
//! train/test pair of block datasets, bitwise reproducible from
//! `(seed, replicate)` and generated from disjoint RNG streams for counts,
//! latents and magnitudes (so degenerate WEI_G latents reproduce WEI
//! draw-for-draw).

use crate::data::{BlockData, Dataset};
use crate::dist::{CountDist, GammaParams, GpdParams, TruncGumbel, WeibullParams};
use crate::error::HmevError;
use crate::rng::{derive_rng, domain};
use crate::Result;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Event-magnitude law of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MagnitudeFamily {
    /// All events generalized-Pareto distributed above a zero threshold.
    GeneralizedPareto { scale: f64, shape: f64 },
    Gamma { shape: f64, scale: f64 },
    Weibull { shape: f64, scale: f64 },
    /// Per-block Weibull parameters drawn from positive-truncated Gumbel
    /// laws; zero latent scales degenerate to the fixed Weibull family.
    WeibullGumbel {
        mu_shape: f64,
        sigma_shape: f64,
        mu_scale: f64,
        sigma_scale: f64,
    },
}

impl MagnitudeFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MagnitudeFamily::GeneralizedPareto { .. } => "gp",
            MagnitudeFamily::Gamma { .. } => "gam",
            MagnitudeFamily::Weibull { .. } => "wei",
            MagnitudeFamily::WeibullGumbel { .. } => "wei_g",
        }
    }

    /// Analytic quantile of a single event magnitude; for WEI_G this is the
    /// quantile conditional on the latent location parameters.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        match *self {
            MagnitudeFamily::GeneralizedPareto { scale, shape } => {
                GpdParams::new(0.0, scale, shape)?.quantile(p)
            }
            MagnitudeFamily::Gamma { shape, scale } => GammaParams::new(shape, scale)?.quantile(p),
            MagnitudeFamily::Weibull { shape, scale } => {
                WeibullParams::new(shape, scale)?.quantile(p)
            }
            MagnitudeFamily::WeibullGumbel { mu_shape, mu_scale, .. } => {
                WeibullParams::new(mu_shape, mu_scale)?.quantile(p)
            }
        }
    }
}

/// Count model for the number of events per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum CountModel {
    /// Overdispersed counts with the given mean and variance.
    BetaBinomial { mean: f64, variance: f64 },
    Binomial { rate: f64 },
    Fixed { value: u32 },
}

/// One benchmark scenario: magnitude family, count model, sizes and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub family: MagnitudeFamily,
    pub counts: CountModel,
    pub block_size: u32,
    pub m_train: usize,
    pub m_test: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Common defaults shared by the four families: beta-binomial counts
    /// with mean 100 and variance 150 over 366-day blocks, 50 training and
    /// 500 test blocks, 100 replicates.
    fn base(family: MagnitudeFamily, seed: u64) -> Self {
        ScenarioSpec {
            family,
            counts: CountModel::BetaBinomial { mean: 100.0, variance: 150.0 },
            block_size: 366,
            m_train: 50,
            m_test: 500,
            replicates: 100,
            seed,
        }
    }

    /// Fixed Weibull scenario, shape 0.7 and scale 9 mm.
    pub fn wei(seed: u64) -> Self {
        Self::base(MagnitudeFamily::Weibull { shape: 0.7, scale: 9.0 }, seed)
    }

    /// Gamma scenario, shape 0.8 and scale 11 mm.
    pub fn gam(seed: u64) -> Self {
        Self::base(MagnitudeFamily::Gamma { shape: 0.8, scale: 11.0 }, seed)
    }

    /// Generalized Pareto scenario, scale 7 mm and the geophysical shape.
    pub fn gp(seed: u64) -> Self {
        Self::base(MagnitudeFamily::GeneralizedPareto { scale: 7.0, shape: 0.114 }, seed)
    }

    /// Dynamic Weibull scenario with latent spreads at 25%/5% of the
    /// locations.
    pub fn wei_g(seed: u64) -> Self {
        Self::base(
            MagnitudeFamily::WeibullGumbel {
                mu_shape: 0.7,
                sigma_shape: 0.035,
                mu_scale: 9.0,
                sigma_scale: 2.25,
            },
            seed,
        )
    }

    pub fn by_name(name: &str, seed: u64) -> Result<Self> {
        match name {
            "wei" => Ok(Self::wei(seed)),
            "gam" => Ok(Self::gam(seed)),
            "gp" => Ok(Self::gp(seed)),
            "wei_g" => Ok(Self::wei_g(seed)),
            other => Err(HmevError::Config(format!(
                "unknown scenario family {other}; expected wei, gam, gp or wei_g"
            ))),
        }
    }

    pub fn count_dist(&self) -> Result<CountDist> {
        match self.counts {
            CountModel::BetaBinomial { mean, variance } => {
                let (alpha, beta) = betabinom_from_moments(mean, variance, self.block_size)?;
                CountDist::beta_binomial(alpha, beta, self.block_size)
            }
            CountModel::Binomial { rate } => CountDist::binomial(rate, self.block_size),
            CountModel::Fixed { value } => Ok(CountDist::fixed(value)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HmevError::Config(e.to_string()))
    }
}

/// Solve the beta-binomial moment equations for `(α, β)` given the target
/// mean and variance over `trials` trials. Requires strict overdispersion:
/// the variance must exceed the binomial floor `N p̄ (1-p̄)`.
pub fn betabinom_from_moments(mean: f64, variance: f64, trials: u32) -> Result<(f64, f64)> {
    let n = f64::from(trials);
    if !(mean > 0.0 && mean < n) {
        return Err(HmevError::InvalidParameter {
            name: "beta-binomial mean",
            value: mean,
            reason: "must lie strictly between 0 and the trial count",
        });
    }
    let p = mean / n;
    let floor = n * p * (1.0 - p);
    if variance <= floor {
        return Err(HmevError::InvalidData(format!(
            "count variance {variance} does not exceed the binomial floor {floor:.4} at mean {mean}; \
             the beta-binomial cannot be underdispersed"
        )));
    }
    if variance >= mean * (n - mean) {
        return Err(HmevError::InvalidData(format!(
            "count variance {variance} is too large for a beta-binomial with mean {mean} over {trials} trials"
        )));
    }
    let s = (n * n * p * (1.0 - p) - variance) / (variance - floor);
    Ok((p * s, (1.0 - p) * s))
}

/// Latent law for WEI_G block parameters; a zero spread collapses to the
/// location exactly without consuming randomness differently.
fn latent_draw(loc: f64, spread: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    if spread == 0.0 {
        if loc <= 0.0 {
            return Err(HmevError::InvalidParameter {
                name: "latent location",
                value: loc,
                reason: "must be positive when the spread is zero",
            });
        }
        Ok(loc)
    } else {
        Ok(TruncGumbel::new(loc, spread)?.sample(rng))
    }
}

/// Generate the `r`-th replicate of a scenario: independent train and test
/// datasets from disjoint streams derived from `(seed, r)`.
pub fn generate_scenario(spec: &ScenarioSpec, replicate: usize) -> Result<(Dataset, Dataset)> {
    let train = generate_part(spec, replicate, 0, spec.m_train)?;
    let test = generate_part(spec, replicate, 1, spec.m_test)?;
    Ok((train, test))
}

fn generate_part(spec: &ScenarioSpec, replicate: usize, part: u64, blocks: usize) -> Result<Dataset> {
    if blocks == 0 {
        return Err(HmevError::InvalidData("scenario needs at least one block".into()));
    }
    let r = replicate as u64;
    let mut count_rng = derive_rng(spec.seed, &[domain::SCENARIO, r, part, 0]);
    let mut latent_rng = derive_rng(spec.seed, &[domain::SCENARIO, r, part, 1]);
    let mut mag_rng = derive_rng(spec.seed, &[domain::SCENARIO, r, part, 2]);

    let count_law = spec.count_dist()?;
    let mut out = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let n = count_law.sample(&mut count_rng);
        let mags: Vec<f64> = match spec.family {
            MagnitudeFamily::GeneralizedPareto { scale, shape } => {
                let law = GpdParams::new(0.0, scale, shape)?;
                (0..n).map(|_| law.sample(&mut mag_rng)).collect()
            }
            MagnitudeFamily::Gamma { shape, scale } => {
                let law = GammaParams::new(shape, scale)?;
                (0..n).map(|_| law.sample(&mut mag_rng)).collect()
            }
            MagnitudeFamily::Weibull { shape, scale } => {
                let law = WeibullParams::new(shape, scale)?;
                (0..n).map(|_| law.sample(&mut mag_rng)).collect()
            }
            MagnitudeFamily::WeibullGumbel { mu_shape, sigma_shape, mu_scale, sigma_scale } => {
                let shape = latent_draw(mu_shape, sigma_shape, &mut latent_rng)?;
                let scale = latent_draw(mu_scale, sigma_scale, &mut latent_rng)?;
                let law = WeibullParams::new(shape, scale)?;
                (0..n).map(|_| law.sample(&mut mag_rng)).collect()
            }
        };
        out.push(BlockData::new(mags)?);
    }
    Dataset::new(out, spec.block_size)
}
