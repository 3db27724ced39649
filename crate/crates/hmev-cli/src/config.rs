//! Run configuration: a TOML file with one section per subsystem, every
//! field optional, merged over built-in defaults. `hmev config --dump`
//! prints the fully-resolved defaults.

use anyhow::{Context, Result};
use hmev::ingest::{DeclusterConfig, QcConfig};
use hmev::sampler::SamplerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub m_g: usize,
    pub band_lo: f64,
    pub band_hi: f64,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig { t_min: 1.05, t_max: 500.0, points: 60, m_g: 50, band_lo: 0.05, band_hi: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub t_tilde: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { t_tilde: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotConfig {
    /// Empirical quantile of declustered magnitudes that fixes the POT
    /// threshold before inference.
    pub threshold_quantile: f64,
}

impl Default for PotConfig {
    fn default() -> Self {
        PotConfig { threshold_quantile: 0.95 }
    }
}

/// Full resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    pub sampler: SamplerConfigToml,
    pub predict: PredictConfig,
    pub metrics: MetricsConfig,
    pub qc: QcConfigToml,
    pub decluster: DeclusterConfigToml,
    pub pot: PotConfig,
}

/// Serde mirror of [`SamplerConfig`] without the seed (seeds are per-run
/// command-line inputs, never file state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfigToml {
    pub chains: usize,
    pub iterations: usize,
    pub warmup_fraction: f64,
    pub target_accept: f64,
    pub max_leapfrog: usize,
    pub init_jitter: f64,
}

impl Default for SamplerConfigToml {
    fn default() -> Self {
        let d = SamplerConfig::default();
        SamplerConfigToml {
            chains: d.chains,
            iterations: d.iterations,
            warmup_fraction: d.warmup_fraction,
            target_accept: d.target_accept,
            max_leapfrog: d.max_leapfrog,
            init_jitter: d.init_jitter,
        }
    }
}

impl SamplerConfigToml {
    pub fn with_seed(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: self.chains,
            iterations: self.iterations,
            warmup_fraction: self.warmup_fraction,
            target_accept: self.target_accept,
            max_leapfrog: self.max_leapfrog,
            init_jitter: self.init_jitter,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QcConfigToml {
    pub max_missing_days: u32,
    pub min_years: u32,
    pub wet_threshold_mm: f64,
    pub drop_flagged: bool,
}

impl Default for QcConfigToml {
    fn default() -> Self {
        let d = QcConfig::default();
        QcConfigToml {
            max_missing_days: d.max_missing_days,
            min_years: d.min_years,
            wet_threshold_mm: d.wet_threshold_mm,
            drop_flagged: d.drop_flagged,
        }
    }
}

impl From<&QcConfigToml> for QcConfig {
    fn from(t: &QcConfigToml) -> Self {
        QcConfig {
            max_missing_days: t.max_missing_days,
            min_years: t.min_years,
            wet_threshold_mm: t.wet_threshold_mm,
            drop_flagged: t.drop_flagged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeclusterConfigToml {
    pub acf_cutoff: f64,
    pub max_lag: usize,
}

impl Default for DeclusterConfigToml {
    fn default() -> Self {
        let d = DeclusterConfig::default();
        DeclusterConfigToml { acf_cutoff: d.acf_cutoff, max_lag: d.max_lag }
    }
}

impl From<&DeclusterConfigToml> for DeclusterConfig {
    fn from(t: &DeclusterConfigToml) -> Self {
        DeclusterConfig { acf_cutoff: t.acf_cutoff, max_lag: t.max_lag }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn dump(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Short content hash of the resolved configuration plus the run seed,
    /// embedded in every output file.
    pub fn hash(&self, seed: u64) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.dump().as_bytes());
        hasher.update(seed.to_le_bytes());
        let digest = hasher.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Standard metadata lines embedded in every output file.
pub fn metadata(config: &RunConfig, seed: u64, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config_hash".to_string(), config.hash(seed)),
        ("seed".to_string(), seed.to_string()),
    ];
    for (k, v) in extra {
        out.push((k.to_string(), v.clone()));
    }
    out
}
