//! Prior configurations for the three models.
//!
//! The hierarchical model uses independent inverse-gamma priors on the four
//! latent-law hyperparameters and a beta prior on the occurrence rate. Prior
//! means follow the elicitation rules built around the record itself: the
//! expected event intensity is the climatological mean of positive
//! magnitudes, the latent shape law is centered on 2/3 (the stretched-
//! exponential regime of heavy daily rainfall), and the latent scales get
//! 25% and 5% of the respective location means. The baselines use
//! data-scaled normal/half-normal priors plus the geophysical shape prior
//! `N(0.114, 0.125)` shared by GEV and POT.

use crate::data::Dataset;
use crate::dist::{BetaParams, GammaParams, InvGammaParams};
use crate::error::HmevError;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Default inverse-gamma shape: finite variance, coefficient of variation
/// ~0.58, mildly informative. Recorded in the config so it can be swapped.
pub const DEFAULT_INV_GAMMA_SHAPE: f64 = 5.0;

/// Prior center for the latent Weibull shape location.
pub const SHAPE_PRIOR_CENTER: f64 = 2.0 / 3.0;

/// Geophysical prior for the GEV/GPD shape parameter.
pub const XI_PRIOR_MEAN: f64 = 0.114;
pub const XI_PRIOR_SD: f64 = 0.125;

/// Hyperprior configuration of the hierarchical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmevPriors {
    pub mu_delta: InvGammaParams,
    pub sigma_delta: InvGammaParams,
    pub mu_gamma: InvGammaParams,
    pub sigma_gamma: InvGammaParams,
    pub lambda: BetaParams,
}

impl HmevPriors {
    /// Elicit priors from the record: inverse-gamma means set to the
    /// climatological mean magnitude, 2/3, and the 25%/5% scale rules, all
    /// with the default shape; Beta(2,2) on the occurrence rate.
    pub fn from_data(data: &Dataset) -> Result<Self> {
        let mean_mag = data.mean_magnitude().ok_or_else(|| {
            HmevError::InvalidData("cannot elicit priors: record has no positive magnitudes".into())
        })?;
        Self::from_mean_magnitude(mean_mag)
    }

    /// Same elicitation from a known climatological mean magnitude.
    pub fn from_mean_magnitude(mean_mag: f64) -> Result<Self> {
        let a = DEFAULT_INV_GAMMA_SHAPE;
        Ok(HmevPriors {
            mu_delta: InvGammaParams::with_mean(mean_mag, a)?,
            sigma_delta: InvGammaParams::with_mean(0.25 * mean_mag, a)?,
            mu_gamma: InvGammaParams::with_mean(SHAPE_PRIOR_CENTER, a)?,
            sigma_gamma: InvGammaParams::with_mean(0.05 * SHAPE_PRIOR_CENTER, a)?,
            lambda: BetaParams::new(2.0, 2.0)?,
        })
    }

    /// Prior means in state order (μ_δ, σ_δ, μ_γ, σ_γ, λ).
    pub fn means(&self) -> [f64; 5] {
        [
            self.mu_delta.mean(),
            self.sigma_delta.mean(),
            self.mu_gamma.mean(),
            self.sigma_gamma.mean(),
            self.lambda.mean(),
        ]
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("priors serialize to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let priors: HmevPriors =
            toml::from_str(text).map_err(|e| HmevError::Config(e.to_string()))?;
        priors.validate()?;
        Ok(priors)
    }

    /// Re-validate after deserialization, which bypasses constructors.
    pub fn validate(&self) -> Result<()> {
        InvGammaParams::new(self.mu_delta.shape(), self.mu_delta.scale())?;
        InvGammaParams::new(self.sigma_delta.shape(), self.sigma_delta.scale())?;
        InvGammaParams::new(self.mu_gamma.shape(), self.mu_gamma.scale())?;
        InvGammaParams::new(self.sigma_gamma.shape(), self.sigma_gamma.scale())?;
        BetaParams::new(self.lambda.alpha(), self.lambda.beta())?;
        Ok(())
    }
}

/// Normal prior with analytic score, for location-type parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd.is_finite() && sd > 0.0) {
            return Err(HmevError::InvalidParameter {
                name: "normal prior",
                value: sd,
                reason: "sd must be finite and positive",
            });
        }
        Ok(NormalPrior { mean, sd })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -(self.sd * (2.0 * std::f64::consts::PI).sqrt()).ln() - 0.5 * z * z
    }

    pub fn grad(&self, x: f64) -> f64 {
        -(x - self.mean) / (self.sd * self.sd)
    }
}

/// Half-normal prior on positive scale parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfNormalPrior {
    pub scale: f64,
}

impl HalfNormalPrior {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(HmevError::InvalidParameter {
                name: "half-normal prior scale",
                value: scale,
                reason: "must be finite and positive",
            });
        }
        Ok(HalfNormalPrior { scale })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = x / self.scale;
        (2.0 / std::f64::consts::PI).sqrt().ln() - self.scale.ln() - 0.5 * z * z
    }

    pub fn grad(&self, x: f64) -> f64 {
        -x / (self.scale * self.scale)
    }
}

/// Priors of the GEV baseline: data-scaled location/scale, geophysical shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevPriors {
    pub loc: NormalPrior,
    pub scale: HalfNormalPrior,
    pub shape: NormalPrior,
}

impl GevPriors {
    /// Center the location prior on the training maxima mean with their
    /// sample standard deviation, scale the half-normal by the same sd.
    pub fn from_maxima(maxima: &[f64]) -> Result<Self> {
        if maxima.len() < 2 {
            return Err(HmevError::InvalidData("need at least two maxima to scale GEV priors".into()));
        }
        let (mean, sd) = mean_sd(maxima);
        let sd = sd.max(1e-8 * mean.abs().max(1.0));
        Ok(GevPriors {
            loc: NormalPrior::new(mean, sd)?,
            scale: HalfNormalPrior::new(sd)?,
            shape: NormalPrior::new(XI_PRIOR_MEAN, XI_PRIOR_SD)?,
        })
    }
}

/// Priors of the POT baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotPriors {
    /// Gamma prior on the per-block exceedance rate.
    pub rate: GammaParams,
    pub scale: HalfNormalPrior,
    pub shape: NormalPrior,
}

impl PotPriors {
    /// Weakly informative: rate prior mean at the observed mean exceedance
    /// count (gamma shape 2), excess-scale prior from the excess spread.
    pub fn from_exceedances(mean_count: f64, excesses: &[f64]) -> Result<Self> {
        if excesses.is_empty() {
            return Err(HmevError::InvalidData("no threshold exceedances to scale POT priors".into()));
        }
        let mean_count = mean_count.max(1e-3);
        let (mean_ex, sd_ex) = mean_sd(excesses);
        let spread = sd_ex.max(mean_ex).max(1e-8);
        Ok(PotPriors {
            rate: GammaParams::new(2.0, mean_count / 2.0)?,
            scale: HalfNormalPrior::new(spread)?,
            shape: NormalPrior::new(XI_PRIOR_MEAN, XI_PRIOR_SD)?,
        })
    }
}

pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
