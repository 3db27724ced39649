//! Bayesian GEV fit to block maxima.
//!
//! State `[μ, σ, ξ]`; σ is log-transformed, μ and ξ sampled on the real
//! line. Any maximum outside the support of the current parameters rejects
//! the state.

use super::priors::GevPriors;
use super::{z_in_range, PosteriorModel};
use crate::dist::GevParams;
use crate::error::HmevError;
use crate::transform::{Bijection, Transform};
use crate::Result;

#[derive(Debug, Clone)]
pub struct GevModel {
    maxima: Vec<f64>,
    priors: GevPriors,
    transform: Transform,
}

impl GevModel {
    pub fn new(maxima: Vec<f64>, priors: GevPriors) -> Result<Self> {
        if maxima.is_empty() {
            return Err(HmevError::InvalidData("GEV fit needs at least one block maximum".into()));
        }
        if maxima.iter().any(|m| !m.is_finite()) {
            return Err(HmevError::InvalidData("block maxima must be finite".into()));
        }
        Ok(GevModel {
            maxima,
            priors,
            transform: Transform::new(vec![Bijection::Identity, Bijection::Log, Bijection::Identity]),
        })
    }

    /// Convenience constructor with data-scaled priors.
    pub fn from_maxima(maxima: Vec<f64>) -> Result<Self> {
        let priors = GevPriors::from_maxima(&maxima)?;
        Self::new(maxima, priors)
    }

    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    pub fn priors(&self) -> &GevPriors {
        &self.priors
    }
}

impl PosteriorModel for GevModel {
    fn dim(&self) -> usize {
        3
    }

    fn param_names(&self) -> Vec<String> {
        vec!["mu".into(), "sigma".into(), "xi".into()]
    }

    fn transform(&self) -> &Transform {
        &self.transform
    }

    fn log_posterior_grad(&self, z: &[f64], grad: &mut [f64]) -> f64 {
        assert_eq!(z.len(), 3, "state dimension mismatch");
        if !z_in_range(z) {
            return f64::NEG_INFINITY;
        }
        let c = self.transform.constrained_vec(z);
        let law = match GevParams::new(c[0], c[1], c[2]) {
            Ok(law) => law,
            Err(_) => return f64::NEG_INFINITY,
        };
        let mut lp = 0.0;
        let mut gc = [0.0; 3];
        for &y in &self.maxima {
            let ll = law.log_pdf(y);
            if ll == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            lp += ll;
            let g = law.grad_log_pdf(y);
            gc[0] += g.loc;
            gc[1] += g.scale;
            gc[2] += g.shape;
        }
        lp += self.priors.loc.log_pdf(c[0]);
        gc[0] += self.priors.loc.grad(c[0]);
        lp += self.priors.scale.log_pdf(c[1]);
        gc[1] += self.priors.scale.grad(c[1]);
        lp += self.priors.shape.log_pdf(c[2]);
        gc[2] += self.priors.shape.grad(c[2]);

        lp += self.transform.log_jacobian(z);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.transform.chain_gradient(z, &gc, grad);
        lp
    }

    fn initial_state(&self) -> Result<Vec<f64>> {
        // Gumbel moment start; shape at the prior center
        let (mean, sd) = super::priors::mean_sd(&self.maxima);
        let sd = sd.max(1e-6 * mean.abs().max(1.0));
        let sigma0 = sd * (6.0_f64).sqrt() / std::f64::consts::PI;
        let mu0 = mean - 0.577_215_664_901_532_9 * sigma0;
        Ok(self.transform.unconstrained_vec(&[mu0, sigma0, super::priors::XI_PRIOR_MEAN]))
    }
}
