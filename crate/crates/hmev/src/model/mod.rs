//! The three Bayesian models, each exposed as a log-posterior with analytic
//! gradients over an unconstrained parameter vector.

mod gev;
mod hmev;
mod pot;
pub mod priors;

pub use gev::GevModel;
pub use hmev::{hmev_generate, weibull_moment_fit, HmevHypers, HmevModel};
pub use pot::{threshold_select, PotModel};
pub use priors::{GevPriors, HmevPriors, PotPriors};

use crate::transform::Transform;

/// A posterior density over an unconstrained vector, as consumed by the
/// sampler. Implementations must be pure functions of `(z, data, priors)` so
/// chains can evaluate them concurrently.
pub trait PosteriorModel: Sync {
    /// Dimension of the unconstrained (and constrained) parameter vector.
    fn dim(&self) -> usize;

    /// Stable column names for the constrained parameterization.
    fn param_names(&self) -> Vec<String>;

    /// Bijection between the unconstrained vector and the constrained state.
    fn transform(&self) -> &Transform;

    /// Log posterior density at `z` including change-of-variable Jacobians,
    /// with the gradient written into `grad`. Returns `-inf` (gradient
    /// contents unspecified) when the state is rejected.
    fn log_posterior_grad(&self, z: &[f64], grad: &mut [f64]) -> f64;

    /// Density-only evaluation.
    fn log_posterior(&self, z: &[f64]) -> f64 {
        let mut grad = vec![0.0; self.dim()];
        self.log_posterior_grad(z, &mut grad)
    }

    /// Deterministic moment-based starting state in unconstrained
    /// coordinates; the sampler jitters it per chain.
    fn initial_state(&self) -> crate::Result<Vec<f64>>;
}

/// Reject non-finite evaluations and wildly out-of-range unconstrained
/// coordinates before they can overflow `exp`.
pub(crate) fn z_in_range(z: &[f64]) -> bool {
    z.iter().all(|v| v.is_finite() && v.abs() < 600.0)
}
