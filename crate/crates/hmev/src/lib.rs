//! Bayesian extreme-value inference for intermittent event records.
//!
//! The crate models sequences of positive event magnitudes grouped into
//! fixed-size blocks (e.g. daily rainfall grouped into years) and estimates
//! the distribution of block maxima three ways:
//!
//! * `hmev` — a hierarchical compound model: Weibull event magnitudes whose
//!   per-block shape and scale are latent draws from Gumbel laws truncated to
//!   positive support, binomial event counts, and inverse-gamma/beta
//!   hyperpriors elicited from the record itself;
//! * `gev` — a Bayesian generalized extreme value fit to the block maxima;
//! * `pot` — a Bayesian Poisson–generalized Pareto fit to threshold
//!   exceedances.
//!
//! All three expose a log-posterior with analytic gradients over an
//! unconstrained parameter vector and are sampled with the adaptive
//! Hamiltonian Monte Carlo engine in [`sampler`]. Posterior draws feed the
//! predictive machinery in [`predictive`] (return levels, credible bands,
//! posterior predictive simulation) and the comparison metrics in
//! [`metrics`]. [`synth`] generates the benchmark scenarios and [`ingest`]
//! parses, quality-controls and declusters daily station records.

pub mod data;
pub mod dist;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod predictive;
pub mod rng;
pub mod sampler;
pub mod synth;
pub mod transform;

pub use data::{BlockData, Dataset};
pub use error::HmevError;

/// Days per block for daily observations in yearly blocks.
pub const DEFAULT_BLOCK_SIZE: u32 = 366;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, HmevError>;
