//! Bijections between constrained model states and the unconstrained vectors
//! the sampler works in.
//!
//! Positive parameters map through `log`, unit-interval parameters through
//! `logit`, unconstrained ones through the identity. Every forward map
//! carries its log-Jacobian so log-posteriors stay proper densities in the
//! unconstrained space.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bijection {
    /// Constrained value is any real.
    Identity,
    /// Constrained value is positive: `c = exp(z)`.
    Log,
    /// Constrained value lies in (0,1): `c = sigmoid(z)`.
    Logit,
}

impl Bijection {
    #[inline]
    pub fn to_constrained(self, z: f64) -> f64 {
        match self {
            Bijection::Identity => z,
            Bijection::Log => z.exp(),
            Bijection::Logit => sigmoid(z),
        }
    }

    #[inline]
    pub fn to_unconstrained(self, c: f64) -> f64 {
        match self {
            Bijection::Identity => c,
            Bijection::Log => c.ln(),
            Bijection::Logit => (c / (1.0 - c)).ln(),
        }
    }

    /// log |dc/dz| at the unconstrained point.
    #[inline]
    pub fn log_jacobian(self, z: f64) -> f64 {
        match self {
            Bijection::Identity => 0.0,
            Bijection::Log => z,
            // ln σ(z) + ln σ(-z), written via softplus for stability
            Bijection::Logit => -softplus(-z) - softplus(z),
        }
    }

    /// d/dz of `log_jacobian`.
    #[inline]
    pub fn grad_log_jacobian(self, z: f64) -> f64 {
        match self {
            Bijection::Identity => 0.0,
            Bijection::Log => 1.0,
            Bijection::Logit => 1.0 - 2.0 * sigmoid(z),
        }
    }

    /// dc/dz, the factor that chains constrained-space gradients back to z.
    #[inline]
    pub fn d_constrained_dz(self, z: f64) -> f64 {
        match self {
            Bijection::Identity => 1.0,
            Bijection::Log => z.exp(),
            Bijection::Logit => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// Per-coordinate bijection descriptor for a whole parameter vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    bijections: Vec<Bijection>,
}

impl Transform {
    pub fn new(bijections: Vec<Bijection>) -> Self {
        Transform { bijections }
    }

    pub fn dim(&self) -> usize {
        self.bijections.len()
    }

    pub fn bijections(&self) -> &[Bijection] {
        &self.bijections
    }

    pub fn to_constrained(&self, z: &[f64], out: &mut [f64]) {
        for ((&b, &zi), o) in self.bijections.iter().zip(z).zip(out.iter_mut()) {
            *o = b.to_constrained(zi);
        }
    }

    pub fn to_unconstrained(&self, c: &[f64], out: &mut [f64]) {
        for ((&b, &ci), o) in self.bijections.iter().zip(c).zip(out.iter_mut()) {
            *o = b.to_unconstrained(ci);
        }
    }

    pub fn constrained_vec(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        self.to_constrained(z, &mut out);
        out
    }

    pub fn unconstrained_vec(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; c.len()];
        self.to_unconstrained(c, &mut out);
        out
    }

    pub fn log_jacobian(&self, z: &[f64]) -> f64 {
        self.bijections.iter().zip(z).map(|(&b, &zi)| b.log_jacobian(zi)).sum()
    }

    /// Chain a constrained-space gradient into the unconstrained space and
    /// add the Jacobian correction:
    /// `dL/dz = dL/dc * dc/dz + d logJ/dz`.
    pub fn chain_gradient(&self, z: &[f64], grad_constrained: &[f64], out: &mut [f64]) {
        for i in 0..self.bijections.len() {
            let b = self.bijections[i];
            out[i] = grad_constrained[i] * b.d_constrained_dz(z[i]) + b.grad_log_jacobian(z[i]);
        }
    }
}
