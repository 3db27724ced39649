//! Single-chain adaptive Hamiltonian Monte Carlo.
//!
//! Static-path HMC: jittered leapfrog step count, dual-averaging step-size
//! adaptation toward a target acceptance rate, and a diagonal mass matrix
//! re-estimated over expanding memoryless warmup windows. Everything is
//! frozen when warmup ends.

use super::SamplerConfig;
use crate::model::PosteriorModel;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Hamiltonian error beyond which a trajectory is declared divergent.
const DIVERGENCE_THRESHOLD: f64 = 1000.0;

pub(super) struct ChainOutput {
    /// Retained post-warmup draws, constrained parameterization, row-major.
    pub constrained: Vec<f64>,
    pub log_density: Vec<f64>,
    pub divergences: usize,
    pub step_size: f64,
    pub accept_rate: f64,
}

struct DualAveraging {
    mu: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    count: f64,
    target: f64,
}

impl DualAveraging {
    fn new(eps0: f64, target: f64) -> Self {
        DualAveraging {
            mu: (10.0 * eps0).ln(),
            log_eps: eps0.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            count: 0.0,
            target,
        }
    }

    fn update(&mut self, accept_prob: f64) {
        const GAMMA: f64 = 0.05;
        const T0: f64 = 10.0;
        const KAPPA: f64 = 0.75;
        self.count += 1.0;
        let frac = 1.0 / (self.count + T0);
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - accept_prob);
        self.log_eps = self.mu - self.count.sqrt() / GAMMA * self.h_bar;
        let eta = self.count.powf(-KAPPA);
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar;
    }

    fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    fn averaged(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Streaming mean/variance accumulator for the mass-matrix windows.
struct Welford {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Welford { count: 0.0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1.0;
        for i in 0..x.len() {
            let d = x[i] - self.mean[i];
            self.mean[i] += d / self.count;
            self.m2[i] += d * (x[i] - self.mean[i]);
        }
    }

    /// Regularized variance estimate, shrunk slightly toward unit scale the
    /// way Stan regularizes its metric.
    fn regularized_variance(&self) -> Option<Vec<f64>> {
        if self.count < 10.0 {
            return None;
        }
        let n = self.count;
        Some(
            self.m2
                .iter()
                .map(|&m2| ((n / ((n + 5.0) * (n - 1.0))) * m2 + 1e-3 * (5.0 / (n + 5.0))).max(1e-12))
                .collect(),
        )
    }
}

/// Warmup schedule: a fast initial buffer, expanding variance-estimation
/// windows, and a terminal buffer that only polishes the step size.
struct WindowSchedule {
    init_buffer: usize,
    term_start: usize,
    next_window_end: usize,
    window_size: usize,
    warmup: usize,
}

impl WindowSchedule {
    fn new(warmup: usize) -> Self {
        let (init_buffer, term_buffer, base_window) = if warmup >= 150 {
            (75, 50, 25)
        } else {
            // proportional shrink for short warmups
            let init = (warmup as f64 * 0.15).max(1.0) as usize;
            let term = (warmup as f64 * 0.10).max(1.0) as usize;
            let base = (warmup - init.min(warmup) - term.min(warmup)).max(1);
            (init, term, base)
        };
        let term_start = warmup.saturating_sub(term_buffer);
        WindowSchedule {
            init_buffer,
            term_start,
            next_window_end: (init_buffer + base_window).min(term_start),
            window_size: base_window,
            warmup,
        }
    }

    fn in_estimation_phase(&self, iter: usize) -> bool {
        iter >= self.init_buffer && iter < self.term_start
    }

    /// True when the current window closes at `iter` and the metric should
    /// be refreshed.
    fn window_closes(&mut self, iter: usize) -> bool {
        if iter + 1 == self.next_window_end && iter < self.term_start {
            self.window_size *= 2;
            let mut end = self.next_window_end + self.window_size;
            // absorb a final shorter window into this one
            if end + self.window_size > self.term_start {
                end = self.term_start;
            }
            self.next_window_end = end.min(self.term_start).max(self.next_window_end + 1);
            if self.next_window_end > self.warmup {
                self.next_window_end = self.warmup;
            }
            true
        } else {
            false
        }
    }
}

fn kinetic_energy(p: &[f64], inv_mass: &[f64]) -> f64 {
    0.5 * p.iter().zip(inv_mass).map(|(&pi, &vi)| pi * pi * vi).sum::<f64>()
}

/// Run `steps` leapfrog steps in place, returning the final log density and
/// whether the trajectory diverged (non-finite target or Hamiltonian error
/// beyond the threshold relative to `h0`).
#[allow(clippy::too_many_arguments)]
fn integrate_leapfrog<M: PosteriorModel + ?Sized>(
    model: &M,
    z: &mut [f64],
    p: &mut [f64],
    grad: &mut [f64],
    lp_in: f64,
    inv_mass: &[f64],
    eps: f64,
    steps: usize,
    h0: f64,
) -> (f64, bool) {
    let dim = z.len();
    let mut lp = lp_in;
    for _ in 0..steps {
        for i in 0..dim {
            p[i] += 0.5 * eps * grad[i];
        }
        for i in 0..dim {
            z[i] += eps * inv_mass[i] * p[i];
        }
        lp = model.log_posterior_grad(z, grad);
        if !lp.is_finite() {
            return (lp, true);
        }
        for i in 0..dim {
            p[i] += 0.5 * eps * grad[i];
        }
        if (-lp + kinetic_energy(p, inv_mass)) - h0 > DIVERGENCE_THRESHOLD {
            return (lp, true);
        }
    }
    (lp, false)
}

/// Absolute Hamiltonian drift of a leapfrog trajectory started at `(z, p)`
/// with unit mass. Exposes the integrator for order-of-accuracy checks.
pub fn leapfrog_energy_error<M: PosteriorModel + ?Sized>(
    model: &M,
    z0: &[f64],
    p0: &[f64],
    eps: f64,
    steps: usize,
) -> Option<f64> {
    let dim = model.dim();
    let inv_mass = vec![1.0; dim];
    let mut z = z0.to_vec();
    let mut p = p0.to_vec();
    let mut grad = vec![0.0; dim];
    let lp = model.log_posterior_grad(&z, &mut grad);
    if !lp.is_finite() {
        return None;
    }
    let h0 = -lp + kinetic_energy(&p, &inv_mass);
    let (lp_end, divergent) =
        integrate_leapfrog(model, &mut z, &mut p, &mut grad, lp, &inv_mass, eps, steps, h0);
    if divergent {
        return None;
    }
    Some(((-lp_end + kinetic_energy(&p, &inv_mass)) - h0).abs())
}

pub(super) fn run_chain<M: PosteriorModel + ?Sized>(
    model: &M,
    config: &SamplerConfig,
    init: &[f64],
    rng: &mut ChaCha8Rng,
) -> crate::Result<ChainOutput> {
    let dim = model.dim();
    let warmup = config.warmup_iterations();
    let keep = config.iterations - warmup;

    let mut z = init.to_vec();
    let mut grad = vec![0.0; dim];
    let mut lp = model.log_posterior_grad(&z, &mut grad);
    if !lp.is_finite() {
        return Err(crate::HmevError::Sampler(
            "log posterior is not finite at the initial state".into(),
        ));
    }

    let mut inv_mass: Vec<f64> = vec![1.0; dim];
    let mut dual = DualAveraging::new(find_initial_step(model, &z, lp, &grad, rng), config.target_accept);
    let mut schedule = WindowSchedule::new(warmup);
    let mut welford = Welford::new(dim);

    let mut constrained = Vec::with_capacity(keep * dim);
    let mut log_density = Vec::with_capacity(keep);
    let mut divergences = 0usize;
    let mut warmup_accepts = 0usize;
    let mut accept_sum = 0.0;

    let mut p = vec![0.0; dim];
    let mut z_prop = vec![0.0; dim];
    let mut grad_prop = vec![0.0; dim];

    for iter in 0..config.iterations {
        let warming = iter < warmup;
        let eps = if warming { dual.current() } else { dual.averaged() };
        let steps = rng.random_range(1..=config.max_leapfrog);

        // momentum ~ N(0, M) with M = diag(1/inv_mass)
        for i in 0..dim {
            let n: f64 = StandardNormal.sample(rng);
            p[i] = n / inv_mass[i].sqrt();
        }
        let h0 = -lp + kinetic_energy(&p, &inv_mass);

        z_prop.copy_from_slice(&z);
        grad_prop.copy_from_slice(&grad);
        let (lp_prop, divergent) =
            integrate_leapfrog(model, &mut z_prop, &mut p, &mut grad_prop, lp, &inv_mass, eps, steps, h0);

        let accept_prob = if divergent {
            0.0
        } else {
            let h1 = -lp_prop + kinetic_energy(&p, &inv_mass);
            (h0 - h1).exp().min(1.0)
        };

        if !divergent && rng.random::<f64>() < accept_prob {
            z.copy_from_slice(&z_prop);
            grad.copy_from_slice(&grad_prop);
            lp = lp_prop;
            if warming {
                warmup_accepts += 1;
            }
        }

        if warming {
            dual.update(accept_prob);
            if schedule.in_estimation_phase(iter) {
                welford.push(&z);
                if schedule.window_closes(iter) {
                    if let Some(var) = welford.regularized_variance() {
                        inv_mass = var;
                        // metric changed: restart the step-size search there
                        let eps_now = dual.current();
                        dual = DualAveraging::new(eps_now, config.target_accept);
                    }
                    welford = Welford::new(dim);
                }
            }
            if iter + 1 == warmup && warmup_accepts == 0 {
                return Err(crate::HmevError::Sampler(format!(
                    "chain never accepted during {warmup} warmup iterations (final step size {:.3e})",
                    dual.current()
                )));
            }
        } else {
            if divergent {
                divergences += 1;
            }
            accept_sum += accept_prob;
            let c = model.transform().constrained_vec(&z);
            constrained.extend_from_slice(&c);
            log_density.push(lp);
        }
    }

    Ok(ChainOutput {
        constrained,
        log_density,
        divergences,
        step_size: dual.averaged(),
        accept_rate: if keep > 0 { accept_sum / keep as f64 } else { f64::NAN },
    })
}

/// Double/halve a trial step until one leapfrog step lands near 50%
/// acceptance, the usual cheap initialization for dual averaging.
fn find_initial_step<M: PosteriorModel + ?Sized>(
    model: &M,
    z: &[f64],
    lp: f64,
    grad: &[f64],
    rng: &mut ChaCha8Rng,
) -> f64 {
    let dim = z.len();
    let mut eps = 0.1;
    let p0: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let h0 = -lp + 0.5 * p0.iter().map(|&x| x * x).sum::<f64>();

    let h_after = |eps: f64| -> f64 {
        let mut p = p0.clone();
        let mut zp = z.to_vec();
        let mut g = grad.to_vec();
        for i in 0..dim {
            p[i] += 0.5 * eps * g[i];
        }
        for i in 0..dim {
            zp[i] += eps * p[i];
        }
        let lp1 = model.log_posterior_grad(&zp, &mut g);
        if !lp1.is_finite() {
            return f64::INFINITY;
        }
        for i in 0..dim {
            p[i] += 0.5 * eps * g[i];
        }
        -lp1 + 0.5 * p.iter().map(|&x| x * x).sum::<f64>()
    };

    let log_accept = |eps: f64| h0 - h_after(eps);
    let going_up = log_accept(eps) > (0.5_f64).ln();
    for _ in 0..60 {
        if going_up {
            eps *= 2.0;
            if log_accept(eps) <= (0.5_f64).ln() {
                break;
            }
        } else {
            eps *= 0.5;
            if log_accept(eps) > (0.5_f64).ln() {
                break;
            }
        }
        if !(1e-12..=1e6).contains(&eps) {
            break;
        }
    }
    eps.clamp(1e-12, 1e6)
}
