//! Gradient descent, unadjusted Langevin dynamics and their variants.

mod anneal;
mod ilo;
mod l1;
mod posterior;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::generator::InverseProblem;
use crate::landscape::{IdealLandscape, SmoothedLandscape};
use crate::linalg::all_finite;
use crate::rng::{derive_seed, fill_gaussian, rng_from_seed};

pub use anneal::{hot_start_reverse, AnnealConfig};
pub use ilo::{run_csgm_gd, run_ilo_baseline, sparse_deviation_problem};
pub use l1::{project_l1, L1ProjectionSpec};
pub use posterior::{posterior_chains, posterior_sgld, PosteriorProblem, TailMap};

/// A potential `U` with its gradient. Implementations must be reentrant.
pub trait Potential: Sync {
    fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn value(&self, z: &[f64]) -> Result<f64> {
        Ok(self.value_and_gradient(z)?.0)
    }
}

impl<F> Potential for F
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)> + Sync,
{
    fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(z)
    }
}

impl Potential for IdealLandscape {
    fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient(z)
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        self.loss(z)
    }
}

impl Potential for SmoothedLandscape {
    fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss_and_gradient(z)
    }
}

impl Potential for InverseProblem {
    fn value_and_gradient(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.empirical_loss_grad(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinConfig {
    pub eta: f64,
    pub beta: f64,
    pub steps: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn one() -> usize {
    1
}

impl LangevinConfig {
    pub fn new(eta: f64, beta: f64, steps: usize, seed: u64) -> Self {
        Self {
            eta,
            beta,
            steps,
            seed,
            record_every: 1,
        }
    }

    pub fn recording_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(config(format!("step size must be positive, got {}", self.eta)));
        }
        if !(self.beta > 0.0) {
            return Err(config(format!("inverse temperature must be positive, got {}", self.beta)));
        }
        if self.steps == 0 || self.record_every == 0 {
            return Err(config("steps and record_every must be positive"));
        }
        Ok(())
    }

    /// `√(2η/β)`
    pub fn noise_scale(&self) -> f64 {
        (2.0 * self.eta / self.beta).sqrt()
    }
}

/// Recorded states of a chain.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    /// Iteration index of each recorded state.
    pub steps: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    /// Potential at each recorded state.
    pub losses: Vec<f64>,
    /// `negations[i]` is true when the sign flip fired at recorded step `i`.
    pub negations: Vec<bool>,
    /// Number of potential/gradient evaluations spent.
    pub evaluations: usize,
}

impl Trajectory {
    fn push(&mut self, step: usize, state: &[f64], loss: f64, negated: bool) {
        self.steps.push(step);
        self.states.push(state.to_vec());
        self.losses.push(loss);
        self.negations.push(negated);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// State recorded at iteration `step`, if any.
    pub fn state_at(&self, step: usize) -> Option<&[f64]> {
        self.steps
            .binary_search(&step)
            .ok()
            .map(|i| self.states[i].as_slice())
    }
}

/// `z − η∇U + σ·u`, in place.
pub fn langevin_step(z: &mut [f64], grad: &[f64], eta: f64, sigma: f64, u: &[f64]) {
    for ((zi, gi), ui) in z.iter_mut().zip(grad).zip(u) {
        *zi += -eta * gi + sigma * ui;
    }
}

fn finite_gradient(g: &[f64], step: usize) -> Result<()> {
    if all_finite(g) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}

/// Chain driven by an arbitrary increment source; `noise(u)` fills the
/// standard-normal increment of the next step.
fn drive(
    u_fn: &impl Potential,
    z0: &[f64],
    eta: f64,
    sigma: f64,
    steps: usize,
    record_every: usize,
    mut noise: impl FnMut(&mut [f64]),
) -> Result<Trajectory> {
    let mut z = z0.to_vec();
    let mut u = vec![0.0; z.len()];
    let mut traj = Trajectory::default();
    for t in 0..steps {
        let (value, grad) = u_fn.value_and_gradient(&z)?;
        traj.evaluations += 1;
        finite_gradient(&grad, t)?;
        if t % record_every == 0 {
            traj.push(t, &z, value, false);
        }
        noise(&mut u);
        langevin_step(&mut z, &grad, eta, sigma, &u);
    }
    let value = u_fn.value(&z)?;
    traj.evaluations += 1;
    traj.push(steps, &z, value, false);
    Ok(traj)
}

/// Unadjusted Langevin `z_{t+1} = z_t − η∇U(z_t) + √(2η/β)·u_t`.
pub fn run_langevin(u_fn: &impl Potential, z0: &[f64], cfg: &LangevinConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    drive(u_fn, z0, cfg.eta, cfg.noise_scale(), cfg.steps, cfg.record_every, |u| {
        fill_gaussian(&mut rng, u)
    })
}

/// Langevin whose increment at each step is the normalized sum of
/// `substeps` consecutive draws from the seed's stream.
///
/// A chain with step `η` and `substeps = R` and a chain with step `η/R`,
/// `substeps = 1` and `R` times the steps see the same Brownian path.
pub fn run_langevin_aggregated(
    u_fn: &impl Potential,
    z0: &[f64],
    cfg: &LangevinConfig,
    substeps: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    if substeps == 0 {
        return Err(config("substeps must be positive"));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut part = vec![0.0; z0.len()];
    let norm = 1.0 / (substeps as f64).sqrt();
    drive(u_fn, z0, cfg.eta, cfg.noise_scale(), cfg.steps, cfg.record_every, |u| {
        u.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..substeps {
            fill_gaussian(&mut rng, &mut part);
            for (a, b) in u.iter_mut().zip(&part) {
                *a += b;
            }
        }
        u.iter_mut().for_each(|v| *v *= norm);
    })
}

/// Gradient descent, optionally replacing `z` by `−z` after a step when
/// that strictly lowers `U`. Every step is recorded.
pub fn run_gd(
    u_fn: &impl Potential,
    z0: &[f64],
    eta: f64,
    steps: usize,
    negation: bool,
) -> Result<Trajectory> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(config(format!("step size must be positive, got {eta}")));
    }
    let mut z = z0.to_vec();
    let mut traj = Trajectory::default();
    let (mut value, mut grad) = u_fn.value_and_gradient(&z)?;
    traj.evaluations += 1;
    finite_gradient(&grad, 0)?;
    traj.push(0, &z, value, false);
    for t in 1..=steps {
        for (zi, gi) in z.iter_mut().zip(&grad) {
            *zi -= eta * gi;
        }
        (value, grad) = u_fn.value_and_gradient(&z)?;
        traj.evaluations += 1;
        let mut flipped = false;
        if negation {
            let minus: Vec<f64> = z.iter().map(|v| -v).collect();
            let (mv, mg) = u_fn.value_and_gradient(&minus)?;
            traj.evaluations += 1;
            if mv < value {
                z = minus;
                value = mv;
                grad = mg;
                flipped = true;
            }
        }
        finite_gradient(&grad, t)?;
        traj.push(t, &z, value, flipped);
    }
    Ok(traj)
}

/// Two chains from different starts driven by identical increments.
pub fn coupled_pair(
    u_fn: &impl Potential,
    z0_a: &[f64],
    z0_b: &[f64],
    cfg: &LangevinConfig,
) -> Result<(Trajectory, Trajectory)> {
    Ok((run_langevin(u_fn, z0_a, cfg)?, run_langevin(u_fn, z0_b, cfg)?))
}

/// Independent chains; chain `i` starts at `starts[i]` and uses the seed
/// derived from `(cfg.seed, i)`.
pub fn run_chains(
    u_fn: &impl Potential,
    starts: &[Vec<f64>],
    cfg: &LangevinConfig,
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    starts
        .par_iter()
        .enumerate()
        .map(|(i, z0)| {
            let c = LangevinConfig {
                seed: derive_seed(cfg.seed, i as u64),
                ..*cfg
            };
            run_langevin(u_fn, z0, &c)
        })
        .collect()
}
