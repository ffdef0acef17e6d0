use rayon::prelude::*;
use serde::Serialize;

use crate::error::{config, Result};
use crate::landscape::SmoothedLandscape;
use crate::linalg::distance;
use crate::rng::{derive_seed, derived_rng, fill_gaussian};
use crate::samplers::{langevin_step, run_langevin_aggregated, LangevinConfig, Potential};

/// Monte-Carlo mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        Self {
            mean,
            std_error: se,
            ci_low: mean - 1.96 * se,
            ci_high: mean + 1.96 * se,
            trials: xs.len(),
        }
    }
}

/// `E[V(x') − V(x)]` for one Langevin step `x' = x − η∇L̂(x) + √(2η/β)u`
/// on the smoothed loss. `η = 0` is allowed and gives exactly zero.
pub fn potential_drift(
    landscape: &SmoothedLandscape,
    x: &[f64],
    cfg: &LangevinConfig,
    trials: usize,
) -> Result<MeanEstimate> {
    if trials < 100 {
        return Err(config("potential drift needs at least 100 trials"));
    }
    if !(cfg.eta >= 0.0 && cfg.beta > 0.0) {
        return Err(config("potential drift needs η ≥ 0 and β > 0"));
    }
    let v0 = landscape.potential(x)?.value;
    let (_, grad) = landscape.loss_and_gradient(x)?;
    let sigma = (2.0 * cfg.eta / cfg.beta).sqrt();
    let deltas = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(cfg.seed, i as u64);
            let mut u = vec![0.0; x.len()];
            fill_gaussian(&mut rng, &mut u);
            let mut next = x.to_vec();
            langevin_step(&mut next, &grad, cfg.eta, sigma, &u);
            Ok(landscape.potential(&next)?.value - v0)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeanEstimate::from_samples(&deltas))
}

/// `E‖x_T − y_T‖` between a chain with step `η` over `t_steps` steps and a
/// chain with step `η/refinement` over the same horizon, both driven by the
/// same Brownian path.
pub fn discretization_gap(
    u_fn: &impl Potential,
    z0: &[f64],
    eta: f64,
    beta: f64,
    refinement: usize,
    t_steps: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if refinement == 0 || trials == 0 {
        return Err(config("refinement and trials must be positive"));
    }
    let gaps = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let coarse_cfg = LangevinConfig::new(eta, beta, t_steps, s).recording_every(t_steps);
            let fine_steps = t_steps * refinement;
            let fine_cfg = LangevinConfig::new(eta / refinement as f64, beta, fine_steps, s)
                .recording_every(fine_steps);
            let coarse = run_langevin_aggregated(u_fn, z0, &coarse_cfg, refinement)?;
            let fine = run_langevin_aggregated(u_fn, z0, &fine_cfg, 1)?;
            Ok(distance(coarse.last_state(), fine.last_state()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.iter().sum::<f64>() / trials as f64)
}
