use serde::{Deserialize, Serialize};

use crate::error::{config, domain, shape, Result};
use crate::priors::{GaussianMixturePrior, VpSchedule};
use crate::rng::{gaussian, rng_from_seed};

/// Annealed Langevin on a geometric grid of noise times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_steps")]
    pub steps_per_level: usize,
    /// Step size at a level is this times the smallest component variance
    /// of the noised prior.
    #[serde(default = "default_step_scale")]
    pub step_scale: f64,
    /// Last grid time as a fraction of the starting time.
    #[serde(default = "default_floor")]
    pub floor_ratio: f64,
    pub seed: u64,
}

fn default_levels() -> usize {
    32
}
fn default_steps() -> usize {
    10
}
fn default_step_scale() -> f64 {
    0.05
}
fn default_floor() -> f64 {
    1e-3
}

impl AnnealConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            levels: default_levels(),
            steps_per_level: default_steps(),
            step_scale: default_step_scale(),
            floor_ratio: default_floor(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 || self.steps_per_level == 0 {
            return Err(config("annealing needs ≥ 2 levels and ≥ 1 step per level"));
        }
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return Err(config("annealing step scale must lie in (0, 1)"));
        }
        if !(self.floor_ratio > 0.0 && self.floor_ratio < 1.0) {
            return Err(config("annealing floor ratio must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `t·ρ^{k/(L−1)}` for `k = 0..L`.
    pub fn time_grid(&self, t: f64) -> Vec<f64> {
        let last = (self.levels - 1) as f64;
        (0..self.levels)
            .map(|k| t * self.floor_ratio.powf(k as f64 / last))
            .collect()
    }
}

/// Noise `z0` to time `t` with the VP kernel, then anneal back toward the
/// prior with exact noised-prior scores.
pub fn hot_start_reverse(
    z0: &[f64],
    t: f64,
    prior: &GaussianMixturePrior,
    schedule: &VpSchedule,
    cfg: &AnnealConfig,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("time {t} outside [0, 1]")));
    }
    if z0.len() != prior.dim() {
        return Err(shape("start point and prior differ in dimension"));
    }
    cfg.validate()?;
    if t == 0.0 {
        return Ok(z0.to_vec());
    }
    let mut rng = rng_from_seed(cfg.seed);
    let a = schedule.alpha_bar(t);
    let (keep, spread) = (a.sqrt(), (1.0 - a).sqrt());
    let mut z: Vec<f64> = z0
        .iter()
        .map(|v| keep * v + spread * gaussian(&mut rng))
        .collect();
    for tk in cfg.time_grid(t) {
        let level = prior.noised_by_alpha(schedule.alpha_bar(tk))?;
        let var = level.variances().iter().copied().fold(f64::INFINITY, f64::min);
        let eta = cfg.step_scale * var;
        let sigma = (2.0 * eta).sqrt();
        for _ in 0..cfg.steps_per_level {
            let (_, score) = level.log_density_and_score(&z)?;
            for (zi, si) in z.iter_mut().zip(&score) {
                *zi += eta * si + sigma * gaussian(&mut rng);
            }
        }
    }
    Ok(z)
}
