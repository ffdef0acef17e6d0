//! Isotropic Gaussian-mixture latent priors with exact scores, and their
//! closed-form marginals under variance-preserving noising.

use rand::distr::{weighted::WeightedIndex, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, shape, Result};
use crate::rng::{gaussian, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixturePrior {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    /// Per-component isotropic variance.
    variances: Vec<f64>,
}

impl GaussianMixturePrior {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<f64>) -> Result<Self> {
        let p = Self {
            weights,
            means,
            variances,
        };
        p.validate()?;
        Ok(p)
    }

    /// `N(0, σ²·I_p)`.
    pub fn isotropic(dim: usize, variance: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![vec![0.0; dim]], vec![variance])
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.variances.len() != k {
            return Err(config("mixture needs matching, nonempty weights, means and variances"));
        }
        let dim = self.means[0].len();
        if dim == 0 || self.means.iter().any(|m| m.len() != dim) {
            return Err(shape("mixture means must share a positive dimension"));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(config("mixture weights must be nonnegative"));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(config(format!("mixture weights sum to {total}, not 1")));
        }
        if self.variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(config("mixture variances must be positive"));
        }
        if self.means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(config("mixture means must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Mean of the mixture.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (w, mu) in self.weights.iter().zip(&self.means) {
            for (a, b) in m.iter_mut().zip(mu) {
                *a += w * b;
            }
        }
        m
    }

    /// `(log p(z), ∇ log p(z))`.
    pub fn log_density_and_score(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p = self.dim();
        if z.len() != p {
            return Err(shape(format!("point has dimension {}, prior has {p}", z.len())));
        }
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        let logs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((w, mu), v)| {
                let d2: f64 = z.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum();
                w.ln() - 0.5 * p as f64 * (ln_2pi + v.ln()) - 0.5 * d2 / v
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        let log_p = top + total.ln();
        let mut score = vec![0.0; p];
        for ((l, mu), v) in logs.iter().zip(&self.means).zip(&self.variances) {
            let resp = (l - log_p).exp();
            if resp == 0.0 {
                continue;
            }
            for ((s, zi), mi) in score.iter_mut().zip(z).zip(mu) {
                *s -= resp * (zi - mi) / v;
            }
        }
        Ok((log_p, score))
    }

    /// Law of `√ᾱ·z + √(1−ᾱ)·ε` for `z` from this prior.
    pub fn noised_by_alpha(&self, alpha_bar: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_bar) {
            return Err(domain(format!("ᾱ = {alpha_bar} outside [0, 1]")));
        }
        let s = alpha_bar.sqrt();
        Ok(Self {
            weights: self.weights.clone(),
            means: self
                .means
                .iter()
                .map(|m| m.iter().map(|v| s * v).collect())
                .collect(),
            variances: self
                .variances
                .iter()
                .map(|v| alpha_bar * v + (1.0 - alpha_bar))
                .collect(),
        })
    }

    /// `count` draws, one per row.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(config("sample count must be at least 1"));
        }
        let mut rng = rng_from_seed(seed);
        let pick = WeightedIndex::new(&self.weights).map_err(|e| config(e.to_string()))?;
        Ok((0..count)
            .map(|_| {
                let c = pick.sample(&mut rng);
                let sd = self.variances[c].sqrt();
                self.means[c].iter().map(|m| m + sd * gaussian(&mut rng)).collect()
            })
            .collect())
    }
}

pub fn gmm_log_density_and_score(prior: &GaussianMixturePrior, z: &[f64]) -> Result<(f64, Vec<f64>)> {
    prior.log_density_and_score(z)
}

pub fn sample_prior(prior: &GaussianMixturePrior, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    prior.sample(count, seed)
}

/// Linear-β variance-preserving schedule,
/// `ᾱ(t) = exp(−β_min·t − (β_max − β_min)·t²/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VpSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for VpSchedule {
    fn default() -> Self {
        Self {
            beta_min: 0.1,
            beta_max: 20.0,
        }
    }
}

impl VpSchedule {
    pub fn new(beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(beta_min > 0.0 && beta_max >= beta_min && beta_max.is_finite()) {
            return Err(config(format!(
                "VP schedule needs 0 < beta_min ≤ beta_max, got {beta_min}, {beta_max}"
            )));
        }
        Ok(Self { beta_min, beta_max })
    }

    pub fn alpha_bar(&self, t: f64) -> f64 {
        (-t * self.beta_min - 0.5 * t * t * (self.beta_max - self.beta_min)).exp()
    }
}

/// Marginal of the prior after VP noising up to time `t`.
pub fn vp_noised(
    prior: &GaussianMixturePrior,
    t: f64,
    schedule: &VpSchedule,
) -> Result<GaussianMixturePrior> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("time {t} outside [0, 1]")));
    }
    prior.noised_by_alpha(schedule.alpha_bar(t))
}
