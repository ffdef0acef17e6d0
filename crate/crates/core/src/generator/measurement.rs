use serde::{Deserialize, Serialize};

use super::network::{gaussian_matrix, ReluGenerator};
use crate::error::{config, shape, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::{gaussian, rng_from_seed};

/// The linear measurement operator `A: R^{n_d} → R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMap {
    Dense(Matrix),
    /// `A = I_n`, stored implicitly.
    Identity(usize),
}

impl MeasurementMap {
    /// `m × n` matrix with entries i.i.d. `N(0, 1/m)`.
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(config("measurement map needs positive dimensions"));
        }
        let mut rng = rng_from_seed(seed);
        Ok(Self::Dense(gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt())))
    }

    pub fn dense(a: Matrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(config("measurement matrix must be finite"));
        }
        Ok(Self::Dense(a))
    }

    pub fn measurements(&self) -> usize {
        match self {
            Self::Dense(a) => a.rows,
            Self::Identity(n) => *n,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Dense(a) => a.cols,
            Self::Identity(n) => *n,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(a) => a.matvec(x),
            Self::Identity(_) => x.to_vec(),
        }
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(a) => a.matvec_t(y),
            Self::Identity(_) => y.to_vec(),
        }
    }
}

/// Observations `y = A·G(z*) + noise`, optionally restricted to the
/// coordinates where `mask` is true.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseProblem {
    pub generator: ReluGenerator,
    pub map: MeasurementMap,
    pub y: Vec<f64>,
    pub noise_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<bool>>,
}

impl InverseProblem {
    pub fn new(
        generator: ReluGenerator,
        map: MeasurementMap,
        y: Vec<f64>,
        noise_sigma: f64,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        let p = Self {
            generator,
            map,
            y,
            noise_sigma,
            mask,
        };
        p.validate()?;
        Ok(p)
    }

    /// Problem whose observations come from a known latent `z_star`.
    pub fn synthetic(
        generator: ReluGenerator,
        map: MeasurementMap,
        z_star: &[f64],
        noise_sigma: f64,
        mask: Option<Vec<bool>>,
        noise_seed: u64,
    ) -> Result<Self> {
        let clean = map.apply(&generator.apply(z_star)?);
        Self::with_clean_signal(generator, map, clean, noise_sigma, mask, noise_seed)
    }

    pub(crate) fn with_clean_signal(
        generator: ReluGenerator,
        map: MeasurementMap,
        mut clean: Vec<f64>,
        noise_sigma: f64,
        mask: Option<Vec<bool>>,
        noise_seed: u64,
    ) -> Result<Self> {
        if noise_sigma > 0.0 {
            let mut rng = rng_from_seed(noise_seed);
            clean
                .iter_mut()
                .for_each(|v| *v += noise_sigma * gaussian(&mut rng));
        }
        Self::new(generator, map, clean, noise_sigma, mask)
    }

    pub fn validate(&self) -> Result<()> {
        if self.map.input_dim() != self.generator.output_dim() {
            return Err(shape(format!(
                "measurement map expects {} inputs, generator emits {}",
                self.map.input_dim(),
                self.generator.output_dim()
            )));
        }
        if self.y.len() != self.map.measurements() {
            return Err(shape(format!(
                "y has length {}, map produces {}",
                self.y.len(),
                self.map.measurements()
            )));
        }
        if let Some(mask) = &self.mask {
            if mask.len() != self.y.len() {
                return Err(shape("mask length differs from y"));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(config(format!("noise sigma must be ≥ 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn latent_dim(&self) -> usize {
        self.generator.input_dim()
    }

    /// `‖mask ⊙ (A·G(z) − y)‖²/2` and its gradient in `z`.
    pub fn empirical_loss_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.loss_grad_through(&self.generator, z)
    }

    /// The same loss with `gen` standing in for the generator, e.g. the
    /// tail of a split network evaluated at an intermediate point.
    pub fn loss_grad_through(&self, gen: &ReluGenerator, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        if gen.output_dim() != self.map.input_dim() {
            return Err(shape("generator output does not feed the measurement map"));
        }
        let fwd = gen.forward(z)?;
        let mut residual = self.map.apply(&fwd.output);
        for (r, y) in residual.iter_mut().zip(&self.y) {
            *r -= y;
        }
        if let Some(mask) = &self.mask {
            for (r, &keep) in residual.iter_mut().zip(mask) {
                if !keep {
                    *r = 0.0;
                }
            }
        }
        let loss = 0.5 * dot(&residual, &residual);
        let grad = gen.pullback(&fwd.patterns, &self.map.apply_transpose(&residual));
        Ok((loss, grad))
    }

    /// `‖mask ⊙ (A·x − y)‖` for an output-space point `x`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let ax = self.map.apply(x);
        ax.iter()
            .zip(&self.y)
            .enumerate()
            .filter(|(i, _)| self.mask.as_ref().is_none_or(|m| m[*i]))
            .map(|(_, (a, y))| (a - y) * (a - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Boolean mask with `round(fraction·len)` true entries (at least one)
/// chosen uniformly at random.
pub fn random_mask(len: usize, fraction: f64, seed: u64) -> Result<Vec<bool>> {
    use rand::seq::index::sample;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(config(format!("mask fraction must lie in (0, 1], got {fraction}")));
    }
    let keep = ((fraction * len as f64).round() as usize).clamp(1, len);
    let mut rng = rng_from_seed(seed);
    let mut mask = vec![false; len];
    for i in sample(&mut rng, len, keep) {
        mask[i] = true;
    }
    Ok(mask)
}
