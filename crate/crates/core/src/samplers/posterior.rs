use serde::{Deserialize, Serialize};

use super::{run_chains, run_langevin, LangevinConfig, Trajectory};
use crate::error::{config, shape, Result};
use crate::generator::{InverseProblem, MeasurementMap, ReluGenerator};
use crate::linalg::{dot, Matrix};
use crate::priors::GaussianMixturePrior;

/// The map `G₂` from the sampled latent to the measurement domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMap {
    Identity(usize),
    Linear(Matrix),
    Relu(ReluGenerator),
}

impl TailMap {
    pub fn input_dim(&self) -> usize {
        match self {
            Self::Identity(n) => *n,
            Self::Linear(m) => m.cols,
            Self::Relu(g) => g.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Self::Identity(n) => *n,
            Self::Linear(m) => m.rows,
            Self::Relu(g) => g.output_dim(),
        }
    }

    /// `J_{G₂}(z)ᵀ·residual`.
    fn pullback(&self, z: &[f64], residual: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            Self::Identity(_) => residual.to_vec(),
            Self::Linear(m) => m.matvec_t(residual),
            Self::Relu(g) => {
                let fwd = g.forward(z)?;
                g.pullback(&fwd.patterns, residual)
            }
        })
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.input_dim() {
            return Err(shape(format!(
                "tail map expects {} inputs, got {}",
                self.input_dim(),
                z.len()
            )));
        }
        Ok(match self {
            Self::Identity(_) => z.to_vec(),
            Self::Linear(m) => m.matvec(z),
            Self::Relu(g) => g.apply(z)?,
        })
    }
}

/// Measurement model `y = A·G₂(z) + N(0, σ²I)` seen through an optional mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorProblem {
    pub map: MeasurementMap,
    pub y: Vec<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub mask: Option<Vec<bool>>,
    /// Multiplier on the data term; `0` leaves only the prior.
    #[serde(default = "unit_weight")]
    pub likelihood_weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl PosteriorProblem {
    pub fn new(map: MeasurementMap, y: Vec<f64>, sigma: f64) -> Result<Self> {
        let p = Self {
            map,
            y,
            sigma,
            mask: None,
            likelihood_weight: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_inverse_problem(problem: &InverseProblem) -> Result<Self> {
        let p = Self {
            map: problem.map.clone(),
            y: problem.y.clone(),
            sigma: problem.noise_sigma,
            mask: problem.mask.clone(),
            likelihood_weight: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(config(format!(
                "posterior needs noise sigma > 0, got {}",
                self.sigma
            )));
        }
        if self.y.len() != self.map.measurements() {
            return Err(shape("y length differs from the number of measurements"));
        }
        if self.mask.as_ref().is_some_and(|m| m.len() != self.y.len()) {
            return Err(shape("mask length differs from y"));
        }
        if !(self.likelihood_weight >= 0.0) {
            return Err(config("likelihood weight must be nonnegative"));
        }
        Ok(())
    }

    /// `U(z) = w·‖A·G₂(z) − y‖²/(2σ²) − log p(z)` and its gradient.
    pub fn potential(
        &self,
        prior: &GaussianMixturePrior,
        tail: &TailMap,
        z: &[f64],
    ) -> Result<(f64, Vec<f64>)> {
        let (log_p, score) = prior.log_density_and_score(z)?;
        let mut value = -log_p;
        let mut grad: Vec<f64> = score.iter().map(|s| -s).collect();
        if self.likelihood_weight > 0.0 {
            let mut r = self.map.apply(&tail.apply(z)?);
            for (ri, yi) in r.iter_mut().zip(&self.y) {
                *ri -= yi;
            }
            if let Some(mask) = &self.mask {
                r.iter_mut().zip(mask).for_each(|(ri, &keep)| {
                    if !keep {
                        *ri = 0.0
                    }
                });
            }
            let c = self.likelihood_weight / (self.sigma * self.sigma);
            value += 0.5 * c * dot(&r, &r);
            let back = tail.pullback(z, &self.map.apply_transpose(&r))?;
            for (g, b) in grad.iter_mut().zip(&back) {
                *g += c * b;
            }
        }
        Ok((value, grad))
    }

    fn check(&self, prior: &GaussianMixturePrior, tail: &TailMap) -> Result<()> {
        self.validate()?;
        if tail.input_dim() != prior.dim() || tail.output_dim() != self.map.input_dim() {
            return Err(shape("prior, tail map and measurement map dimensions disagree"));
        }
        Ok(())
    }
}

/// Langevin on the posterior potential; use `β = 1` to target the posterior itself.
pub fn posterior_sgld(
    problem: &PosteriorProblem,
    prior: &GaussianMixturePrior,
    tail: &TailMap,
    z0: &[f64],
    cfg: &LangevinConfig,
) -> Result<Trajectory> {
    problem.check(prior, tail)?;
    let u = |z: &[f64]| problem.potential(prior, tail, z);
    run_langevin(&u, z0, cfg)
}

/// Independent posterior chains with derived seeds.
pub fn posterior_chains(
    problem: &PosteriorProblem,
    prior: &GaussianMixturePrior,
    tail: &TailMap,
    starts: &[Vec<f64>],
    cfg: &LangevinConfig,
) -> Result<Vec<Trajectory>> {
    problem.check(prior, tail)?;
    let u = |z: &[f64]| problem.potential(prior, tail, z);
    run_chains(&u, starts, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_gradient_matches_finite_differences() {
        let prior = GaussianMixturePrior::new(
            vec![0.3, 0.7],
            vec![vec![1.0, 0.0], vec![-1.0, 0.5]],
            vec![0.4, 0.9],
        )
        .unwrap();
        let lin = Matrix::from_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.2, 0.1]]).unwrap();
        let tail = TailMap::Linear(lin);
        let post = PosteriorProblem::new(MeasurementMap::Identity(3), vec![0.5, -1.0, 2.0], 0.7)
            .unwrap();
        let z = [0.2, -0.4];
        let (_, g) = post.potential(&prior, &tail, &z).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[i] += h;
            zm[i] -= h;
            let fd = (post.potential(&prior, &tail, &zp).unwrap().0
                - post.potential(&prior, &tail, &zm).unwrap().0)
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn zero_sigma_is_rejected() {
        assert!(PosteriorProblem::new(MeasurementMap::Identity(2), vec![0.0; 2], 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let prior = GaussianMixturePrior::isotropic(3, 1.0).unwrap();
        let post = PosteriorProblem::new(MeasurementMap::Identity(2), vec![0.0; 2], 1.0).unwrap();
        let cfg = LangevinConfig::new(0.01, 1.0, 5, 0);
        assert!(posterior_sgld(&post, &prior, &TailMap::Identity(2), &[0.0; 3], &cfg).is_err());
    }
}
