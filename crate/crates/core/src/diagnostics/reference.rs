//! Quadrature reference for the Gibbs measure `∝ e^{−βL}` of the idealized
//! loss in the plane, with `z* = e₁`.

use std::f64::consts::PI;

use rand::Rng;

use super::transport::EmpiricalDistribution;
use crate::error::{config, Error, Result};
use crate::landscape::theta_chain;
use crate::rng::rng_from_seed;

/// Cell masses of `e^{−βL(x)}·dx` on a polar grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReference {
    r_max: f64,
    grid: usize,
    /// Row-major `(r, θ)` cell masses, normalized to sum to 1.
    masses: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridReference {
    /// `grid × grid` cells on `r ∈ [0, 1 + 12/√β]`, `θ ∈ [−π, π]`.
    pub fn new(depth: usize, beta: f64, grid: usize) -> Result<Self> {
        if !(beta > 0.0) || grid < 2 {
            return Err(config("grid reference needs β > 0 and at least 2 cells per axis"));
        }
        let r_max = 1.0 + 12.0 / beta.sqrt();
        let dr = r_max / grid as f64;
        let dt = 2.0 * PI / grid as f64;
        // L depends on |θ| only, so the angular profile is shared by all radii.
        let chains = (0..grid)
            .map(|j| {
                let theta = (-PI + (j as f64 + 0.5) * dt).abs();
                theta_chain(theta, depth).map(|c| c.theta_d)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut log_w = Vec::with_capacity(grid * grid);
        for i in 0..grid {
            let r = (i as f64 + 0.5) * dr;
            for theta_d in &chains {
                let loss = 0.5 * r * r - r * theta_d.cos() + 0.5;
                log_w.push(-beta * loss + (r * dr * dt).ln());
            }
        }
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut masses: Vec<f64> = log_w.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= total);
        let mut acc = 0.0;
        let cumulative = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Ok(Self {
            r_max,
            grid,
            masses,
            cumulative,
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Inverse-CDF draws: a cell by mass, then `θ` uniform and `r` with
    /// density `∝ r` inside the cell.
    pub fn sample(&self, count: usize, seed: u64) -> Result<EmpiricalDistribution> {
        let mut rng = rng_from_seed(seed);
        let dr = self.r_max / self.grid as f64;
        let dt = 2.0 * PI / self.grid as f64;
        let last = *self.cumulative.last().unwrap();
        let samples = (0..count)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * last;
                let cell = self
                    .cumulative
                    .partition_point(|c| *c < u)
                    .min(self.masses.len() - 1);
                let (i, j) = (cell / self.grid, cell % self.grid);
                let (r0, r1) = (i as f64 * dr, (i + 1) as f64 * dr);
                let r = (r0 * r0 + rng.random::<f64>() * (r1 * r1 - r0 * r0)).sqrt();
                let theta = -PI + (j as f64 + rng.random::<f64>()) * dt;
                vec![r * theta.cos(), r * theta.sin()]
            })
            .collect();
        EmpiricalDistribution::new(samples)
    }
}

/// `count` draws from the planar reference measure `∝ e^{−βL}`.
pub fn reference_grid_sampler(
    depth: usize,
    beta: f64,
    n: usize,
    grid: usize,
    count: usize,
    seed: u64,
) -> Result<EmpiricalDistribution> {
    if n != 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    GridReference::new(depth, beta, grid)?.sample(count, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_symmetric() {
        let g = GridReference::new(2, 40.0, 200).unwrap();
        assert!((g.total_mass() - 1.0).abs() < 1e-6);
        let s = g.sample(20_000, 1).unwrap();
        let ys: Vec<f64> = s.samples().iter().map(|x| x[1]).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sd / (ys.len() as f64).sqrt());
    }

    #[test]
    fn concentrates_at_target_when_cold() {
        let s = reference_grid_sampler(2, 200.0, 2, 300, 20_000, 2).unwrap();
        let m = s.mean();
        assert!(((m[0] - 1.0).powi(2) + m[1] * m[1]).sqrt() < 0.05);
    }

    #[test]
    fn only_planar() {
        assert!(matches!(
            reference_grid_sampler(2, 1.0, 3, 10, 10, 0),
            Err(Error::UnsupportedDimension(3))
        ));
    }
}
