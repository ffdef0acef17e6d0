use serde::Serialize;

use crate::error::{config, Result};
use crate::linalg::{distance, norm};
use crate::samplers::Trajectory;

/// Closed ball `‖x − center‖ ≤ radius`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl RegionSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(config(format!("region radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        distance(x, &self.center) <= self.radius
    }
}

/// Iteration index of the first recorded state inside `region`.
pub fn hitting_time(traj: &Trajectory, region: &RegionSpec) -> Option<usize> {
    traj.states
        .iter()
        .position(|s| region.contains(s))
        .map(|i| traj.steps[i])
}

/// Two-sided 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Empirical frequency of an event with its Wilson interval and the bound
/// it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub threshold: f64,
    pub violations: usize,
    pub trials: usize,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    /// First iteration included, `⌈3/η⌉`.
    pub min_step: usize,
    /// `‖x_t‖ < 0.9A − a` at the recorded time where it is most frequent
    /// across chains; the bound is `e^{−βa²/4}`.
    pub small_norm: BoundCheck,
    /// `‖x_t‖ ≥ (1 − η/2)^t‖x₀‖ + 10 + 10√(n/β)` over every chain and recorded time.
    pub large_norm: BoundCheck,
}

/// Escape and boundedness statistics over independent chains with common
/// recording times. `a_const` is `cos(g^∘d(π))·‖z*‖`, `margin` is `a`.
pub fn tail_statistics(
    trajs: &[Trajectory],
    beta: f64,
    eta: f64,
    a_const: f64,
    margin: f64,
) -> Result<TailReport> {
    let first = trajs.first().ok_or_else(|| config("tail statistics need trajectories"))?;
    if trajs.iter().any(|t| t.steps != first.steps) {
        return Err(config("trajectories must share recording times"));
    }
    let min_step = (3.0 / eta).ceil() as usize;
    let columns: Vec<usize> = (0..first.steps.len())
        .filter(|&i| first.steps[i] >= min_step)
        .collect();
    if columns.is_empty() {
        return Err(config(format!("no recorded step at or after {min_step}")));
    }
    let threshold = 0.9 * a_const - margin;
    let chains = trajs.len();
    let worst = columns
        .iter()
        .map(|&i| trajs.iter().filter(|t| norm(&t.states[i]) < threshold).count())
        .max()
        .unwrap();
    let (lo, hi) = wilson_interval(worst, chains);
    let small_norm = BoundCheck {
        threshold,
        violations: worst,
        trials: chains,
        frequency: worst as f64 / chains as f64,
        ci_low: lo,
        ci_high: hi,
        bound: (-beta * margin * margin / 4.0).exp(),
    };

    let n = first.states[0].len() as f64;
    let offset = 10.0 + 10.0 * (n / beta).sqrt();
    let mut large = 0;
    let mut total = 0;
    for t in trajs {
        let start = norm(&t.states[0]);
        for (&step, s) in t.steps.iter().zip(&t.states) {
            total += 1;
            let limit = (1.0 - eta / 2.0).powf(step as f64) * start + offset;
            if norm(s) >= limit {
                large += 1;
            }
        }
    }
    let (lo, hi) = wilson_interval(large, total);
    Ok(TailReport {
        min_step,
        small_norm,
        large_norm: BoundCheck {
            threshold: offset,
            violations: large,
            trials: total,
            frequency: large as f64 / total as f64,
            ci_low: lo,
            ci_high: hi,
            bound: 0.0,
        },
    })
}
