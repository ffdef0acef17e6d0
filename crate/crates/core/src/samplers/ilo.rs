use rand::seq::index::sample;
use rand::Rng;

use super::l1::{project_l1, L1ProjectionSpec};
use super::{run_gd, Trajectory};
use crate::error::{config, Error, Result};
use crate::generator::{InverseProblem, MeasurementMap, ReluGenerator};
use crate::linalg::all_finite;
use crate::rng::{gaussian, rng_from_seed};

/// Projected gradient descent on the output `w` of the first
/// `split_layer` layers, started at `w₀ = G₁(z₀)` and kept in the ℓ1 ball
/// of the given radius around `w₀`. Recorded losses are measurement losses.
pub fn run_ilo_baseline(
    problem: &InverseProblem,
    split_layer: usize,
    radius: f64,
    eta: f64,
    steps: usize,
    z0: &[f64],
) -> Result<Trajectory> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(config(format!("step size must be positive, got {eta}")));
    }
    let (head, tail) = problem.generator.split_at(split_layer)?;
    let w0 = head.apply(z0)?;
    let ball = L1ProjectionSpec::new(w0.clone(), radius)?;
    let mut w = w0;
    let mut traj = Trajectory::default();
    for t in 0..=steps {
        let (loss, grad) = problem.loss_grad_through(&tail, &w)?;
        traj.evaluations += 1;
        if !all_finite(&grad) {
            return Err(Error::NonFinite { step: t });
        }
        traj.push(t, &w, loss, false);
        if t == steps {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= eta * gi;
        }
        w = project_l1(&w, &ball);
    }
    Ok(traj)
}

/// Plain gradient descent on the latent code of the whole generator.
pub fn run_csgm_gd(
    problem: &InverseProblem,
    z0: &[f64],
    eta: f64,
    steps: usize,
) -> Result<Trajectory> {
    run_gd(problem, z0, eta, steps, false)
}

/// Observations of `G₂(G₁(z*) + δ)` with `δ` supported on `sparsity`
/// random intermediate coordinates with `N(0, magnitude²)` entries.
pub fn sparse_deviation_problem(
    generator: ReluGenerator,
    map: MeasurementMap,
    split_layer: usize,
    z_star: &[f64],
    sparsity: usize,
    magnitude: f64,
    mask: Option<Vec<bool>>,
    seed: u64,
) -> Result<InverseProblem> {
    let (head, tail) = generator.split_at(split_layer)?;
    let mut w = head.apply(z_star)?;
    if sparsity > w.len() {
        return Err(config(format!(
            "sparsity {sparsity} exceeds intermediate width {}",
            w.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    for i in sample(&mut rng, w.len(), sparsity) {
        w[i] += magnitude * gaussian(&mut rng);
    }
    let clean = map.apply(&tail.apply(&w)?);
    InverseProblem::with_clean_signal(generator, map, clean, 0.0, mask, rng.random())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;

    fn setup() -> InverseProblem {
        let g = build_generator(&[3, 12, 30], 2).unwrap();
        sparse_deviation_problem(g, MeasurementMap::Identity(30), 1, &[0.5, -0.2, 0.9], 3, 0.5, None, 4)
            .unwrap()
    }

    #[test]
    fn zero_radius_freezes_iterates() {
        let p = setup();
        let t = run_ilo_baseline(&p, 1, 0.0, 0.1, 20, &[0.1, 0.1, 0.1]).unwrap();
        assert!(t.states.iter().all(|s| s == &t.states[0]));
    }

    #[test]
    fn infinite_radius_is_plain_gd_on_the_intermediate() {
        let p = setup();
        let (_, tail) = p.generator.split_at(1).unwrap();
        let z0 = [0.1, 0.3, -0.2];
        let t = run_ilo_baseline(&p, 1, f64::INFINITY, 0.1, 20, &z0).unwrap();
        let u = |w: &[f64]| p.loss_grad_through(&tail, w);
        let g = run_gd(&u, &t.states[0], 0.1, 20, false).unwrap();
        for (a, b) in t.states.iter().zip(&g.states) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn invalid_split_is_rejected() {
        let p = setup();
        assert!(run_ilo_baseline(&p, 2, 1.0, 0.1, 5, &[0.0; 3]).is_err());
        assert!(run_ilo_baseline(&p, 0, 1.0, 0.1, 5, &[0.0; 3]).is_err());
    }
}
