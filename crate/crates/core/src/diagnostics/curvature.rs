use std::f64::consts::PI;

use crate::error::{config, shape, Result};
use crate::landscape::IdealLandscape;

/// Smallest Hessian eigenvalue of the idealized loss at `x` in `R^n`.
pub fn min_hessian_eig(x: &[f64], z_star: &[f64], depth: usize, n: usize) -> Result<f64> {
    if x.len() != n {
        return Err(shape(format!("point has dimension {}, expected {n}", x.len())));
    }
    Ok(IdealLandscape::new(z_star, depth)?.hessian(x)?.min_eigenvalue(n))
}

/// Radii and angles of the planar grid used to scan a ball around `z*`.
const RADIAL_NODES: usize = 64;
const ANGULAR_NODES: usize = 128;
const BISECTION_STEPS: usize = 48;

/// Minimum Hessian eigenvalue over a polar grid of the disk of radius `l`
/// (canonical units) around `z* = e₁` in the `(e₁, e₂)` plane.
///
/// The Hessian spectrum depends on `x` only through `(‖x‖, ∠(x, z*))`, so
/// the planar disk attains every value found in the ball.
pub fn min_eig_over_ball(depth: usize, n: usize, radius: f64) -> Result<f64> {
    let land = IdealLandscape::new(&[1.0, 0.0], depth)?;
    let mut worst = land.hessian(&[1.0, 0.0])?.min_eigenvalue(n);
    for i in 1..=RADIAL_NODES {
        let rho = radius * i as f64 / RADIAL_NODES as f64;
        for j in 0..=ANGULAR_NODES {
            let phi = PI * j as f64 / ANGULAR_NODES as f64;
            let x = [1.0 + rho * phi.cos(), rho * phi.sin()];
            if x[0] == 0.0 && x[1] == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            worst = worst.min(land.hessian(&x)?.min_eigenvalue(n));
        }
    }
    Ok(worst)
}

/// Largest `l` (in units of `‖z*‖`, up to bisection tolerance) such that the
/// minimum Hessian eigenvalue stays `≥ threshold` on the ball `‖x − z*‖ ≤ l`.
pub fn convexity_radius(depth: usize, n: usize, threshold: f64) -> Result<f64> {
    if n < 2 {
        return Err(config("convexity radius needs n ≥ 2"));
    }
    if min_eig_over_ball(depth, n, 0.0)? < threshold {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if min_eig_over_ball(depth, n, mid)? >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_target() {
        let z = [0.0, 2.0, 0.0];
        assert!((min_hessian_eig(&z, &z, 2, 3).unwrap() - 1.0).abs() < 1e-12);
        assert!(min_hessian_eig(&z, &z, 2, 4).is_err());
    }

    #[test]
    fn radius_is_positive_and_tight() {
        let l = convexity_radius(2, 10, 0.9).unwrap();
        assert!(l > 0.0 && l < 1.0, "{l}");
        assert!(min_eig_over_ball(2, 10, l).unwrap() >= 0.9);
        assert!(min_eig_over_ball(2, 10, l * 1.01).unwrap() < 0.9);
    }
}
