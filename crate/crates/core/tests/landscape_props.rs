use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use relu_langevin::landscape::{
    ideal_loss, saddle_radius, theta_chain, IdealLandscape, ModifiedLossParams, SmoothedLandscape,
};
use relu_langevin::rng::{gaussian_vec, rng_from_seed, unit_vector};

fn e1(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    v
}

/// Point at radius `r` and angle `theta` from `e1`, rotated into a random
/// direction of the orthogonal complement.
fn polar_point(rng: &mut impl Rng, n: usize, r: f64, theta: f64) -> Vec<f64> {
    let mut perp = gaussian_vec(rng, n);
    perp[0] = 0.0;
    let len = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x: Vec<f64> = perp.iter().map(|v| r * theta.sin() * v / len).collect();
    x[0] = r * theta.cos();
    x
}

fn dense_hessian(land: &IdealLandscape, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = land.hessian_vector_product(x, &e1_at(n, j)).unwrap();
        for i in 0..n {
            h[(i, j)] = col[i];
        }
    }
    h
}

fn e1_at(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = 1.0;
    v
}

#[test]
fn theta_chain_derivative_bounds() {
    let mut rng = rng_from_seed(11);
    for _ in 0..10_000 {
        let theta = rng.random::<f64>() * PI;
        let depth = rng.random_range(1..=8usize);
        let c = theta_chain(theta, depth).unwrap();
        assert!((-1e-12..=1.0 + 1e-12).contains(&c.theta_d_prime), "θ'={} at {theta}", c.theta_d_prime);
        assert!(c.theta_d_double_prime <= 1e-9, "θ''={} at {theta}", c.theta_d_double_prime);
        assert!(c.theta_d <= theta + 1e-12);
    }
}

#[test]
fn hessian_matches_dense_eigendecomposition() {
    let n = 6;
    let mut rng = rng_from_seed(12);
    let z_star = gaussian_vec(&mut rng, n);
    for depth in [1usize, 2, 4] {
        let land = IdealLandscape::new(&z_star, depth).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = gaussian_vec(&mut rng, n);
            let h = dense_hessian(&land, &x);
            let asym = (&h - h.transpose()).abs().max();
            assert!(asym < 1e-10, "asymmetric Hessian: {asym}");
            let dense_min = h.clone().symmetric_eigen().eigenvalues.min();
            let coeffs = land.hessian(&x).unwrap();
            assert!((coeffs.min_eigenvalue(n) - dense_min).abs() < 1e-8);
            let trace = h.trace();
            assert!((coeffs.laplacian - trace).abs() < 1e-8 * (1.0 + trace.abs()));
        }
    }
}

#[test]
fn hessian_vector_product_matches_gradient_differences() {
    let mut rng = rng_from_seed(13);
    for _ in 0..500 {
        let n = rng.random_range(2..=12usize);
        let depth = rng.random_range(1..=4usize);
        let z_star = gaussian_vec(&mut rng, n);
        let land = IdealLandscape::new(&z_star, depth).unwrap();
        let x = gaussian_vec(&mut rng, n);
        let v = unit_vector(&mut rng, n);
        let h = 1e-6;
        let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let gp = land.gradient(&plus).unwrap();
        let gm = land.gradient(&minus).unwrap();
        let hv = land.hessian_vector_product(&x, &v).unwrap();
        let scale = hv.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            assert!((fd - hv[i]).abs() < 1e-5 * scale, "{fd} vs {}", hv[i]);
        }
    }
}

#[test]
fn laplacian_bounds_hold() {
    let mut rng = rng_from_seed(14);
    for _ in 0..10_000 {
        let n = [2usize, 10, 50][rng.random_range(0..3)];
        let depth = rng.random_range(2..=4usize);
        let r = 0.01 + 3.0 * rng.random::<f64>();
        let theta = rng.random::<f64>() * PI;
        let x = polar_point(&mut rng, n, r, theta);
        let lap = IdealLandscape::new(&e1(n), depth).unwrap().hessian(&x).unwrap().laplacian;
        if theta <= PI / 2.0 {
            assert!(lap <= n as f64 + 1e-9, "△L={lap} > n at r={r}, θ={theta}");
        } else {
            let cd = theta_chain(theta, depth).unwrap().theta_d.cos();
            let bound = 2.0 + (n as f64 - 2.0) * (r - cd) / r;
            assert!(lap <= bound + 1e-9, "△L={lap} > {bound} at r={r}, θ={theta}");
        }
    }
}

#[test]
fn hessian_is_identity_at_target() {
    let n = 10;
    let land = IdealLandscape::new(&e1(n), 2).unwrap();
    let h = dense_hessian(&land, &e1(n));
    assert!((h - DMatrix::<f64>::identity(n, n)).abs().max() < 1e-8);
    let c = land.hessian(&e1(n)).unwrap();
    assert!((c.laplacian - 10.0).abs() < 1e-8);
}

#[test]
fn smoothed_loss_agrees_outside_r0_and_is_regular_inside() {
    let mut rng = rng_from_seed(15);
    for depth in [2usize, 3, 4] {
        for n in [2usize, 10] {
            let params = ModifiedLossParams::defaults(depth, 10.0);
            let z_star = e1(n);
            let smooth = SmoothedLandscape::new(&z_star, depth, params).unwrap();
            for _ in 0..500 {
                let theta = rng.random::<f64>() * PI;
                let r = params.r0 * (1.0 + 4.0 * rng.random::<f64>());
                let x = polar_point(&mut rng, n, r, theta);
                let (v, g) = smooth.loss_and_gradient(&x).unwrap();
                assert_eq!(v.to_bits(), ideal_loss(&x, &z_star, depth).unwrap().to_bits());
                let ideal = smooth.ideal().gradient(&x).unwrap();
                assert_eq!(g, ideal);
            }
            for _ in 0..500 {
                let theta = rng.random::<f64>() * PI;
                let r = params.r0 * rng.random::<f64>();
                let x = polar_point(&mut rng, n, r, theta);
                let (v, g) = smooth.loss_and_gradient(&x).unwrap();
                assert!(v.is_finite() && g.iter().all(|a| a.is_finite()));
                let dir = unit_vector(&mut rng, n);
                let h = 1e-5;
                let at = |s: f64| -> Vec<f64> {
                    let p: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + s * b).collect();
                    smooth.loss_and_gradient(&p).unwrap().1
                };
                let (gp, gm) = (at(h), at(-h));
                let curvature = gp
                    .iter()
                    .zip(&gm)
                    .map(|(a, b)| ((a - b) / (2.0 * h)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                // Radial steps of width ~r0 carry second derivatives of order 1/r0².
                let cap = (4.0 * params.xi + 100.0) / (params.r0 * params.r0);
                assert!(curvature < cap, "finite-difference Hessian {curvature} at r={r}");
            }
        }
    }
}

#[test]
fn smoothed_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(16);
    let n = 5;
    let params = ModifiedLossParams::defaults(2, 10.0);
    let smooth = SmoothedLandscape::new(&e1(n), 2, params).unwrap();
    for _ in 0..1000 {
        let r = params.r0 * (0.05 + 1.5 * rng.random::<f64>());
        let theta = 0.05 + (PI - 0.1) * rng.random::<f64>();
        let x = polar_point(&mut rng, n, r, theta);
        let (_, g) = smooth.loss_and_gradient(&x).unwrap();
        let h = 1e-7;
        for i in 0..n {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += h;
            m[i] -= h;
            let fd = (smooth.loss_and_gradient(&p).unwrap().0 - smooth.loss_and_gradient(&m).unwrap().0)
                / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * (1.0 + g[i].abs()), "{fd} vs {} at r={r}", g[i]);
        }
    }
}

#[test]
fn potential_generator_is_bounded_at_target() {
    for n in [4usize, 10, 50] {
        let params = ModifiedLossParams::defaults(2, 10.0 * n as f64);
        let smooth = SmoothedLandscape::new(&e1(n), 2, params).unwrap();
        let pv = smooth.potential(&e1(n)).unwrap();
        assert!(pv.generator <= 2.0 * n as f64, "𝓛V = {} at z*, n = {n}", pv.generator);
    }
}

#[test]
fn saddle_point_loss_is_stationary() {
    for depth in [1usize, 2, 3] {
        let n = 4;
        let land = IdealLandscape::new(&e1(n), depth).unwrap();
        let mut saddle = e1(n);
        saddle[0] = -saddle_radius(depth);
        let g = land.gradient(&saddle).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-10), "{g:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn loss_scales_quadratically_with_target(
        seed in any::<u64>(),
        c in 0.1f64..10.0,
        depth in 1usize..5,
        n in 2usize..9,
    ) {
        let mut rng = rng_from_seed(seed);
        let z_star = gaussian_vec(&mut rng, n);
        let x = gaussian_vec(&mut rng, n);
        let cz: Vec<f64> = z_star.iter().map(|v| c * v).collect();
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let base = ideal_loss(&x, &z_star, depth).unwrap();
        let scaled = ideal_loss(&cx, &cz, depth).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-10 * (1.0 + scaled.abs()));
    }

    #[test]
    fn loss_is_rotation_invariant(seed in any::<u64>(), depth in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let z_star = gaussian_vec(&mut rng, 2);
        let x = gaussian_vec(&mut rng, 2);
        let phi: f64 = rng.random::<f64>() * 2.0 * PI;
        let rot = |v: &[f64]| vec![phi.cos() * v[0] - phi.sin() * v[1], phi.sin() * v[0] + phi.cos() * v[1]];
        let a = ideal_loss(&x, &z_star, depth).unwrap();
        let b = ideal_loss(&rot(&x), &rot(&z_star), depth).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn loss_is_nonnegative(seed in any::<u64>(), depth in 0usize..6, n in 1usize..12) {
        let mut rng = rng_from_seed(seed);
        let z_star = gaussian_vec(&mut rng, n);
        let x = gaussian_vec(&mut rng, n);
        prop_assert!(ideal_loss(&x, &z_star, depth).unwrap() >= -1e-12);
    }
}
