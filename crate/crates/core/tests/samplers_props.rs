use proptest::prelude::*;
use rand::Rng;
use relu_langevin::diagnostics::convexity_radius;
use relu_langevin::landscape::{saddle_radius, IdealLandscape};
use relu_langevin::rng::{fill_gaussian, gaussian_vec, rng_from_seed, unit_vector, StreamRng};
use relu_langevin::samplers::{
    coupled_pair, langevin_step, project_l1, run_chains, run_gd, run_langevin, L1ProjectionSpec,
    LangevinConfig, Potential,
};
use relu_langevin::Result;

fn quadratic(z: &[f64]) -> Result<(f64, Vec<f64>)> {
    Ok((0.5 * z.iter().map(|v| v * v).sum::<f64>(), z.to_vec()))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Projection onto the ℓ1 ball by enumerating supports.
fn brute_force_l1(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    let n = v.len();
    let mut best = vec![0.0; n];
    let mut best_dist = dist(v, &best);
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mass: f64 = support.iter().map(|&i| v[i].abs()).sum();
        let tau = (mass - radius) / support.len() as f64;
        if support.iter().any(|&i| v[i].abs() < tau) {
            continue;
        }
        let mut x = vec![0.0; n];
        for &i in &support {
            x[i] = v[i].signum() * (v[i].abs() - tau);
        }
        let d = dist(v, &x);
        if d < best_dist {
            best_dist = d;
            best = x;
        }
    }
    best
}

#[test]
fn single_step_follows_the_update_rule() {
    let mut rng = rng_from_seed(41);
    let z0 = gaussian_vec(&mut rng, 7);
    let cfg = LangevinConfig::new(0.03, 5.0, 1, 99);
    let traj = run_langevin(&quadratic, &z0, &cfg).unwrap();
    let mut u = vec![0.0; 7];
    fill_gaussian(&mut rng_from_seed(99), &mut u);
    let sigma = (2.0 * cfg.eta / cfg.beta).sqrt();
    let expect: Vec<f64> = z0.iter().zip(&u).map(|(z, n)| z + (-cfg.eta * z + sigma * n)).collect();
    assert_eq!(traj.state_at(1).unwrap(), expect.as_slice());
    let mut stepped = z0.clone();
    langevin_step(&mut stepped, &z0, cfg.eta, sigma, &u);
    assert_eq!(stepped, expect);
    assert_eq!(traj.evaluations, 2);
}

#[test]
fn stationary_variance_of_discretized_quadratic() {
    let (eta, beta) = (0.01, 10.0);
    let dim = 100;
    let cfg = LangevinConfig::new(eta, beta, 40_000, 42).recording_every(50);
    let traj = run_langevin(&quadratic, &vec![0.0; dim], &cfg).unwrap();
    let pooled: Vec<f64> = traj
        .steps
        .iter()
        .zip(&traj.states)
        .filter(|(s, _)| **s >= 2000)
        .flat_map(|(_, z)| z.iter().copied())
        .collect();
    let var = pooled.iter().map(|v| v * v).sum::<f64>() / pooled.len() as f64;
    let target = 1.0 / (beta * (1.0 - eta / 2.0));
    assert!((var / target - 1.0).abs() < 0.05, "variance {var}, target {target}");
}

#[test]
fn negation_escapes_the_saddle_ray() {
    let n = 4;
    let depth = 2;
    let mut z_star = vec![0.0; n];
    z_star[0] = 1.0;
    let land = IdealLandscape::new(&z_star, depth).unwrap();
    let start = [-0.5, 0.0, 0.0, 0.0];
    let with = run_gd(&land, &start, 0.1, 2000, true).unwrap();
    assert!(dist(with.last_state(), &z_star) < 1e-3, "{:?}", with.last_state());
    let without = run_gd(&land, &start, 0.1, 2000, false).unwrap();
    let saddle = [-saddle_radius(depth), 0.0, 0.0, 0.0];
    assert!(dist(without.last_state(), &saddle) < 1e-3, "{:?}", without.last_state());
    assert!(without.last_state()[1..].iter().all(|v| *v == 0.0));
}

#[test]
fn negation_never_leaves_the_worse_sign() {
    let mut rng = rng_from_seed(43);
    for _ in 0..50 {
        let z_star = gaussian_vec(&mut rng, 5);
        let land = IdealLandscape::new(&z_star, 3).unwrap();
        let start = gaussian_vec(&mut rng, 5);
        let traj = run_gd(&land, &start, 0.05, 100, true).unwrap();
        for (z, loss) in traj.states.iter().zip(&traj.losses).skip(1) {
            let minus: Vec<f64> = z.iter().map(|v| -v).collect();
            assert!(*loss <= land.value(&minus).unwrap());
        }
    }
}

#[test]
fn coupled_chains_contract_inside_the_convex_ball() {
    let n = 4;
    let depth = 2;
    let radius = convexity_radius(depth, n, 0.9).unwrap();
    let mut z_star = vec![0.0; n];
    z_star[0] = 1.0;
    let land = IdealLandscape::new(&z_star, depth).unwrap();
    let mut contracted = 0;
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(1000 + seed);
        let start = |rng: &mut StreamRng| -> Vec<f64> {
            let dir = unit_vector(rng, n);
            let r = radius * 0.9 * rng.random::<f64>();
            z_star.iter().zip(&dir).map(|(a, b)| a + r * b).collect()
        };
        let (a, b) = (start(&mut rng), start(&mut rng));
        let cfg = LangevinConfig::new(0.01, 10.0 * n as f64, 1000, seed).recording_every(1000);
        let (ta, tb) = coupled_pair(&land, &a, &b, &cfg).unwrap();
        if dist(ta.last_state(), tb.last_state()) < dist(&a, &b) {
            contracted += 1;
        }
    }
    assert!(contracted >= 95, "{contracted} of 100 seeds contracted");
}

#[test]
fn chains_do_not_depend_on_thread_count() {
    let starts: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64 * 0.1, -1.0]).collect();
    let cfg = LangevinConfig::new(0.01, 20.0, 500, 44).recording_every(25);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_chains(&quadratic, &starts, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn projection_matches_support_enumeration() {
    let mut rng = rng_from_seed(45);
    for _ in 0..1000 {
        let dim = rng.random_range(1..=6usize);
        let v: Vec<f64> = gaussian_vec(&mut rng, dim).iter().map(|x| 3.0 * x).collect();
        let radius = 2.0 * rng.random::<f64>();
        let spec = L1ProjectionSpec::new(vec![0.0; dim], radius).unwrap();
        let got = project_l1(&v, &spec);
        let want = brute_force_l1(&v, radius);
        assert!(dist(&got, &want) < 1e-10, "{got:?} vs {want:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_idempotent_and_nonexpansive(seed in any::<u64>(), radius in 0.0f64..5.0, dim in 1usize..20) {
        let mut rng = rng_from_seed(seed);
        let center = gaussian_vec(&mut rng, dim);
        let spec = L1ProjectionSpec::new(center.clone(), radius).unwrap();
        let v: Vec<f64> = gaussian_vec(&mut rng, dim).iter().map(|x| 4.0 * x).collect();
        let w: Vec<f64> = gaussian_vec(&mut rng, dim).iter().map(|x| 4.0 * x).collect();
        let pv = project_l1(&v, &spec);
        let pw = project_l1(&w, &spec);
        let l1: f64 = pv.iter().zip(&center).map(|(a, c)| (a - c).abs()).sum();
        prop_assert!(l1 <= radius * (1.0 + 1e-12) + 1e-12);
        prop_assert!(dist(&project_l1(&pv, &spec), &pv) <= 1e-12 * (1.0 + radius));
        prop_assert!(dist(&pv, &pw) <= dist(&v, &w) + 1e-12);
    }

    #[test]
    fn langevin_is_seed_deterministic(seed in any::<u64>()) {
        let cfg = LangevinConfig::new(0.05, 3.0, 50, seed);
        let a = run_langevin(&quadratic, &[1.0, 2.0, 3.0], &cfg).unwrap();
        let b = run_langevin(&quadratic, &[1.0, 2.0, 3.0], &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
