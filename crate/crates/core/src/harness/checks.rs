//! Falsifiable numerical checks of the landscape, concentration, mixing
//! and sampling claims, each reduced to one pass/fail record.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, Mode, PriorSpec};
use super::modes::{invert_runs, mixing_curve, moments, rric_sweep, run_experiment, wdc_sweep, InvertSetup, MixingSetup};
use crate::diagnostics::{
    convexity_radius, discretization_gap, hitting_time, sliced_w1, tail_statistics, RegionSpec,
};
use crate::error::{config, Result};
use crate::generator::{build_generator, gradient_proximity, MeasurementMap};
use crate::landscape::{saddle_radius, IdealLandscape, ModifiedLossParams, SmoothedLandscape};
use crate::linalg::{axpy, distance, dot, norm, sub};
use crate::priors::GaussianMixturePrior;
use crate::rng::{derive_seed, derived_rng, gaussian_vec, rng_from_seed, unit_vector};
use crate::samplers::{
    posterior_chains, run_chains, run_gd, run_langevin_aggregated, LangevinConfig,
    PosteriorProblem, TailMap,
};

pub const DEFAULT_SUITE_SEED: u64 = 20_190_601;

pub const CHECK_IDS: [&str; 12] = [
    "gradient_hessian_fd",
    "landscape_census",
    "strong_convexity",
    "wdc_rric_concentration",
    "gradient_proximity",
    "mixing_n2",
    "escape_bound",
    "hitting_time_scaling",
    "contraction_discretization",
    "posterior_oracles",
    "baseline_ordering",
    "determinism",
];

/// Deliberate corruption used to confirm that a check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The analytic gradient is replaced by its negation.
    NegateGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
    /// Restricts the suite to these ids when set.
    pub only: Option<Vec<String>>,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            fault: None,
            only: None,
        }
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = Some(fault);
        self
    }

    pub fn only(mut self, ids: &[&str]) -> Self {
        self.only = Some(ids.iter().map(|s| s.to_string()).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub statistic: f64,
    pub bound: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub pass: bool,
    /// Human-readable breakdown of the measured quantities.
    pub detail: String,
}

impl CheckRecord {
    fn new(id: &str, statistic: f64, bound: f64, pass: bool, detail: String) -> Self {
        Self {
            check_id: id.into(),
            statistic,
            bound,
            ci_low: None,
            ci_high: None,
            pass,
            detail,
        }
    }

    fn interval(mut self, lo: f64, hi: f64) -> Self {
        self.ci_low = Some(lo);
        self.ci_high = Some(hi);
        self
    }
}

/// Runs the selected checks in the order of [`CHECK_IDS`].
pub fn theory_check_suite(opts: &SuiteOptions) -> Result<Vec<CheckRecord>> {
    if let Some(only) = &opts.only {
        if let Some(bad) = only.iter().find(|id| !CHECK_IDS.contains(&id.as_str())) {
            return Err(config(format!("unknown check id {bad:?}")));
        }
    }
    CHECK_IDS
        .iter()
        .filter(|id| opts.only.as_ref().is_none_or(|o| o.iter().any(|s| s == *id)))
        .map(|id| run_check(id, opts))
        .collect()
}

pub fn run_check(id: &str, opts: &SuiteOptions) -> Result<CheckRecord> {
    let seed = derive_seed(opts.seed, CHECK_IDS.iter().position(|c| *c == id).unwrap_or(99) as u64);
    match id {
        "gradient_hessian_fd" => gradient_hessian_fd(seed, opts.fault),
        "landscape_census" => landscape_census(seed),
        "strong_convexity" => strong_convexity(seed),
        "wdc_rric_concentration" => wdc_rric_concentration(seed),
        "gradient_proximity" => gradient_proximity_check(seed),
        "mixing_n2" => mixing_n2(seed),
        "escape_bound" => escape_bound(seed),
        "hitting_time_scaling" => hitting_time_scaling(seed),
        "contraction_discretization" => contraction_discretization(seed),
        "posterior_oracles" => posterior_oracles(seed),
        "baseline_ordering" => baseline_ordering(seed),
        "determinism" => determinism(seed),
        other => Err(config(format!("unknown check id {other:?}"))),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Unit vector orthogonal to the unit vector `axis`.
fn orthogonal_unit(rng: &mut impl Rng, axis: &[f64]) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, axis.len());
        let c = dot(&v, axis);
        axpy(-c, axis, &mut v);
        let nv = norm(&v);
        if nv > 1e-6 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

pub const FD_CONFIGS: usize = 10_000;
pub const FD_TOLERANCE: f64 = 1e-5;

fn gradient_hessian_fd(seed: u64, fault: Option<Fault>) -> Result<CheckRecord> {
    let errs = (0..FD_CONFIGS)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(seed, i as u64);
            let depth = [2, 3, 4][i % 3];
            let n = [2, 10, 50][(i / 3) % 3];
            let scale = 0.5 + 1.5 * rng.random::<f64>();
            let axis = unit_vector(&mut rng, n);
            let z_star: Vec<f64> = axis.iter().map(|v| scale * v).collect();
            let r = scale * (0.3 + 2.7 * rng.random::<f64>());
            let theta = 0.05 + (PI - 0.1) * rng.random::<f64>();
            let perp = orthogonal_unit(&mut rng, &axis);
            let x: Vec<f64> = axis
                .iter()
                .zip(&perp)
                .map(|(a, p)| r * (theta.cos() * a + theta.sin() * p))
                .collect();
            let land = IdealLandscape::new(&z_star, depth)?;
            let mut grad = land.gradient(&x)?;
            if fault == Some(Fault::NegateGradient) {
                grad.iter_mut().for_each(|g| *g = -*g);
            }
            let h = 1e-5 * scale;
            let mut fd = vec![0.0; n];
            let mut xp = x.clone();
            for j in 0..n {
                xp[j] = x[j] + h;
                let up = land.loss(&xp)?;
                xp[j] = x[j] - h;
                let down = land.loss(&xp)?;
                xp[j] = x[j];
                fd[j] = (up - down) / (2.0 * h);
            }
            let grad_err = norm(&sub(&grad, &fd)) / norm(&fd);

            let v = unit_vector(&mut rng, n);
            let hv = land.hessian_vector_product(&x, &v)?;
            let plus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
            let fd_hv: Vec<f64> = land
                .gradient(&plus)?
                .iter()
                .zip(&land.gradient(&minus)?)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let hvp_err = norm(&sub(&hv, &fd_hv)) / norm(&fd_hv);
            Ok((grad_err, hvp_err))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let g = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let hv = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let worst = g.max(hv);
    Ok(CheckRecord::new(
        "gradient_hessian_fd",
        worst,
        FD_TOLERANCE,
        worst <= FD_TOLERANCE,
        format!("{FD_CONFIGS} configurations; max relative error gradient {g:.3e}, Hessian-vector {hv:.3e}"),
    ))
}

pub const CENSUS_POINTS: usize = 100_000;

fn landscape_census(seed: u64) -> Result<CheckRecord> {
    let mut crit_worst: f64 = 0.0;
    for depth in 2..=4 {
        let land = IdealLandscape::new(&unit_vector(&mut derived_rng(seed, depth as u64), 3), depth)?;
        for c in land.critical_points() {
            crit_worst = crit_worst.max(norm(&land.gradient(&c)?));
        }
    }
    let floor = (0..CENSUS_POINTS)
        .into_par_iter()
        .map(|i| {
            let depth = 2 + i % 3;
            let mut rng = derived_rng(seed, 100 + i as u64);
            let land = IdealLandscape::new(&unit_vector(&mut derived_rng(seed, depth as u64), 3), depth)?;
            let crit = land.critical_points();
            let x = loop {
                let radius = 3.0 * rng.random::<f64>().cbrt();
                let x: Vec<f64> = unit_vector(&mut rng, 3).into_iter().map(|v| radius * v).collect();
                if crit.iter().all(|c| distance(&x, c) >= 0.1) {
                    break x;
                }
            };
            Ok(norm(&land.gradient(&x)?))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let coeff_err = (saddle_radius(2) - 1.0 / PI).abs();
    let pass = crit_worst <= 1e-8 && floor > 0.0 && coeff_err <= 1e-12;
    Ok(CheckRecord::new(
        "landscape_census",
        floor,
        0.0,
        pass,
        format!(
            "critical gradient norm {crit_worst:.3e}; floor over {CENSUS_POINTS} points {floor:.4e}; \
             d=2 saddle coefficient error {coeff_err:.3e}"
        ),
    ))
}

fn strong_convexity(seed: u64) -> Result<CheckRecord> {
    let mut identity_err: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    let mut radii = Vec::new();
    for depth in 2..=4 {
        for n in [2usize, 10, 50] {
            let mut rng = derived_rng(seed, (depth * 100 + n) as u64);
            let scale = 1.7;
            let z_star: Vec<f64> = unit_vector(&mut rng, n).into_iter().map(|v| scale * v).collect();
            let land = IdealLandscape::new(&z_star, depth)?;
            let h = land.hessian(&z_star)?;
            let mut parts = vec![(h.c_rr - 1.0).abs(), (h.c_tt - 1.0).abs(), h.c_rt.abs()];
            if n > 2 {
                parts.push((h.c_psi - 1.0).abs());
            }
            identity_err = identity_err.max(parts.into_iter().fold(0.0, f64::max));

            let l = convexity_radius(depth, n, 0.9)?;
            radii.push(l);
            if l <= 0.0 {
                worst_eig = f64::NEG_INFINITY;
                continue;
            }
            let eigs = (0..2000)
                .into_par_iter()
                .map(|i| {
                    let mut rng = derived_rng(seed, (depth * 1_000_000 + n * 10_000 + i) as u64);
                    let rho = scale * l * rng.random::<f64>().powf(1.0 / n as f64);
                    let dir = unit_vector(&mut rng, n);
                    let x: Vec<f64> = z_star.iter().zip(&dir).map(|(z, d)| z + rho * d).collect();
                    Ok(land.hessian(&x)?.min_eigenvalue(n))
                })
                .collect::<Result<Vec<f64>>>()?;
            worst_eig = eigs.into_iter().fold(worst_eig, f64::min);
        }
    }
    let pass = identity_err <= 1e-8 && worst_eig >= 0.9 && radii.iter().all(|&l| l > 0.0);
    Ok(CheckRecord::new(
        "strong_convexity",
        worst_eig,
        0.9,
        pass,
        format!(
            "Hessian at target differs from I by {identity_err:.3e}; measured radii {:?}; \
             min eigenvalue over 18000 points in the balls {worst_eig:.6}",
            radii.iter().map(|l| format!("{l:.4}")).collect::<Vec<_>>()
        ),
    ))
}

/// Largest ratio of consecutive medians; below 1 means strictly decreasing.
fn worst_ratio(medians: &[f64]) -> f64 {
    medians.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn wdc_rric_concentration(seed: u64) -> Result<CheckRecord> {
    let k = 3;
    let sizes = [256usize, 1024, 4096];
    let wdc = wdc_sweep(k, &sizes, 200, derive_seed(seed, 0))?;
    let wdc_medians: Vec<f64> = sizes
        .iter()
        .map(|&n| median(wdc.iter().filter(|r| r.0 == n).map(|r| r.1).collect()))
        .collect();
    let m_sizes = [2 * k, 8 * k, 32 * k];
    let generator = build_generator(&[k, 8 * k, 32 * k], derive_seed(seed, 1))?;
    let rric = rric_sweep(&generator, &m_sizes, 200, derive_seed(seed, 2))?;
    let rric_medians: Vec<f64> = m_sizes
        .iter()
        .map(|&m| median(rric.iter().filter(|r| r.0 == m).map(|r| r.1).collect()))
        .collect();
    let ratio = worst_ratio(&wdc_medians).max(worst_ratio(&rric_medians));
    Ok(CheckRecord::new(
        "wdc_rric_concentration",
        ratio,
        1.0,
        ratio < 1.0,
        format!("WDC medians {wdc_medians:.4?} over n {sizes:?}; RRIC medians {rric_medians:.4?} over m {m_sizes:?}"),
    ))
}

fn gradient_proximity_check(seed: u64) -> Result<CheckRecord> {
    let k = 4;
    let mut medians = Vec::new();
    let z_star = unit_vector(&mut derived_rng(seed, 0), k);
    for (i, e) in [4usize, 16, 64].into_iter().enumerate() {
        let dims = [k, k * e, k * e * e];
        let g = build_generator(&dims, derive_seed(seed, 1 + i as u64))?;
        let a = MeasurementMap::Identity(g.output_dim());
        medians.push(gradient_proximity(&g, &a, &z_star, 200, derive_seed(seed, 10 + i as u64))?.median);
    }
    let ratio = worst_ratio(&medians);
    Ok(CheckRecord::new(
        "gradient_proximity",
        ratio,
        1.0,
        ratio < 1.0,
        format!("median scaled gradient gap {medians:.4?} over expansion [4, 16, 64]"),
    ))
}

pub fn mixing_setup(seed: u64) -> MixingSetup {
    MixingSetup {
        depth: 2,
        beta: 40.0,
        eta: 1e-3,
        chains: 200,
        steps: 100_000,
        snapshot_every: 100,
        start: vec![-1.0, 0.0],
        grid: 400,
        projections: 256,
        seed,
    }
}

fn mixing_n2(seed: u64) -> Result<CheckRecord> {
    let curve = mixing_curve(&mixing_setup(seed))?;
    let at = |t: usize| curve.iter().find(|c| c.0 == t).map(|c| c.1).ok_or_else(|| config("missing snapshot"));
    let ws = [at(100)?, at(1_000)?, at(10_000)?, at(100_000)?];
    let monotone = ws.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let last = ws[3];
    Ok(CheckRecord::new(
        "mixing_n2",
        last,
        0.1,
        monotone && last <= 0.1,
        format!("sliced W1 at t = 1e2, 1e3, 1e4, 1e5: {ws:.4?}; nonincreasing within 10%: {monotone}"),
    ))
}

fn escape_bound(seed: u64) -> Result<CheckRecord> {
    let (depth, n, beta, eta, a) = (2usize, 8usize, 80.0, 0.01, 0.2);
    let mut z_star = vec![0.0; n];
    z_star[0] = 1.0;
    let land = SmoothedLandscape::new(&z_star, depth, ModifiedLossParams::defaults(depth, beta))?;
    let mut rng = derived_rng(seed, 0);
    let starts: Vec<Vec<f64>> = (0..500)
        .map(|_| unit_vector(&mut rng, n).into_iter().map(|v| 0.05 * v).collect())
        .collect();
    let cfg = LangevinConfig::new(eta, beta, 1_000, derive_seed(seed, 1)).recording_every(10);
    let trajs = run_chains(&land, &starts, &cfg)?;
    let report = tail_statistics(&trajs, beta, eta, saddle_radius(depth), a)?;
    let bound = report.small_norm.bound + 0.05;
    let s = &report.small_norm;
    let pass = s.ci_high <= bound && report.large_norm.violations == 0;
    Ok(CheckRecord::new(
        "escape_bound",
        s.ci_high,
        bound,
        pass,
        format!(
            "worst frequency of norm below {:.4}: {}/{} after step {}; norm upper-bound violations {}/{}",
            s.threshold, s.violations, s.trials, report.min_step, report.large_norm.violations, report.large_norm.trials
        ),
    )
    .interval(s.ci_low, s.ci_high))
}

pub const HITTING_BALL_RADIUS: f64 = 0.3;

fn hitting_time_scaling(seed: u64) -> Result<CheckRecord> {
    let (depth, n, beta, eta) = (2usize, 8usize, 80.0, 0.01);
    let mut z_star = vec![0.0; n];
    z_star[0] = 1.0;
    let land = IdealLandscape::new(&z_star, depth)?;
    let region = RegionSpec::new(z_star.clone(), HITTING_BALL_RADIUS)?;
    let mut z0 = vec![0.0; n];
    z0[0] = -0.5;
    z0[1] = 0.05;
    let steps = (200.0 / eta) as usize;
    let times = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let coarse = run_langevin_aggregated(&land, &z0, &LangevinConfig::new(eta, beta, steps, s), 2)?;
            let fine = run_langevin_aggregated(&land, &z0, &LangevinConfig::new(eta / 2.0, beta, 2 * steps, s), 1)?;
            let t = |traj| hitting_time(traj, &region).map_or(f64::INFINITY, |t| t as f64);
            Ok((t(&coarse), t(&fine)))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let m_coarse = median(times.iter().map(|t| t.0).collect());
    let m_fine = median(times.iter().map(|t| t.1).collect());
    let ratio = m_fine / m_coarse;
    let l_hat = convexity_radius(depth, n, 0.9)?;
    Ok(CheckRecord::new(
        "hitting_time_scaling",
        ratio,
        2.8,
        (1.4..=2.8).contains(&ratio) && m_fine > m_coarse,
        format!(
            "median hitting time of the radius-{HITTING_BALL_RADIUS} ball: {m_coarse} steps at η = {eta}, \
             {m_fine} at η/2; measured 0.9-convexity radius {l_hat:.4}"
        ),
    ))
}

pub const GAP_RATIO_RANGE: (f64, f64) = (1.5, 2.8);

/// `E‖x_T − y_T‖` at step sizes `η` and `η/4` over the physical horizon
/// `T·η = 4` on `U(z) = ‖z‖²/2`, both against a 64-fold refined chain.
pub fn quadratic_gap_ratio(seed: u64) -> Result<(f64, f64, f64)> {
    let quad = |z: &[f64]| -> Result<(f64, Vec<f64>)> { Ok((0.5 * dot(z, z), z.to_vec())) };
    let eta = 0.1;
    let coarse = discretization_gap(&quad, &[1.0, 1.0], eta, 1.0, 64, 40, 2000, derive_seed(seed, 0))?;
    let fine = discretization_gap(&quad, &[1.0, 1.0], eta / 4.0, 1.0, 64, 160, 2000, derive_seed(seed, 1))?;
    Ok((coarse, fine, coarse / fine))
}

/// Largest per-step excess of `‖a_{t+1} − b_{t+1}‖/‖a_t − b_t‖` over
/// `1 − ηsμ/(s+μ)` for two gradient-descent runs on the quadratic with
/// curvatures `s = 4`, `μ = 1`, at several `η ≤ 2/(s+μ)`, from random
/// starting pairs.
pub fn coupled_contraction_excess(seed: u64) -> Result<f64> {
    let (s, mu) = (4.0, 1.0);
    let quad = move |z: &[f64]| -> Result<(f64, Vec<f64>)> {
        Ok((0.5 * (s * z[0] * z[0] + mu * z[1] * z[1]), vec![s * z[0], mu * z[1]]))
    };
    let mut excess = f64::NEG_INFINITY;
    for (i, frac) in [0.1, 0.5, 0.9, 1.0].into_iter().enumerate() {
        let eta = frac * 2.0 / (s + mu);
        let mut rng = derived_rng(seed, i as u64);
        let (za, zb) = (gaussian_vec(&mut rng, 2), gaussian_vec(&mut rng, 2));
        let a = run_gd(&quad, &za, eta, 200, false)?;
        let b = run_gd(&quad, &zb, eta, 200, false)?;
        let bound = 1.0 - eta * s * mu / (s + mu);
        for t in 0..a.states.len() - 1 {
            let before = distance(&a.states[t], &b.states[t]);
            if before < 1e-280 {
                break;
            }
            let after = distance(&a.states[t + 1], &b.states[t + 1]);
            excess = excess.max(after / before - bound);
        }
    }
    Ok(excess)
}

fn contraction_discretization(seed: u64) -> Result<CheckRecord> {
    let excess = coupled_contraction_excess(seed)?;
    let contraction_ok = excess <= 1e-12;
    let (coarse, fine, ratio) = quadratic_gap_ratio(seed)?;
    let gap_ok = (GAP_RATIO_RANGE.0..=GAP_RATIO_RANGE.1).contains(&ratio);
    Ok(CheckRecord::new(
        "contraction_discretization",
        ratio,
        GAP_RATIO_RANGE.1,
        contraction_ok && gap_ok,
        format!(
            "contraction factor excess over 1 − ηsμ/(s+μ): {excess:.3e}; discretization gap {coarse:.5} at η, \
             {fine:.5} at η/4, ratio {ratio:.3} (required range {GAP_RATIO_RANGE:?})"
        ),
    ))
}

/// Draws from a planar density given by its log on the box `[−w, w]²`.
fn planar_quadrature(log_density: impl Fn(&[f64]) -> f64 + Sync, half_width: f64, grid: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let h = 2.0 * half_width / grid as f64;
    let logs: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / grid, c % grid);
            log_density(&[-half_width + (i as f64 + 0.5) * h, -half_width + (j as f64 + 0.5) * h])
        })
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    let cumulative: Vec<f64> = logs
        .iter()
        .map(|l| {
            acc += (l - top).exp();
            acc
        })
        .collect();
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let c = cumulative.partition_point(|v| *v < u).min(cumulative.len() - 1);
            let (i, j) = (c / grid, c % grid);
            vec![
                -half_width + (i as f64 + rng.random::<f64>()) * h,
                -half_width + (j as f64 + rng.random::<f64>()) * h,
            ]
        })
        .collect()
}

fn posterior_oracles(seed: u64) -> Result<CheckRecord> {
    // Conjugate case: N(0, I) prior, y = z + N(0, I), posterior N(y/2, I/2).
    let y = vec![1.0, -2.0];
    let prior = GaussianMixturePrior::isotropic(2, 1.0)?;
    let problem = PosteriorProblem::new(MeasurementMap::Identity(2), y.clone(), 1.0)?;
    let chains = 2000;
    let cfg = LangevinConfig::new(0.01, 1.0, 1_000, derive_seed(seed, 0)).recording_every(1_000);
    let trajs = posterior_chains(&problem, &prior, &TailMap::Identity(2), &vec![vec![0.0, 0.0]; chains], &cfg)?;
    let finals: Vec<&[f64]> = trajs.iter().map(|t| t.last_state()).collect();
    let (mean, cov) = moments(&finals);
    let mean_z = (0..2)
        .map(|i| (mean[i] - y[i] / 2.0).abs() / (cov[i * 2 + i] / chains as f64).sqrt())
        .fold(0.0, f64::max);
    let cov_err = (0..4)
        .map(|c| (cov[c] - if c % 3 == 0 { 0.5 } else { 0.0 }).abs() / 0.5)
        .fold(0.0, f64::max);

    // Two-component mixture prior, identity observation with σ = 0.8.
    let gmm = GaussianMixturePrior::new(vec![0.4, 0.6], vec![vec![-1.0, 0.0], vec![1.0, 0.5]], vec![0.25, 0.25])?;
    let y2 = vec![0.3, 0.3];
    let sigma = 0.8;
    let problem2 = PosteriorProblem::new(MeasurementMap::Identity(2), y2.clone(), sigma)?;
    let starts = gmm.sample(200, derive_seed(seed, 1))?;
    let cfg2 = LangevinConfig::new(0.005, 1.0, 4_000, derive_seed(seed, 2)).recording_every(4_000);
    let chains2 = posterior_chains(&problem2, &gmm, &TailMap::Identity(2), &starts, &cfg2)?;
    let ensemble: Vec<Vec<f64>> = chains2.iter().map(|t| t.last_state().to_vec()).collect();
    let log_post = |z: &[f64]| {
        let lp = gmm.log_density_and_score(z).map_or(f64::NEG_INFINITY, |r| r.0);
        lp - 0.5 * (distance(z, &y2) / sigma).powi(2)
    };
    let reference = planar_quadrature(log_post, 4.0, 400, 200, derive_seed(seed, 3));
    let w1 = sliced_w1(&ensemble, &reference, 256, derive_seed(seed, 4))?;
    let pass = mean_z <= 3.0 && cov_err <= 0.1 && w1 <= 0.1;
    Ok(CheckRecord::new(
        "posterior_oracles",
        w1,
        0.1,
        pass,
        format!(
            "conjugate mean {mean:.4?} vs y/2, worst |error|/SE {mean_z:.3}; covariance {cov:.4?}, worst relative \
             error {cov_err:.4}; mixture posterior sliced W1 {w1:.4}"
        ),
    ))
}

pub fn baseline_setup(seed: u64) -> InvertSetup {
    InvertSetup {
        dims: vec![8, 128, 2048],
        split_layer: 1,
        mask_fraction: 0.0075,
        noise_sigma: 0.0,
        sparsity: 8,
        deviation: 1.0,
        eta: 0.1,
        beta: 1e4,
        budget: 300,
        radius: 5.0,
        prior_variance: 0.1,
        prior_weight: 1e-2,
        algorithms: vec![Algorithm::Csgm, Algorithm::Ilo],
        seed,
    }
}

fn baseline_ordering(seed: u64) -> Result<CheckRecord> {
    let mut ilo = Vec::new();
    let mut csgm = Vec::new();
    let mut evals = Vec::new();
    for i in 0..20 {
        for run in invert_runs(&baseline_setup(derive_seed(seed, i)))? {
            evals.push(run.evaluations);
            let last = *run.residuals.last().unwrap();
            match run.algorithm {
                Algorithm::Ilo => ilo.push(last),
                _ => csgm.push(last),
            }
        }
    }
    let (mi, mc) = (median(ilo), median(csgm));
    let equal_budget = evals.iter().all(|&e| e == evals[0]);
    Ok(CheckRecord::new(
        "baseline_ordering",
        mi / mc,
        1.0,
        mi < mc && equal_budget,
        format!(
            "median masked residual over 20 seeds: projected intermediate GD {mi:.4}, latent GD {mc:.4}; \
             {} evaluations each",
            evals[0]
        ),
    ))
}

/// Small configurations exercising every mode except `theory-check`.
pub fn determinism_configs(seed: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let mut c = ExperimentConfig::minimal(Mode::Landscape, seed);
    c.problem.depth = Some(3);
    c.problem.latent_dim = Some(5);
    c.problem.grid = Some(12);
    out.push(c);

    let mut c = ExperimentConfig::minimal(Mode::Wdc, seed);
    c.problem.latent_dim = Some(3);
    c.problem.sizes = Some(vec![32, 128]);
    c.problem.samples = Some(20);
    out.push(c);

    let mut c = ExperimentConfig::minimal(Mode::Rric, seed);
    c.problem.dims = Some(vec![3, 12, 48]);
    c.problem.sizes = Some(vec![6, 24]);
    c.problem.samples = Some(20);
    out.push(c);

    let mut c = ExperimentConfig::minimal(Mode::Mix, seed);
    c.problem.depth = Some(2);
    c.problem.grid = Some(60);
    c.sampler.beta = Some(20.0);
    c.sampler.eta = Some(0.01);
    c.sampler.steps = Some(400);
    c.sampler.chains = Some(24);
    c.sampler.record_every = Some(100);
    c.sampler.projections = Some(16);
    out.push(c);

    let mut c = ExperimentConfig::minimal(Mode::Invert, seed);
    c.problem.dims = Some(vec![4, 32, 256]);
    c.problem.split_layer = Some(1);
    c.problem.mask_fraction = Some(0.1);
    c.problem.noise_sigma = 0.01;
    c.sampler.steps = Some(40);
    out.push(c);

    let mut c = ExperimentConfig::minimal(Mode::Posterior, seed);
    c.prior = Some(PriorSpec {
        weights: vec![0.5, 0.5],
        means: vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
        variances: vec![0.3, 0.3],
    });
    c.problem.y = Some(vec![0.5, 0.1]);
    c.problem.noise_sigma = 0.5;
    c.sampler.eta = Some(0.01);
    c.sampler.steps = Some(200);
    c.sampler.chains = Some(8);
    c.sampler.record_every = Some(50);
    out.push(c);

    for c in &mut out {
        c.output.svg = true;
    }
    out
}

fn scratch_dir(tag: &str, seed: u64) -> PathBuf {
    std::env::temp_dir().join(format!("relu-langevin-{tag}-{}-{seed:x}", std::process::id()))
}

fn read_tree(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        files.push((entry.file_name().to_string_lossy().into_owned(), std::fs::read(entry.path())?));
    }
    files.sort();
    Ok(files)
}

fn determinism(seed: u64) -> Result<CheckRecord> {
    let configs = determinism_configs(seed);
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for cfg in &configs {
        let mode = cfg.mode()?;
        let mut trees = Vec::new();
        for run in 0..2 {
            let dir = scratch_dir(&format!("{}-{run}", mode.file_stem()), seed);
            let _ = std::fs::remove_dir_all(&dir);
            let mut c = cfg.clone();
            c.output.dir = dir.clone();
            run_experiment(&c)?;
            trees.push(read_tree(&dir)?);
            std::fs::remove_dir_all(&dir)?;
        }
        compared += trees[0].len();
        if trees[0] != trees[1] {
            mismatched.push(mode.name());
        }
    }
    let bad = mismatched.len() as f64;
    Ok(CheckRecord::new(
        "determinism",
        bad,
        0.0,
        mismatched.is_empty(),
        format!("{} modes, {compared} files compared; differing modes {mismatched:?}", configs.len()),
    ))
}
