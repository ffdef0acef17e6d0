use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use super::checks::{theory_check_suite, CheckRecord, SuiteOptions};
use super::config::{require, Algorithm, ExperimentConfig, Mode};
use super::output::{line_chart_svg, num, CsvTable, Emitter, ResultRecord, Series, Summary};
use crate::diagnostics::{convexity_radius, sliced_w1, GridReference};
use crate::error::{config, Result};
use crate::generator::{
    build_generator, random_mask, rric_deviation, wdc_deviation, MeasurementMap, ReluGenerator,
};
use crate::landscape::{saddle_radius, IdealLandscape};
use crate::linalg::{distance, norm};
use crate::priors::GaussianMixturePrior;
use crate::rng::{derive_seed, derived_rng, gaussian, gaussian_vec};
use crate::samplers::{
    posterior_chains, run_chains, run_csgm_gd, run_ilo_baseline, run_langevin,
    sparse_deviation_problem, LangevinConfig, PosteriorProblem, TailMap, Trajectory,
};

/// How a run ended once its outputs were written.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    /// Ids of failed theory checks.
    CheckFailed(Vec<String>),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub files: Vec<PathBuf>,
    pub records: Vec<ResultRecord>,
}

struct ModeOutput {
    csv: CsvTable,
    svg: Option<String>,
    records: Vec<ResultRecord>,
    status: RunStatus,
    /// Additional `(file name, contents)` pairs.
    extra: Vec<(String, String)>,
}

/// Runs the configured mode and writes `<mode>.csv`, `summary.json` and,
/// when requested, `<mode>.svg` into `config.output.dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mode = config.mode()?;
    let hash = config.config_hash();
    let started = Instant::now();
    let out = match mode {
        Mode::Landscape => landscape_mode(config, &hash)?,
        Mode::Wdc => wdc_mode(config, &hash)?,
        Mode::Rric => rric_mode(config, &hash)?,
        Mode::Mix => mix_mode(config, &hash)?,
        Mode::Invert => invert_mode(config, &hash)?,
        Mode::Posterior => posterior_mode(config, &hash)?,
        Mode::TheoryCheck => theory_mode(config, &hash)?,
    };
    let mut records = out.records;
    records.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    if config.output.record_timing {
        let ms = started.elapsed().as_secs_f64() * 1e3;
        for r in &mut records {
            r.metrics.insert("wall_clock_ms".into(), ms);
        }
    }
    let stem = mode.file_stem();
    let mut emit = Emitter::new(&config.output.dir);
    emit.write(&format!("{stem}.csv"), out.csv.as_str().as_bytes())?;
    let summary = Summary {
        mode: mode.name(),
        config_hash: &hash,
        records: &records,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    emit.write("summary.json", json.as_bytes())?;
    for (name, body) in &out.extra {
        emit.write(name, body.as_bytes())?;
    }
    if config.output.svg {
        if let Some(svg) = out.svg {
            emit.write(&format!("{stem}.svg"), svg.as_bytes())?;
        }
    }
    Ok(RunOutcome {
        status: out.status,
        files: emit.files,
        records,
    })
}

fn canonical_target(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    z
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn landscape_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let mode = Mode::Landscape;
    let depth = require(&cfg.problem.depth, "problem.depth", mode)?;
    let n = require(&cfg.problem.latent_dim, "problem.latent_dim", mode)?;
    if n < 2 {
        return Err(config("landscape scan needs problem.latent_dim ≥ 2"));
    }
    let grid = cfg.problem.grid.unwrap_or(48).max(2);
    let land = IdealLandscape::new(&canonical_target(n), depth)?;
    let mut csv = CsvTable::new(hash, &["r", "theta", "loss", "grad_norm", "min_eig"]);
    let mut profile = Vec::new();
    for i in 1..=grid {
        let r = 2.0 * i as f64 / grid as f64;
        for j in 0..=grid {
            let theta = PI * j as f64 / grid as f64;
            let mut x = vec![0.0; n];
            x[0] = r * theta.cos();
            x[1] = r * theta.sin();
            let (loss, grad) = land.loss_and_gradient(&x)?;
            let eig = land.hessian(&x)?.min_eigenvalue(n);
            csv.row(&[num(r), num(theta), num(loss), num(norm(&grad)), num(eig)]);
            if i == grid / 2 {
                profile.push((theta, loss));
            }
        }
    }
    let crit = land.critical_points();
    let worst_critical = crit
        .iter()
        .map(|c| land.gradient(c).map(|g| norm(&g)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let record = ResultRecord::new("landscape", hash)
        .metric("saddle_radius", saddle_radius(depth))
        .metric("convexity_radius", convexity_radius(depth, n, 0.9)?)
        .metric("critical_gradient_norm", worst_critical)
        .metric("grid_points", (grid * (grid + 1)) as f64);
    let svg = line_chart_svg(
        "idealized loss on the unit circle",
        "angle to target",
        "loss",
        &[Series {
            name: format!("d = {depth}"),
            points: profile,
        }],
    );
    Ok(ModeOutput {
        csv,
        svg: Some(svg),
        records: vec![with_series(record, mode)],
        status: RunStatus::Ok,
        extra: Vec::new(),
    })
}

fn with_series(mut r: ResultRecord, mode: Mode) -> ResultRecord {
    r.series = Some(format!("{}.csv", mode.file_stem()));
    r
}

/// WDC deviations of fresh `n × k` layers at random pairs; one entry per
/// `(n, pair)` in sweep order.
pub fn wdc_sweep(k: usize, sizes: &[usize], pairs: usize, seed: u64) -> Result<Vec<(usize, f64, f64)>> {
    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(si, _)| (0..pairs).map(move |p| (si, p)))
        .collect();
    jobs.par_iter()
        .map(|&(si, p)| {
            let n = sizes[si];
            let s = derive_seed(derive_seed(seed, si as u64), p as u64);
            let layer = build_generator(&[k, n], s)?;
            let mut rng = derived_rng(s, 1);
            let x = gaussian_vec(&mut rng, k);
            let y = gaussian_vec(&mut rng, k);
            let r = wdc_deviation(&layer.weights()[0], &x, &y)?;
            Ok((n, r.deviation, r.pair_angle))
        })
        .collect()
}

/// RRIC deviations of one Gaussian map per measurement count over random
/// latent tuples.
pub fn rric_sweep(
    generator: &ReluGenerator,
    sizes: &[usize],
    tuples: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let k = generator.input_dim();
    let mut out = Vec::with_capacity(sizes.len() * tuples);
    for (si, &m) in sizes.iter().enumerate() {
        let s = derive_seed(seed, si as u64);
        let a = MeasurementMap::gaussian(m, generator.output_dim(), s)?;
        let devs = (0..tuples)
            .into_par_iter()
            .map(|t| {
                let mut rng = derived_rng(s, t as u64 + 1);
                let xs: Vec<Vec<f64>> = (0..4).map(|_| gaussian_vec(&mut rng, k)).collect();
                rric_deviation(&a, generator, &xs[0], &xs[1], &xs[2], &xs[3])
            })
            .collect::<Result<Vec<f64>>>()?;
        out.extend(devs.into_iter().map(|d| (m, d)));
    }
    Ok(out)
}

fn median_by_size(rows: &[(usize, f64)], sizes: &[usize]) -> Vec<f64> {
    sizes
        .iter()
        .map(|&n| median(rows.iter().filter(|r| r.0 == n).map(|r| r.1).collect()))
        .collect()
}

fn sweep_output(
    mode: Mode,
    hash: &str,
    size_label: &str,
    rows: &[(usize, f64)],
    sizes: &[usize],
    csv: CsvTable,
) -> ModeOutput {
    let medians = median_by_size(rows, sizes);
    let records = sizes
        .iter()
        .zip(&medians)
        .map(|(&s, &m)| {
            with_series(
                ResultRecord::new(format!("{}-{size_label}{s:08}", mode.name()), hash)
                    .metric("median_deviation", m)
                    .metric(size_label, s as f64),
                mode,
            )
        })
        .collect();
    let svg = line_chart_svg(
        &format!("{} concentration", mode.name()),
        &format!("log2 {size_label}"),
        "median deviation",
        &[Series {
            name: "median".into(),
            points: sizes.iter().zip(&medians).map(|(&s, &m)| ((s as f64).log2(), m)).collect(),
        }],
    );
    ModeOutput {
        csv,
        svg: Some(svg),
        records,
        status: RunStatus::Ok,
        extra: Vec::new(),
    }
}

fn wdc_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let mode = Mode::Wdc;
    let k = cfg.problem.latent_dim.unwrap_or(3);
    let sizes = require(&cfg.problem.sizes, "problem.sizes", mode)?;
    let pairs = cfg.problem.samples.unwrap_or(200);
    let rows = wdc_sweep(k, &sizes, pairs, cfg.seed)?;
    let mut csv = CsvTable::new(hash, &["n", "pair", "deviation", "angle"]);
    for (i, (n, dev, angle)) in rows.iter().enumerate() {
        csv.row(&[n.to_string(), (i % pairs).to_string(), num(*dev), num(*angle)]);
    }
    let flat: Vec<(usize, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    Ok(sweep_output(mode, hash, "n", &flat, &sizes, csv))
}

fn rric_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let mode = Mode::Rric;
    let dims = require(&cfg.problem.dims, "problem.dims", mode)?;
    let sizes = require(&cfg.problem.sizes, "problem.sizes", mode)?;
    let tuples = cfg.problem.samples.unwrap_or(200);
    let generator = build_generator(&dims, derive_seed(cfg.seed, 0))?;
    let rows = rric_sweep(&generator, &sizes, tuples, derive_seed(cfg.seed, 1))?;
    let mut csv = CsvTable::new(hash, &["m", "tuple", "deviation"]);
    for (i, (m, dev)) in rows.iter().enumerate() {
        csv.row(&[m.to_string(), (i % tuples).to_string(), num(*dev)]);
    }
    Ok(sweep_output(mode, hash, "m", &rows, &sizes, csv))
}

/// Inputs of [`mixing_curve`].
#[derive(Debug, Clone)]
pub struct MixingSetup {
    pub depth: usize,
    pub beta: f64,
    pub eta: f64,
    pub chains: usize,
    pub steps: usize,
    pub snapshot_every: usize,
    pub start: Vec<f64>,
    pub grid: usize,
    pub projections: usize,
    pub seed: u64,
}

/// Sliced W1 between planar Langevin ensembles on the idealized loss with
/// `z* = e₁` and a quadrature reference of the same size, at every
/// snapshot step.
pub fn mixing_curve(s: &MixingSetup) -> Result<Vec<(usize, f64)>> {
    if s.start.len() != 2 {
        return Err(config("mixing runs in the plane; start must have two entries"));
    }
    let land = IdealLandscape::new(&[1.0, 0.0], s.depth)?;
    let reference = GridReference::new(s.depth, s.beta, s.grid)?.sample(s.chains, derive_seed(s.seed, 0))?;
    let cfg = LangevinConfig::new(s.eta, s.beta, s.steps, derive_seed(s.seed, 1)).recording_every(s.snapshot_every);
    let starts = vec![s.start.clone(); s.chains];
    let trajs = run_chains(&land, &starts, &cfg)?;
    let steps = trajs[0].steps.clone();
    let proj_seed = derive_seed(s.seed, 2);
    steps
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let ensemble: Vec<Vec<f64>> = trajs.iter().map(|tr| tr.states[i].clone()).collect();
            Ok((t, sliced_w1(&ensemble, reference.samples(), s.projections, proj_seed)?))
        })
        .collect()
}

fn mix_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let mode = Mode::Mix;
    let sp = &cfg.sampler;
    let setup = MixingSetup {
        depth: require(&cfg.problem.depth, "problem.depth", mode)?,
        beta: require(&sp.beta, "sampler.beta", mode)?,
        eta: require(&sp.eta, "sampler.eta", mode)?,
        chains: sp.chains.unwrap_or(200),
        steps: require(&sp.steps, "sampler.steps", mode)?,
        snapshot_every: sp.record_every.unwrap_or(100),
        start: sp.start.clone().unwrap_or_else(|| vec![-1.0, 0.0]),
        grid: cfg.problem.grid.unwrap_or(400),
        projections: sp.projections.unwrap_or(256),
        seed: cfg.seed,
    };
    let curve = mixing_curve(&setup)?;
    let mut csv = CsvTable::new(hash, &["step", "sliced_w1"]);
    for (t, w) in &curve {
        csv.row(&[t.to_string(), num(*w)]);
    }
    let last = curve.last().map_or(f64::NAN, |c| c.1);
    let record = with_series(
        ResultRecord::new("mix", hash)
            .metric("final_sliced_w1", last)
            .metric("function_evaluations", (setup.chains * (setup.steps + 1)) as f64),
        mode,
    );
    let svg = line_chart_svg(
        "distance to the Gibbs reference",
        "step",
        "sliced W1",
        &[Series {
            name: format!("β = {}", setup.beta),
            points: curve.iter().map(|&(t, w)| (t as f64, w)).collect(),
        }],
    );
    Ok(ModeOutput {
        csv,
        svg: Some(svg),
        records: vec![record],
        status: RunStatus::Ok,
        extra: Vec::new(),
    })
}

/// Inputs of [`invert_runs`].
#[derive(Debug, Clone)]
pub struct InvertSetup {
    pub dims: Vec<usize>,
    pub split_layer: usize,
    pub mask_fraction: f64,
    pub noise_sigma: f64,
    pub sparsity: usize,
    pub deviation: f64,
    pub eta: f64,
    pub beta: f64,
    /// Potential evaluations per algorithm.
    pub budget: usize,
    pub radius: f64,
    pub prior_variance: f64,
    pub prior_weight: f64,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
}

/// Per-step masked measurement residuals of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertRun {
    pub algorithm: Algorithm,
    pub residuals: Vec<f64>,
    /// `‖z − z*‖/‖z*‖` for latent-space algorithms.
    pub latent_error: Option<f64>,
    pub evaluations: usize,
}

/// Synthetic inpainting problem whose truth deviates sparsely from the
/// generator range at `split_layer`, solved by each algorithm from the same
/// start with the same evaluation budget.
pub fn invert_runs(s: &InvertSetup) -> Result<Vec<InvertRun>> {
    if s.budget < 2 {
        return Err(config("invert budget must allow at least two evaluations"));
    }
    let k = *s.dims.first().ok_or_else(|| config("problem.dims is empty"))?;
    let out_dim = *s.dims.last().unwrap();
    let z_star = gaussian_vec(&mut derived_rng(s.seed, 0), k);
    let z0 = gaussian_vec(&mut derived_rng(s.seed, 1), k);
    let generator = build_generator(&s.dims, derive_seed(s.seed, 2))?;
    let mask = if s.mask_fraction < 1.0 {
        Some(random_mask(out_dim, s.mask_fraction, derive_seed(s.seed, 3))?)
    } else {
        None
    };
    let mut problem = sparse_deviation_problem(
        generator,
        MeasurementMap::Identity(out_dim),
        s.split_layer,
        &z_star,
        s.sparsity,
        s.deviation,
        mask,
        derive_seed(s.seed, 4),
    )?;
    if s.noise_sigma > 0.0 {
        let mut rng = derived_rng(s.seed, 8);
        problem.y.iter_mut().for_each(|v| *v += s.noise_sigma * gaussian(&mut rng));
        problem.noise_sigma = s.noise_sigma;
        problem.validate()?;
    }
    let (head, tail) = problem.generator.split_at(s.split_layer)?;
    let steps = s.budget - 1;
    let z_norm = norm(&z_star);
    s.algorithms
        .par_iter()
        .map(|&alg| {
            let latent_residuals = |t: &Trajectory| -> Result<Vec<f64>> {
                t.states
                    .iter()
                    .map(|z| Ok(problem.residual_norm(&problem.generator.apply(z)?)))
                    .collect()
            };
            let inter_residuals = |t: &Trajectory| -> Result<Vec<f64>> {
                t.states
                    .iter()
                    .map(|w| Ok(problem.residual_norm(&tail.apply(w)?)))
                    .collect()
            };
            let (traj, latent) = match alg {
                Algorithm::Csgm => (run_csgm_gd(&problem, &z0, s.eta, steps)?, true),
                Algorithm::Ilo => (
                    run_ilo_baseline(&problem, s.split_layer, s.radius, s.eta, steps, &z0)?,
                    false,
                ),
                Algorithm::Langevin => {
                    let cfg = LangevinConfig::new(s.eta, s.beta, steps, derive_seed(s.seed, 5));
                    (run_langevin(&problem, &z0, &cfg)?, true)
                }
                Algorithm::Sgilo => {
                    let prior = intermediate_prior(&head, s.prior_variance, derive_seed(s.seed, 6))?;
                    let u = |w: &[f64]| -> Result<(f64, Vec<f64>)> {
                        let (loss, mut grad) = problem.loss_grad_through(&tail, w)?;
                        let (log_p, score) = prior.log_density_and_score(w)?;
                        for (g, sc) in grad.iter_mut().zip(&score) {
                            *g -= s.prior_weight * sc;
                        }
                        Ok((loss - s.prior_weight * log_p, grad))
                    };
                    let cfg = LangevinConfig::new(s.eta, s.beta, steps, derive_seed(s.seed, 7));
                    (run_langevin(&u, &head.apply(&z0)?, &cfg)?, false)
                }
            };
            let residuals = if latent {
                latent_residuals(&traj)?
            } else {
                inter_residuals(&traj)?
            };
            Ok(InvertRun {
                algorithm: alg,
                residuals,
                latent_error: latent.then(|| distance(traj.last_state(), &z_star) / z_norm),
                evaluations: traj.evaluations,
            })
        })
        .collect()
}

/// Mixture of 16 Gaussians centred on intermediate codes of random latents.
fn intermediate_prior(head: &ReluGenerator, variance: f64, seed: u64) -> Result<GaussianMixturePrior> {
    const COMPONENTS: usize = 16;
    let mut rng = derived_rng(seed, 0);
    let means = (0..COMPONENTS)
        .map(|_| head.apply(&gaussian_vec(&mut rng, head.input_dim())))
        .collect::<Result<Vec<_>>>()?;
    GaussianMixturePrior::new(vec![1.0 / COMPONENTS as f64; COMPONENTS], means, vec![variance; COMPONENTS])
}

pub(crate) fn invert_setup(cfg: &ExperimentConfig) -> Result<InvertSetup> {
    let mode = Mode::Invert;
    let dims = require(&cfg.problem.dims, "problem.dims", mode)?;
    let split_layer = require(&cfg.problem.split_layer, "problem.split_layer", mode)?;
    if split_layer == 0 || split_layer >= dims.len() - 1 {
        return Err(config(format!(
            "problem.split_layer must lie in 1..{}, got {split_layer}",
            dims.len().saturating_sub(1)
        )));
    }
    let width = dims[split_layer];
    let sp = &cfg.sampler;
    let mut algorithms = sp.algorithms.clone().unwrap_or_else(|| Algorithm::ALL.to_vec());
    algorithms.sort();
    algorithms.dedup();
    Ok(InvertSetup {
        mask_fraction: require(&cfg.problem.mask_fraction, "problem.mask_fraction", mode)?,
        noise_sigma: cfg.problem.noise_sigma,
        sparsity: cfg.problem.sparsity.unwrap_or((width / 16).max(1)),
        deviation: cfg.problem.deviation.unwrap_or(1.0),
        eta: sp.eta.unwrap_or(0.1),
        beta: sp.beta.unwrap_or(1e4),
        budget: sp.steps.unwrap_or(300),
        radius: sp.radius.unwrap_or(5.0),
        prior_variance: sp.prior_variance.unwrap_or(0.1),
        prior_weight: sp.prior_weight.unwrap_or(1e-2),
        algorithms,
        seed: cfg.seed,
        dims,
        split_layer,
    })
}

fn invert_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let setup = invert_setup(cfg)?;
    let runs = invert_runs(&setup)?;
    let mut csv = CsvTable::new(hash, &["algorithm", "step", "residual"]);
    let mut records = Vec::new();
    let mut series = Vec::new();
    for run in &runs {
        for (t, r) in run.residuals.iter().enumerate() {
            csv.row(&[run.algorithm.name().into(), t.to_string(), num(*r)]);
        }
        let mut rec = ResultRecord::new(format!("invert-{}", run.algorithm.name()), hash)
            .metric("measurement_residual", *run.residuals.last().unwrap())
            .metric("function_evaluations", run.evaluations as f64);
        if let Some(e) = run.latent_error {
            rec = rec.metric("latent_error", e);
        }
        records.push(with_series(rec, Mode::Invert));
        series.push(Series {
            name: run.algorithm.name().into(),
            points: run.residuals.iter().enumerate().map(|(t, &r)| (t as f64, r)).collect(),
        });
    }
    let svg = line_chart_svg("measurement residual", "step", "residual", &series);
    Ok(ModeOutput {
        csv,
        svg: Some(svg),
        records,
        status: RunStatus::Ok,
        extra: Vec::new(),
    })
}

fn posterior_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let mode = Mode::Posterior;
    let prior = require(&cfg.prior, "prior", mode)?.build()?;
    let y = require(&cfg.problem.y, "problem.y", mode)?;
    let n = prior.dim();
    let problem = PosteriorProblem::new(MeasurementMap::Identity(n), y, cfg.problem.noise_sigma)?;
    let sp = &cfg.sampler;
    let chains = sp.chains.unwrap_or(100);
    let steps = require(&sp.steps, "sampler.steps", mode)?;
    let lcfg = LangevinConfig::new(
        require(&sp.eta, "sampler.eta", mode)?,
        sp.beta.unwrap_or(1.0),
        steps,
        derive_seed(cfg.seed, 0),
    )
    .recording_every(sp.record_every.unwrap_or(steps.max(1)));
    let start = sp.start.clone().unwrap_or_else(|| prior.mean());
    let trajs = posterior_chains(&problem, &prior, &TailMap::Identity(n), &vec![start; chains], &lcfg)?;
    let mut header = vec!["chain".to_string(), "step".to_string()];
    header.extend((0..n).map(|i| format!("z{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvTable::new(hash, &header_refs);
    for (c, t) in trajs.iter().enumerate() {
        for (step, z) in t.steps.iter().zip(&t.states) {
            let mut cells = vec![c.to_string(), step.to_string()];
            cells.extend(z.iter().map(|v| num(*v)));
            csv.row(&cells);
        }
    }
    let finals: Vec<&[f64]> = trajs.iter().map(Trajectory::last_state).collect();
    let (mean, cov) = moments(&finals);
    let mut rec = ResultRecord::new("posterior", hash).metric("chains", chains as f64);
    for i in 0..n {
        rec = rec.metric(&format!("mean_{i}"), mean[i]);
        for j in 0..n {
            rec = rec.metric(&format!("cov_{i}_{j}"), cov[i * n + j]);
        }
    }
    let svg = (n >= 1).then(|| {
        line_chart_svg(
            "first coordinate of the first chains",
            "step",
            "z0",
            &trajs
                .iter()
                .take(4)
                .enumerate()
                .map(|(c, t)| Series {
                    name: format!("chain {c}"),
                    points: t.steps.iter().zip(&t.states).map(|(&s, z)| (s as f64, z[0])).collect(),
                })
                .collect::<Vec<_>>(),
        )
    });
    Ok(ModeOutput {
        csv,
        svg,
        records: vec![with_series(rec, mode)],
        status: RunStatus::Ok,
        extra: Vec::new(),
    })
}

/// Sample mean and row-major covariance with divisor `count − 1`.
pub(crate) fn moments(xs: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let n = xs[0].len();
    let c = xs.len() as f64;
    let mut mean = vec![0.0; n];
    for x in xs {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += v / c;
        }
    }
    let mut cov = vec![0.0; n * n];
    for x in xs {
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] += (x[i] - mean[i]) * (x[j] - mean[j]) / (c - 1.0).max(1.0);
            }
        }
    }
    (mean, cov)
}

fn theory_mode(cfg: &ExperimentConfig, hash: &str) -> Result<ModeOutput> {
    let report = theory_check_suite(&SuiteOptions::new(cfg.seed))?;
    let mut csv = CsvTable::new(hash, &["check_id", "statistic", "bound", "ci_low", "ci_high", "pass"]);
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    for r in &report {
        csv.row(&[
            r.check_id.clone(),
            num(r.statistic),
            num(r.bound),
            opt(r.ci_low),
            opt(r.ci_high),
            r.pass.to_string(),
        ]);
    }
    let failed: Vec<String> = report.iter().filter(|r| !r.pass).map(|r| r.check_id.clone()).collect();
    let records = report.iter().map(|r| check_record(r, hash)).collect();
    let mut verdicts = serde_json::to_string_pretty(&serde_json::json!({
        "config_hash": hash,
        "checks": report,
    }))?;
    verdicts.push('\n');
    Ok(ModeOutput {
        csv,
        svg: None,
        records,
        status: if failed.is_empty() {
            RunStatus::Ok
        } else {
            RunStatus::CheckFailed(failed)
        },
        extra: vec![("theory_check.json".into(), verdicts)],
    })
}

fn check_record(r: &CheckRecord, hash: &str) -> ResultRecord {
    let mut rec = ResultRecord::new(format!("check-{}", r.check_id), hash)
        .metric("statistic", r.statistic)
        .metric("bound", r.bound)
        .metric("pass", if r.pass { 1.0 } else { 0.0 });
    if let (Some(lo), Some(hi)) = (r.ci_low, r.ci_high) {
        rec = rec.metric("ci_low", lo).metric("ci_high", hi);
    }
    with_series(rec, Mode::TheoryCheck)
}
