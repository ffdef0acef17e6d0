//! Empirical checks of the concentration properties random layers and
//! measurement maps are expected to satisfy.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::measurement::{InverseProblem, MeasurementMap};
use super::network::ReluGenerator;
use crate::error::{domain, shape, Error, Result};
use crate::landscape::IdealLandscape;
use crate::linalg::{dot, norm, sub, symmetric_spectral_norm, Matrix};
use crate::rng::{derived_rng, gaussian_vec, rng_from_seed, unit_vector};

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WdcReport {
    pub deviation: f64,
    pub pair_angle: f64,
    pub n_rows: usize,
    pub k: usize,
}

/// `Q_{x,y} = ((π − θ₀)/(2π))·I + (sin θ₀/(2π))·M`, where `M` maps `x̂ ↦ ŷ`,
/// `ŷ ↦ x̂` and vanishes on the complement of their span.
pub fn wdc_target(x: &[f64], y: &[f64]) -> Result<Matrix> {
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(domain("WDC target needs nonzero x and y"));
    }
    let k = x.len();
    let u1: Vec<f64> = x.iter().map(|v| v / nx).collect();
    let yh: Vec<f64> = y.iter().map(|v| v / ny).collect();
    let c = dot(&u1, &yh).clamp(-1.0, 1.0);
    let mut perp: Vec<f64> = yh.iter().zip(&u1).map(|(a, b)| a - c * b).collect();
    let rho = norm(&perp);
    let theta = rho.atan2(c);
    let s = theta.sin();
    let mut q = Matrix::identity(k);
    q.data.iter_mut().for_each(|v| *v *= (PI - theta) / (2.0 * PI));
    if rho > 0.0 {
        perp.iter_mut().for_each(|v| *v /= rho);
        let u2 = perp;
        let w = s / (2.0 * PI);
        for i in 0..k {
            for j in 0..k {
                let m = c * (u1[i] * u1[j] - u2[i] * u2[j]) + s * (u1[i] * u2[j] + u2[i] * u1[j]);
                q.data[i * k + j] += w * m;
            }
        }
    }
    Ok(q)
}

/// Spectral norm of `Σ_i 1{⟨w_i,x⟩>0}·1{⟨w_i,y⟩>0}·w_i w_iᵀ − Q_{x,y}` over the rows of `w`.
pub fn wdc_deviation(w: &Matrix, x: &[f64], y: &[f64]) -> Result<WdcReport> {
    let k = w.cols;
    if x.len() != k || y.len() != k {
        return Err(shape(format!("WDC vectors must have dimension {k}")));
    }
    let mut acc = wdc_target(x, y)?;
    acc.data.iter_mut().for_each(|v| *v = -*v);
    for i in 0..w.rows {
        let row = w.row(i);
        if dot(row, x) > 0.0 && dot(row, y) > 0.0 {
            for a in 0..k {
                for b in 0..k {
                    acc.data[a * k + b] += row[a] * row[b];
                }
            }
        }
    }
    let start = gaussian_vec(&mut rng_from_seed(k as u64), k);
    let (nx, ny) = (norm(x), norm(y));
    let c = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0);
    Ok(WdcReport {
        deviation: symmetric_spectral_norm(&acc, POWER_TOL, POWER_MAX_ITER, &start),
        pair_angle: c.acos(),
        n_rows: w.rows,
        k,
    })
}

/// `|⟨AΔ₁₂, AΔ₃₄⟩ − ⟨Δ₁₂, Δ₃₄⟩| / (‖Δ₁₂‖‖Δ₃₄‖)` with `Δᵢⱼ = G(xᵢ) − G(xⱼ)`.
pub fn rric_deviation(
    a: &MeasurementMap,
    g: &ReluGenerator,
    x1: &[f64],
    x2: &[f64],
    x3: &[f64],
    x4: &[f64],
) -> Result<f64> {
    if a.input_dim() != g.output_dim() {
        return Err(shape("measurement map does not match generator output"));
    }
    let d12 = sub(&g.apply(x1)?, &g.apply(x2)?);
    let d34 = sub(&g.apply(x3)?, &g.apply(x4)?);
    let (n12, n34) = (norm(&d12), norm(&d34));
    if n12 == 0.0 || n34 == 0.0 {
        return Err(Error::Degenerate("zero range difference".into()));
    }
    let measured = dot(&a.apply(&d12), &a.apply(&d34));
    Ok((measured - dot(&d12, &d34)).abs() / (n12 * n34))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProximityStats {
    pub median: f64,
    pub max: f64,
    pub samples: usize,
}

/// Distance between the empirical and idealized gradients,
/// `‖∇L̃(z) − ∇L(z)‖ / ((‖z‖ + 1)·‖z*‖)`, over random `z` with
/// `‖z‖/‖z*‖` uniform in `[0.25, 2]`.
pub fn gradient_proximity(
    g: &ReluGenerator,
    a: &MeasurementMap,
    z_star: &[f64],
    sample_count: usize,
    seed: u64,
) -> Result<ProximityStats> {
    if sample_count == 0 {
        return Err(domain("gradient proximity needs at least one sample"));
    }
    let ideal = IdealLandscape::new(z_star, g.depth())?;
    let problem = InverseProblem::synthetic(g.clone(), a.clone(), z_star, 0.0, None, 0)?;
    let scale = ideal.scale();
    let k = z_star.len();
    let mut ratios = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(seed, i as u64);
            let radius = scale * (0.25 + 1.75 * rand::Rng::random::<f64>(&mut rng));
            let z: Vec<f64> = unit_vector(&mut rng, k).into_iter().map(|v| radius * v).collect();
            let (_, empirical) = problem.empirical_loss_grad(&z)?;
            let analytic = ideal.gradient(&z)?;
            Ok(norm(&sub(&empirical, &analytic)) / ((norm(&z) + 1.0) * scale))
        })
        .collect::<Result<Vec<f64>>>()?;
    ratios.sort_by(f64::total_cmp);
    Ok(ProximityStats {
        median: median_sorted(&ratios),
        max: *ratios.last().unwrap(),
        samples: sample_count,
    })
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
