//! The one-layer angle map `g(θ) = arccos(((π−θ)cosθ + sinθ)/π)` and its
//! d-fold composition.
//!
//! `g` is increasing on `[0, π]` with `g(θ) ≤ θ`, `g(0) = 0` and
//! `g(π) = π/2`. Near both endpoints the closed form is replaced by a
//! Taylor expansion; the raw derivative formulas are `0/0` at `θ = 0`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Below this distance from `0` or `π` the Taylor branch is used.
pub const ENDPOINT_SWITCH: f64 = 1e-4;

// g(θ) = θ + A2 θ² + A3 θ³ + A4 θ⁴ + A5 θ⁵ + O(θ⁶)
const A2: f64 = -1.0 / (3.0 * PI);
const A3: f64 = -1.0 / (18.0 * PI * PI);
const A4: f64 = -(5.0 + 6.0 * PI * PI) / (270.0 * PI * PI * PI);
const A5: f64 = (36.0 * PI * PI - 25.0) / (3240.0 * PI * PI * PI * PI);

/// `g`, `g'` and `g''` at one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleMap {
    pub g: f64,
    pub g_prime: f64,
    pub g_second: f64,
}

/// `g(θ)` with its first two derivatives.
pub fn dyn_g(theta: f64) -> Result<AngleMap> {
    if !(0.0..=PI).contains(&theta) {
        return Err(domain(format!("angle {theta} outside [0, π]")));
    }
    let s = PI - theta;
    if theta < ENDPOINT_SWITCH {
        let t = theta;
        return Ok(AngleMap {
            g: t + t * t * (A2 + t * (A3 + t * (A4 + t * A5))),
            g_prime: 1.0 + t * (2.0 * A2 + t * (3.0 * A3 + t * (4.0 * A4 + t * 5.0 * A5))),
            g_second: 2.0 * A2 + t * (6.0 * A3 + t * (12.0 * A4 + t * 20.0 * A5)),
        });
    }
    if s < ENDPOINT_SWITCH {
        // g(π − s) = π/2 − s³/(3π) + s⁵/(30π) − s⁷/(840π) + O(s⁹)
        let s2 = s * s;
        return Ok(AngleMap {
            g: PI / 2.0 - s * s2 * (1.0 / 3.0 - s2 * (1.0 / 30.0 - s2 / 840.0)) / PI,
            g_prime: s2 * (1.0 - s2 * (1.0 / 6.0 - s2 / 120.0)) / PI,
            g_second: -s * (2.0 - s2 * (2.0 / 3.0 - s2 / 20.0)) / PI,
        });
    }
    let (sin, cos) = theta.sin_cos();
    // 1 − c without cancellation: π(1 − cosθ) + θcosθ − sinθ.
    let half = (theta / 2.0).sin();
    let u = (2.0 * PI * half * half + theta * cos - sin) / PI;
    let c = 1.0 - u;
    let one_minus_c2 = u * (2.0 - u);
    let root = one_minus_c2.sqrt();
    let dc = -s * sin / PI;
    let ddc = (sin - s * cos) / PI;
    Ok(AngleMap {
        g: 2.0 * (u / 2.0).sqrt().asin(),
        g_prime: -dc / root,
        g_second: (-ddc * one_minus_c2 - dc * dc * c) / (one_minus_c2 * root),
    })
}

/// `θ_d = g∘…∘g(θ)` and its first two derivatives in `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaChain {
    pub theta_d: f64,
    pub theta_d_prime: f64,
    pub theta_d_double_prime: f64,
    pub depth: usize,
}

/// Compose `g` `depth` times, propagating derivatives by the chain rule.
///
/// `depth = 0` is the identity chain `(θ, 1, 0)`.
pub fn theta_chain(theta: f64, depth: usize) -> Result<ThetaChain> {
    if !(0.0..=PI).contains(&theta) {
        return Err(domain(format!("angle {theta} outside [0, π]")));
    }
    let mut t = theta;
    let mut d1 = 1.0;
    let mut d2 = 0.0;
    for _ in 0..depth {
        let m = dyn_g(t)?;
        d2 = m.g_second * d1 * d1 + m.g_prime * d2;
        d1 *= m.g_prime;
        t = m.g;
    }
    Ok(ThetaChain {
        theta_d: t,
        theta_d_prime: d1,
        theta_d_double_prime: d2,
        depth,
    })
}

/// `sin θ_d · θ'_d / sin θ`, the quantity that makes the angular Hessian
/// coefficient look singular at `θ ∈ {0, π}`.
///
/// Near `0` it tends to 1; near `π` it vanishes linearly in `π − θ`.
pub(crate) fn tangential_ratio(theta: f64, chain: &ThetaChain) -> Result<f64> {
    let d = chain.depth as f64;
    if chain.depth == 0 {
        return Ok(1.0);
    }
    if theta < ENDPOINT_SWITCH {
        // θ_d = θ + aθ² + bθ³ with a = d·A2, b = d·A3 + d(d−1)·A2².
        let a = d * A2;
        let b = d * A3 + d * (d - 1.0) * A2 * A2;
        return Ok(1.0 + theta * (3.0 * a + theta * (4.0 * b + 2.0 * a * a)));
    }
    let s = PI - theta;
    if s < ENDPOINT_SWITCH {
        // θ'_d = g'(θ)·∏_{i≥1} g'(θ_i) and g'(π − s) = s²/π + O(s⁴), while
        // sin θ = s + O(s³); the remaining factors are flat to O(s³).
        let first = dyn_g(theta)?;
        let tail = if first.g_prime == 0.0 {
            theta_chain(first.g, chain.depth - 1)?.theta_d_prime
        } else {
            chain.theta_d_prime / first.g_prime
        };
        return Ok(chain.theta_d.sin() * tail * s / PI);
    }
    Ok(chain.theta_d.sin() * chain.theta_d_prime / theta.sin())
}

/// `cos(g^∘d(π))`, the radius of the saddle point along `−z*`.
pub fn saddle_radius(depth: usize) -> f64 {
    theta_chain(PI, depth)
        .map(|c| c.theta_d.cos())
        .unwrap_or(f64::NAN)
}
