//! Polar coordinates of a point relative to a reference axis, and second
//! order "jets" of functions of `(r, θ)`.
//!
//! For `f(r(x), θ(x))` the gradient and Hessian in the orthonormal basis
//! `{r̂, θ̂, ψ_1, …, ψ_{n−2}}` are
//!
//! ```text
//! ∇f  = f_r r̂ + (f_θ / r) θ̂
//! ∇²f = f_rr r̂r̂ᵀ + (f_r/r + f_θθ/r²) θ̂θ̂ᵀ + (f_rθ/r − f_θ/r²)(r̂θ̂ᵀ + θ̂r̂ᵀ)
//!       + (f_r/r + f_θ/(r² tan θ)) Σ ψ_i ψ_iᵀ
//! ```

use crate::error::{domain, Result};
use crate::linalg::{axpy, dot, norm};

/// `(r, θ, r̂, θ̂)` of a point relative to a unit axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFrame {
    pub r: f64,
    /// Angle to the axis, in `[0, π]`.
    pub theta: f64,
    pub unit_radial: Vec<f64>,
    /// Unit vector of increasing `θ`; `None` when `θ ∈ {0, π}`.
    pub unit_tangential: Option<Vec<f64>>,
}

impl PolarFrame {
    /// Frame of `x` relative to the unit vector `axis`. `x` must be nonzero.
    pub fn new(x: &[f64], axis: &[f64]) -> Result<Self> {
        let r = norm(x);
        if r == 0.0 {
            return Err(domain("polar frame undefined at the origin"));
        }
        let along = dot(x, axis);
        let mut w = x.to_vec();
        axpy(-along, axis, &mut w);
        // second Gram-Schmidt pass keeps w ⟂ axis when x is nearly parallel
        let drift = dot(&w, axis);
        axpy(-drift, axis, &mut w);
        let rho = norm(&w);
        let theta = rho.atan2(along);
        let unit_radial: Vec<f64> = x.iter().map(|v| v / r).collect();
        let unit_tangential = (rho > 0.0).then(|| {
            let (sin, cos) = theta.sin_cos();
            w.iter()
                .zip(axis)
                .map(|(wi, ai)| cos * wi / rho - sin * ai)
                .collect()
        });
        Ok(Self {
            r,
            theta,
            unit_radial,
            unit_tangential,
        })
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        self.unit_radial.iter().map(|u| u * self.r).collect()
    }

    pub fn dim(&self) -> usize {
        self.unit_radial.len()
    }
}

/// Value and first/second partial derivatives of a function of `(r, θ)`.
///
/// `f_theta_over_sin` carries `f_θ / sin θ` computed without dividing by
/// `sin θ`, so the ψ-coefficient has a finite value at `θ ∈ {0, π}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct PolarJet {
    pub f: f64,
    pub f_r: f64,
    pub f_theta: f64,
    pub f_theta_over_sin: f64,
    pub f_rr: f64,
    pub f_thth: f64,
    pub f_rth: f64,
}

/// A radial profile `h(r)` with two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Radial {
    pub h: f64,
    pub h_r: f64,
    pub h_rr: f64,
}

impl PolarJet {
    pub fn radial(p: Radial) -> Self {
        Self {
            f: p.h,
            f_r: p.h_r,
            f_rr: p.h_rr,
            ..Self::default()
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            f: c * self.f,
            f_r: c * self.f_r,
            f_theta: c * self.f_theta,
            f_theta_over_sin: c * self.f_theta_over_sin,
            f_rr: c * self.f_rr,
            f_thth: c * self.f_thth,
            f_rth: c * self.f_rth,
        }
    }

    pub fn plus(self, o: Self) -> Self {
        Self {
            f: self.f + o.f,
            f_r: self.f_r + o.f_r,
            f_theta: self.f_theta + o.f_theta,
            f_theta_over_sin: self.f_theta_over_sin + o.f_theta_over_sin,
            f_rr: self.f_rr + o.f_rr,
            f_thth: self.f_thth + o.f_thth,
            f_rth: self.f_rth + o.f_rth,
        }
    }

    /// Product with a radial profile.
    pub fn times_radial(self, p: Radial) -> Self {
        Self {
            f: self.f * p.h,
            f_r: self.f_r * p.h + self.f * p.h_r,
            f_theta: self.f_theta * p.h,
            f_theta_over_sin: self.f_theta_over_sin * p.h,
            f_rr: self.f_rr * p.h + 2.0 * self.f_r * p.h_r + self.f * p.h_rr,
            f_thth: self.f_thth * p.h,
            f_rth: self.f_rth * p.h + self.f_theta * p.h_r,
        }
    }

    pub fn gradient(&self, frame: &PolarFrame) -> Vec<f64> {
        let mut g: Vec<f64> = frame.unit_radial.iter().map(|u| self.f_r * u).collect();
        if let Some(t) = &frame.unit_tangential {
            axpy(self.f_theta / frame.r, t, &mut g);
        }
        g
    }

    pub fn hessian(&self, frame: &PolarFrame, n: usize) -> HessianCoefficients {
        let r = frame.r;
        let c_rr = self.f_rr;
        let c_tt = self.f_r / r + self.f_thth / (r * r);
        let c_rt = self.f_rth / r - self.f_theta / (r * r);
        let c_psi = self.f_r / r + self.f_theta_over_sin * frame.theta.cos() / (r * r);
        HessianCoefficients::new(c_rr, c_tt, c_rt, c_psi, n)
    }
}

/// The Hessian of a function of `(r, θ)` in the polar basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianCoefficients {
    pub c_rr: f64,
    pub c_tt: f64,
    pub c_rt: f64,
    pub c_psi: f64,
    /// Trace: `c_rr + c_tt + (n − 2)·c_psi`.
    pub laplacian: f64,
}

impl HessianCoefficients {
    pub(crate) fn new(c_rr: f64, c_tt: f64, c_rt: f64, c_psi: f64, n: usize) -> Self {
        let laplacian = c_rr + c_tt + (n as f64 - 2.0) * c_psi;
        Self {
            c_rr,
            c_tt,
            c_rt,
            c_psi,
            laplacian,
        }
    }

    /// `∇²f · v` assembled from the coefficients and the frame.
    pub fn apply(&self, frame: &PolarFrame, v: &[f64]) -> Vec<f64> {
        let rv = dot(&frame.unit_radial, v);
        let mut out = v.iter().map(|vi| self.c_psi * vi).collect::<Vec<_>>();
        axpy((self.c_rr - self.c_psi) * rv, &frame.unit_radial, &mut out);
        if let Some(t) = &frame.unit_tangential {
            let tv = dot(t, v);
            axpy((self.c_tt - self.c_psi) * tv + self.c_rt * rv, t, &mut out);
            axpy(self.c_rt * tv, &frame.unit_radial, &mut out);
        }
        out
    }

    /// Smallest eigenvalue of the Hessian in dimension `n ≥ 2`.
    ///
    /// The `(r̂, θ̂)` block is a symmetric 2×2 matrix; the ψ directions
    /// contribute `c_psi` with multiplicity `n − 2`.
    pub fn min_eigenvalue(&self, n: usize) -> f64 {
        let mean = 0.5 * (self.c_rr + self.c_tt);
        let half_gap = (0.5 * (self.c_rr - self.c_tt)).hypot(self.c_rt);
        let block_min = mean - half_gap;
        if n > 2 {
            block_min.min(self.c_psi)
        } else {
            block_min
        }
    }
}
