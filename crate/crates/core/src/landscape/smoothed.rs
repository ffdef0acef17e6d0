//! Smoothed loss `L̂ = L·h¹ + ξ(1 − h²)` and the Lyapunov-style potential
//! `V = L̂ − λ cos θ · h³(r) · 1(θ ≥ π/2)`.
//!
//! `h¹ = h^{r0/3, 2r0/3}`, `h² = h^{0, r0}`, `h³ = h^{r0, 3r0/2}` are
//! piecewise quadratic steps. For `r ≥ r0` the smoothed loss is the
//! idealized loss.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::angle::saddle_radius;
use super::ideal::{CanonicalPoint, IdealLandscape};
use super::polar::{HessianCoefficients, PolarJet, Radial};
use crate::error::{config, Result};
use crate::linalg::dot;

/// Knots of a `C¹` step from 0 (at `a`) to 1 (at `b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothStepParams {
    a: f64,
    b: f64,
}

impl SmoothStepParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(config(format!("smooth step needs 0 ≤ a < b, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub(crate) fn profile(&self, r: f64) -> Radial {
        let (h, h_r, h_rr) = smooth_step(self, r);
        Radial { h, h_r, h_rr }
    }
}

/// `(h, h_r, h_rr)` of the step at radius `r`.
///
/// `h_rr` is undefined at the knots `a`, `(a+b)/2`, `b`; the value of the
/// piece to the right is returned there.
pub fn smooth_step(p: &SmoothStepParams, r: f64) -> (f64, f64, f64) {
    let (a, b) = (p.a, p.b);
    let w2 = (b - a) * (b - a);
    let mid = 0.5 * (a + b);
    if r < a {
        (0.0, 0.0, 0.0)
    } else if r < mid {
        let t = r - a;
        (2.0 * t * t / w2, 4.0 * t / w2, 4.0 / w2)
    } else if r < b {
        let t = b - r;
        (1.0 - 2.0 * t * t / w2, 4.0 * t / w2, -4.0 / w2)
    } else {
        (1.0, 0.0, 0.0)
    }
}

/// Parameters of the smoothed loss and potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedLossParams {
    pub r0: f64,
    pub xi: f64,
    pub lambda: f64,
    /// Inverse temperature entering the generator `𝓛V`.
    pub beta: f64,
}

impl ModifiedLossParams {
    /// `r0 = cos(g^∘d(π))/2`, `ξ = 10`, `λ = 0.1`.
    pub fn defaults(depth: usize, beta: f64) -> Self {
        Self {
            r0: saddle_radius(depth) / 2.0,
            xi: 10.0,
            lambda: 0.1,
            beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.r0) && ok(self.xi) && ok(self.lambda) && ok(self.beta)) {
            return Err(config(format!(
                "r0, xi, lambda and beta must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }

    fn inner_step(&self) -> SmoothStepParams {
        SmoothStepParams {
            a: self.r0 / 3.0,
            b: 2.0 * self.r0 / 3.0,
        }
    }

    fn origin_step(&self) -> SmoothStepParams {
        SmoothStepParams { a: 0.0, b: self.r0 }
    }

    fn tilt_step(&self) -> SmoothStepParams {
        SmoothStepParams {
            a: self.r0,
            b: 1.5 * self.r0,
        }
    }
}

/// `V`, `∇V` and `𝓛V = △V − β⟨∇L̂, ∇V⟩` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
    pub generator: f64,
}

/// The smoothed landscape and its potential for fixed `z*`, depth and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedLandscape {
    ideal: IdealLandscape,
    params: ModifiedLossParams,
}

impl SmoothedLandscape {
    pub fn new(z_star: &[f64], depth: usize, params: ModifiedLossParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            ideal: IdealLandscape::new(z_star, depth)?,
            params,
        })
    }

    pub fn ideal(&self) -> &IdealLandscape {
        &self.ideal
    }

    pub fn params(&self) -> &ModifiedLossParams {
        &self.params
    }

    fn smoothed_jet(&self, p: &CanonicalPoint) -> PolarJet {
        let r = p.frame.r;
        let inner = self.params.inner_step().profile(r);
        let origin = self.params.origin_step().profile(r);
        let carrier = if inner.h > 0.0 {
            p.jet.times_radial(inner)
        } else {
            PolarJet::default()
        };
        let bump = PolarJet::radial(Radial {
            h: 1.0 - origin.h,
            h_r: -origin.h_r,
            h_rr: -origin.h_rr,
        });
        carrier.plus(bump.scaled(self.params.xi))
    }

    fn tilt_jet(&self, p: &CanonicalPoint) -> PolarJet {
        let theta = p.frame.theta;
        if theta < FRAC_PI_2 {
            return PolarJet::default();
        }
        let h = self.params.tilt_step().profile(p.frame.r);
        let (sin, cos) = theta.sin_cos();
        PolarJet {
            f: -cos * h.h,
            f_r: -cos * h.h_r,
            f_theta: sin * h.h,
            f_theta_over_sin: h.h,
            f_rr: -cos * h.h_rr,
            f_thth: cos * h.h,
            f_rth: sin * h.h_r,
        }
        .scaled(self.params.lambda)
    }

    /// `(L̂, ∇L̂)`; identical to the idealized loss for `r ≥ r0`.
    pub fn loss_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = self.ideal.scale();
        let Some(p) = self.ideal.canonical(x)? else {
            return Ok((s * s * self.params.xi, vec![0.0; x.len()]));
        };
        if p.frame.r >= self.params.r0 {
            return self.ideal.loss_and_gradient(x);
        }
        let jet = self.smoothed_jet(&p);
        let mut g = jet.gradient(&p.frame);
        g.iter_mut().for_each(|v| *v *= s);
        Ok((s * s * jet.f, g))
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Option<HessianCoefficients>> {
        Ok(self
            .ideal
            .canonical(x)?
            .map(|p| self.smoothed_jet(&p).hessian(&p.frame, x.len())))
    }

    pub fn potential(&self, x: &[f64]) -> Result<PotentialValue> {
        let s = self.ideal.scale();
        let n = x.len() as f64;
        let Some(p) = self.ideal.canonical(x)? else {
            // Only ξ(1 − h²) is active near the origin; its Laplacian tends to −4ξn/r0².
            let lap = -4.0 * self.params.xi * n / (self.params.r0 * self.params.r0);
            return Ok(PotentialValue {
                value: s * s * self.params.xi,
                gradient: vec![0.0; x.len()],
                laplacian: lap,
                generator: lap,
            });
        };
        let loss = self.smoothed_jet(&p);
        let v = loss.plus(self.tilt_jet(&p));
        let grad_loss = loss.gradient(&p.frame);
        let grad_v = v.gradient(&p.frame);
        let laplacian = v.hessian(&p.frame, x.len()).laplacian;
        let generator = laplacian - self.params.beta * s * s * dot(&grad_loss, &grad_v);
        Ok(PotentialValue {
            value: s * s * v.f,
            gradient: grad_v.into_iter().map(|g| g * s).collect(),
            laplacian,
            generator,
        })
    }
}

pub fn modified_loss(
    x: &[f64],
    z_star: &[f64],
    depth: usize,
    params: &ModifiedLossParams,
) -> Result<(f64, Vec<f64>)> {
    SmoothedLandscape::new(z_star, depth, *params)?.loss_and_gradient(x)
}

pub fn potential(
    x: &[f64],
    z_star: &[f64],
    depth: usize,
    params: &ModifiedLossParams,
) -> Result<PotentialValue> {
    SmoothedLandscape::new(z_star, depth, *params)?.potential(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn step_reference_values() {
        let p = SmoothStepParams::new(0.2, 0.6).unwrap();
        assert_eq!(smooth_step(&p, 0.2).0, 0.0);
        assert_eq!(smooth_step(&p, 0.2).1, 0.0);
        let (h, hr, _) = smooth_step(&p, 0.4);
        assert!((h - 0.5).abs() < 1e-15);
        assert!((hr - 2.0 / 0.4).abs() < 1e-12);
        let unit = SmoothStepParams::new(0.0, 1.0).unwrap();
        assert_eq!(smooth_step(&unit, 0.25).0, 0.125);
        assert_eq!(smooth_step(&unit, 7.0), (1.0, 0.0, 0.0));
        assert!(SmoothStepParams::new(1.0, 1.0).is_err());
        assert!(SmoothStepParams::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn step_is_c1_at_knots() {
        let p = SmoothStepParams::new(0.5, 1.5).unwrap();
        for &k in &[0.5, 1.0, 1.5] {
            let (l, lr, _) = smooth_step(&p, k - 1e-12);
            let (r, rr, _) = smooth_step(&p, k + 1e-12);
            assert!((l - r).abs() < 1e-10);
            assert!((lr - rr).abs() < 1e-10);
        }
    }

    #[test]
    fn smoothed_loss_at_origin_and_far_out() {
        let z = [1.0, 0.0, 0.0];
        let params = ModifiedLossParams::defaults(2, 30.0);
        let (v, g) = modified_loss(&[0.0; 3], &z, 2, &params).unwrap();
        assert_eq!(v, params.xi);
        assert_eq!(g, vec![0.0; 3]);
        let x = [-2.0 * params.r0 * 0.6, 2.0 * params.r0 * 0.8, 0.0];
        let (v, g) = modified_loss(&x, &z, 2, &params).unwrap();
        let land = IdealLandscape::new(&z, 2).unwrap();
        assert_eq!(v, land.loss(&x).unwrap());
        assert_eq!(g, land.gradient(&x).unwrap());
    }

    #[test]
    fn potential_matches_smoothed_loss_below_right_angle() {
        let z = [1.0, 0.0];
        let params = ModifiedLossParams::defaults(2, 20.0);
        let land = SmoothedLandscape::new(&z, 2, params).unwrap();
        let x = [0.7 * (PI / 4.0).cos(), 0.7 * (PI / 4.0).sin()];
        let pv = land.potential(&x).unwrap();
        assert_eq!(pv.value, land.loss_and_gradient(&x).unwrap().0);
    }

    #[test]
    fn generator_negative_at_saddle() {
        let n = 50;
        let mut z = vec![0.0; n];
        z[0] = 1.0;
        let params = ModifiedLossParams {
            lambda: 0.1,
            ..ModifiedLossParams::defaults(2, 10.0 * n as f64)
        };
        let saddle: Vec<f64> = z.iter().map(|v| -v / PI).collect();
        let pv = potential(&saddle, &z, 2, &params).unwrap();
        // △L = 1 at the saddle and the tilt contributes λ(n−1)cos π / r².
        let expect = 1.0 - 0.1 * 49.0 * PI * PI;
        assert!((pv.generator - expect).abs() < 1e-9, "{}", pv.generator);
        assert!(pv.generator < 0.0);
    }

    #[test]
    fn generator_bounded_at_target() {
        for n in [4usize, 10, 50] {
            let mut z = vec![0.0; n];
            z[0] = 1.0;
            let params = ModifiedLossParams::defaults(2, 10.0 * n as f64);
            let pv = potential(&z, &z, 2, &params).unwrap();
            assert!((pv.generator - n as f64).abs() < 1e-9);
            assert!(pv.generator <= 2.0 * n as f64);
        }
    }
}
