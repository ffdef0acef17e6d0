//! The idealized loss `L = r²/2 − r·cos θ_d + 1/2` of an expansive ReLU
//! network in the limit of perfectly concentrated weights.
//!
//! Inputs are rescaled by `‖z*‖` so the unit-norm formulas apply, and
//! outputs are mapped back: values scale by `‖z*‖²`, gradients by `‖z*‖`,
//! Hessian coefficients are scale free.

use super::angle::{tangential_ratio, theta_chain, ThetaChain};
use super::polar::{HessianCoefficients, PolarFrame, PolarJet};
use crate::error::{domain, shape, Result};
use crate::linalg::norm;

/// The idealized landscape for a fixed target `z*` and depth.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealLandscape {
    axis: Vec<f64>,
    scale: f64,
    depth: usize,
}

/// The pieces of a landscape evaluation in canonical (unit `z*`) units.
pub(crate) struct CanonicalPoint {
    pub frame: PolarFrame,
    pub jet: PolarJet,
}

impl IdealLandscape {
    pub fn new(z_star: &[f64], depth: usize) -> Result<Self> {
        let scale = norm(z_star);
        if scale == 0.0 || !scale.is_finite() {
            return Err(domain("target z* must be nonzero and finite"));
        }
        Ok(Self {
            axis: z_star.iter().map(|v| v / scale).collect(),
            scale,
            depth,
        })
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `‖z*‖`
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn z_star(&self) -> Vec<f64> {
        self.axis.iter().map(|a| a * self.scale).collect()
    }

    pub(crate) fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.axis.len() {
            return Err(shape(format!(
                "point has dimension {}, target has {}",
                x.len(),
                self.axis.len()
            )));
        }
        Ok(())
    }

    /// Canonical-unit evaluation; `None` at the origin.
    pub(crate) fn canonical(&self, x: &[f64]) -> Result<Option<CanonicalPoint>> {
        self.check(x)?;
        let xc: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        if xc.iter().all(|v| *v == 0.0) {
            return Ok(None);
        }
        let frame = PolarFrame::new(&xc, &self.axis)?;
        let chain = theta_chain(frame.theta, self.depth)?;
        let ratio = tangential_ratio(frame.theta, &chain)?;
        let jet = loss_jet(frame.r, &chain, ratio);
        Ok(Some(CanonicalPoint { frame, jet }))
    }

    pub fn loss(&self, x: &[f64]) -> Result<f64> {
        let s2 = self.scale * self.scale;
        Ok(match self.canonical(x)? {
            Some(p) => s2 * p.jet.f,
            None => 0.5 * s2,
        })
    }

    /// Zero at the origin by convention.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(match self.canonical(x)? {
            Some(p) => {
                let mut g = p.jet.gradient(&p.frame);
                g.iter_mut().for_each(|v| *v *= self.scale);
                g
            }
            None => vec![0.0; x.len()],
        })
    }

    pub fn loss_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s2 = self.scale * self.scale;
        Ok(match self.canonical(x)? {
            Some(p) => {
                let mut g = p.jet.gradient(&p.frame);
                g.iter_mut().for_each(|v| *v *= self.scale);
                (s2 * p.jet.f, g)
            }
            None => (0.5 * s2, vec![0.0; x.len()]),
        })
    }

    pub fn hessian(&self, x: &[f64]) -> Result<HessianCoefficients> {
        let p = self
            .canonical(x)?
            .ok_or_else(|| domain("Hessian undefined at the origin"))?;
        Ok(p.jet.hessian(&p.frame, x.len()))
    }

    pub fn hessian_vector_product(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != x.len() {
            return Err(shape("direction and point differ in dimension"));
        }
        let p = self
            .canonical(x)?
            .ok_or_else(|| domain("Hessian undefined at the origin"))?;
        Ok(p.jet.hessian(&p.frame, x.len()).apply(&p.frame, v))
    }

    /// The three critical points `z*`, `−cos(g^∘d(π))·z*` and `0`.
    pub fn critical_points(&self) -> [Vec<f64>; 3] {
        let a = super::angle::saddle_radius(self.depth);
        let zs = self.z_star();
        [
            zs.clone(),
            zs.iter().map(|v| -a * v).collect(),
            vec![0.0; zs.len()],
        ]
    }
}

pub(crate) fn loss_jet(r: f64, chain: &ThetaChain, ratio: f64) -> PolarJet {
    let (sin_d, cos_d) = chain.theta_d.sin_cos();
    let d1 = chain.theta_d_prime;
    let d2 = chain.theta_d_double_prime;
    let radial = r - cos_d;
    PolarJet {
        // r²/2 − r cos θ_d + 1/2, written as a sum of squares
        f: 0.5 * (radial * radial + sin_d * sin_d),
        f_r: radial,
        f_theta: r * sin_d * d1,
        f_theta_over_sin: r * ratio,
        f_rr: 1.0,
        f_thth: r * (cos_d * d1 * d1 + sin_d * d2),
        f_rth: sin_d * d1,
    }
}

pub fn ideal_loss(x: &[f64], z_star: &[f64], depth: usize) -> Result<f64> {
    IdealLandscape::new(z_star, depth)?.loss(x)
}

pub fn ideal_gradient(x: &[f64], z_star: &[f64], depth: usize) -> Result<Vec<f64>> {
    IdealLandscape::new(z_star, depth)?.gradient(x)
}

/// Polar Hessian coefficients and Laplacian; the ambient dimension is `x.len()`.
pub fn ideal_hessian(x: &[f64], z_star: &[f64], depth: usize) -> Result<HessianCoefficients> {
    IdealLandscape::new(z_star, depth)?.hessian(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e1(n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    }

    #[test]
    fn loss_at_reference_points() {
        let z = e1(4);
        assert_eq!(ideal_loss(&z, &z, 2).unwrap(), 0.0);
        assert_eq!(ideal_loss(&[0.0; 4], &z, 2).unwrap(), 0.5);
        let minus: Vec<f64> = z.iter().map(|v| -v).collect();
        assert!((ideal_loss(&minus, &z, 2).unwrap() - (1.0 - 1.0 / PI)).abs() < 1e-15);
        assert!(ideal_loss(&z, &[0.0; 4], 2).is_err());
    }

    #[test]
    fn gradient_vanishes_at_critical_points() {
        let z = e1(5);
        let land = IdealLandscape::new(&z, 2).unwrap();
        for p in land.critical_points() {
            assert!(norm(&land.gradient(&p).unwrap()) < 1e-15);
        }
        let saddle: Vec<f64> = z.iter().map(|v| -v / PI).collect();
        assert!(norm(&land.gradient(&saddle).unwrap()) < 1e-10);
    }

    #[test]
    fn hessian_is_identity_at_target() {
        let z = e1(10);
        let h = ideal_hessian(&z, &z, 2).unwrap();
        assert!((h.c_rr - 1.0).abs() < 1e-15);
        assert!((h.c_tt - 1.0).abs() < 1e-15);
        assert!(h.c_rt.abs() < 1e-15);
        assert!((h.c_psi - 1.0).abs() < 1e-15);
        assert!((h.laplacian - 10.0).abs() < 1e-13);
    }

    #[test]
    fn scaling_convention() {
        let z: Vec<f64> = vec![3.0, 0.0, 0.0];
        let x = vec![1.0, 2.0, -0.5];
        let unit = IdealLandscape::new(&[1.0, 0.0, 0.0], 3).unwrap();
        let big = IdealLandscape::new(&z, 3).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v / 3.0).collect();
        assert!((big.loss(&x).unwrap() - 9.0 * unit.loss(&xs).unwrap()).abs() < 1e-12);
        let gb = big.gradient(&x).unwrap();
        let gu = unit.gradient(&xs).unwrap();
        for (a, b) in gb.iter().zip(&gu) {
            assert!((a - 3.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(ideal_gradient(&[1.0, 2.0], &[1.0, 0.0, 0.0], 2).is_err());
    }
}
