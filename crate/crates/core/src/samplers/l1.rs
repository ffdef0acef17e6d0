use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// The ball `{x : ‖x − center‖₁ ≤ radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1ProjectionSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl L1ProjectionSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(config(format!("ℓ1 radius must be nonnegative, got {radius}")));
        }
        Ok(Self { center, radius })
    }
}

/// Euclidean projection onto the ℓ1 ball by sorting and soft-thresholding.
pub fn project_l1(v: &[f64], spec: &L1ProjectionSpec) -> Vec<f64> {
    let d: Vec<f64> = v.iter().zip(&spec.center).map(|(a, c)| a - c).collect();
    let l1: f64 = d.iter().map(|x| x.abs()).sum();
    if l1 <= spec.radius {
        return v.to_vec();
    }
    if spec.radius == 0.0 {
        return spec.center.clone();
    }
    let mut mags: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumulative += m;
        let t = (cumulative - spec.radius) / (k + 1) as f64;
        if m > t {
            threshold = t;
        } else {
            break;
        }
    }
    d.iter()
        .zip(&spec.center)
        .map(|(x, c)| c + x.signum() * (x.abs() - threshold).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cases() {
        let s = L1ProjectionSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(project_l1(&[3.0, 0.0], &s), vec![1.0, 0.0]);
        assert_eq!(project_l1(&[0.2, -0.3], &s), vec![0.2, -0.3]);
        let s = L1ProjectionSpec::new(vec![1.0, 1.0], 0.0).unwrap();
        assert_eq!(project_l1(&[5.0, -2.0], &s), vec![1.0, 1.0]);
        let s = L1ProjectionSpec::new(vec![0.0, 0.0], f64::INFINITY).unwrap();
        assert_eq!(project_l1(&[5.0, -2.0], &s), vec![5.0, -2.0]);
        assert!(L1ProjectionSpec::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn lands_on_the_sphere() {
        let s = L1ProjectionSpec::new(vec![0.5, -0.5, 0.0], 0.7).unwrap();
        let p = project_l1(&[2.0, 1.0, -1.5], &s);
        let l1: f64 = p.iter().zip(&s.center).map(|(a, b)| (a - b).abs()).sum();
        assert!((l1 - 0.7).abs() < 1e-12);
    }
}
