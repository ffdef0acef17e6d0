use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, shape, Result};
use crate::linalg::Matrix;
use crate::rng::{gaussian, rng_from_seed};

/// Textual description of a generator. Weights are sampled from `seed`
/// unless given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub dims: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Layer `i` as a list of `n_i` rows of length `n_{i-1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<Vec<f64>>>>,
}

fn default_scale() -> f64 {
    std::f64::consts::SQRT_2
}

/// `G(z) = ReLU(s·W_d ReLU(… ReLU(s·W_1 z)))` with `s` the per-layer scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluGenerator {
    dims: Vec<usize>,
    weights: Vec<Matrix>,
    scale: f64,
    seed: Option<u64>,
}

/// Output and the per-layer sign patterns of the preactivations.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub output: Vec<f64>,
    /// `patterns[i][j]` is true when unit `j` of layer `i+1` is active.
    pub patterns: Vec<Vec<bool>>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(config("a generator needs at least two dims"));
    }
    if dims.contains(&0) {
        return Err(config(format!("dims must be positive, got {dims:?}")));
    }
    Ok(())
}

/// Random generator with layer `i` entries i.i.d. `N(0, 1/n_i)` and scale `√2`.
pub fn build_generator(dims: &[usize], seed: u64) -> Result<ReluGenerator> {
    check_dims(dims)?;
    let mut rng = rng_from_seed(seed);
    let weights = dims
        .windows(2)
        .map(|w| gaussian_matrix(&mut rng, w[1], w[0], 1.0 / (w[1] as f64).sqrt()))
        .collect();
    Ok(ReluGenerator {
        dims: dims.to_vec(),
        weights,
        scale: default_scale(),
        seed: Some(seed),
    })
}

pub(crate) fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize, std: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| std * gaussian(rng))
}

impl ReluGenerator {
    /// Generator with hand-set weights; layer `i` must be `n_i × n_{i-1}`.
    pub fn from_weights(weights: Vec<Matrix>, scale: f64) -> Result<Self> {
        let first = weights
            .first()
            .ok_or_else(|| config("a generator needs at least one layer"))?;
        let mut dims = vec![first.cols];
        for w in &weights {
            if w.cols != *dims.last().unwrap() {
                return Err(shape(format!(
                    "layer with {} columns follows a layer of width {}",
                    w.cols,
                    dims.last().unwrap()
                )));
            }
            if !w.is_finite() {
                return Err(config("weights must be finite"));
            }
            dims.push(w.rows);
        }
        check_dims(&dims)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(config(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            dims,
            weights,
            scale,
            seed: None,
        })
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        match &spec.weights {
            Some(layers) => {
                let mats = layers
                    .iter()
                    .map(|l| Matrix::from_rows(l))
                    .collect::<Result<Vec<_>>>()?;
                let g = Self::from_weights(mats, spec.scale)?;
                if g.dims != spec.dims {
                    return Err(config(format!(
                        "dims {:?} disagree with inlined weights {:?}",
                        spec.dims, g.dims
                    )));
                }
                Ok(g)
            }
            None => {
                let mut g = build_generator(&spec.dims, spec.seed)?;
                g.scale = spec.scale;
                Ok(g)
            }
        }
    }

    /// Spec that rebuilds this generator; weights are inlined only when
    /// they were not sampled from a seed.
    pub fn to_spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            dims: self.dims.clone(),
            seed: self.seed.unwrap_or(0),
            scale: self.scale,
            weights: match self.seed {
                Some(_) => None,
                None => Some(
                    self.weights
                        .iter()
                        .map(|w| (0..w.rows).map(|i| w.row(i).to_vec()).collect())
                        .collect(),
                ),
            },
        }
    }

    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    /// `(G₁, G₂)` with `G₁` the first `layer` layers and `G₂` the rest.
    pub fn split_at(&self, layer: usize) -> Result<(ReluGenerator, ReluGenerator)> {
        if layer == 0 || layer >= self.depth() {
            return Err(config(format!(
                "split layer must lie in [1, {}], got {layer}",
                self.depth().saturating_sub(1)
            )));
        }
        let part = |range: std::ops::Range<usize>| ReluGenerator {
            dims: self.dims[range.start..=range.end].to_vec(),
            weights: self.weights[range].to_vec(),
            scale: self.scale,
            seed: None,
        };
        Ok((part(0..layer), part(layer..self.depth())))
    }

    fn check_input(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dims[0] {
            return Err(shape(format!(
                "latent has dimension {}, generator expects {}",
                z.len(),
                self.dims[0]
            )));
        }
        Ok(())
    }

    pub fn forward(&self, z: &[f64]) -> Result<ForwardPass> {
        self.check_input(z)?;
        let mut h = z.to_vec();
        let mut patterns = Vec::with_capacity(self.depth());
        for w in &self.weights {
            let mut next = w.matvec(&h);
            let mut pattern = Vec::with_capacity(next.len());
            for v in next.iter_mut() {
                let active = *v > 0.0;
                *v = if active { self.scale * *v } else { 0.0 };
                pattern.push(active);
            }
            patterns.push(pattern);
            h = next;
        }
        Ok(ForwardPass {
            output: h,
            patterns,
        })
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(z)?.output)
    }

    /// `J_G(z)ᵀ·v` for the Jacobian fixed by `patterns`.
    pub fn pullback(&self, patterns: &[Vec<bool>], v: &[f64]) -> Vec<f64> {
        let mut delta = v.to_vec();
        for (w, pattern) in self.weights.iter().zip(patterns).rev() {
            for (d, &on) in delta.iter_mut().zip(pattern) {
                *d = if on { self.scale * *d } else { 0.0 };
            }
            delta = w.matvec_t(&delta);
        }
        delta
    }
}

impl Serialize for ReluGenerator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReluGenerator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = GeneratorSpec::deserialize(d)?;
        Self::from_spec(&spec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn hand_set_network() {
        let w = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 2.0]]).unwrap();
        let g = ReluGenerator::from_weights(vec![w], 1.0).unwrap();
        let f = g.forward(&[1.0, 1.0]).unwrap();
        assert_eq!(f.output, vec![0.0, 2.0]);
        assert_eq!(f.patterns, vec![vec![false, true]]);
    }

    #[test]
    fn deterministic_and_homogeneous() {
        let a = build_generator(&[3, 20, 50], 7).unwrap();
        let b = build_generator(&[3, 20, 50], 7).unwrap();
        assert_eq!(a, b);
        let z = [0.3, -1.2, 0.8];
        let gz = a.apply(&z).unwrap();
        let g2z = a.apply(&[0.6, -2.4, 1.6]).unwrap();
        for (x, y) in gz.iter().zip(&g2z) {
            assert_eq!(2.0 * x, *y);
        }
        assert!(a.apply(&[0.0; 3]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(build_generator(&[], 1).is_err());
        assert!(build_generator(&[4], 1).is_err());
        assert!(build_generator(&[4, 0, 3], 1).is_err());
        let g = build_generator(&[2, 3], 1).unwrap();
        assert!(g.forward(&[1.0]).is_err());
    }

    #[test]
    fn split_composes_to_whole() {
        let g = build_generator(&[3, 12, 30, 40], 3).unwrap();
        let (head, tail) = g.split_at(2).unwrap();
        assert_eq!(head.dims(), &[3, 12, 30]);
        assert_eq!(tail.dims(), &[30, 40]);
        let z = [0.5, 0.1, -0.7];
        assert_eq!(tail.apply(&head.apply(&z).unwrap()).unwrap(), g.apply(&z).unwrap());
        assert!(g.split_at(0).is_err());
        assert!(g.split_at(3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = build_generator(&[2, 8, 16], 11).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(!text.contains("weights"));
        let back: ReluGenerator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);

        let w = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 2.0]]).unwrap();
        let h = ReluGenerator::from_weights(vec![w], 1.0).unwrap();
        let back: ReluGenerator = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(back, h);
        let bad = r#"{"dims":[2,3],"seed":1,"bogus":0}"#;
        assert!(serde_json::from_str::<ReluGenerator>(bad).is_err());
    }

    #[test]
    fn norm_roughly_preserved() {
        let g = build_generator(&[3, 384, 1536], 5).unwrap();
        let mut rng = rng_from_seed(9);
        let mut ratios: Vec<f64> = (0..100)
            .map(|_| {
                let z: Vec<f64> = (0..3).map(|_| gaussian(&mut rng)).collect();
                let (head, _) = g.split_at(1).unwrap();
                norm(&head.apply(&z).unwrap()) / norm(&z)
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let median = ratios[50];
        assert!((0.95..=1.05).contains(&median), "{median}");
    }
}
