use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Result};
use crate::priors::GaussianMixturePrior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Landscape,
    Wdc,
    Rric,
    Mix,
    Invert,
    Posterior,
    TheoryCheck,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Landscape,
        Mode::Wdc,
        Mode::Rric,
        Mode::Mix,
        Mode::Invert,
        Mode::Posterior,
        Mode::TheoryCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Landscape => "landscape",
            Mode::Wdc => "wdc",
            Mode::Rric => "rric",
            Mode::Mix => "mix",
            Mode::Invert => "invert",
            Mode::Posterior => "posterior",
            Mode::TheoryCheck => "theory-check",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| config(format!("unknown mode {s:?}")))
    }

    /// File stem used for the mode's CSV and SVG outputs.
    pub fn file_stem(self) -> &'static str {
        match self {
            Mode::TheoryCheck => "theory_check",
            m => m.name(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reconstruction algorithms compared by the `invert` mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Gradient descent on the latent code.
    Csgm,
    /// ℓ1-projected gradient descent on an intermediate layer.
    Ilo,
    /// Langevin on the latent code.
    Langevin,
    /// Langevin on an intermediate layer under a Gaussian-mixture prior.
    Sgilo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Csgm,
        Algorithm::Ilo,
        Algorithm::Langevin,
        Algorithm::Sgilo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Csgm => "csgm",
            Algorithm::Ilo => "ilo",
            Algorithm::Langevin => "langevin",
            Algorithm::Sgilo => "sgilo",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Number of ReLU layers of the idealized landscape.
    #[serde(default)]
    pub depth: Option<usize>,
    /// Ambient dimension of the idealized landscape, or `k` for `wdc`.
    #[serde(default)]
    pub latent_dim: Option<usize>,
    /// Generator layer widths, latent first.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    #[serde(default)]
    pub split_layer: Option<usize>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub mask_fraction: Option<f64>,
    /// Swept sizes: layer widths for `wdc`, measurement counts for `rric`.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    /// Pairs or tuples per size.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Nonzero intermediate deviations of the `invert` ground truth.
    #[serde(default)]
    pub sparsity: Option<usize>,
    #[serde(default)]
    pub deviation: Option<f64>,
    /// Observation for `posterior`.
    #[serde(default)]
    pub y: Option<Vec<f64>>,
    /// Grid resolution for `landscape` scans and `mix` references.
    #[serde(default)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    #[serde(default)]
    pub algorithms: Option<Vec<Algorithm>>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    /// ℓ1 radius for `ilo`.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub chains: Option<usize>,
    #[serde(default)]
    pub projections: Option<usize>,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    /// Component variance of the intermediate prior used by `sgilo`.
    #[serde(default)]
    pub prior_variance: Option<f64>,
    /// Weight of the prior term relative to the data term in `sgilo`.
    #[serde(default)]
    pub prior_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

impl PriorSpec {
    pub fn build(&self) -> Result<GaussianMixturePrior> {
        GaussianMixturePrior::new(self.weights.clone(), self.means.clone(), self.variances.clone())
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub svg: bool,
    /// Adds wall-clock milliseconds to the summary, which then differs
    /// between runs.
    #[serde(default)]
    pub record_timing: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            svg: false,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub seed: u64,
    #[serde(default)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub prior: Option<PriorSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn minimal(mode: Mode, seed: u64) -> Self {
        Self {
            mode: Some(mode),
            seed,
            problem: ProblemSpec::default(),
            sampler: SamplerSpec::default(),
            prior: None,
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| config("config does not name a mode"))
    }

    /// SHA-256 of the canonical JSON of everything except `output`.
    ///
    /// Objects serialize with sorted keys, so the hash does not depend on
    /// the key order of the source file.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let serde_json::Value::Object(map) = &mut value {
            map.remove("output");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn require<T: Clone>(value: &Option<T>, name: &str, mode: Mode) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| config(format!("mode {mode} requires {name}")))
}
