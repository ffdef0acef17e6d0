pub mod diagnostics;
pub mod error;
pub mod generator;
pub mod harness;
pub mod landscape;
pub mod linalg;
pub mod priors;
pub mod samplers;
pub mod rng;

pub use error::{Error, Result};
