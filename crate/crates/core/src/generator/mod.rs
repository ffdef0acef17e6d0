//! Random expansive ReLU generators, measurement operators and the
//! empirical loss of the inversion problem.

mod conditions;
mod measurement;
mod network;

pub use conditions::{
    gradient_proximity, rric_deviation, wdc_deviation, wdc_target, ProximityStats, WdcReport,
};
pub use measurement::{random_mask, InverseProblem, MeasurementMap};
pub use network::{build_generator, ForwardPass, GeneratorSpec, ReluGenerator};
