//! Estimators and reference quantities used to check sampler behaviour
//! against the landscape theory.

mod chain_stats;
mod curvature;
mod drift;
mod reference;
mod transport;

pub use chain_stats::{
    hitting_time, tail_statistics, wilson_interval, BoundCheck, RegionSpec, TailReport,
};
pub use curvature::{convexity_radius, min_eig_over_ball, min_hessian_eig};
pub use drift::{discretization_gap, potential_drift, MeanEstimate};
pub use reference::{reference_grid_sampler, GridReference};
pub use transport::{assignment_w1, sliced_w1, w1_exact_1d, EmpiricalDistribution, ASSIGNMENT_CAP};
