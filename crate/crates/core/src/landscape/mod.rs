//! Idealized and smoothed loss landscapes of deep random ReLU inversion.

mod angle;
mod ideal;
mod polar;
mod smoothed;

pub use angle::{dyn_g, saddle_radius, theta_chain, AngleMap, ThetaChain, ENDPOINT_SWITCH};
pub use ideal::{ideal_gradient, ideal_hessian, ideal_loss, IdealLandscape};
pub use polar::{HessianCoefficients, PolarFrame};
pub use smoothed::{
    modified_loss, potential, smooth_step, ModifiedLossParams, PotentialValue, SmoothStepParams,
    SmoothedLandscape,
};
