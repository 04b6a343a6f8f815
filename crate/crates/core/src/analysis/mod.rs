//! Rate matrices, their spectral radii, the closed-form step-size and rate
//! bounds, and complexity sweeps over `(n_c, p, α)`.

mod bounds;
mod complexity;
mod matrix;
mod params;
mod spectral;

pub use bounds::{rate_bound_method, rate_upper_bound, step_bound_general, step_bound_method};
pub use complexity::{
    complexity_point, default_alpha_grid, refine_around, sweep, sweep_csv, ComplexityPoint, Constants,
    SweepAxis, SweepCell, SWEEP_HEADER,
};
pub use matrix::{build_a_general, build_a_method, RateMatrix};
pub use params::{MethodParams, RateParams};
pub use spectral::{power_iteration_radius, spectral_radius};
