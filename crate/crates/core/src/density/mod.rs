//! The averaged potential, the total density tensor `Υ_r`, pointwise
//! densities `D_{z,r}`, the `θ_v` quotients and grid sweeps.
//!
//! `Υ_r(z)` is the complex Hessian in `z` of
//! `(1/V_n(r)) ∫_{B(0,r)} log|T(F_z(ζ))|^2 ω_B^n(ζ)`. With this
//! normalization `dd^c s_r = 2π[W] − Υ_r`, and a density is compared against
//! `(n/(n+1)) ω_B + Υ_r` relative to `i∂∂̄κ`.

mod average;
mod sweep;
mod tensor;
mod weight;

pub use average::{averaged_potential, zero_excess, zero_mean, AverageOptions, UpsilonMethod};
pub use sweep::{
    density_sweep, linear_intercept, pseudo_grid, DensityReport, MAX_EXCLUDED_FRACTION,
};
pub use tensor::{
    complex_hessian_fd, density_forms, local_density, spread_directions, theta_density, upsilon,
    upsilon_estimate, DensityForms, UpsilonEstimate, PSD_TOLERANCE, STEP_STABILITY,
};
pub use weight::{Perturbation, Weight};

pub(crate) use average::jensen_deficit;
