//! Bergman-ball primitives: points, involutive automorphisms, the Bergman
//! metric and volume, the Green function, and quadrature over Bergman–Green
//! balls `E(a, r) = F_a(B(0, r))`.
//!
//! Volume convention: `ω_E^n = (dd^c |z|^2)^n = 2^n n! · Lebesgue` with
//! `d^c = (i/2)(∂̄ − ∂)`, so `dd^c = i∂∂̄`. Every integral in the crate is
//! taken with respect to this single convention.

mod green;
mod metric;
mod mobius;
mod point;
mod quadrature;
mod selftest;

pub use green::{green, green_constant, green_gamma, green_profile, log_tail};
pub use metric::{ball_volume, bergman_metric, volume_density, volume_prefactor, HermitianForm};
pub use mobius::{pseudo_distance, MobiusMap};
pub use point::BallPoint;
pub use quadrature::{
    quad_ball, quad_ball_point_singular, DirectionRule, QuadOptions, QuadratureRule, RuleKind,
};
pub use selftest::{selftest, SelfCheck};

pub(crate) use mobius::pseudo_distance_raw;
pub(crate) use point::{inner, norm_sqr};
pub(crate) use quadrature::random_sphere_point;
