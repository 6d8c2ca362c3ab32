use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point outside the unit ball: |z|^2 = {norm_sq}")]
    OutsideBall { norm_sq: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("pole of the Green function at pseudo-distance {distance:e}")]
    Pole { distance: f64 },

    #[error("quadrature failure at node {node:?}: {reason}")]
    Quadrature {
        node: Vec<(f64, f64)>,
        reason: String,
    },

    #[error("weight is not strictly plurisubharmonic at {at:?}")]
    IndefiniteWeight { at: Vec<(f64, f64)> },

    #[error("weight not integrable: beta = {beta} must exceed the dimension {n}")]
    NotIntegrable { beta: f64, n: usize },

    #[error("finite-difference Hessian failed: min eigenvalue {min_eigenvalue:e}")]
    FiniteDifference { min_eigenvalue: f64 },

    #[error("hypersurface is not a graph near the base point: {0}")]
    FlatnessViolation(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("sample does not cover the required region: {0}")]
    Coverage(String),

    #[error("too many excluded grid points: {excluded} of {total}")]
    SweepFailed { excluded: usize, total: usize },

    #[error("Fourier completion residual {residual:e} exceeds {tolerance:e}")]
    Completion { residual: f64, tolerance: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
