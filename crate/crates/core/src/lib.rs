//! Numerical toolkit for hypersurfaces in the Bergman ball.
//!
//! The crate is split along the objects it computes:
//!
//! * [`geometry`]: ball points, Möbius involutions, the Bergman metric,
//!   volumes, the Green function and quadrature over Bergman–Green balls.
//! * [`poly`]: holomorphic defining functions (polynomials, point divisors,
//!   exponential twists) and univariate root finding.
//! * [`hypersurface`]: samples of `W = {T = 0}`, pseudohyperbolic distance to
//!   `W`, flatness diagnostics and tube membership.
//! * [`density`]: averaged potentials, the total density tensor, local
//!   densities and density sweeps.
//! * [`potential`]: the kernel `Γ_r`, the singular function `s_r` by two
//!   independent formulas, and its regularization.
//! * [`spaces`]: truncated weighted Bergman spaces, sampling constants,
//!   least-norm extension, holomorphic flattening and tube restriction.

pub mod density;
pub mod error;
pub mod geometry;
pub mod hypersurface;
pub mod numeric;
pub mod poly;
pub mod potential;
pub mod spaces;

pub use error::{Error, Result};
pub use geometry::{BallPoint, HermitianForm, MobiusMap, QuadratureRule};
pub use num_complex::Complex64 as C64;
pub use poly::{DefiningFunction, DefiningPolynomial, PointDivisor, Twisted};
