use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BallPoint, HermitianForm};
use crate::poly::{DefiningFunction, DefiningPolynomial, Term};
use crate::C64;

/// Optional term added to `κ_β = −β log(1 − |z|^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// `+ 2 Re p(z)`: pluriharmonic, leaves `i∂∂̄κ` unchanged.
    Pluriharmonic {
        terms: Vec<Term>,
    },
    /// `+ c |z|^2`.
    Quadratic {
        c: f64,
    },
}

/// A plurisubharmonic weight `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub beta: f64,
    pub perturbation: Perturbation,
    /// Overall factor, so that `κ ↦ sκ` is exact.
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Weight {
    pub fn log_family(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            perturbation: Perturbation::None,
            scale: 1.0,
        })
    }

    pub fn with_pluriharmonic(mut self, p: &DefiningPolynomial) -> Self {
        self.perturbation = Perturbation::Pluriharmonic {
            terms: p.to_records(),
        };
        self
    }

    pub fn with_quadratic(mut self, c: f64) -> Self {
        self.perturbation = Perturbation::Quadratic { c };
        self
    }

    /// `s κ`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            scale: self.scale * s,
            ..self.clone()
        }
    }

    /// `κ(z)`.
    pub fn value(&self, z: &[C64]) -> Result<f64> {
        let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        if !(s < 1.0) {
            return Err(Error::OutsideBall { norm_sq: s });
        }
        let base = -self.beta * (-s).ln_1p();
        let extra = match &self.perturbation {
            Perturbation::None => 0.0,
            Perturbation::Pluriharmonic { terms } => {
                let p = DefiningPolynomial::from_records(z.len(), terms)?;
                2.0 * p.value(z).re
            }
            Perturbation::Quadratic { c } => c * s,
        };
        Ok(self.scale * (base + extra))
    }

    /// `i∂∂̄κ` at `z`.
    pub fn hessian(&self, z: &BallPoint) -> Result<HermitianForm> {
        let s = z.norm_sqr();
        if !(s < 1.0) {
            return Err(Error::OutsideBall { norm_sq: s });
        }
        let n = z.dim();
        let om = 1.0 - s;
        let quad = match self.perturbation {
            Perturbation::Quadratic { c } => c,
            _ => 0.0,
        };
        let m = DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            let log_part =
                (C64::new(delta * om, 0.0) + z[i].conj() * z[j]) * (self.beta / (om * om));
            (log_part + C64::new(quad * delta, 0.0)) * self.scale
        });
        Ok(HermitianForm { matrix: m })
    }

    /// Largest `C` with `(1/C) ω_B ≤ i∂∂̄κ ≤ C ω_B` over the given points.
    /// Fails if `i∂∂̄κ` is not positive definite somewhere.
    pub fn comparability(&self, points: &[BallPoint]) -> Result<f64> {
        let mut c = 1.0f64;
        for z in points {
            let h = self.hessian(z)?;
            let (vals, _) = h
                .generalized_eigen(&crate::geometry::bergman_metric(z)?)
                .map_err(|_| Error::IndefiniteWeight { at: z.parts() })?;
            let lo = vals[0];
            let hi = vals[vals.len() - 1];
            if lo <= 0.0 {
                return Err(Error::IndefiniteWeight { at: z.parts() });
            }
            c = c.max(hi).max(1.0 / lo);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bergman_metric;

    #[test]
    fn log_weight_hessian_is_a_multiple_of_the_metric() {
        let z = BallPoint::from_parts(&[(0.3, 0.1), (-0.2, 0.4)]).unwrap();
        let w = Weight::log_family(3.0).unwrap();
        let diff =
            w.hessian(&z).unwrap().matrix - bergman_metric(&z).unwrap().matrix * C64::new(1.0, 0.0);
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let z = BallPoint::from_parts(&[(0.3, 0.1)]).unwrap();
        let w = Weight::log_family(2.5).unwrap().with_quadratic(0.4);
        let h = 1e-4;
        let f = |x: f64, y: f64| w.value(&[z[0] + C64::new(x, y)]).unwrap();
        let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        assert!((lap / 4.0 - w.hessian(&z).unwrap().matrix[(0, 0)].re).abs() < 1e-5);
    }

    #[test]
    fn comparability_of_the_log_family() {
        let pts = [
            BallPoint::origin(2),
            BallPoint::from_parts(&[(0.5, 0.0), (0.0, 0.3)]).unwrap(),
        ];
        let c = Weight::log_family(6.0)
            .unwrap()
            .comparability(&pts)
            .unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        let bad = Weight::log_family(1.0).unwrap().with_quadratic(-10.0);
        assert!(matches!(
            bad.comparability(&pts),
            Err(Error::IndefiniteWeight { .. })
        ));
    }
}
