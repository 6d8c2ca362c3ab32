use std::fmt;
use std::ops::Index;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the unit ball in `C^n`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    coords: Vec<C64>,
}

impl BallPoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq < 1.0) {
            return Err(Error::OutsideBall { norm_sq });
        }
        Ok(Self { coords })
    }

    /// Build a point without the `|z| < 1` check. Callers must guarantee it.
    pub fn new_unchecked(coords: Vec<C64>) -> Self {
        Self { coords }
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_parts(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(parts.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<C64> {
        self.coords
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian product `⟨self, other⟩ = Σ self_i conj(other_i)`.
    pub fn inner(&self, other: &BallPoint) -> C64 {
        inner(&self.coords, &other.coords)
    }

    pub fn parts(&self) -> Vec<(f64, f64)> {
        self.coords.iter().map(|c| (c.re, c.im)).collect()
    }
}

impl Index<usize> for BallPoint {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.coords[i]
    }
}

impl fmt::Debug for BallPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter()).finish()
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub(crate) fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum()
}
