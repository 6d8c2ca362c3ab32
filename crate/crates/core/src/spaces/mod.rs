//! Truncated weighted Bergman spaces: polynomials of degree `≤ d` with the
//! norm `∫_B |F|^2 e^{−κ} ω_B^n`, their restriction to a hypersurface sample,
//! sampling constants, least-norm extension, holomorphic flattening in the
//! disk and tube restriction ratios.
//!
//! Coefficient vectors `c` are taken against the monomial basis, and Gram
//! matrices `Q` are stored so that `‖Σ c_α z^α‖^2 = c† Q c`, i.e.
//! `Q_{αβ} = ⟨z^β, z^α⟩ = ∫ conj(z^α) z^β`.

mod flattening;
mod lattice;
mod restriction;
mod tube;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{Perturbation, Weight};
use crate::error::{Error, Result};
use crate::geometry::volume_prefactor;
use crate::numeric::{periodic_nodes, GaussRule};
use crate::C64;

pub use flattening::{holomorphic_flattening, FlatteningOptions, FlatteningResult};
pub use lattice::{
    lattice_density, lattice_points, lattice_sample, seip_sweep, SeipOptions, SeipRow,
};
pub use restriction::{
    extension_constant, least_norm_extension, restriction, sampling_constants, Extension,
    RestrictionData, SPECTRAL_CUTOFF,
};
pub use tube::{restriction_inequality_check, TubeOptions, TubeReport};

/// Quadrature used for Gram matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceQuadrature {
    /// Gauss–Jacobi nodes in `t = |z|^2`.
    pub radial: usize,
    /// Gauss nodes per simplex coordinate of `(|z_1|^2, …, |z_n|^2) / t`.
    pub simplex: usize,
    /// Periodic nodes per angle; only used for non-radial weights.
    pub angular: usize,
}

impl Default for SpaceQuadrature {
    fn default() -> Self {
        Self {
            radial: 40,
            simplex: 16,
            angular: 32,
        }
    }
}

impl SpaceQuadrature {
    pub fn doubled(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            simplex: 2 * self.simplex,
            angular: 2 * self.angular,
        }
    }
}

/// Polynomials of degree `≤ max_degree` in `n` variables with the weighted
/// Bergman inner product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedSpace {
    pub n: usize,
    pub max_degree: u32,
    /// Multi-indices, graded by total degree.
    pub basis: Vec<Vec<u32>>,
    pub gram_ball: DMatrix<C64>,
    pub weight: Weight,
    /// `gram_ball^{-1}`.
    pub gram_inverse: DMatrix<C64>,
}

/// Multi-indices with `|α| ≤ d`, by degree and then lexicographically descending.
pub fn multi_indices(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, n: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            fill(prefix, n, left - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d {
        fill(&mut Vec::with_capacity(n), n, deg, &mut out);
    }
    out
}

fn factorial(k: u32) -> f64 {
    (2..=k).map(f64::from).product()
}

/// `∫_0^1 g(t) (1−t)^alpha dt` by Gauss–Jacobi: nodes in `t` and weights.
fn jacobi_in_t(m: usize, alpha: f64) -> Vec<(f64, f64)> {
    let rule = GaussRule::jacobi(m, alpha, 0.0);
    let scale = 0.5f64.powf(alpha + 1.0);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| (0.5 * (1.0 + x), w * scale))
        .collect()
}

/// Conical product rule on the simplex `{u ∈ [0,1]^n : Σ u = 1}`, as points
/// `u` and weights for the `(n−1)`-dimensional Lebesgue measure of the
/// projection to the first `n − 1` coordinates.
fn simplex_rule(n: usize, m: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0, 1.0)];
    let gauss: Vec<(f64, f64)> = GaussRule::legendre(m).on_interval(0.0, 1.0).collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(out.len() * m);
        for (u, w, rest) in &out {
            for &(v, wv) in &gauss {
                let mut u2: Vec<f64> = u.clone();
                u2.push(rest * v);
                next.push((u2, w * wv * rest, rest * (1.0 - v)));
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(mut u, w, rest)| {
            u.push(rest);
            (u, w)
        })
        .collect()
}

impl TruncatedSpace {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Monomial evaluations `(z^α)_α` in basis order.
    pub fn monomials(&self, z: &[C64]) -> Vec<C64> {
        monomials(&self.basis, self.max_degree, z)
    }

    /// `F(z)` for coefficients `c`.
    pub fn evaluate(&self, c: &[C64], z: &[C64]) -> C64 {
        self.monomials(z).iter().zip(c).map(|(m, c)| m * c).sum()
    }

    /// `c† gram_ball c`.
    pub fn norm_sq(&self, c: &[C64]) -> f64 {
        quadratic(&self.gram_ball, c)
    }

    /// Reproducing kernel `K(z, w)` of the truncated space.
    pub fn kernel(&self, z: &[C64], w: &[C64]) -> C64 {
        let a = self.monomials(z);
        let b: Vec<C64> = self.monomials(w).iter().map(|c| c.conj()).collect();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..a.len() {
            for j in 0..b.len() {
                acc += a[i] * self.gram_inverse[(i, j)] * b[j];
            }
        }
        acc
    }
}

pub(crate) fn monomials(basis: &[Vec<u32>], d: u32, z: &[C64]) -> Vec<C64> {
    let powers: Vec<Vec<C64>> = z
        .iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(d as usize + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=d {
                p.push(acc);
                acc *= x;
            }
            p
        })
        .collect();
    basis
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .enumerate()
                .map(|(i, &k)| powers[i][k as usize])
                .product()
        })
        .collect()
}

pub(crate) fn quadratic(q: &DMatrix<C64>, c: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..c.len() {
        for j in 0..c.len() {
            acc += c[i].conj() * q[(i, j)] * c[j];
        }
    }
    acc.re
}

/// Effective exponent `sβ` of `(1 − |z|^2)` in `e^{−κ}`.
fn log_exponent(weight: &Weight) -> f64 {
    weight.scale * weight.beta
}

/// Build the truncated space of degree `d` for the weight `κ`.
///
/// Radial weights (the log family, optionally with a `c|z|^2` term) give a
/// diagonal Gram matrix; its entries are `c_n π^n α!/(|α|+n−1)! ∫_0^1
/// t^{|α|+n−1} e^{−κ(t)} (1−t)^{−n−1} dt`. Other weights use a full product
/// rule in `(t, simplex, angles)`.
pub fn build_space(
    n: usize,
    d: u32,
    weight: &Weight,
    quadrature: &SpaceQuadrature,
) -> Result<TruncatedSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let exponent = log_exponent(weight);
    if !(exponent > n as f64) || weight.scale <= 0.0 {
        return Err(Error::NotIntegrable { beta: exponent, n });
    }
    let basis = multi_indices(n, d);
    let alpha = exponent - n as f64 - 1.0;
    let radial = jacobi_in_t(quadrature.radial.max(2), alpha);
    let cn = volume_prefactor(n);
    let pi_n = std::f64::consts::PI.powi(n as i32);
    let gram = match weight.perturbation {
        Perturbation::None | Perturbation::Quadratic { .. } => {
            let c = match weight.perturbation {
                Perturbation::Quadratic { c } => c * weight.scale,
                _ => 0.0,
            };
            let diag: Vec<f64> = basis
                .iter()
                .map(|a| {
                    let k: u32 = a.iter().sum();
                    let afact: f64 = a.iter().map(|&x| factorial(x)).product();
                    let p = k as i32 + n as i32 - 1;
                    let terms: Vec<f64> = radial
                        .iter()
                        .map(|&(t, w)| w * t.powi(p) * (-c * t).exp())
                        .collect();
                    cn * pi_n * afact / factorial(k + n as u32 - 1)
                        * crate::numeric::pairwise_sum(&terms)
                })
                .collect();
            DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        }
        Perturbation::Pluriharmonic { .. } => {
            product_gram(n, d, &basis, weight, exponent, &radial, quadrature)?
        }
    };
    let gram_inverse = invert_gram(&gram)?;
    Ok(TruncatedSpace {
        n,
        max_degree: d,
        basis,
        gram_ball: gram,
        weight: weight.clone(),
        gram_inverse,
    })
}

fn invert_gram(gram: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("ball Gram matrix is not positive definite".into()))?;
    Ok(chol.inverse())
}

fn product_gram(
    n: usize,
    d: u32,
    basis: &[Vec<u32>],
    weight: &Weight,
    exponent: f64,
    radial: &[(f64, f64)],
    quadrature: &SpaceQuadrature,
) -> Result<DMatrix<C64>> {
    let simplex = simplex_rule(n, quadrature.simplex.max(1));
    let angles = periodic_nodes(quadrature.angular.max(1));
    let m = angles.len();
    let angle_weight = (std::f64::consts::TAU / m as f64).powi(n as i32);
    let prefactor = volume_prefactor(n) * 0.5f64.powi(n as i32);
    let combos = m.pow(n as u32);
    let size = basis.len();
    let blocks: Vec<Result<DMatrix<C64>>> = radial
        .par_iter()
        .map(|&(t, wt)| {
            let mut acc = DMatrix::<C64>::zeros(size, size);
            for (u, wu) in &simplex {
                for idx in 0..combos {
                    let mut rest = idx;
                    let z: Vec<C64> = (0..n)
                        .map(|j| {
                            let a = angles[rest % m];
                            rest /= m;
                            C64::from_polar((t * u[j]).sqrt(), a)
                        })
                        .collect();
                    let kappa = weight.value(&z)?;
                    // e^{−κ} with the (1 − t)^{sβ} part absorbed into the Jacobi weight
                    let extra = (-kappa - exponent * (-t).ln_1p()).exp();
                    let w = wt * t.powi(n as i32 - 1) * wu * angle_weight * prefactor * extra;
                    let v = monomials(basis, d, &z);
                    for i in 0..size {
                        let ci = v[i].conj() * w;
                        for j in 0..size {
                            acc[(i, j)] += ci * v[j];
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut gram = DMatrix::<C64>::zeros(size, size);
    for b in blocks {
        gram += b?;
    }
    Ok((&gram + gram.adjoint()) * C64::new(0.5, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 4).len(), 5);
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(
            multi_indices(2, 1),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
    }

    #[test]
    fn simplex_rule_integrates_polynomials() {
        for n in 1..=3 {
            let rule = simplex_rule(n, 6);
            let vol: f64 = rule.iter().map(|(_, w)| w).sum();
            assert!(
                (vol - 1.0 / factorial(n as u32 - 1)).abs() < 1e-13,
                "{n}: {vol}"
            );
            // ∫ u_1 u_n over the simplex = 1/(n+1)! for n ≥ 2
            if n >= 2 {
                let m: f64 = rule.iter().map(|(u, w)| w * u[0] * u[n - 1]).sum();
                assert!((m - 1.0 / factorial(n as u32 + 1)).abs() < 1e-13);
            }
        }
    }
}
