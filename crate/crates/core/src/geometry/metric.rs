use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::point::BallPoint;
use crate::error::{Error, Result};

/// Coefficient matrix `H_ij` of a real (1,1)-form `i Σ H_ij dz_i ∧ dz̄_j`.
///
/// The form evaluated on a vector `v` is `H(v, v̄) = Σ H_ij v_i v̄_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm {
    pub matrix: DMatrix<C64>,
}

impl HermitianForm {
    /// Wrap a matrix, replacing it by its Hermitian part. Fails if the input
    /// is not Hermitian to `1e-12` relative to its size.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidParameter("form matrix must be square".into()));
        }
        let scale = matrix.norm().max(1.0);
        let skew = (&matrix - matrix.adjoint()).norm();
        if skew > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "form matrix is not Hermitian (skew {skew:e})"
            )));
        }
        Ok(Self::hermitian_part(matrix))
    }

    /// `(M + M†) / 2`, with no check.
    pub fn hermitian_part(matrix: DMatrix<C64>) -> Self {
        let h = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        Self { matrix: h }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `H(v, v̄) = Σ H_ij v_i v̄_j` (real for Hermitian `H`).
    pub fn eval(&self, v: &[C64]) -> f64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * v[i] * v[j].conj();
            }
        }
        acc.re
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(c, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// Matrix acting as `v ↦ v† A v` with the same values as [`eval`](Self::eval).
    fn as_quadratic(&self) -> DMatrix<C64> {
        self.matrix.map(|c| c.conj())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.as_quadratic().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.as_quadratic().cholesky().is_some()
    }

    /// Largest `λ` with `self(v, v̄) = λ · other(v, v̄)` and a maximizing unit
    /// vector. `other` must be positive definite.
    pub fn max_generalized_eigen(&self, other: &Self) -> Result<(f64, Vec<C64>)> {
        let (vals, vecs) = self.generalized_eigen(other)?;
        let k = vals.len() - 1;
        Ok((vals[k], vecs[k].clone()))
    }

    /// All generalized eigenpairs against a positive definite `other`,
    /// ascending; vectors are Euclidean-normalized.
    pub fn generalized_eigen(&self, other: &Self) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let chol = other.as_quadratic().cholesky().ok_or_else(|| {
            Error::LinearAlgebra("reference form is not positive definite".into())
        })?;
        let l = chol.l();
        let l_inv = l
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
        let c = &l_inv * self.as_quadratic() * l_inv.adjoint();
        let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let l_inv_adj = l_inv.adjoint();
        let mut vals = Vec::with_capacity(order.len());
        let mut vecs = Vec::with_capacity(order.len());
        for k in order {
            let y: DVector<C64> = eig.eigenvectors.column(k).into_owned();
            let v = &l_inv_adj * y;
            let norm = v.norm();
            vals.push(eig.eigenvalues[k]);
            vecs.push(v.iter().map(|c| c / norm).collect());
        }
        Ok((vals, vecs))
    }
}

/// Matrix of the Bergman metric `ω_B` at `z`:
/// `(n+1) [(1−|z|^2) δ_ij + z̄_i z_j] / (1−|z|^2)^2`.
pub fn bergman_metric(z: &BallPoint) -> Result<HermitianForm> {
    let s = z.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::OutsideBall { norm_sq: s });
    }
    let n = z.dim();
    let one_minus = 1.0 - s;
    let scale = (n as f64 + 1.0) / (one_minus * one_minus);
    let m = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { one_minus } else { 0.0 };
        (C64::new(delta, 0.0) + z[i].conj() * z[j]) * scale
    });
    Ok(HermitianForm { matrix: m })
}

/// `(n+1)^n 2^n n!`, the Lebesgue density of `ω_B^n` at the origin.
pub fn volume_prefactor(n: usize) -> f64 {
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    ((n as f64 + 1.0) * 2.0).powi(n as i32) * fact
}

/// Density of `ω_B^n` against Lebesgue measure on `R^{2n}`.
pub fn volume_density(z: &BallPoint) -> Result<f64> {
    let s = z.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::OutsideBall { norm_sq: s });
    }
    Ok(volume_density_raw(z.dim(), s))
}

pub(crate) fn volume_density_raw(n: usize, norm_sq: f64) -> f64 {
    volume_prefactor(n) * (1.0 - norm_sq).powi(-(n as i32 + 1))
}

/// `V_n(r) = ∫_{B(0,r)} ω_B^n = (2π (n+1) r^2 / (1−r^2))^n`.
///
/// The radial integral `∫_0^{r^2} t^{n−1} (1−t)^{−n−1} dt` becomes
/// `W^n / n` after the substitution `w = t / (1 − t)`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in [0, 1), got {r}"
        )));
    }
    Ok(ball_volume_raw(n, r))
}

pub(crate) fn ball_volume_raw(n: usize, r: f64) -> f64 {
    let r2 = r * r;
    (2.0 * PI * (n as f64 + 1.0) * r2 / (1.0 - r2)).powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_at_origin_and_on_axis() {
        let m = bergman_metric(&BallPoint::origin(2)).unwrap();
        assert!(
            (m.matrix.clone() - DMatrix::<C64>::identity(2, 2) * C64::new(3.0, 0.0)).norm() < 1e-15
        );
        let m1 = bergman_metric(&BallPoint::from_parts(&[(0.5, 0.0)]).unwrap()).unwrap();
        assert!((m1.matrix[(0, 0)].re - 32.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn volume_constants() {
        assert_eq!(volume_prefactor(1), 4.0);
        assert_eq!(volume_prefactor(2), 72.0);
        assert!((ball_volume(1, 0.5).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        assert_eq!(ball_volume(3, 0.0).unwrap(), 0.0);
        assert!(ball_volume(1, 1.0).is_err());
    }

    #[test]
    fn generalized_eigen_of_scaled_identity() {
        let a = HermitianForm::identity(2).scaled(3.0);
        let b = HermitianForm::identity(2).scaled(2.0);
        let (lam, v) = a.max_generalized_eigen(&b).unwrap();
        assert!((lam - 1.5).abs() < 1e-14);
        assert!((a.eval(&v) / b.eval(&v) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn generalized_eigen_matches_rayleigh_for_complex_forms() {
        let a = HermitianForm::new(DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.3, 0.7),
                C64::new(0.3, -0.7),
                C64::new(1.0, 0.0),
            ],
        ))
        .unwrap();
        let b =
            bergman_metric(&BallPoint::from_parts(&[(0.2, 0.1), (-0.3, 0.4)]).unwrap()).unwrap();
        let (vals, vecs) = a.generalized_eigen(&b).unwrap();
        for (lam, v) in vals.iter().zip(&vecs) {
            assert!((a.eval(v) / b.eval(v) - lam).abs() < 1e-12);
        }
    }
}
