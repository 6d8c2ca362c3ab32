use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::point::{inner, norm_sqr, BallPoint};
use crate::error::{Error, Result};

/// The involutive automorphism `F_a` of the ball exchanging `0` and `a`:
///
/// `F_a(z) = (a − P_a z − s_a Q_a z) / (1 − ⟨z, a⟩)`, with `F_0(z) = −z`.
#[derive(Debug, Clone)]
pub struct MobiusMap {
    a: BallPoint,
    s_a: f64,
    /// `a a† / |a|^2` (zero matrix when `a = 0`).
    pub p_a: DMatrix<C64>,
    /// `I − P_a`.
    pub q_a: DMatrix<C64>,
    norm_sq: f64,
}

impl MobiusMap {
    pub fn new(a: BallPoint) -> Self {
        let n = a.dim();
        let norm_sq = a.norm_sqr();
        let s_a = (1.0 - norm_sq).sqrt();
        let p_a = if norm_sq > 0.0 {
            DMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj() / norm_sq)
        } else {
            DMatrix::zeros(n, n)
        };
        let q_a = DMatrix::identity(n, n) - &p_a;
        Self {
            a,
            s_a,
            p_a,
            q_a,
            norm_sq,
        }
    }

    pub fn center(&self) -> &BallPoint {
        &self.a
    }

    pub fn s_a(&self) -> f64 {
        self.s_a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `F_a(z)`, rejecting points outside the ball.
    pub fn apply(&self, z: &BallPoint) -> Result<BallPoint> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        let norm_sq = z.norm_sqr();
        if !(norm_sq < 1.0) {
            return Err(Error::OutsideBall { norm_sq });
        }
        Ok(BallPoint::new_unchecked(self.apply_raw(z.coords())))
    }

    /// `F_a(z)` on raw coordinates. Valid whenever `⟨z, a⟩ ≠ 1`; the image
    /// lies in the ball exactly when `z` does.
    pub fn apply_raw(&self, z: &[C64]) -> Vec<C64> {
        let a = self.a.coords();
        // a − P_a z − s_a Q_a z = M (a − z) since P_a a = a and Q_a a = 0.
        let diff: Vec<C64> = a.iter().zip(z).map(|(x, y)| x - y).collect();
        let denom = C64::new(1.0, 0.0) - inner(z, a);
        self.linear_part(&diff)
            .into_iter()
            .map(|c| c / denom)
            .collect()
    }

    /// `M u = P_a u + s_a Q_a u`, the linear part of the numerator.
    pub fn linear_part(&self, u: &[C64]) -> Vec<C64> {
        let a = self.a.coords();
        if self.norm_sq == 0.0 {
            return u.to_vec();
        }
        let scale = inner(u, a) / self.norm_sq;
        a.iter()
            .zip(u)
            .map(|(&ai, &ui)| {
                let pu = ai * scale;
                pu + self.s_a * (ui - pu)
            })
            .collect()
    }

    /// Holomorphic Jacobian `∂F_a/∂z` at `z`: `(F_a(z) ā^T − M) / (1 − ⟨z, a⟩)`.
    pub fn jacobian(&self, z: &[C64]) -> DMatrix<C64> {
        let n = self.dim();
        let a = self.a.coords();
        if self.norm_sq == 0.0 {
            return -DMatrix::<C64>::identity(n, n);
        }
        let fz = self.apply_raw(z);
        let denom = C64::new(1.0, 0.0) - inner(z, a);
        let m = &self.p_a + &self.q_a * C64::new(self.s_a, 0.0);
        DMatrix::from_fn(n, n, |i, j| (fz[i] * a[j].conj() - m[(i, j)]) / denom)
    }

    /// `1 − |F_a(z)|^2` through the closed-form identity, which avoids the
    /// cancellation of `1 − |F_a(z)|^2` near the boundary.
    pub fn one_minus_norm_sq(&self, z: &[C64]) -> f64 {
        let denom = (C64::new(1.0, 0.0) - inner(z, self.a.coords())).norm_sqr();
        (1.0 - norm_sqr(z)) * (1.0 - self.norm_sq) / denom
    }
}

/// Pseudohyperbolic (Bergman–Green) distance `|F_a(b)|`.
pub fn pseudo_distance(a: &BallPoint, b: &BallPoint) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    for p in [a, b] {
        let norm_sq = p.norm_sqr();
        if !(norm_sq < 1.0) {
            return Err(Error::OutsideBall { norm_sq });
        }
    }
    Ok(pseudo_distance_raw(a.coords(), b.coords()))
}

pub(crate) fn pseudo_distance_raw(a: &[C64], b: &[C64]) -> f64 {
    // |F_a(b)| = |M_a (a − b)| / |1 − ⟨b, a⟩| avoids the cancellation in
    // 1 − |F_a(b)|^2 for nearby points.
    let m = MobiusMap::new(BallPoint::new_unchecked(a.to_vec()));
    norm_sqr(&m.apply_raw(b)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(parts: &[(f64, f64)]) -> BallPoint {
        BallPoint::from_parts(parts).unwrap()
    }

    #[test]
    fn one_variable_quotient() {
        let m = MobiusMap::new(pt(&[(0.5, 0.0)]));
        let w = m.apply(&pt(&[(0.3, 0.0)])).unwrap();
        assert!((w[0].re - 0.2 / 0.85).abs() < 1e-15);
        assert!(w[0].im.abs() < 1e-15);
    }

    #[test]
    fn origin_map_is_negation() {
        let m = MobiusMap::new(BallPoint::origin(2));
        let z = pt(&[(0.1, 0.2), (-0.3, 0.4)]);
        let w = m.apply(&z).unwrap();
        assert_eq!(w.coords()[0], -z[0]);
        assert_eq!(w.coords()[1], -z[1]);
    }

    #[test]
    fn rejects_boundary_points() {
        let m = MobiusMap::new(pt(&[(0.2, 0.0)]));
        assert!(matches!(
            m.apply(&BallPoint::new_unchecked(vec![C64::new(1.0, 0.0)])),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn projectors_are_complementary() {
        let m = MobiusMap::new(pt(&[(0.2, 0.1), (0.0, -0.4), (0.3, 0.3)]));
        let p2 = &m.p_a * &m.p_a;
        assert!((p2 - &m.p_a).norm() < 1e-14);
        let sum = &m.p_a + &m.q_a;
        assert!((sum - DMatrix::<C64>::identity(3, 3)).norm() < 1e-14);
        assert!(m.s_a() > 0.0 && m.s_a() <= 1.0);
    }

    #[test]
    fn distance_to_self_is_zero_and_from_origin_is_norm() {
        let a = pt(&[(0.3, -0.2), (0.1, 0.5)]);
        assert!(pseudo_distance(&a, &a).unwrap() < 1e-15);
        let o = BallPoint::origin(2);
        assert!((pseudo_distance(&o, &a).unwrap() - a.norm()).abs() < 1e-15);
    }
}
