use serde::{Deserialize, Serialize};

use super::require_polynomial;
use crate::error::{Error, Result};
use crate::geometry::{norm_sqr, BallPoint, MobiusMap};
use crate::poly::DefiningFunction;
use crate::C64;

/// Fitted graph bound `|f(x)| ≤ C |x|^2` of `F_w(W)` over its tangent plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub c_estimate: f64,
    pub eps0: f64,
    pub probes: usize,
}

/// Map `W` by `F_w` (so `w` goes to the origin), write the image near the
/// origin as `x + f(x) ν` over the tangent plane with unit normal `ν`, and
/// return `sup |f(x)| / |x|^2` over a polar grid of `|x| ≤ eps0`.
pub fn flatness_profile(
    t: &(impl DefiningFunction + ?Sized),
    w: &BallPoint,
    eps0: f64,
) -> Result<FlatnessReport> {
    let n = t.dim();
    if w.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.dim(),
        });
    }
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps0 must lie in (0, 1), got {eps0}"
        )));
    }
    if n == 1 {
        return Ok(FlatnessReport {
            c_estimate: 0.0,
            eps0,
            probes: 0,
        });
    }
    let poly = require_polynomial(t)?;
    let resid = t.value(w.coords()).norm();
    if resid > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "base point is not on W (|T| = {resid:e})"
        )));
    }
    let map = MobiusMap::new(w.clone());
    let q = poly.pullback(&map)?;
    let zero = vec![C64::new(0.0, 0.0); n];
    let g0 = q.gradient(&zero);
    let gnorm = norm_sqr(&g0).sqrt();
    if gnorm < 1e-8 {
        return Err(Error::FlatnessViolation(
            "gradient vanishes at the base point".into(),
        ));
    }
    let nu: Vec<C64> = g0.iter().map(|c| c.conj() / gnorm).collect();
    let tangents = tangent_basis(&nu);
    let radii = 8;
    let angles = 16;
    let mut c_est = 0.0f64;
    let mut probes = 0;
    for tau in &tangents {
        for i in 1..=radii {
            let rho = eps0 * i as f64 / radii as f64;
            for j in 0..angles {
                let x: Vec<C64> = tau
                    .iter()
                    .map(|c| {
                        c * C64::from_polar(rho, std::f64::consts::TAU * j as f64 / angles as f64)
                    })
                    .collect();
                let height = solve_height(&q, &x, &nu, rho)?;
                c_est = c_est.max(height.norm() / (rho * rho));
                probes += 1;
            }
        }
    }
    Ok(FlatnessReport {
        c_estimate: c_est,
        eps0,
        probes,
    })
}

// Newton for t in Q(x + t ν) = 0, starting from t = 0.
fn solve_height(
    q: &crate::poly::DefiningPolynomial,
    x: &[C64],
    nu: &[C64],
    rho: f64,
) -> Result<C64> {
    let mut t = C64::new(0.0, 0.0);
    for _ in 0..60 {
        let p: Vec<C64> = x.iter().zip(nu).map(|(a, b)| a + t * b).collect();
        let val = q.value(&p);
        let d: C64 = q.gradient(&p).iter().zip(nu).map(|(g, v)| g * v).sum();
        if d.norm() < 1e-14 {
            return Err(Error::FlatnessViolation(format!(
                "vertical tangency at |x| = {rho}"
            )));
        }
        let step = val / d;
        t -= step;
        if t.norm() > rho.max(1e-3) * 2.0 || !t.is_finite() {
            return Err(Error::FlatnessViolation(format!(
                "graph leaves the cone at |x| = {rho}"
            )));
        }
        if step.norm() < 1e-15 {
            return Ok(t);
        }
    }
    Err(Error::FlatnessViolation(format!(
        "height equation did not converge at |x| = {rho}"
    )))
}

/// Orthonormal basis of the Hermitian complement of `nu`.
fn tangent_basis(nu: &[C64]) -> Vec<Vec<C64>> {
    let n = nu.len();
    let mut basis: Vec<Vec<C64>> = vec![nu.to_vec()];
    for j in 0..n {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[j] = C64::new(1.0, 0.0);
        for b in &basis {
            let proj: C64 = v.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = norm_sqr(&v).sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|c| c / norm).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}
