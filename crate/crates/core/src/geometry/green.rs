use std::f64::consts::PI;

use super::mobius::pseudo_distance_raw;
use super::point::BallPoint;
use crate::error::{Error, Result};

/// `C_n = (2π)^{−n} (n+1)^{−(n−1)}`.
pub fn green_constant(n: usize) -> f64 {
    (2.0 * PI).powi(-(n as i32)) * (n as f64 + 1.0).powi(1 - n as i32)
}

/// `I_n(W) = ∫_0^W w^{n−1} / (1 + w) dw` for `W ≥ 0`.
///
/// Uses the power series for small `W` and the exact polynomial-division
/// antiderivative otherwise.
pub fn log_tail(n: usize, w: f64) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    if w <= 0.0 {
        return 0.0;
    }
    if n == 1 {
        return w.ln_1p();
    }
    if w < 0.5 {
        // Σ_j (−1)^j W^{n+j} / (n+j)
        let mut term = w.powi(n as i32);
        let mut sum = 0.0;
        let mut j = 0usize;
        loop {
            let add = term / (n + j) as f64;
            if j % 2 == 0 {
                sum += add;
            } else {
                sum -= add;
            }
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= w;
            j += 1;
        }
        return sum;
    }
    // w^{n−1}/(1+w) = Σ_{k=0}^{n−2} (−1)^{n−2−k} w^k + (−1)^{n−1}/(1+w)
    let mut sum = 0.0;
    let mut pow = w;
    for k in 0..=(n - 2) {
        let sign = if (n - 2 - k) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * pow / (k + 1) as f64;
        pow *= w;
    }
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    sum + sign * w.ln_1p()
}

/// Radial profile `f(t) = −C_n ∫_t^1 (1−u)^{n−1} / u^n du` of the Green
/// function, for `t = |z|^2 ∈ (0, 1]`. Equals `−C_n I_n((1−t)/t)`.
pub fn green_profile(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if t >= 1.0 {
        return 0.0;
    }
    if n == 1 {
        return t.ln() / (2.0 * PI);
    }
    -green_constant(n) * log_tail(n, (1.0 - t) / t)
}

/// Green function with pole at the origin, `γ_B(z) = f(|z|^2)`.
pub fn green_gamma(z: &BallPoint) -> Result<f64> {
    let s = z.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::OutsideBall { norm_sq: s });
    }
    if s == 0.0 {
        return Err(Error::Pole { distance: 0.0 });
    }
    Ok(green_profile(z.dim(), s))
}

/// `G(z, a) = γ_B(F_a(z))`.
pub fn green(z: &BallPoint, a: &BallPoint) -> Result<f64> {
    if z.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: z.dim(),
        });
    }
    for p in [z, a] {
        let s = p.norm_sqr();
        if !(s < 1.0) {
            return Err(Error::OutsideBall { norm_sq: s });
        }
    }
    let d = pseudo_distance_raw(a.coords(), z.coords());
    if d == 0.0 {
        return Err(Error::Pole { distance: 0.0 });
    }
    Ok(green_profile(z.dim(), d * d))
}
