//! The kernel `Γ_r`, the singular function
//! `s_r(z) = log|T(z)|^2 − (1/V_n(r)) ∫_{E(z,r)} log|T|^2 ω_B^n`, and its
//! regularization `s_{r,ε}`.
//!
//! `s_r` is available in two independent forms: the potential form, from
//! Jensen's formula on complex lines through `z` (see
//! [`crate::density::averaged_potential`]), and the Green form
//! `2π ∫_{W ∩ E(z,r)} Γ_r(z, ζ) ω_B^{n−1}(ζ)` over a patch of `W`.
//! With `dd^c = i∂∂̄` one has `dd^c s_r = 2π[W] − Υ_r`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{jensen_deficit, AverageOptions};
use crate::error::{Error, Result};
use crate::geometry::{
    ball_volume, bergman_metric, green, green_constant, green_profile, inner, pseudo_distance_raw,
    quad_ball, quad_ball_point_singular, BallPoint, HermitianForm, MobiusMap, QuadOptions,
    QuadratureRule, RuleKind,
};
use crate::hypersurface::{dist_to_w, patch_sample, zeros_1d, HypersurfaceSample, PatchOptions};
use crate::numeric::{pairwise_sum, GaussRule};
use crate::poly::DefiningFunction;
use crate::C64;

/// Pseudo-distances below this are treated as hitting the pole of `Γ_r`.
pub const POLE_RADIUS: f64 = 1e-6;

/// Points closer than this to `W` get `s_r = −∞`.
pub const SINGULAR_DISTANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PotentialForm,
    GreenForm,
}

/// One evaluation of `s_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub z: BallPoint,
    pub r: f64,
    pub s_r_value: f64,
    pub method: Method,
    /// Difference to the same formula on a coarser rule.
    pub est_error: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in (0, 1), got {r}"
        )));
    }
    Ok(())
}

/// `Γ_r` as a function of `a^2 = |F_z(ζ)|^2`:
/// `f(a^2) − f(r^2) + (n+1) log((1−a^2)/(1−r^2)) / V_n(r)` for `a < r`, else 0.
fn gamma_profile(n: usize, a2: f64, r: f64) -> f64 {
    let r2 = r * r;
    if a2 >= r2 {
        return 0.0;
    }
    let v = ball_volume_unchecked(n, r);
    green_profile(n, a2) - green_profile(n, r2)
        + (n as f64 + 1.0) * ((1.0 - a2) / (1.0 - r2)).ln() / v
}

fn ball_volume_unchecked(n: usize, r: f64) -> f64 {
    (2.0 * PI * (n as f64 + 1.0) * r * r / (1.0 - r * r)).powi(n as i32)
}

/// `Γ_r(z, ζ) = G_B(z, ζ) − (1/V_n(r)) ∫_{E(z,r)} G_B(·, ζ) ω_B^n`, in closed form.
///
/// Spherical means of `G_B(·, ζ)` about `z` equal `f(max(ρ, a)^2)` with
/// `a = |F_z(ζ)|`, which reduces the ball mean to a radial integral. The
/// result is `≤ 0` and vanishes for `a ≥ r`.
pub fn gamma_r_kernel(z: &BallPoint, zeta: &BallPoint, r: f64) -> Result<f64> {
    check_radius(r)?;
    if z.dim() != zeta.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            got: zeta.dim(),
        });
    }
    for p in [z, zeta] {
        if !(p.norm_sqr() < 1.0) {
            return Err(Error::OutsideBall {
                norm_sq: p.norm_sqr(),
            });
        }
    }
    let a = pseudo_distance_raw(z.coords(), zeta.coords());
    if a < POLE_RADIUS {
        return Err(Error::Pole { distance: a });
    }
    Ok(gamma_profile(z.dim(), a * a, r))
}

/// [`gamma_r_kernel`] by direct quadrature of the `E(z,r)` mean of the Green
/// function, with the pole of `G_B(·, ζ)` handled by clustered panels.
pub fn gamma_r_kernel_quadrature(
    z: &BallPoint,
    zeta: &BallPoint,
    r: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    check_radius(r)?;
    let g0 = green(z, zeta)?;
    let g = |w: &BallPoint| green(w, zeta).unwrap_or(f64::NEG_INFINITY);
    let integral = match opts.kind {
        RuleKind::MonteCarlo => quad_ball(g, z, &QuadratureRule::bergman_ball(z.dim(), r, opts)?)?,
        RuleKind::Product => quad_ball_point_singular(g, z, r, zeta, opts)?,
    };
    Ok(g0 - integral / ball_volume(z.dim(), r)?)
}

/// Complex Hessian `∂²Γ_r(z, ζ)/∂z_i∂z̄_j` in `z`, for `z ≠ ζ`.
///
/// With `L = log(1 − |F_z(ζ)|^2) = log(1−|z|^2) + log(1−|ζ|^2) − log|1 − ⟨z,ζ⟩|^2`
/// one has `i∂∂̄L = −ω_B/(n+1)`, and `Γ_r` is a function of `L` alone.
pub fn gamma_r_hessian(z: &BallPoint, zeta: &BallPoint, r: f64) -> Result<HermitianForm> {
    let n = z.dim();
    let a = pseudo_distance_raw(z.coords(), zeta.coords());
    if a < POLE_RADIUS {
        return Err(Error::Pole { distance: a });
    }
    check_radius(r)?;
    if a >= r {
        return Ok(HermitianForm::zeros(n));
    }
    let x = 1.0 - a * a;
    let t = a * a;
    let cn = green_constant(n);
    let nf = n as f64;
    let ratio = (x / t).powi(n as i32);
    let d1 = -cn * ratio + (nf + 1.0) / ball_volume_unchecked(n, r);
    let d2 = -nf * cn * ratio / t;
    let s = z.norm_sqr();
    let pair = inner(z.coords(), zeta.coords());
    let one = C64::new(1.0, 0.0);
    let dl: Vec<C64> = (0..n)
        .map(|i| -z[i].conj() / (1.0 - s) + zeta[i].conj() / (one - pair))
        .collect();
    let metric = bergman_metric(z)?;
    let m = DMatrix::from_fn(n, n, |i, j| {
        dl[i] * dl[j].conj() * d2 - metric.matrix[(i, j)] * (d1 / (nf + 1.0))
    });
    Ok(HermitianForm::hermitian_part(m))
}

/// Near-`W` screen: `None` when `z` is farther than [`SINGULAR_DISTANCE`]
/// from `W`, otherwise the distance.
fn near_zero_set(t: &(impl DefiningFunction + ?Sized), z: &BallPoint) -> Result<Option<f64>> {
    let val = t.value(z.coords()).norm();
    let grad = t
        .gradient(z.coords())
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    // |T| / |∇T| bounds the Euclidean distance to first order; screen generously
    if grad > 0.0 && val > 1e-3 * grad {
        return Ok(None);
    }
    let d = dist_to_w(z, t, None)?;
    Ok((d.distance < SINGULAR_DISTANCE).then_some(d.distance))
}

/// `s_r(z)` in potential form.
///
/// Computed as minus the line mean of the per-zero excess over `log|λ|^2`, so
/// it is exactly `0` when no zero of `T` lies in `E(z,r)` and never suffers
/// cancellation between `log|T(z)|^2` and the average. Returns `−∞` within
/// [`SINGULAR_DISTANCE`] of `W`.
pub fn s_r_potential(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<PotentialSample> {
    check_radius(r)?;
    if near_zero_set(t, z)?.is_some() {
        return Ok(PotentialSample {
            z: z.clone(),
            r,
            s_r_value: f64::NEG_INFINITY,
            method: Method::PotentialForm,
            est_error: 0.0,
        });
    }
    let n = t.dim();
    let value = jensen_deficit(t, z, r, &opts.rule(n))?;
    let est_error = if n == 1 {
        0.0
    } else {
        let coarse = AverageOptions {
            lines: (opts.lines / 2).max(4),
            polar: (opts.polar / 2).max(4),
            ..opts.clone()
        };
        (jensen_deficit(t, z, r, &coarse.rule(n))? - value).abs()
    };
    Ok(PotentialSample {
        z: z.clone(),
        r,
        s_r_value: value.min(0.0),
        method: Method::PotentialForm,
        est_error,
    })
}

/// `2π Σ_i w_i Γ_r(z, ζ_i)` over the sample points inside `E(z,r)`.
pub fn s_r_green_with_sample(sample: &HypersurfaceSample, z: &BallPoint, r: f64) -> Result<f64> {
    check_radius(r)?;
    let mut terms = Vec::new();
    for (p, w) in sample.points.iter().zip(&sample.area_weights) {
        terms.push(w * gamma_r_kernel(z, p, r)?);
    }
    Ok(TAU * pairwise_sum(&terms))
}

/// `s_r(z)` in Green form, over a patch of `W ∩ E(z,r)` clustered at the
/// nearest point of `W`.
///
/// Fails with [`Error::Coverage`] when the patch is empty although `W`
/// meets `E(z,r)`.
pub fn s_r_green(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &PatchOptions,
) -> Result<PotentialSample> {
    check_radius(r)?;
    let sample = patch_sample(t, z, r, opts)?;
    if sample.is_empty() {
        let d = dist_to_w(z, t, None)?;
        if d.distance < r {
            return Err(Error::Coverage(format!(
                "no samples of W in E(z, {r}) although W is at pseudo-distance {}",
                d.distance
            )));
        }
        return Ok(PotentialSample {
            z: z.clone(),
            r,
            s_r_value: 0.0,
            method: Method::GreenForm,
            est_error: 0.0,
        });
    }
    let value = s_r_green_with_sample(&sample, z, r)?;
    let est_error = if t.dim() == 1 {
        0.0
    } else {
        let coarse = PatchOptions {
            angular: (opts.angular / 2).max(8),
            panel_nodes: (opts.panel_nodes / 2).max(4),
        };
        (s_r_green_with_sample(&patch_sample(t, z, r, &coarse)?, z, r)? - value).abs()
    };
    Ok(PotentialSample {
        z: z.clone(),
        r,
        s_r_value: value,
        method: Method::GreenForm,
        est_error,
    })
}

/// `Υ_r(z) = −i∂∂̄ s_r(z)` off `W`, from the Green form: minus `2π` times the
/// patch integral of [`gamma_r_hessian`].
pub fn upsilon_green(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &PatchOptions,
) -> Result<HermitianForm> {
    check_radius(r)?;
    let n = t.dim();
    let sample = patch_sample(t, z, r, opts)?;
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for (p, w) in sample.points.iter().zip(&sample.area_weights) {
        acc += gamma_r_hessian(z, p, r)?.matrix * C64::new(-TAU * w, 0.0);
    }
    Ok(HermitianForm::hermitian_part(acc))
}

/// Quadrature for the regularization `s_{r,ε}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothOptions {
    pub average: AverageOptions,
    /// Product rule for the `E(z,ε)` mean of the smooth part.
    pub radial: usize,
    pub angular: usize,
}

impl SmoothOptions {
    pub fn for_dim(n: usize) -> Self {
        let (radial, angular) = if n == 1 { (8, 12) } else { (3, 4) };
        Self {
            average: AverageOptions::default(),
            radial,
            angular,
        }
    }
}

/// `s_{r,ε}(z) = (1/V_n(ε)) ∫_{E(z,ε)} s_r ω_B^n`.
///
/// Split as `s_r = log|T|^2 − A_r` with `A_r` the `E(·,r)` mean of
/// `log|T|^2`: the mean of the singular part `log|T|^2` over `E(z,ε)` is
/// `A_ε(z)`, exact by the line construction, and only the mean of the smooth
/// `A_r` uses a product rule.
pub fn s_r_smooth(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    eps: f64,
    opts: &SmoothOptions,
) -> Result<f64> {
    check_radius(r)?;
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 0.2], got {eps}"
        )));
    }
    let n = t.dim();
    let rule = opts.average.rule(n);
    // A_ε(z) − A_r(w) = (log|T(z)|^2 − A_r(w)) − (log|T(z)|^2 − A_ε(z)); use deficits
    // D_ρ(w) = log|T(w)|^2 − A_ρ(w) and log|T(w)|^2 − log|T(z)|^2 from the values.
    let log_tz = t.log_modulus_sq(z.coords());
    let deficit_eps = jensen_deficit(t, z, eps, &rule)?;
    let qopts = QuadOptions {
        radial: opts.radial,
        angular: opts.angular,
        ..QuadOptions::for_dim(n)
    };
    let ball = QuadratureRule::bergman_ball(n, eps, &qopts)?;
    let map = MobiusMap::new(z.clone());
    let vals: Vec<Result<f64>> = ball
        .nodes
        .par_iter()
        .zip(ball.weights.par_iter())
        .map(|(zeta, w)| {
            let p = BallPoint::new_unchecked(map.apply_raw(zeta.coords()));
            let smooth = t.log_modulus_sq(p.coords()) - jensen_deficit(t, &p, r, &rule)?;
            Ok(w * smooth)
        })
        .collect();
    let mut terms = Vec::with_capacity(vals.len());
    for v in vals {
        terms.push(v?);
    }
    let mean_ar = pairwise_sum(&terms) / ball_volume(n, eps)?;
    let a_eps = log_tz - deficit_eps;
    Ok((a_eps - mean_ar).min(0.0))
}

/// `C_r` fitted as the largest `log ε^2 − s_{r,ε}` over a calibration set of
/// `(ε, s_{r,ε})` pairs, so that `log ε^2 − C_r ≤ s_{r,ε}` holds on it.
pub fn fit_log_bound(calibration: &[(f64, f64)]) -> f64 {
    calibration
        .iter()
        .map(|&(eps, s)| (eps * eps).ln() - s)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Flux of `d^c s_r` through a circle in the disk, against `2π × (zeros
/// inside) − ∫ Υ_r` over the enclosed disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourReport {
    /// `∮ d^c s_r = ½ ∮ ∂_ν s_r ds`.
    pub flux: f64,
    pub zeros_inside: usize,
    /// `∫_D Υ_r` as a 2-form, i.e. `∫_D 2 Υ_11 dx dy`.
    pub upsilon_mass: f64,
}

impl ContourReport {
    /// `flux − (2π · zeros − Υ mass)`.
    pub fn defect(&self) -> f64 {
        self.flux - (TAU * self.zeros_inside as f64 - self.upsilon_mass)
    }
}

/// Check `dd^c s_r = 2π[W] − Υ_r` on the disk `|ζ − center| < radius` in
/// dimension one.
///
/// The flux uses centered differences of [`s_r_potential`] across the circle
/// and the enclosed mass of `Υ_r` uses a polar Gauss rule with
/// [`crate::density::upsilon`].
pub fn contour_check(
    t: &(impl DefiningFunction + ?Sized),
    center: C64,
    radius: f64,
    r: f64,
    nodes: usize,
    opts: &AverageOptions,
) -> Result<ContourReport> {
    if t.dim() != 1 {
        return Err(Error::InvalidParameter(
            "the contour check is one-dimensional".into(),
        ));
    }
    if !(center.norm() + radius < 1.0) || radius <= 0.0 {
        return Err(Error::InvalidParameter(
            "the contour must lie inside the disk".into(),
        ));
    }
    let s = |p: C64| -> Result<f64> {
        Ok(s_r_potential(t, &BallPoint::new_unchecked(vec![p]), r, opts)?.s_r_value)
    };
    let h = 1e-4 * radius.max(1e-2);
    let m = nodes.max(8);
    let mut flux_terms = Vec::with_capacity(m);
    for k in 0..m {
        let th = TAU * (k as f64 + 0.5) / m as f64;
        let dir = C64::from_polar(1.0, th);
        let outer = s(center + dir * (radius + h))?;
        let inner_v = s(center + dir * (radius - h))?;
        flux_terms.push(0.5 * (outer - inner_v) / (2.0 * h) * radius * TAU / m as f64);
    }
    let flux = pairwise_sum(&flux_terms);
    let zeros_inside = zeros_1d(t, 1.0)
        .iter()
        .filter(|a| (**a - center).norm() < radius)
        .count();
    let radial = GaussRule::legendre(nodes.max(8));
    let angles: Vec<f64> = (0..m).map(|k| TAU * (k as f64 + 0.5) / m as f64).collect();
    let mut mass_terms = Vec::new();
    for (rho, wr) in radial.on_interval(0.0, radius) {
        for &th in &angles {
            let p = BallPoint::new_unchecked(vec![center + C64::from_polar(rho, th)]);
            let u = crate::density::upsilon(t, &p, r, opts)?;
            mass_terms.push(2.0 * u.matrix[(0, 0)].re * rho * wr * TAU / m as f64);
        }
    }
    Ok(ContourReport {
        flux,
        zeros_inside,
        upsilon_mass: pairwise_sum(&mass_terms),
    })
}
