use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::average::{averaged_potential_with, AverageOptions, LineRule, UpsilonMethod};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::geometry::{bergman_metric, random_sphere_point, BallPoint, HermitianForm};
use crate::poly::DefiningFunction;
use crate::potential::upsilon_green;
use crate::C64;

/// Eigenvalues of `Υ_r` below this trigger step refinement.
pub const PSD_TOLERANCE: f64 = 1e-4;

/// Relative change of a negative eigenvalue under step halving below which
/// it is attributed to `Υ_r` itself.
pub const STEP_STABILITY: f64 = 0.05;

fn shifted(z: &BallPoint, moves: &[(usize, f64)]) -> Vec<C64> {
    let mut c = z.coords().to_vec();
    for &(a, h) in moves {
        let i = a / 2;
        if a % 2 == 0 {
            c[i] += C64::new(h, 0.0);
        } else {
            c[i] += C64::new(0.0, h);
        }
    }
    c
}

/// Complex Hessian `(∂²u/∂z_i∂z̄_j)` of a real function from the 3×3 central
/// stencil in every pair of real coordinates.
pub fn complex_hessian_fd<F>(u: F, z: &BallPoint, h: f64) -> Result<HermitianForm>
where
    F: Fn(&BallPoint) -> Result<f64> + Sync,
{
    let n = z.dim();
    let m = 2 * n;
    if !((z.norm() + 2f64.sqrt() * h) < 1.0) {
        return Err(Error::InvalidParameter(
            "difference stencil leaves the ball".into(),
        ));
    }
    // stencil: center, ±h e_a, and ±h e_a ± h e_b for a < b
    let mut stencil: Vec<Vec<(usize, f64)>> = vec![vec![]];
    for a in 0..m {
        stencil.push(vec![(a, h)]);
        stencil.push(vec![(a, -h)]);
    }
    for a in 0..m {
        for b in (a + 1)..m {
            for (sa, sb) in [(h, h), (h, -h), (-h, h), (-h, -h)] {
                stencil.push(vec![(a, sa), (b, sb)]);
            }
        }
    }
    let vals: Vec<f64> = stencil
        .par_iter()
        .map(|mv| u(&BallPoint::new_unchecked(shifted(z, mv))))
        .collect::<Result<Vec<f64>>>()?;
    let u0 = vals[0];
    let mut d2 = vec![vec![0.0; m]; m];
    for a in 0..m {
        d2[a][a] = (vals[1 + 2 * a] - 2.0 * u0 + vals[2 + 2 * a]) / (h * h);
    }
    let mut k = 1 + 2 * m;
    for a in 0..m {
        for b in (a + 1)..m {
            let v = (vals[k] - vals[k + 1] - vals[k + 2] + vals[k + 3]) / (4.0 * h * h);
            d2[a][b] = v;
            d2[b][a] = v;
            k += 4;
        }
    }
    let mat = DMatrix::from_fn(n, n, |i, j| {
        let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        C64::new(d2[xi][xj] + d2[yi][yj], d2[xi][yj] - d2[yi][xj]) * 0.25
    });
    Ok(HermitianForm::hermitian_part(mat))
}

/// A difference-quotient estimate of `Υ_r(z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpsilonEstimate {
    pub form: HermitianForm,
    /// Step that produced `form`.
    pub h: f64,
    pub min_eigenvalue: f64,
    /// The smallest eigenvalue is below `−PSD_TOLERANCE` and did not move
    /// under step halving, so it belongs to `Υ_r` rather than to the
    /// difference quotient.
    pub indefinite: bool,
}

/// The total density tensor `Υ_r(z) = i∂∂̄_z (averaged potential)`, by the
/// route selected in `opts.method`.
pub fn upsilon(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<HermitianForm> {
    Ok(upsilon_estimate(t, z, r, opts)?.form)
}

/// [`upsilon`] with its diagnostics.
///
/// On the difference-quotient route, when the smallest eigenvalue falls below `−1e−4` the step is halved. If
/// the eigenvalue then stays put (relative change below [`STEP_STABILITY`]) the
/// estimate is accepted and marked `indefinite`; if it keeps moving after
/// `opts.max_halvings` halvings, [`Error::FiniteDifference`] is returned.
/// On the Green route `h` is reported as zero.
pub fn upsilon_estimate(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<UpsilonEstimate> {
    let rule = opts.rule(t.dim());
    upsilon_with(t, z, r, opts, &rule)
}

pub(crate) fn upsilon_with(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
    rule: &LineRule,
) -> Result<UpsilonEstimate> {
    if opts.method.resolve(t.dim()) == UpsilonMethod::GreenForm {
        // on W the Green integrand is a principal value; Auto falls back to differences there
        match upsilon_green(t, z, r, &opts.patch) {
            Ok(form) => {
                let min_eigenvalue = form.min_eigenvalue();
                return Ok(UpsilonEstimate {
                    form,
                    h: 0.0,
                    min_eigenvalue,
                    indefinite: min_eigenvalue < -PSD_TOLERANCE,
                });
            }
            Err(Error::Pole { .. }) if opts.method == UpsilonMethod::Auto => {}
            Err(e) => return Err(e),
        }
    }
    let mut h = opts.h_fd;
    let mut prev: Option<f64> = None;
    let mut last = 0.0;
    for _ in 0..=opts.max_halvings {
        let form = complex_hessian_fd(|p| averaged_potential_with(t, p, r, rule), z, h)?;
        last = form.min_eigenvalue();
        if last >= -PSD_TOLERANCE {
            return Ok(UpsilonEstimate {
                form,
                h,
                min_eigenvalue: last,
                indefinite: false,
            });
        }
        if let Some(p) = prev {
            if (p - last).abs() <= STEP_STABILITY * last.abs() + PSD_TOLERANCE {
                return Ok(UpsilonEstimate {
                    form,
                    h,
                    min_eigenvalue: last,
                    indefinite: true,
                });
            }
        }
        prev = Some(last);
        h *= 0.5;
    }
    Err(Error::FiniteDifference {
        min_eigenvalue: last,
    })
}

/// The forms entering the pointwise density at one `(z, r)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityForms {
    pub upsilon: HermitianForm,
    /// `Υ_r + (n/(n+1)) ω_B`.
    pub numerator: HermitianForm,
    /// `i∂∂̄κ`.
    pub denominator: HermitianForm,
}

impl DensityForms {
    pub fn new(upsilon: HermitianForm, z: &BallPoint, weight: &Weight) -> Result<Self> {
        let n = z.dim() as f64;
        let numerator = upsilon.add(&bergman_metric(z)?.scaled(n / (n + 1.0)));
        let denominator = weight.hessian(z)?;
        if !denominator.is_positive_definite() {
            return Err(Error::IndefiniteWeight { at: z.parts() });
        }
        Ok(Self {
            upsilon,
            numerator,
            denominator,
        })
    }

    /// `D_{z,r}` and a maximizing direction.
    pub fn local_density(&self) -> Result<(f64, Vec<C64>)> {
        self.numerator.max_generalized_eigen(&self.denominator)
    }

    /// The Rayleigh quotient `numerator(v, v̄) / denominator(v, v̄)`.
    pub fn theta(&self, v: &[C64]) -> Result<f64> {
        let den = self.denominator.eval(v);
        if !(den > 0.0) {
            return Err(Error::InvalidParameter("direction must be nonzero".into()));
        }
        Ok(self.numerator.eval(v) / den)
    }
}

pub fn density_forms(
    t: &(impl DefiningFunction + ?Sized),
    weight: &Weight,
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<DensityForms> {
    DensityForms::new(upsilon(t, z, r, opts)?, z, weight)
}

/// `D_{z,r}`: the largest generalized eigenvalue of
/// `(Υ_r + (n/(n+1)) ω_B, i∂∂̄κ)` at `z`.
pub fn local_density(
    t: &(impl DefiningFunction + ?Sized),
    weight: &Weight,
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<f64> {
    Ok(density_forms(t, weight, z, r, opts)?.local_density()?.0)
}

/// The quotient realized by the constant-coefficient form `θ_v`.
pub fn theta_density(
    t: &(impl DefiningFunction + ?Sized),
    weight: &Weight,
    z: &BallPoint,
    r: f64,
    v: &[C64],
    opts: &AverageOptions,
) -> Result<f64> {
    density_forms(t, weight, z, r, opts)?.theta(v)
}

/// `count` unit directions spread evenly for the metric `form`.
///
/// For `n = 2` the lines are Fibonacci points on the Riemann sphere taken
/// in a `form`-orthonormal frame; otherwise seeded uniform points.
pub fn spread_directions(form: &HermitianForm, count: usize, seed: u64) -> Result<Vec<Vec<C64>>> {
    let n = form.dim();
    let (_, frame) = form.generalized_eigen(&HermitianForm::identity(n))?;
    // columns e_k / sqrt(form(e_k)) are form-orthonormal
    let basis: Vec<Vec<C64>> = frame
        .iter()
        .map(|e| {
            let s = form.eval(e).sqrt();
            e.iter().map(|c| c / s).collect()
        })
        .collect();
    let combine = |y: &[C64]| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (yk, bk) in y.iter().zip(&basis) {
            for (vi, bi) in v.iter_mut().zip(bk) {
                *vi += yk * bi;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / norm).collect()
    };
    if n == 2 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        Ok((0..count)
            .map(|k| {
                let cos_t = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                let half = (0.5 * cos_t.clamp(-1.0, 1.0).acos()).sin_cos();
                let y = [
                    C64::new(half.1, 0.0),
                    C64::from_polar(half.0, golden * k as f64),
                ];
                combine(&y)
            })
            .collect())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..count)
            .map(|_| combine(&random_sphere_point(n, &mut rng)))
            .collect())
    }
}
