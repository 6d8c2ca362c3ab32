use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{horner, pairwise_sum, GaussRule};
use crate::C64;

/// Discretization of [`holomorphic_flattening`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatteningOptions {
    /// Fourier modes kept in the potential, `|k| ≤ modes`.
    pub modes: usize,
    /// Angles per circle for the Fourier coefficients of `Δφ`.
    pub angular: usize,
    /// Gauss nodes per radial piece.
    pub radial: usize,
    /// Taylor coefficients of `G`.
    pub taylor: usize,
    /// Spacing of the polar grid on `D(0, 1/2)` where the sup is measured.
    pub grid_spacing: f64,
    /// Step of the fourth-order difference Laplacian.
    pub laplacian_step: f64,
    /// Allowed completion residual, relative to `1 + sup |h|`.
    pub tolerance: f64,
}

impl Default for FlatteningOptions {
    fn default() -> Self {
        Self {
            modes: 32,
            angular: 128,
            radial: 32,
            taylor: 40,
            grid_spacing: 1e-2,
            laplacian_step: 1e-2,
            tolerance: 1e-6,
        }
    }
}

/// Output of [`holomorphic_flattening`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatteningResult {
    /// Taylor coefficients of `G`, starting with the constant term `0`.
    pub taylor: Vec<C64>,
    /// Measured `sup_{D(0,1/2)} |φ − φ(0) − 2 Re G|`.
    pub k_bound: f64,
    /// `∫_{D(0,3/4)} Δφ dA`.
    pub laplacian_mass: f64,
    /// Largest mismatch of the completion on the check circle `|ζ| = 0.6`.
    pub completion_residual: f64,
    /// `sup_{D(0,1/2)} e^{φ − φ(0) − 2 Re G}`: the constant `c` in
    /// `e^{−φ(0) − 2 Re G} ≤ c e^{−φ}`.
    pub comparison_constant: f64,
    pub grid_points: usize,
}

impl FlatteningResult {
    pub fn g(&self, z: C64) -> C64 {
        horner(&self.taylor, z)
    }
}

const OUTER: f64 = 0.75;
const COMPLETION_RADIUS: f64 = 0.7;
const CHECK_RADIUS: f64 = 0.6;
const SUP_RADIUS: f64 = 0.5;

fn laplacian(phi: &(impl Fn(C64) -> f64 + Sync), z: C64, h: f64) -> f64 {
    let second = |d: C64| {
        (-phi(z + d * 2.0) + 16.0 * phi(z + d) - 30.0 * phi(z) + 16.0 * phi(z - d)
            - phi(z - d * 2.0))
            / (12.0 * h * h)
    };
    second(C64::new(h, 0.0)) + second(C64::new(0.0, h))
}

/// Fourier coefficients `μ_k(s)`, `k = −K..=K`, of `Δφ` on the circle `|ζ| = s`.
fn circle_modes(
    lap: &(impl Fn(C64) -> f64 + Sync),
    s: f64,
    modes: usize,
    angular: usize,
) -> Vec<C64> {
    let vals: Vec<f64> = (0..angular)
        .map(|j| lap(C64::from_polar(s, TAU * j as f64 / angular as f64)))
        .collect();
    (0..=2 * modes)
        .map(|idx| {
            let k = idx as f64 - modes as f64;
            let terms: Vec<C64> = vals
                .iter()
                .enumerate()
                .map(|(j, v)| C64::from_polar(*v, -k * TAU * j as f64 / angular as f64))
                .collect();
            crate::numeric::pairwise_sum_c(&terms) / angular as f64
        })
        .collect()
}

/// Fourier modes `P_k(ρ)` of the logarithmic potential
/// `p(z) = (1/2π) ∫_{D(0,R)} log|z − ζ| Δφ(ζ) dA(ζ)` on `|z| = ρ`, from
/// `log|z−ζ| = log M − Σ_{k≥1} (m/M)^k cos(k(θ−φ))/k` with `m, M` the
/// smaller and larger of `ρ, |ζ|`.
fn potential_modes(
    lap: &(impl Fn(C64) -> f64 + Sync),
    rho: f64,
    opts: &FlatteningOptions,
) -> Vec<C64> {
    let k_max = opts.modes;
    let rule = GaussRule::legendre(opts.radial);
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    if rho > 0.0 {
        nodes.extend(rule.on_interval(0.0, rho));
    }
    nodes.extend(rule.on_interval(rho, OUTER));
    let mut out = vec![C64::new(0.0, 0.0); 2 * k_max + 1];
    for (s, w) in nodes {
        let mu = circle_modes(lap, s, k_max, opts.angular);
        let (small, big) = if s < rho { (s, rho) } else { (rho, s) };
        let ratio = small / big;
        out[k_max] += mu[k_max] * (s * w * big.ln());
        let mut power = 1.0;
        for k in 1..=k_max {
            power *= ratio;
            let f = -s * w * power / (2.0 * k as f64);
            out[k_max + k] += mu[k_max + k] * f;
            out[k_max - k] += mu[k_max - k] * f;
        }
    }
    out
}

fn synthesize(modes: &[C64], theta: f64) -> f64 {
    let k_max = (modes.len() - 1) / 2;
    let mut acc = modes[k_max].re;
    for k in 1..=k_max {
        let e = C64::from_polar(1.0, k as f64 * theta);
        acc += (modes[k_max + k] * e + modes[k_max - k] * e.conj()).re;
    }
    acc
}

/// Split `φ` on `D(0, 3/4)` into the logarithmic potential `p` of `Δφ` and
/// the harmonic rest `h = φ − p`, complete `h − h(0) = 2 Re G` from the
/// Fourier coefficients of `h` on `|ζ| = 0.7`, and measure
/// `K = sup_{D(0,1/2)} |φ − φ(0) − 2 Re G|` on a polar grid.
pub fn holomorphic_flattening(
    phi: impl Fn(C64) -> f64 + Sync,
    opts: &FlatteningOptions,
) -> Result<FlatteningResult> {
    if !(opts.grid_spacing > 0.0 && opts.laplacian_step > 0.0)
        || opts.modes == 0
        || opts.angular < 2 * opts.modes + 1
    {
        return Err(Error::InvalidParameter(
            "flattening needs angular >= 2 modes + 1 and positive steps".into(),
        ));
    }
    let h = opts.laplacian_step;
    let lap = |z: C64| laplacian(&phi, z, h);
    let rule = GaussRule::legendre(opts.radial);
    let mass_terms: Vec<f64> = rule
        .on_interval(0.0, OUTER)
        .map(|(s, w)| TAU * s * w * circle_modes(&lap, s, 0, opts.angular)[0].re)
        .collect();
    let laplacian_mass = pairwise_sum(&mass_terms);

    let rings = (SUP_RADIUS / opts.grid_spacing).ceil() as usize;
    let mut radii: Vec<f64> = (0..=rings)
        .map(|i| SUP_RADIUS * i as f64 / rings as f64)
        .collect();
    radii.push(CHECK_RADIUS);
    radii.push(COMPLETION_RADIUS);
    let modes: Vec<Vec<C64>> = radii
        .par_iter()
        .map(|&rho| potential_modes(&lap, rho, opts))
        .collect();
    let p = |ring: usize, theta: f64| synthesize(&modes[ring], theta);
    let p0 = p(0, 0.0);
    let h0 = phi(C64::new(0.0, 0.0)) - p0;

    // Fourier coefficients of h on the completion circle
    let m_c = (4 * opts.taylor).max(64);
    let ring_c = radii.len() - 1;
    let hc: Vec<f64> = (0..m_c)
        .map(|j| {
            let th = TAU * j as f64 / m_c as f64;
            phi(C64::from_polar(COMPLETION_RADIUS, th)) - p(ring_c, th)
        })
        .collect();
    let mut taylor = vec![C64::new(0.0, 0.0); opts.taylor + 1];
    for (k, coeff) in taylor.iter_mut().enumerate().skip(1) {
        let terms: Vec<C64> = hc
            .iter()
            .enumerate()
            .map(|(j, v)| C64::from_polar(*v, -(k as f64) * TAU * j as f64 / m_c as f64))
            .collect();
        *coeff =
            crate::numeric::pairwise_sum_c(&terms) / m_c as f64 / COMPLETION_RADIUS.powi(k as i32);
    }
    let two_re_g = |z: C64| 2.0 * horner(&taylor, z).re;

    let ring_check = radii.len() - 2;
    let mut residual = 0.0f64;
    let mut h_scale = h0.abs();
    for j in 0..m_c {
        let th = TAU * (j as f64 + 0.5) / m_c as f64;
        let z = C64::from_polar(CHECK_RADIUS, th);
        let hv = phi(z) - p(ring_check, th);
        h_scale = h_scale.max(hv.abs());
        residual = residual.max((hv - h0 - two_re_g(z)).abs());
    }
    let tolerance = opts.tolerance * (1.0 + h_scale);
    if !(residual <= tolerance) {
        return Err(Error::Completion {
            residual,
            tolerance,
        });
    }

    let phi0 = phi(C64::new(0.0, 0.0));
    let mut k_bound = 0.0f64;
    let mut upper = f64::NEG_INFINITY;
    let mut count = 0usize;
    for &rho in radii.iter().take(rings + 1) {
        let angles = if rho == 0.0 {
            1
        } else {
            ((TAU * rho / opts.grid_spacing).ceil() as usize).max(8)
        };
        for j in 0..angles {
            let th = TAU * j as f64 / angles as f64;
            let z = C64::from_polar(rho, th);
            let d = phi(z) - phi0 - two_re_g(z);
            k_bound = k_bound.max(d.abs());
            upper = upper.max(d);
            count += 1;
        }
    }
    Ok(FlatteningResult {
        taylor,
        k_bound,
        laplacian_mass,
        completion_residual: residual,
        comparison_constant: upper.exp(),
        grid_points: count,
    })
}
