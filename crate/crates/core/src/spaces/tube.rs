use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{quadratic, TruncatedSpace, SPECTRAL_CUTOFF};
use crate::error::{Error, Result};
use crate::geometry::{volume_prefactor, BallPoint, MobiusMap, QuadOptions, QuadratureRule};
use crate::hypersurface::{dist_to_w, flatness_profile, graph_sheet, zeros_1d};
use crate::numeric::{periodic_nodes, GaussRule};
use crate::poly::DefiningFunction;
use crate::C64;

/// Discretization of [`restriction_inequality_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeOptions {
    /// `W` is restricted to `B(0, region_radius)`, the tube to the fibers over it.
    pub region_radius: f64,
    /// Gauss × periodic grid of the free coordinate of the graph of `W` (n = 2).
    pub graph_radial: usize,
    pub graph_angular: usize,
    /// Polar rule on each transverse fiber (n = 2).
    pub fiber_angular: usize,
    pub fiber_radial: usize,
    /// Bisection steps for the fiber boundary `δ_B = ε`.
    pub bisection: usize,
    /// Random space elements tested besides the basis.
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for TubeOptions {
    fn default() -> Self {
        Self {
            region_radius: 0.8,
            graph_radial: 8,
            graph_angular: 16,
            fiber_angular: 12,
            fiber_radial: 6,
            bisection: 24,
            random_trials: 100,
            seed: 0x7b,
        }
    }
}

/// Tube and hypersurface Gram matrices for one `ε`, and the measured constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeReport {
    pub eps: f64,
    /// `∫_{tube} conj(z^α) z^β e^{−κ} ω_B^n`.
    pub tube_gram: DMatrix<C64>,
    /// `∫_W conj(z^α) z^β e^{−κ} ω_B^{n−1}` over the same part of `W`.
    pub w_gram: DMatrix<C64>,
    /// Smallest tested ratio `∫_tube |F|^2 e^{−κ} / (ε^2 ∫_W |F|^2 e^{−κ})`.
    pub c_measured: f64,
    /// Infimum of the ratio over the whole space, from a generalized eigenproblem.
    pub c_spectral: f64,
    pub tube_nodes: usize,
    pub w_nodes: usize,
}

impl TubeReport {
    /// `∫_tube |F|^2 e^{−κ} / (ε^2 ∫_W |F|^2 e^{−κ})` for coefficients `c`.
    pub fn ratio(&self, c: &[C64]) -> f64 {
        quadratic(&self.tube_gram, c) / (self.eps * self.eps * quadratic(&self.w_gram, c))
    }
}

fn accumulate(space: &TruncatedSpace, nodes: &[(Vec<C64>, f64)]) -> Result<DMatrix<C64>> {
    let size = space.size();
    let parts: Vec<Result<DMatrix<C64>>> = nodes
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = DMatrix::<C64>::zeros(size, size);
            for (z, w) in chunk {
                let scale = w * (-space.weight.value(z)?).exp();
                let v = space.monomials(z);
                for i in 0..size {
                    let ci = v[i].conj() * scale;
                    for j in 0..size {
                        acc[(i, j)] += ci * v[j];
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = DMatrix::<C64>::zeros(size, size);
    for p in parts {
        total += p?;
    }
    Ok((&total + total.adjoint()) * C64::new(0.5, 0.0))
}

/// Nodes with `ω_B^n` weights for the tube `{δ_B(·, W) < ε}` over the part of
/// `W` in `B(0, region_radius)`, and `ω_B^{n−1}` nodes for that part of `W`.
fn tube_nodes(
    t: &(impl DefiningFunction + ?Sized),
    eps: f64,
    opts: &TubeOptions,
) -> Result<(Vec<(Vec<C64>, f64)>, Vec<(Vec<C64>, f64)>)> {
    match t.dim() {
        1 => {
            let zeros = zeros_1d(t, opts.region_radius);
            for (i, a) in zeros.iter().enumerate() {
                for b in &zeros[..i] {
                    if crate::geometry::pseudo_distance_raw(&[*a], &[*b]) < 2.0 * eps {
                        return Err(Error::Coverage(format!(
                            "tube balls around {a} and {b} overlap"
                        )));
                    }
                }
            }
            let rule = QuadratureRule::bergman_ball(1, eps, &QuadOptions::for_dim(1))?;
            let mut tube = Vec::new();
            for a in &zeros {
                let map = MobiusMap::new(BallPoint::new(vec![*a])?);
                for (p, w) in rule.nodes.iter().zip(&rule.weights) {
                    tube.push((map.apply_raw(p.coords()), *w));
                }
            }
            let w = zeros.iter().map(|a| (vec![*a], 1.0)).collect();
            Ok((tube, w))
        }
        2 => two_dim_tube(t, eps, opts),
        n => Err(Error::InvalidParameter(format!(
            "tube restriction is implemented for n <= 2, got n = {n}"
        ))),
    }
}

/// In dimension two `W` is a graph `z_k = f(x)` over the free coordinate, and
/// the tube is swept by translating along `e_k`: `(x, y) ↦ (x, f(x) + y)` has
/// unit Lebesgue Jacobian. Each fiber is a star-shaped disk in `y` whose
/// boundary `δ_B = ε` is found by bisection along rays.
fn two_dim_tube(
    t: &(impl DefiningFunction + ?Sized),
    eps: f64,
    opts: &TubeOptions,
) -> Result<(Vec<(Vec<C64>, f64)>, Vec<(Vec<C64>, f64)>)> {
    let sheet = graph_sheet(t, opts.region_radius, opts.graph_radial, opts.graph_angular)?;
    if sheet.is_empty() {
        return Err(Error::Coverage("W does not meet the region".into()));
    }
    for node in sheet.iter().step_by((sheet.len() / 6).max(1)) {
        let report = flatness_profile(t, &BallPoint::new(node.point.clone())?, eps)?;
        if report.c_estimate * eps > 0.5 {
            return Err(Error::FlatnessViolation(format!(
                "graph bound {} too large for eps = {eps}",
                report.c_estimate
            )));
        }
    }
    let angles = periodic_nodes(opts.fiber_angular);
    let dphi = TAU / angles.len() as f64;
    let radial = GaussRule::legendre(opts.fiber_radial);
    let density = volume_prefactor(2);
    let fibers: Vec<Result<Vec<(Vec<C64>, f64)>>> = sheet
        .par_iter()
        .map(|node| {
            let k = node.dependent;
            let at = |y: C64| {
                let mut z = node.point.clone();
                z[k] += y;
                z
            };
            let inside = |z: &[C64]| -> Result<bool> {
                let s: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                if !(s < 1.0) {
                    return Ok(false);
                }
                Ok(dist_to_w(&BallPoint::new_unchecked(z.to_vec()), t, None)?.distance < eps)
            };
            let s: f64 = node.point.iter().map(|c| c.norm_sqr()).sum();
            let scale = eps * (1.0 - s);
            let mut out = Vec::new();
            for &phi in &angles {
                let dir = C64::from_polar(1.0, phi);
                let mut lo = 0.0;
                let mut hi = scale;
                let mut grow = 0;
                while inside(&at(dir * hi))? {
                    lo = hi;
                    hi *= 2.0;
                    grow += 1;
                    if grow > 40 {
                        return Err(Error::Coverage("fiber boundary not found".into()));
                    }
                }
                for _ in 0..opts.bisection {
                    let mid = 0.5 * (lo + hi);
                    if inside(&at(dir * mid))? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let edge = 0.5 * (lo + hi);
                if !(edge > 0.0) {
                    return Err(Error::Coverage("empty fiber".into()));
                }
                for (rho, wr) in radial.on_interval(0.0, edge) {
                    let z = at(dir * rho);
                    let sz: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                    let w = node.base_weight * wr * rho * dphi * density / (1.0 - sz).powi(3);
                    out.push((z, w));
                }
            }
            Ok(out)
        })
        .collect();
    let mut tube = Vec::new();
    for f in fibers {
        tube.extend(f?);
    }
    let w = sheet
        .into_iter()
        .map(|n| (n.point, n.area_weight))
        .collect();
    Ok((tube, w))
}

/// Measured constant `C` in `C ε^2 ∫_W |F|^2 e^{−κ} ω_B^{n−1} ≤ ∫_{tube} |F|^2 e^{−κ} ω_B^n`,
/// as the smallest ratio over the basis and seeded random elements.
pub fn restriction_inequality_check(
    space: &TruncatedSpace,
    t: &(impl DefiningFunction + ?Sized),
    eps: f64,
    opts: &TubeOptions,
) -> Result<TubeReport> {
    if t.dim() != space.n {
        return Err(Error::DimensionMismatch {
            expected: space.n,
            got: t.dim(),
        });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 0.5), got {eps}"
        )));
    }
    let (tube, w) = tube_nodes(t, eps, opts)?;
    if w.is_empty() {
        return Err(Error::Coverage("W does not meet the region".into()));
    }
    let tube_gram = accumulate(space, &tube)?;
    let w_gram = accumulate(space, &w)?;
    let size = space.size();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = TubeReport {
        eps,
        tube_gram,
        w_gram,
        c_measured: f64::INFINITY,
        c_spectral: f64::NAN,
        tube_nodes: tube.len(),
        w_nodes: w.len(),
    };
    let mut candidates: Vec<Vec<C64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for _ in 0..opts.random_trials {
        candidates.push(
            (0..size)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
    }
    for c in &candidates {
        if quadratic(&report.w_gram, c) > 0.0 {
            report.c_measured = report.c_measured.min(report.ratio(c));
        }
    }
    report.c_spectral = spectral_min(&report.tube_gram, &report.w_gram, eps)?;
    Ok(report)
}

/// `inf_c tube(c) / (ε^2 W(c))` over `W(c) > 0`: the reciprocal of the top
/// eigenvalue of `ε^2 W` whitened by the tube form. Exact for singular `W`;
/// tube directions below `SPECTRAL_CUTOFF` of its largest eigenvalue are
/// dropped, since on small tubes the monomial Gram is numerically singular.
fn spectral_min(tube: &DMatrix<C64>, w: &DMatrix<C64>, eps: f64) -> Result<f64> {
    let eig = tube.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::LinearAlgebra("tube Gram matrix vanishes".into()));
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > SPECTRAL_CUTOFF * top)
        .collect();
    let size = tube.nrows();
    let basis = DMatrix::from_fn(size, keep.len(), |r, c| {
        eig.eigenvectors[(r, keep[c])] / eig.eigenvalues[keep[c]].sqrt()
    });
    let m = basis.adjoint() * w * &basis;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mu = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Ok(if mu > 0.0 {
        1.0 / (eps * eps * mu)
    } else {
        f64::INFINITY
    })
}
