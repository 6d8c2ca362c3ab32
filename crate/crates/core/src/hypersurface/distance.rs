use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{require_polynomial, zeros_1d, HypersurfaceSample};
use crate::error::{Error, Result};
use crate::geometry::{
    norm_sqr, pseudo_distance_raw, random_sphere_point, BallPoint, DirectionRule, MobiusMap,
};
use crate::poly::{DefiningFunction, DefiningPolynomial};
use crate::C64;

/// Pseudohyperbolic distance from a point to `W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Distance {
    pub distance: f64,
    /// Nearest point found, `None` when no point of `W` lies in the ball.
    pub foot: Option<BallPoint>,
    /// The local descent did not converge; the value is the best seed.
    pub approximate: bool,
    /// Number of distinct nearest points at the minimal distance.
    pub multiplicity: usize,
}

const CLUSTER_TOL: f64 = 1e-6;

/// Minimize `|η|` on `{N = 0}` starting from `eta`: each step jumps to the
/// point of the tangent plane nearest the origin. Returns `None` on divergence.
pub(crate) fn project_to_zero_set(
    poly: &DefiningPolynomial,
    mut eta: Vec<C64>,
) -> Option<Vec<C64>> {
    for _ in 0..200 {
        let g = poly.gradient(&eta);
        let gg = norm_sqr(&g);
        if gg == 0.0 || !gg.is_finite() {
            return None;
        }
        let q = poly.value(&eta);
        let b: C64 = g.iter().zip(&eta).map(|(gi, ei)| gi * ei).sum::<C64>() - q;
        let next: Vec<C64> = g.iter().map(|gi| gi.conj() * b / gg).collect();
        let step: f64 = next
            .iter()
            .zip(&eta)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        eta = next;
        if !(norm_sqr(&eta) < 1.0) {
            return None;
        }
        if step < 1e-15 * (1.0 + norm_sqr(&eta).sqrt()) {
            return Some(eta);
        }
    }
    let q = poly.value(&eta).norm();
    (q < 1e-12).then_some(eta)
}

/// Zeros of `N` on complex lines through the origin, nearest first.
fn line_seeds(poly: &DefiningPolynomial, lines: usize, seed: u64) -> Vec<Vec<C64>> {
    let n = poly.dim();
    let dirs = if n == 2 {
        DirectionRule::complex_lines(2, lines, 0, seed).directions
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..lines * lines)
            .map(|_| random_sphere_point(n, &mut rng))
            .collect()
    };
    let zero = vec![C64::new(0.0, 0.0); n];
    let mut seeds: Vec<Vec<C64>> = Vec::new();
    for u in dirs {
        let coeffs = poly.restrict_affine(&zero, &u);
        for lam in crate::numeric::poly_roots(&coeffs) {
            if lam.norm() < 1.0 {
                seeds.push(u.iter().map(|c| c * lam).collect());
            }
        }
    }
    seeds.sort_by(|a, b| norm_sqr(a).total_cmp(&norm_sqr(b)));
    seeds
}

/// Point of `{N = 0} ∩ B` nearest to the origin.
pub(crate) fn nearest_on_zero_set(
    poly: &DefiningPolynomial,
    starts: usize,
    seed: u64,
) -> Option<Vec<C64>> {
    let seeds = line_seeds(poly, 6, seed);
    seeds
        .into_iter()
        .take(starts)
        .filter_map(|s| project_to_zero_set(poly, s))
        .min_by(|a, b| norm_sqr(a).total_cmp(&norm_sqr(b)))
}

/// `δ_B(z, W) = inf_{w ∈ W} |F_z(w)|`.
///
/// In dimension one this is a minimum over the zeros. Otherwise `W` is
/// pulled back by `F_z` and the nearest point to the origin is found by
/// tangent-plane projection from the best seeds: zeros on a fixed set of
/// complex lines through `z`, plus the sample points when given.
pub fn dist_to_w(
    z: &BallPoint,
    t: &(impl DefiningFunction + ?Sized),
    sample: Option<&HypersurfaceSample>,
) -> Result<Distance> {
    let n = t.dim();
    if z.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.dim(),
        });
    }
    if !(z.norm_sqr() < 1.0) {
        return Err(Error::OutsideBall {
            norm_sq: z.norm_sqr(),
        });
    }
    if n == 1 {
        let mut best: Option<(f64, C64)> = None;
        let mut ties = 0usize;
        for a in zeros_1d(t, 1.0) {
            let d = pseudo_distance_raw(z.coords(), &[a]);
            match best {
                Some((b, _)) if (d - b).abs() <= 1e-12 => ties += 1,
                Some((b, _)) if d > b => {}
                _ => {
                    best = Some((d, a));
                    ties = 1;
                }
            }
        }
        return Ok(match best {
            Some((d, a)) => Distance {
                distance: d,
                foot: Some(BallPoint::new_unchecked(vec![a])),
                approximate: false,
                multiplicity: ties,
            },
            None => Distance {
                distance: 1.0,
                foot: None,
                approximate: false,
                multiplicity: 0,
            },
        });
    }
    let poly = require_polynomial(t)?;
    let map = MobiusMap::new(z.clone());
    let pulled = poly.pullback(&map)?;
    if pulled.value(&vec![C64::new(0.0, 0.0); n]) == C64::new(0.0, 0.0) {
        return Ok(Distance {
            distance: 0.0,
            foot: Some(z.clone()),
            approximate: false,
            multiplicity: 1,
        });
    }
    let mut seeds = line_seeds(&pulled, 6, 0x5eed);
    if let Some(s) = sample {
        seeds.extend(s.points.iter().map(|w| map.apply_raw(w.coords())));
        seeds.sort_by(|a, b| norm_sqr(a).total_cmp(&norm_sqr(b)));
    }
    seeds.truncate(16);
    let Some(best_seed) = seeds.first().cloned() else {
        return Ok(Distance {
            distance: 1.0,
            foot: None,
            approximate: false,
            multiplicity: 0,
        });
    };
    let ends: Vec<Vec<C64>> = seeds
        .into_iter()
        .filter_map(|s| project_to_zero_set(&pulled, s))
        .collect();
    let Some(min) = ends
        .iter()
        .map(|e| norm_sqr(e).sqrt())
        .min_by(f64::total_cmp)
    else {
        return Ok(Distance {
            distance: norm_sqr(&best_seed).sqrt(),
            foot: Some(BallPoint::new_unchecked(map.apply_raw(&best_seed))),
            approximate: true,
            multiplicity: 1,
        });
    };
    let minimizers: Vec<&Vec<C64>> = ends
        .iter()
        .filter(|e| norm_sqr(e).sqrt() <= min + 1e-9)
        .collect();
    let clusters = count_clusters(&minimizers);
    let eta = minimizers[0];
    Ok(Distance {
        distance: min,
        foot: Some(BallPoint::new_unchecked(map.apply_raw(eta))),
        approximate: false,
        multiplicity: clusters,
    })
}

fn count_clusters(points: &[&Vec<C64>]) -> usize {
    let mut reps: Vec<&Vec<C64>> = Vec::new();
    for p in points {
        let close = reps.iter().any(|r| {
            r.iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                < CLUSTER_TOL
        });
        if !close {
            reps.push(p);
        }
    }
    reps.len()
}

/// Whether `δ_B(z, W) < eps`.
pub fn tube_membership(
    z: &BallPoint,
    t: &(impl DefiningFunction + ?Sized),
    sample: Option<&HypersurfaceSample>,
    eps: f64,
) -> Result<bool> {
    Ok(dist_to_w(z, t, sample)?.distance < eps)
}

/// Outcome of multistart descent toward the nearest point of `W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FootPointReport {
    pub distance: f64,
    /// Distinct endpoints among the converged starts.
    pub clusters: usize,
    /// Largest distance between converged endpoints, in ball coordinates.
    pub diameter: f64,
    pub converged: usize,
}

/// Run the descent of [`dist_to_w`] from `starts` seeds, one per seeded
/// random complex line through `z` (its zero nearest to `z`).
pub fn foot_point_uniqueness(
    z: &BallPoint,
    t: &(impl DefiningFunction + ?Sized),
    starts: usize,
    seed: u64,
) -> Result<FootPointReport> {
    let n = t.dim();
    if n == 1 {
        let d = dist_to_w(z, t, None)?;
        return Ok(FootPointReport {
            distance: d.distance,
            clusters: d.multiplicity,
            diameter: 0.0,
            converged: 1,
        });
    }
    let poly = require_polynomial(t)?;
    let map = MobiusMap::new(z.clone());
    let pulled = poly.pullback(&map)?;
    let zero = vec![C64::new(0.0, 0.0); n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ends = Vec::new();
    let mut attempts = 0;
    while ends.len() < starts && attempts < 20 * starts {
        attempts += 1;
        let u = random_sphere_point(n, &mut rng);
        let coeffs = pulled.restrict_affine(&zero, &u);
        let nearest = crate::numeric::poly_roots(&coeffs)
            .into_iter()
            .filter(|l| l.norm() < 1.0)
            .min_by(|a, b| a.norm().total_cmp(&b.norm()));
        if let Some(lam) = nearest {
            let s: Vec<C64> = u.iter().map(|c| c * lam).collect();
            if let Some(e) = project_to_zero_set(&pulled, s) {
                ends.push(map.apply_raw(&e));
            }
        }
    }
    if ends.is_empty() {
        return Err(Error::Coverage("no descent converged".into()));
    }
    let refs: Vec<&Vec<C64>> = ends.iter().collect();
    let clusters = count_clusters(&refs);
    let mut diameter = 0.0f64;
    for a in &ends {
        for b in &ends {
            diameter = diameter.max(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    let distance = ends
        .iter()
        .map(|w| pseudo_distance_raw(z.coords(), w))
        .fold(f64::INFINITY, f64::min);
    Ok(FootPointReport {
        distance,
        clusters,
        diameter,
        converged: ends.len(),
    })
}
