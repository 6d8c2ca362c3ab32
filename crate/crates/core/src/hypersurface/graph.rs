//! Graph parametrization of a curve in `C^2` over one coordinate line.

use std::f64::consts::TAU;

use crate::geometry::{bergman_metric, BallPoint};
use crate::numeric::{poly_roots, GaussRule};
use crate::poly::{DefiningFunction, DefiningPolynomial};
use crate::C64;

pub(crate) enum Radial {
    Gauss(usize),
    /// Geometric panels shrinking toward the grid center down to `scale / 4`.
    Clustered {
        scale: f64,
        nodes: usize,
    },
}

pub(crate) struct GraphGrid {
    pub center_x: C64,
    pub radial: Radial,
    pub angular: usize,
    pub angle_offset: f64,
}

pub(crate) struct GraphNode {
    pub point: Vec<C64>,
    pub frame: Vec<C64>,
    pub weight: f64,
}

fn slice_point(k: usize, x: C64, zeta: C64) -> Vec<C64> {
    if k == 1 {
        vec![x, zeta]
    } else {
        vec![zeta, x]
    }
}

/// Roots in the dependent coordinate `k` over the slice with free coordinate `x`.
pub(crate) fn slice_roots(poly: &DefiningPolynomial, k: usize, x: C64) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    let p = slice_point(k, x, zero);
    let mut v = vec![zero; 2];
    v[k] = C64::new(1.0, 0.0);
    poly_roots(&poly.restrict_affine(&p, &v))
}

/// Coordinate over which `W` is most nearly a graph, judged by
/// `|∂_k T| / |∇T|` at coarse sample points.
pub(crate) fn dependent_coordinate(poly: &DefiningPolynomial, radius: f64) -> usize {
    let mut best = (1usize, -1.0f64);
    for k in [1usize, 0] {
        let mut score = 0.0;
        let mut count = 0usize;
        for i in 0..6 {
            let rho = radius * (i as f64 + 0.5) / 6.0;
            for j in 0..12 {
                let x = C64::from_polar(rho, TAU * j as f64 / 12.0);
                for zeta in slice_roots(poly, k, x) {
                    let w = slice_point(k, x, zeta);
                    if w.iter().map(|c| c.norm_sqr()).sum::<f64>() >= radius * radius {
                        continue;
                    }
                    let g = poly.gradient(&w);
                    let total = g[0].norm_sqr() + g[1].norm_sqr();
                    if total > 0.0 {
                        score += g[k].norm_sqr() / total;
                        count += 1;
                    }
                }
            }
        }
        let s = if count > 0 { score / count as f64 } else { 0.0 };
        if s > best.1 {
            best = (k, s);
        }
    }
    best.0
}

fn radial_nodes(radial: &Radial, upper: f64) -> Vec<(f64, f64)> {
    match *radial {
        Radial::Gauss(m) => GaussRule::legendre(m).on_interval(0.0, upper).collect(),
        Radial::Clustered { scale, nodes } => {
            let rule = GaussRule::legendre(nodes);
            let mut out = Vec::new();
            let mut b = upper;
            while b > scale / 4.0 && b > 1e-14 {
                let a = b / 2.0;
                out.extend(rule.on_interval(a, b));
                b = a;
            }
            out.extend(rule.on_interval(0.0, b));
            out
        }
    }
}

/// Nodes of `{poly = 0} ∩ B(0, radius)` on a polar grid in the free
/// coordinate. Along each ray the radial rule stops where the nearest sheet
/// leaves the ball, so single-sheet pieces are integrated without a jump.
pub(crate) fn graph_nodes(
    poly: &DefiningPolynomial,
    k: usize,
    radius: f64,
    grid: &GraphGrid,
) -> Vec<GraphNode> {
    let r2 = radius * radius;
    let h = |x: C64| -> f64 {
        slice_roots(poly, k, x)
            .into_iter()
            .map(|zeta| x.norm_sqr() + zeta.norm_sqr() - r2)
            .fold(f64::INFINITY, f64::min)
    };
    let upper = radius + grid.center_x.norm();
    let dtheta = TAU / grid.angular as f64;
    let mut out = Vec::new();
    for j in 0..grid.angular {
        let dir = C64::from_polar(1.0, grid.angle_offset + dtheta * j as f64);
        let at = |rho: f64| grid.center_x + dir * rho;
        let extent = if h(at(0.0)) < 0.0 {
            let steps = 64;
            let mut lo = 0.0;
            let mut hi = upper;
            for s in 1..=steps {
                let rho = upper * s as f64 / steps as f64;
                if h(at(rho)) >= 0.0 {
                    hi = rho;
                    break;
                }
                lo = rho;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if h(at(mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        } else {
            upper
        };
        for (rho, wr) in radial_nodes(&grid.radial, extent) {
            let x = at(rho);
            for zeta in slice_roots(poly, k, x) {
                let w = slice_point(k, x, zeta);
                if w.iter().map(|c| c.norm_sqr()).sum::<f64>() >= r2 {
                    continue;
                }
                let g = poly.gradient(&w);
                if g[k].norm() == 0.0 {
                    continue;
                }
                // tangent: unit step in x, slope −∂_x T / ∂_k T in the dependent coordinate
                let slope = -g[1 - k] / g[k];
                let e = slice_point(k, C64::new(1.0, 0.0), slope);
                let metric =
                    bergman_metric(&BallPoint::new_unchecked(w.clone())).expect("node inside ball");
                let length_sq = metric.eval(&e);
                let frame = e.iter().map(|c| c / length_sq.sqrt()).collect();
                out.push(GraphNode {
                    point: w,
                    frame,
                    weight: wr * rho * dtheta * 2.0 * length_sq,
                });
            }
        }
    }
    out
}
