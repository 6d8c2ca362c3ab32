//! Samples of `W = {T = 0}`, pseudohyperbolic distance to `W`, flatness
//! diagnostics and tube membership.
//!
//! In dimension one `W` is a finite point set with counting measure. In
//! dimension two `W` is sampled as a graph over a coordinate line: each
//! slice `{z_j = x}` is solved for the remaining coordinate, and the area
//! weight is the `ω_B`-length of the graph tangent times the Lebesgue weight
//! of `x`. Sampling is not implemented beyond dimension two; the distance
//! routines work in any dimension.

mod distance;
mod flatness;
mod graph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pseudo_distance_raw, BallPoint, MobiusMap};
use crate::poly::{DefiningFunction, DefiningPolynomial, ZeroLocus};
use crate::C64;

pub use distance::{dist_to_w, foot_point_uniqueness, tube_membership, Distance, FootPointReport};
pub use flatness::{flatness_profile, FlatnessReport};

/// Quadrature nodes on `W` with tangent frames and `ω_B^{n−1}` weights.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HypersurfaceSample {
    pub points: Vec<BallPoint>,
    /// Per point, `n − 1` tangent vectors orthonormal for `ω_B`.
    pub frames: Vec<Vec<Vec<C64>>>,
    pub area_weights: Vec<f64>,
    /// Set when fewer points than requested were produced.
    pub warning: Option<String>,
}

impl HypersurfaceSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.area_weights)
    }

    fn push(&mut self, point: BallPoint, frame: Vec<Vec<C64>>, weight: f64) {
        self.points.push(point);
        self.frames.push(frame);
        self.area_weights.push(weight);
    }
}

/// Options for patches `W ∩ E(z, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    /// Angular nodes around the foot point.
    pub angular: usize,
    /// Gauss nodes per geometric radial panel.
    pub panel_nodes: usize,
}

impl Default for PatchOptions {
    fn default() -> Self {
        Self {
            angular: 48,
            panel_nodes: 10,
        }
    }
}

pub(crate) fn require_polynomial<'a>(
    t: &'a (impl DefiningFunction + ?Sized),
) -> Result<&'a DefiningPolynomial> {
    match t.zero_locus() {
        ZeroLocus::Polynomial(p) => Ok(p),
        ZeroLocus::Points(_) => Err(Error::InvalidParameter(
            "a point divisor only defines a hypersurface in dimension one".into(),
        )),
    }
}

/// Zeros of a one-variable defining function inside the disk of radius `radius`.
pub(crate) fn zeros_1d(t: &(impl DefiningFunction + ?Sized), radius: f64) -> Vec<C64> {
    match t.zero_locus() {
        ZeroLocus::Points(p) => p.iter().copied().filter(|a| a.norm() < radius).collect(),
        ZeroLocus::Polynomial(p) => {
            let coeffs = p.restrict_affine(&[C64::new(0.0, 0.0)], &[C64::new(1.0, 0.0)]);
            crate::numeric::poly_roots(&coeffs)
                .into_iter()
                .filter(|a| a.norm() < radius)
                .collect()
        }
    }
}

/// Seeded sample of `W ∩ B(0, region_radius)` with roughly `target_count`
/// points. The seed rotates the angular grid.
pub fn sample_w(
    t: &(impl DefiningFunction + ?Sized),
    region_radius: f64,
    target_count: usize,
    seed: u64,
) -> Result<HypersurfaceSample> {
    if !(0.0..1.0).contains(&region_radius) {
        return Err(Error::InvalidParameter(format!(
            "region radius must lie in [0, 1), got {region_radius}"
        )));
    }
    let mut sample = HypersurfaceSample::default();
    match t.dim() {
        1 => {
            for a in zeros_1d(t, region_radius) {
                sample.push(BallPoint::new_unchecked(vec![a]), Vec::new(), 1.0);
            }
            return Ok(sample);
        }
        2 => {}
        n => {
            return Err(Error::InvalidParameter(format!(
                "hypersurface sampling is implemented for n <= 2, got n = {n}"
            )))
        }
    }
    let poly = require_polynomial(t)?;
    let k = graph::dependent_coordinate(poly, region_radius);
    let radial = ((target_count.max(8) as f64 / 2.0).sqrt().ceil() as usize).max(4);
    let angular = 2 * radial;
    let offset = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.gen_range(0.0..std::f64::consts::TAU / angular as f64)
    };
    let grid = graph::GraphGrid {
        center_x: C64::new(0.0, 0.0),
        radial: graph::Radial::Gauss(radial),
        angular,
        angle_offset: offset,
    };
    for node in graph::graph_nodes(poly, k, region_radius, &grid) {
        sample.push(
            BallPoint::new_unchecked(node.point),
            vec![node.frame],
            node.weight,
        );
    }
    if sample.len() < target_count / 2 {
        sample.warning = Some(format!(
            "sparse surface: {} points for a target of {target_count}",
            sample.len()
        ));
    }
    Ok(sample)
}

/// Node of `W ∩ B(0, radius)` written as a graph over the free coordinate.
pub(crate) struct SheetNode {
    pub point: Vec<C64>,
    /// `ω_B^{n−1}` area weight.
    pub area_weight: f64,
    /// Lebesgue weight of the free coordinate.
    pub base_weight: f64,
    /// Index of the dependent coordinate.
    pub dependent: usize,
}

/// Graph nodes of a curve in `C^2` over a Gauss × periodic grid of the free
/// coordinate, with both the area weight and the base Lebesgue weight.
pub(crate) fn graph_sheet(
    t: &(impl DefiningFunction + ?Sized),
    region_radius: f64,
    radial: usize,
    angular: usize,
) -> Result<Vec<SheetNode>> {
    if t.dim() != 2 {
        return Err(Error::InvalidParameter(
            "graph sheets are two-dimensional".into(),
        ));
    }
    let poly = require_polynomial(t)?;
    let k = graph::dependent_coordinate(poly, region_radius);
    let grid = graph::GraphGrid {
        center_x: C64::new(0.0, 0.0),
        radial: graph::Radial::Gauss(radial),
        angular,
        angle_offset: 0.0,
    };
    Ok(graph::graph_nodes(poly, k, region_radius, &grid)
        .into_iter()
        .map(|node| {
            // the frame is (1, slope) normalized for ω_B, so its free component is 1/|e|_B
            let length_sq = 1.0 / node.frame[1 - k].norm_sqr();
            SheetNode {
                base_weight: node.weight / (2.0 * length_sq),
                area_weight: node.weight,
                point: node.point,
                dependent: k,
            }
        })
        .collect())
}

/// Quadrature for `W ∩ E(center, r)` with nodes clustered at the point of
/// `W` nearest to `center`.
///
/// The patch is built in the coordinates `η = F_center(w)`, where it is
/// `F_center(W) ∩ B(0, r)`, and mapped back; `ω_B^{n−1}` is invariant, so
/// the weights carry over unchanged.
pub fn patch_sample(
    t: &(impl DefiningFunction + ?Sized),
    center: &BallPoint,
    r: f64,
    opts: &PatchOptions,
) -> Result<HypersurfaceSample> {
    if center.dim() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            got: center.dim(),
        });
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in [0, 1), got {r}"
        )));
    }
    let mut sample = HypersurfaceSample::default();
    match t.dim() {
        1 => {
            for a in zeros_1d(t, 1.0) {
                if pseudo_distance_raw(center.coords(), &[a]) < r {
                    sample.push(BallPoint::new_unchecked(vec![a]), Vec::new(), 1.0);
                }
            }
            return Ok(sample);
        }
        2 => {}
        n => {
            return Err(Error::InvalidParameter(format!(
                "hypersurface patches are implemented for n <= 2, got n = {n}"
            )))
        }
    }
    let poly = require_polynomial(t)?;
    let map = MobiusMap::new(center.clone());
    let pulled = poly.pullback(&map)?;
    let Some(foot) = distance::nearest_on_zero_set(&pulled, 16, 0x9a7c) else {
        return Ok(sample);
    };
    let delta = foot.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if delta >= r {
        return Ok(sample);
    }
    let g = pulled.gradient(&foot);
    let k = if g[1].norm() >= g[0].norm() { 1 } else { 0 };
    let grid = graph::GraphGrid {
        center_x: foot[1 - k],
        radial: graph::Radial::Clustered {
            scale: delta.max(1e-9),
            nodes: opts.panel_nodes,
        },
        angular: opts.angular,
        angle_offset: 0.0,
    };
    for node in graph::graph_nodes(&pulled, k, r, &grid) {
        let w = map.apply_raw(&node.point);
        let jac = map.jacobian(&node.point);
        let frame: Vec<C64> = (0..2)
            .map(|i| jac[(i, 0)] * node.frame[0] + jac[(i, 1)] * node.frame[1])
            .collect();
        sample.push(BallPoint::new_unchecked(w), vec![frame], node.weight);
    }
    Ok(sample)
}
