use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_space, extension_constant, restriction, sampling_constants, SpaceQuadrature};
use crate::density::{local_density, AverageOptions, Weight};
use crate::error::{Error, Result};
use crate::geometry::BallPoint;
use crate::hypersurface::HypersurfaceSample;
use crate::poly::PointDivisor;
use crate::C64;

/// Seip's lattice `{a^m (b (k + θ) + i)}` of the upper half-plane carried to
/// the disk by `z ↦ (z − i)/(z + i)`, with `a = (1+s)/(1−s)` and
/// `b = 2s/√(1−s^2)` so that neighbors in both lattice directions are at
/// pseudohyperbolic distance `s`. The shift `θ ∈ [0, 1)` is drawn from the
/// seed (seed `0` gives `θ = 0`, which puts a point at the origin). Only
/// points with `|w| < radius` are kept.
pub fn lattice_points(separation: f64, radius: f64, seed: u64) -> Result<Vec<C64>> {
    if !(separation > 0.0 && separation < 1.0) || !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "separation and radius must lie in (0, 1), got {separation} and {radius}"
        )));
    }
    let s = separation;
    let a = (1.0 + s) / (1.0 - s);
    let b = 2.0 * s / (1.0 - s * s).sqrt();
    let theta = if seed == 0 {
        0.0
    } else {
        ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..1.0)
    };
    let levels = (((1.0 + radius) / (1.0 - radius)).ln() / a.ln()).ceil() as i64;
    let r2 = radius * radius;
    let i = C64::new(0.0, 1.0);
    let mut points = Vec::new();
    for m in -levels..=levels {
        let y = a.powi(m as i32);
        // |z − i| < R |z + i|  ⇔  x^2 (1 − R^2) < R^2 (y+1)^2 − (y−1)^2
        let bound = r2 * (y + 1.0).powi(2) - (y - 1.0).powi(2);
        if bound <= 0.0 {
            continue;
        }
        let xmax = (bound / (1.0 - r2)).sqrt();
        let step = y * b;
        let kmax = (xmax / step).ceil() as i64 + 1;
        for k in -kmax..=kmax {
            let z = C64::new(step * (k as f64 + theta), y);
            let w = (z - i) / (z + i);
            if w.norm() < radius {
                points.push(w);
            }
        }
    }
    Ok(points)
}

/// Counting-measure sample of a point set.
pub fn lattice_sample(points: &[C64]) -> HypersurfaceSample {
    HypersurfaceSample {
        points: points
            .iter()
            .map(|&a| BallPoint::new_unchecked(vec![a]))
            .collect(),
        frames: vec![Vec::new(); points.len()],
        area_weights: vec![1.0; points.len()],
        warning: None,
    }
}

/// Mean local density of a point set for `κ_β` over probes at the origin and
/// at six points of modulus `probe_radius`.
pub fn lattice_density(points: &[C64], beta: f64, r: f64, probe_radius: f64) -> Result<f64> {
    let t = PointDivisor::new(points.to_vec())?;
    let weight = Weight::log_family(beta)?;
    let mut probes = vec![C64::new(0.0, 0.0)];
    probes.extend((0..6).map(|j| C64::from_polar(probe_radius, TAU * (j as f64 + 0.5) / 6.0)));
    let opts = AverageOptions::default();
    let vals: Vec<Result<f64>> = probes
        .par_iter()
        .map(|&z| local_density(&t, &weight, &BallPoint::new(vec![z])?, r, &opts))
        .collect();
    let mut acc = 0.0;
    for v in &vals {
        acc += v.clone()?;
    }
    Ok(acc / vals.len() as f64)
}

/// Parameters of [`seip_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeipOptions {
    pub beta: f64,
    pub degree: u32,
    pub separations: Vec<f64>,
    pub seed: u64,
    /// Lattices are generated to this pseudoradius.
    pub radius: f64,
    /// Radius `r` of the local densities.
    pub density_radius: f64,
    pub probe_radius: f64,
}

impl Default for SeipOptions {
    fn default() -> Self {
        Self {
            beta: 3.0,
            degree: 12,
            separations: vec![0.7, 0.8, 0.85, 0.9, 0.95],
            seed: 1,
            radius: 0.99,
            density_radius: 0.9,
            probe_radius: 0.3,
        }
    }
}

/// One lattice of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeipRow {
    pub separation: f64,
    pub density_estimate: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Worst `‖F‖^2 / ∫_W |f|^2 e^{−κ}` of least-norm extensions, see [`extension_constant`].
    pub extension_norm_ratio: f64,
    pub nodes: usize,
}

/// Sampling constants, extension constant and density of disk lattices for
/// `κ_β` in the space of polynomials of degree `≤ degree`.
pub fn seip_sweep(opts: &SeipOptions) -> Result<Vec<SeipRow>> {
    let weight = Weight::log_family(opts.beta)?;
    let space = build_space(1, opts.degree, &weight, &SpaceQuadrature::default())?;
    let mut rows = Vec::with_capacity(opts.separations.len());
    for &s in &opts.separations {
        let points = lattice_points(s, opts.radius, opts.seed)?;
        let t = PointDivisor::new(points.clone())?;
        let rd = restriction(&space, &t, &lattice_sample(&points))?;
        let (lambda_min, lambda_max) = sampling_constants(&rd)?;
        rows.push(SeipRow {
            separation: s,
            density_estimate: lattice_density(
                &points,
                opts.beta,
                opts.density_radius,
                opts.probe_radius,
            )?,
            lambda_min,
            lambda_max,
            extension_norm_ratio: extension_constant(&rd)?,
            nodes: points.len(),
        });
    }
    Ok(rows)
}
