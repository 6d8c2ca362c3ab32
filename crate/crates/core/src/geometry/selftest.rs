use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    ball_volume, bergman_metric, green, pseudo_distance, quad_ball, BallPoint, MobiusMap,
    QuadOptions, QuadratureRule,
};
use crate::error::Result;
use crate::C64;

/// Outcome of one geometric identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub name: String,
    /// Largest violation found.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SelfCheck {
    fn new(name: &str, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, max_norm: f64) -> BallPoint {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let s: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if s < 1.0 && s > 0.0 {
            let scale = max_norm * rng.gen_range(0.0f64..1.0);
            return BallPoint::new_unchecked(v.into_iter().map(|c| c * scale).collect());
        }
    }
}

/// Seeded checks of the ball automorphisms, the Bergman metric, the volume
/// quadrature and the Green function in dimensions one to three.
pub fn selftest(seed: u64) -> Result<Vec<SelfCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut involution = 0.0f64;
    let mut endpoints = 0.0f64;
    let mut distance = 0.0f64;
    let mut identity = 0.0f64;
    let mut metric = 0.0f64;
    let mut green_sym = 0.0f64;
    let mut green_sign = 0.0f64;
    for trial in 0..120 {
        let n = 1 + trial % 3;
        let a = random_point(&mut rng, n, 0.9);
        let z = random_point(&mut rng, n, 0.9);
        let w = random_point(&mut rng, n, 0.9);
        let m = MobiusMap::new(a.clone());
        let fz = m.apply(&z)?;
        let back = m.apply(&fz)?;
        involution = involution.max(diff(back.coords(), z.coords()));
        endpoints = endpoints
            .max(diff(m.apply(&BallPoint::origin(n))?.coords(), a.coords()))
            .max(m.apply(&a)?.norm());
        let fw = m.apply(&w)?;
        distance = distance.max((pseudo_distance(&fz, &fw)? - pseudo_distance(&z, &w)?).abs());
        // 1 − |F_a(z)|^2 = (1 − |a|^2)(1 − |z|^2) / |1 − ⟨z, a⟩|^2
        let rhs = (1.0 - a.norm_sqr()) * (1.0 - z.norm_sqr())
            / (C64::new(1.0, 0.0) - z.inner(&a)).norm_sqr();
        identity = identity.max(((1.0 - fz.norm_sqr()) - rhs).abs() / rhs);
        let jac = m.jacobian(z.coords());
        let pulled = jac.transpose() * bergman_metric(&fz)?.matrix * jac.map(|c| c.conj());
        let g_z = bergman_metric(&z)?.matrix;
        metric = metric.max((&pulled - &g_z).norm() / g_z.norm());
        let gzw = green(&z, &w)?;
        green_sym = green_sym.max((gzw - green(&w, &z)?).abs() / (1.0 + gzw.abs()));
        green_sign = green_sign.max(gzw.max(0.0));
    }
    let mut volume = 0.0f64;
    for n in 1..=2 {
        for r in [0.3, 0.7] {
            let rule = QuadratureRule::bergman_ball(n, r, &QuadOptions::for_dim(n))?;
            let c = random_point(&mut rng, n, 0.6);
            let exact = ball_volume(n, r)?;
            volume = volume.max((quad_ball(|_| 1.0, &c, &rule)? - exact).abs() / exact);
        }
    }
    let mut mean_value = 0.0f64;
    let rule = QuadratureRule::bergman_ball(2, 0.7, &QuadOptions::for_dim(2))?;
    let v = ball_volume(2, 0.7)?;
    let center = random_point(&mut rng, 2, 0.5);
    for g in [
        |z: &[C64]| (z[0] * z[1]).re + 0.3,
        |z: &[C64]| (z[0].powu(3) - z[1]).im + 0.3,
    ] {
        let avg = quad_ball(|p| g(p.coords()), &center, &rule)? / v;
        mean_value = mean_value.max((avg - g(center.coords())).abs());
    }
    Ok(vec![
        SelfCheck::new("mobius_involution", involution, 1e-12),
        SelfCheck::new("mobius_endpoints", endpoints, 1e-12),
        SelfCheck::new("pseudo_distance_invariance", distance, 1e-12),
        SelfCheck::new("mobius_norm_identity", identity, 1e-10),
        SelfCheck::new("bergman_metric_invariance", metric, 1e-8),
        SelfCheck::new("ball_volume_quadrature", volume, 1e-6),
        SelfCheck::new("pluriharmonic_mean_value", mean_value, 1e-6),
        SelfCheck::new("green_symmetry", green_sym, 1e-10),
        SelfCheck::new("green_nonpositive", green_sign, 0.0),
    ])
}

fn diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
