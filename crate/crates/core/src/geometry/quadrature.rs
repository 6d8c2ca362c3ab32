use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::{ball_volume, volume_density_raw};
use super::mobius::MobiusMap;
use super::point::BallPoint;
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, periodic_nodes, GaussRule};

/// How the nodes of a [`QuadratureRule`] were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Gauss–Legendre in the radius (and Hopf angle for `n = 2`) times
    /// uniform nodes in each coordinate phase.
    Product,
    /// Seeded uniform samples of the Euclidean ball, reweighted by the
    /// Bergman volume density.
    MonteCarlo,
}

/// Node counts and policies for ball quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub kind: RuleKind,
    /// Gauss nodes in the radius.
    pub radial: usize,
    /// Nodes per angle (phases, and the Hopf angle when `n = 2`).
    pub angular: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Pseudoradius of the excluded shell around a point singularity.
    pub shell: f64,
    /// Gauss nodes per geometric panel near a point singularity.
    pub panel_nodes: usize,
}

impl QuadOptions {
    /// Defaults by dimension: 48×48 for `n = 1`, 24 per coordinate for
    /// `n = 2`, Monte Carlo with 200 000 samples beyond.
    pub fn for_dim(n: usize) -> Self {
        let (kind, radial, angular) = match n {
            1 => (RuleKind::Product, 48, 48),
            2 => (RuleKind::Product, 24, 24),
            _ => (RuleKind::MonteCarlo, 0, 0),
        };
        Self {
            kind,
            radial,
            angular,
            mc_samples: 200_000,
            seed: 0x5eed,
            shell: 1e-6,
            panel_nodes: 8,
        }
    }

    /// The same options with every node count doubled.
    pub fn refined(&self) -> Self {
        Self {
            radial: self.radial * 2,
            angular: self.angular * 2,
            mc_samples: self.mc_samples * 2,
            panel_nodes: self.panel_nodes * 2,
            ..self.clone()
        }
    }
}

/// Nodes and positive weights for `∫_{B(0,r)} · ω_B^n`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<BallPoint>,
    pub weights: Vec<f64>,
    pub seed: Option<u64>,
    pub kind: RuleKind,
    pub radius: f64,
}

impl QuadratureRule {
    /// Rule for the Bergman volume on the Euclidean ball `B(0, r)`.
    pub fn bergman_ball(n: usize, r: f64, opts: &QuadOptions) -> Result<Self> {
        ball_volume(n, r)?;
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match (opts.kind, n) {
            (RuleKind::Product, 1) => Ok(Self::product_1(r, opts)),
            (RuleKind::Product, 2) => Ok(Self::product_2(r, opts)),
            (RuleKind::Product, _) => Err(Error::InvalidParameter(
                "product rules are available for n <= 2; use Monte Carlo".into(),
            )),
            (RuleKind::MonteCarlo, _) => Ok(Self::monte_carlo(n, r, opts)),
        }
    }

    fn product_1(r: f64, opts: &QuadOptions) -> Self {
        let radial = GaussRule::legendre(opts.radial);
        let angles = periodic_nodes(opts.angular);
        let dtheta = 2.0 * PI / angles.len() as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (rho, w) in radial.on_interval(0.0, r) {
            let radial_w = w * rho * volume_density_raw(1, rho * rho) * dtheta;
            for &theta in &angles {
                nodes.push(BallPoint::new_unchecked(vec![C64::from_polar(rho, theta)]));
                weights.push(radial_w);
            }
        }
        Self {
            nodes,
            weights,
            seed: None,
            kind: RuleKind::Product,
            radius: r,
        }
    }

    // Hopf coordinates ζ = ρ (cos φ e^{iθ₁}, sin φ e^{iθ₂}); Lebesgue measure
    // is ρ^3 cos φ sin φ dρ dφ dθ₁ dθ₂.
    fn product_2(r: f64, opts: &QuadOptions) -> Self {
        let radial = GaussRule::legendre(opts.radial);
        let polar = GaussRule::legendre(opts.angular);
        let angles = periodic_nodes(opts.angular);
        let dtheta = 2.0 * PI / angles.len() as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (rho, wr) in radial.on_interval(0.0, r) {
            let radial_w = wr * rho.powi(3) * volume_density_raw(2, rho * rho);
            for (phi, wp) in polar.on_interval(0.0, PI / 2.0) {
                let (s, c) = phi.sin_cos();
                let w = radial_w * wp * s * c * dtheta * dtheta;
                for &t1 in &angles {
                    for &t2 in &angles {
                        nodes.push(BallPoint::new_unchecked(vec![
                            C64::from_polar(rho * c, t1),
                            C64::from_polar(rho * s, t2),
                        ]));
                        weights.push(w);
                    }
                }
            }
        }
        Self {
            nodes,
            weights,
            seed: None,
            kind: RuleKind::Product,
            radius: r,
        }
    }

    fn monte_carlo(n: usize, r: f64, opts: &QuadOptions) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let unif = Uniform::new(0.0f64, 1.0);
        let m = opts.mc_samples.max(1);
        let mut fact = 1.0;
        for k in 2..=n {
            fact *= k as f64;
        }
        let lebesgue = PI.powi(n as i32) * r.powi(2 * n as i32) / fact;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for _ in 0..m {
            let dir = random_sphere_point(n, &mut rng);
            let rho = r * unif.sample(&mut rng).powf(1.0 / (2 * n) as f64);
            let coords: Vec<C64> = dir.iter().map(|c| c * rho).collect();
            weights.push(lebesgue * volume_density_raw(n, rho * rho) / m as f64);
            nodes.push(BallPoint::new_unchecked(coords));
        }
        Self {
            nodes,
            weights,
            seed: Some(opts.seed),
            kind: RuleKind::MonteCarlo,
            radius: r,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, BallPoint::dim)
    }

    /// `Σ w_i g(ζ_i)` with a standard-error estimate (zero for product rules).
    pub fn integrate_with_error<G>(&self, g: G) -> Result<(f64, f64)>
    where
        G: Fn(&BallPoint) -> f64 + Sync,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(z, w)| w * g(z))
            .collect();
        if let Some(k) = terms.iter().position(|t| !t.is_finite()) {
            return Err(Error::Quadrature {
                node: self.nodes[k].parts(),
                reason: "integrand is not finite at this node".into(),
            });
        }
        let value = pairwise_sum(&terms);
        let err = match self.kind {
            RuleKind::Product => 0.0,
            RuleKind::MonteCarlo => {
                let m = terms.len() as f64;
                let mean = value / m;
                let var =
                    pairwise_sum(&terms.iter().map(|t| (t - mean).powi(2)).collect::<Vec<_>>())
                        / (m - 1.0).max(1.0);
                (var / m).sqrt() * m
            }
        };
        Ok((value, err))
    }

    pub fn integrate<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(&BallPoint) -> f64 + Sync,
    {
        Ok(self.integrate_with_error(g)?.0)
    }
}

/// `∫_{E(center, r)} g ω_B^n`, computed as `∫_{B(0,r)} g∘F_center ω_B^n`
/// with a rule built by [`QuadratureRule::bergman_ball`] for radius `r`.
pub fn quad_ball<G>(g: G, center: &BallPoint, rule: &QuadratureRule) -> Result<f64>
where
    G: Fn(&BallPoint) -> f64 + Sync,
{
    if center.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: center.dim(),
        });
    }
    let s = center.norm_sqr();
    if !(s < 1.0) {
        return Err(Error::OutsideBall { norm_sq: s });
    }
    let map = MobiusMap::new(center.clone());
    rule.integrate(|zeta| g(&BallPoint::new_unchecked(map.apply_raw(zeta.coords()))))
}

/// Normalized measure on the unit sphere of `C^n` (or on its complex lines).
#[derive(Debug, Clone)]
pub struct DirectionRule {
    pub directions: Vec<Vec<C64>>,
    /// Positive weights summing to one.
    pub weights: Vec<f64>,
}

impl DirectionRule {
    /// Uniform probability on `S^{2n−1}`: phases for `n = 1`, Hopf
    /// coordinates for `n = 2`, seeded random points beyond.
    pub fn sphere(n: usize, angular: usize, mc_samples: usize, seed: u64) -> Self {
        match n {
            1 => {
                let angles = periodic_nodes(angular);
                let w = 1.0 / angles.len() as f64;
                Self {
                    directions: angles
                        .iter()
                        .map(|&t| vec![C64::from_polar(1.0, t)])
                        .collect(),
                    weights: vec![w; angles.len()],
                }
            }
            2 => {
                let polar = GaussRule::legendre(angular);
                let angles = periodic_nodes(angular);
                let m2 = (angles.len() * angles.len()) as f64;
                let mut directions = Vec::new();
                let mut weights = Vec::new();
                for (phi, wp) in polar.on_interval(0.0, PI / 2.0) {
                    let (s, c) = phi.sin_cos();
                    for &t1 in &angles {
                        for &t2 in &angles {
                            directions.push(vec![C64::from_polar(c, t1), C64::from_polar(s, t2)]);
                            weights.push(2.0 * wp * s * c / m2);
                        }
                    }
                }
                Self {
                    directions,
                    weights,
                }
            }
            _ => Self::random(n, mc_samples, seed),
        }
    }

    /// Probability on complex lines through the origin (`CP^{n−1}` with the
    /// Fubini–Study measure), one unit representative per line.
    pub fn complex_lines(n: usize, angular: usize, mc_samples: usize, seed: u64) -> Self {
        match n {
            1 => Self {
                directions: vec![vec![C64::new(1.0, 0.0)]],
                weights: vec![1.0],
            },
            2 => {
                let polar = GaussRule::legendre(angular);
                let angles = periodic_nodes(angular);
                let m = angles.len() as f64;
                let mut directions = Vec::new();
                let mut weights = Vec::new();
                for (phi, wp) in polar.on_interval(0.0, PI / 2.0) {
                    let (s, c) = phi.sin_cos();
                    for &psi in &angles {
                        directions.push(vec![C64::new(c, 0.0), C64::from_polar(s, psi)]);
                        weights.push(2.0 * wp * s * c / m);
                    }
                }
                Self {
                    directions,
                    weights,
                }
            }
            _ => Self::random(n, mc_samples, seed),
        }
    }

    fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = m.max(1);
        Self {
            directions: (0..m).map(|_| random_sphere_point(n, &mut rng)).collect(),
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

pub(crate) fn random_sphere_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// `|S^{2n−1}| = 2π^n / (n−1)!`.
pub(crate) fn sphere_area(n: usize) -> f64 {
    let mut fact = 1.0;
    for k in 2..n {
        fact *= k as f64;
    }
    2.0 * PI.powi(n as i32) / fact
}

/// `∫_{E(center, r)} g ω_B^n` for `g` with an integrable singularity at
/// `singular` (typically logarithmic).
///
/// The region is pulled back by `F_singular`, where it becomes the
/// Bergman–Green ball `E(F_singular(center), r)` and the singularity sits at
/// the origin. Radial integrals use geometric panels clustered at the origin;
/// the shell of pseudoradius `opts.shell` around the singularity is excluded.
/// For a logarithmic singularity that shell carries mass
/// `O(shell^{2n} log shell)`.
pub fn quad_ball_point_singular<G>(
    g: G,
    center: &BallPoint,
    r: f64,
    singular: &BallPoint,
    opts: &QuadOptions,
) -> Result<f64>
where
    G: Fn(&BallPoint) -> f64 + Sync,
{
    let n = center.dim();
    if singular.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: singular.dim(),
        });
    }
    ball_volume(n, r)?;
    let to_sing = MobiusMap::new(singular.clone());
    let image_center = to_sing.apply(center)?;
    let region = MobiusMap::new(image_center);
    if region.center().norm() >= r {
        // singular point outside the closed region: plain rule suffices
        let rule = QuadratureRule::bergman_ball(n, r, opts)?;
        return quad_ball(g, center, &rule);
    }
    let dirs = DirectionRule::sphere(
        n,
        opts.angular.max(4),
        opts.mc_samples.min(20_000),
        opts.seed,
    );
    let panel = GaussRule::legendre(opts.panel_nodes.max(2));
    let area = sphere_area(n);
    let r2 = r * r;
    let inside = |rho: f64, u: &[C64]| {
        let x: Vec<C64> = u.iter().map(|c| c * rho).collect();
        let fx = region.apply_raw(&x);
        fx.iter().map(|c| c.norm_sqr()).sum::<f64>() < r2
    };
    let per_dir: Vec<Result<f64>> = dirs
        .directions
        .par_iter()
        .map(|u| {
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(mid, u) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let outer = lo;
            let mut terms = Vec::new();
            let mut b = outer;
            while b > opts.shell {
                let a = (b * 0.25).max(opts.shell);
                for (rho, w) in panel.on_interval(a, b) {
                    let x: Vec<C64> = u.iter().map(|c| c * rho).collect();
                    let y = to_sing.apply_raw(&x);
                    let val = g(&BallPoint::new_unchecked(y));
                    if !val.is_finite() {
                        return Err(Error::Quadrature {
                            node: x.iter().map(|c| (c.re, c.im)).collect(),
                            reason: "integrand is not finite near the singular point".into(),
                        });
                    }
                    terms.push(
                        w * rho.powi(2 * n as i32 - 1) * volume_density_raw(n, rho * rho) * val,
                    );
                }
                b = a;
            }
            Ok(pairwise_sum(&terms))
        })
        .collect();
    let mut vals = Vec::with_capacity(per_dir.len());
    for (v, w) in per_dir.into_iter().zip(&dirs.weights) {
        vals.push(v? * w);
    }
    Ok(area * pairwise_sum(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_weights_are_probabilities() {
        for n in 1..=3 {
            let s: f64 = DirectionRule::sphere(n, 8, 100, 1).weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            let s: f64 = DirectionRule::complex_lines(n, 8, 100, 1)
                .weights
                .iter()
                .sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_rule_second_moments() {
        // E|u_1|^2 = 1/n on the sphere
        let d = DirectionRule::sphere(2, 8, 0, 0);
        let m: f64 = d
            .directions
            .iter()
            .zip(&d.weights)
            .map(|(u, w)| w * u[0].norm_sqr())
            .sum();
        assert!((m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_over_ball_in_one_variable() {
        let rule = QuadratureRule::bergman_ball(1, 0.5, &QuadOptions::for_dim(1)).unwrap();
        let v = rule.integrate(|_| 1.0).unwrap();
        assert!((v - ball_volume(1, 0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn singular_rule_integrates_constants() {
        let c = BallPoint::from_parts(&[(0.3, -0.1)]).unwrap();
        let p = BallPoint::from_parts(&[(0.4, 0.1)]).unwrap();
        let opts = QuadOptions {
            angular: 64,
            ..QuadOptions::for_dim(1)
        };
        let v = quad_ball_point_singular(|_| 1.0, &c, 0.6, &p, &opts).unwrap();
        let exact = ball_volume(1, 0.6).unwrap();
        assert!((v - exact).abs() < 1e-6 * exact, "{v} vs {exact}");
    }
}
