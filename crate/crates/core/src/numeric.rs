//! Small numerical building blocks shared across modules: Gauss rules on
//! intervals, pairwise summation and univariate complex root finding.

use gauss_quad::{GaussJacobi, GaussLegendre};
use num_complex::Complex64 as C64;

/// Sum in a fixed binary tree so the result does not depend on how the terms
/// were produced (serial or parallel).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Complex counterpart of [`pairwise_sum`].
pub fn pairwise_sum_c(values: &[C64]) -> C64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_c(&values[..mid]) + pairwise_sum_c(&values[mid..])
}

/// A Gauss rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Legendre rule with `m` nodes (`m = 1` gives the midpoint rule).
    pub fn legendre(m: usize) -> Self {
        if m <= 1 {
            return Self {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let pairs = GaussLegendre::new(m)
            .expect("degree >= 2")
            .into_node_weight_pairs();
        Self::from_pairs(pairs)
    }

    /// Gauss–Jacobi rule for the weight `(1 - x)^alpha (1 + x)^beta`.
    pub fn jacobi(m: usize, alpha: f64, beta: f64) -> Self {
        let m = m.max(2);
        if alpha == 0.0 && beta == 0.0 {
            return Self::legendre(m);
        }
        let pairs = GaussJacobi::new(m, alpha, beta)
            .expect("alpha, beta > -1")
            .into_node_weight_pairs();
        Self::from_pairs(pairs)
    }

    fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self.on_interval(a, b).map(|(x, w)| w * f(x)).collect();
        pairwise_sum(&terms)
    }
}

/// Uniform periodic nodes `2π (j + 1/2) / m` with equal weights summing to one.
pub fn periodic_nodes(m: usize) -> Vec<f64> {
    let m = m.max(1);
    (0..m)
        .map(|j| 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
        .collect()
}

/// Evaluate a polynomial with ascending coefficients.
pub fn horner(coeffs: &[C64], x: C64) -> C64 {
    coeffs
        .iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn horner_with_derivative(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Multiply two polynomials given by ascending coefficients.
pub fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// All roots of a polynomial with ascending coefficients.
///
/// Leading coefficients that vanish exactly are dropped first. Degrees one
/// and two are solved in closed form; higher degrees use the Aberth–Ehrlich
/// iteration followed by a couple of Newton polishing steps.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == C64::new(0.0, 0.0) {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let c = &coeffs[..deg];
    let degree = deg - 1;
    match degree {
        1 => vec![-c[0] / c[1]],
        2 => quadratic_roots(c[0], c[1], c[2]),
        _ => aberth(c),
    }
}

fn quadratic_roots(c: C64, b: C64, a: C64) -> Vec<C64> {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // pick the sign that avoids cancellation
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q == C64::new(0.0, 0.0) {
        return vec![C64::new(0.0, 0.0); 2];
    }
    vec![q / a, c / q]
}

fn aberth(c: &[C64]) -> Vec<C64> {
    let degree = c.len() - 1;
    let lead = c[degree];
    // Cauchy-type bound for the initial circle.
    let radius = c[..degree]
        .iter()
        .map(|x| (x / lead).norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let rho = (1.0 + radius).min(radius.powf(1.0 / degree as f64) * 2.0 + 1e-3);
    let mut z: Vec<C64> = (0..degree)
        .map(|k| {
            C64::from_polar(
                rho,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64 + 0.4,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..degree {
            let (p, dp) = horner_with_derivative(c, z[i]);
            if p == C64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut sum = C64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let diff = z[i] - zj;
                    if diff != C64::new(0.0, 0.0) {
                        sum += 1.0 / diff;
                    }
                }
            }
            let step = ratio / (1.0 - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for root in &mut z {
        for _ in 0..2 {
            let (p, dp) = horner_with_derivative(c, *root);
            if dp.norm() > 0.0 {
                let step = p / dp;
                if step.is_finite() && step.norm() < 1e-6 * (1.0 + root.norm()) {
                    *root -= step;
                }
            }
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(6);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_weight_is_applied() {
        // ∫_{-1}^{1} (1-x)^2 (1+x) dx = 4/3
        let rule = GaussRule::jacobi(4, 2.0, 1.0);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 4.0 / 3.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-10);
    }

    #[test]
    fn roots_of_known_polynomials() {
        let want = [
            C64::new(0.3, 0.1),
            C64::new(-0.5, 0.2),
            C64::new(0.0, -0.7),
            C64::new(1.5, 0.0),
        ];
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in &want {
            coeffs = poly_mul(&coeffs, &[-r, C64::new(1.0, 0.0)]);
        }
        let got = poly_roots(&coeffs);
        assert_eq!(got.len(), 4);
        for r in want {
            let best = got
                .iter()
                .map(|g| (g - r).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "{r} missing: {got:?}");
        }
    }

    #[test]
    fn quadratic_is_stable_for_small_root() {
        // (x - 1e-9)(x - 1e3)
        let coeffs = [
            C64::new(1e-6, 0.0),
            C64::new(-(1e3 + 1e-9), 0.0),
            C64::new(1.0, 0.0),
        ];
        let roots = poly_roots(&coeffs);
        let small = roots.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
        assert!((small - 1e-9).abs() < 1e-20);
    }
}
