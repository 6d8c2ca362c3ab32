use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{log_tail, BallPoint, DirectionRule, MobiusMap};
use crate::hypersurface::PatchOptions;
use crate::numeric::{pairwise_sum, periodic_nodes, GaussRule};
use crate::poly::{DefiningFunction, LineData};
use crate::C64;

/// Quadrature over complex lines through the center and the finite
/// difference step of the density tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageOptions {
    /// Azimuthal nodes of the line rule for `n = 2`.
    pub lines: usize,
    /// Gauss nodes per polar panel for `n = 2`; panels end where a zero
    /// crosses the circle of radius `r`.
    pub polar: usize,
    /// Random lines for `n ≥ 3`.
    pub mc_lines: usize,
    pub seed: u64,
    /// Finite-difference step for the complex Hessian.
    pub h_fd: f64,
    /// Step halvings allowed after a positivity failure.
    pub max_halvings: usize,
    #[serde(default)]
    pub method: UpsilonMethod,
    /// Patch quadrature for the Green route.
    #[serde(default)]
    pub patch: PatchOptions,
}

/// How `Υ_r` is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpsilonMethod {
    /// The Green route in dimension two (difference quotients at points of
    /// `W`, where its integrand is singular), difference quotients otherwise.
    #[default]
    Auto,
    /// Difference quotients of [`averaged_potential`].
    FiniteDifference,
    /// `−2π ∫_{W ∩ E(z,r)} i∂∂̄_z Γ_r(z, ζ)` over a patch of `W`; see
    /// [`crate::potential::upsilon_green`].
    GreenForm,
}

impl UpsilonMethod {
    pub fn resolve(self, n: usize) -> Self {
        match self {
            Self::Auto if n == 2 => Self::GreenForm,
            Self::Auto => Self::FiniteDifference,
            m => m,
        }
    }
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self {
            lines: 32,
            polar: 16,
            mc_lines: 4096,
            seed: 0x11e5,
            h_fd: 2.5e-4,
            max_halvings: 3,
            method: UpsilonMethod::Auto,
            patch: PatchOptions::default(),
        }
    }
}

/// Scan points per azimuth used to bracket crossings `|λ_j| = r`.
const SCAN: usize = 16;
/// Bisection steps per crossing; the integrand is `C^1` there, so the
/// bracketing error enters cubically.
const BISECT: usize = 18;

pub(crate) enum LineRule {
    Fixed(DirectionRule),
    /// `n = 2`: lines `(cos φ, sin φ e^{iψ})` with `sin 2φ dφ dψ/2π`, split in
    /// `φ` where a zero crosses the circle of radius `r`.
    Split {
        angles: Vec<f64>,
        panel: GaussRule,
    },
}

impl AverageOptions {
    pub(crate) fn rule(&self, n: usize) -> LineRule {
        if n == 2 {
            LineRule::Split {
                angles: periodic_nodes(self.lines),
                panel: GaussRule::legendre(self.polar),
            }
        } else {
            LineRule::Fixed(DirectionRule::complex_lines(
                n,
                self.lines,
                self.mc_lines,
                self.seed,
            ))
        }
    }
}

/// `(1/V_n(r)) ∫_0^r max(log a^2, log ρ^2) dV_n(ρ)`: the `B(0,r)` mean of the
/// circle means of `log|λ − a|^2`-type factors, for a zero at modulus `a`.
///
/// Closed form: `log a^2` for `a ≥ r`, otherwise
/// `log r^2 − (I_n(W_r) − I_n(W_a)) / W_r^n` with `W_x = x^2 / (1 − x^2)`.
pub fn zero_mean(n: usize, a: f64, r: f64) -> f64 {
    if a >= r {
        return (a * a).ln();
    }
    let wr = r * r / (1.0 - r * r);
    let wa = a * a / (1.0 - a * a);
    (r * r).ln() - (log_tail(n, wr) - log_tail(n, wa)) / wr.powi(n as i32)
}

/// `zero_mean(a) − log a^2`: nonnegative, zero for `a ≥ r`, `C^1` at `a = r`.
pub fn zero_excess(n: usize, a: f64, r: f64) -> f64 {
    if a >= r {
        return 0.0;
    }
    let wr = r * r / (1.0 - r * r);
    let wa = a * a / (1.0 - a * a);
    (r * r / (a * a)).ln() - (log_tail(n, wr) - log_tail(n, wa)) / wr.powi(n as i32)
}

/// Ball average of `log|T ∘ F_z|^2` along one line, from its zero data.
pub(crate) fn line_average(n: usize, data: &LineData, r: f64) -> f64 {
    let terms: Vec<f64> = data
        .roots
        .iter()
        .map(|l| zero_mean(n, l.norm(), r))
        .collect();
    data.log_lead + pairwise_sum(&terms)
}

/// Sum of [`zero_excess`] over the zeros of one line.
pub(crate) fn line_excess(n: usize, data: &LineData, r: f64) -> f64 {
    let terms: Vec<f64> = data
        .roots
        .iter()
        .map(|l| zero_excess(n, l.norm(), r))
        .collect();
    pairwise_sum(&terms)
}

fn inside(data: &LineData, r: f64) -> usize {
    data.roots.iter().filter(|l| l.norm() < r).count()
}

fn split_direction(phi: f64, psi: f64) -> [C64; 2] {
    let (s, c) = phi.sin_cos();
    [C64::new(c, 0.0), C64::from_polar(s, psi)]
}

/// Mean of `g(line data)` over complex lines through `center`.
pub(crate) fn line_mean<F>(
    t: &(impl DefiningFunction + ?Sized),
    map: &MobiusMap,
    r: f64,
    rule: &LineRule,
    g: F,
) -> f64
where
    F: Fn(&LineData) -> f64,
{
    match rule {
        LineRule::Fixed(d) => {
            let vals: Vec<f64> = d
                .directions
                .iter()
                .zip(&d.weights)
                .map(|(u, w)| w * g(&t.line_data(map, u)))
                .collect();
            pairwise_sum(&vals)
        }
        LineRule::Split { angles, panel } => {
            let per_angle: Vec<f64> = angles
                .iter()
                .map(|&psi| {
                    let count = |s: f64| inside(&t.line_data(map, &split_direction(s, psi)), r);
                    let step = FRAC_PI_2 / SCAN as f64;
                    let mut cuts = vec![0.0];
                    let mut prev = count(0.0);
                    for k in 1..=SCAN {
                        let b = k as f64 * step;
                        let cb = count(b);
                        if cb != prev {
                            let (mut lo, mut hi) = (b - step, b);
                            for _ in 0..BISECT {
                                let mid = 0.5 * (lo + hi);
                                if count(mid) == prev {
                                    lo = mid;
                                } else {
                                    hi = mid;
                                }
                            }
                            cuts.push(0.5 * (lo + hi));
                        }
                        prev = cb;
                    }
                    cuts.push(FRAC_PI_2);
                    let terms: Vec<f64> = cuts
                        .windows(2)
                        .flat_map(|w| panel.on_interval(w[0], w[1]).collect::<Vec<_>>())
                        .map(|(phi, wt)| {
                            wt * (2.0 * phi).sin()
                                * g(&t.line_data(map, &split_direction(phi, psi)))
                        })
                        .collect();
                    pairwise_sum(&terms)
                })
                .collect();
            pairwise_sum(&per_angle) / angles.len() as f64
        }
    }
}

fn check_inputs(n: usize, z: &BallPoint, r: f64) -> Result<()> {
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
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in [0, 1), got {r}"
        )));
    }
    Ok(())
}

/// `(1/V_n(r)) ∫_{B(0,r)} log|T(F_z(ζ))|^2 ω_B^n(ζ)`.
///
/// The ball is fibered by complex lines through the origin. On each line
/// Jensen's formula gives the circle means of `log|T ∘ F_z|^2` exactly from
/// the zeros, and the radial mean is [`zero_mean`] per zero; only the
/// average over lines is a quadrature. For `r = 0` the value is `log|T(z)|^2`.
pub fn averaged_potential(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    opts: &AverageOptions,
) -> Result<f64> {
    let rule = opts.rule(t.dim());
    averaged_potential_with(t, z, r, &rule)
}

pub(crate) fn averaged_potential_with(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    rule: &LineRule,
) -> Result<f64> {
    let n = t.dim();
    check_inputs(n, z, r)?;
    if r == 0.0 {
        return Ok(t.log_modulus_sq(z.coords()));
    }
    let map = MobiusMap::new(z.clone());
    Ok(line_mean(t, &map, r, rule, |d| line_average(n, d, r)))
}

/// `log|T(z)|^2` minus [`averaged_potential`], computed as minus the line
/// mean of the zero excesses so that no cancellation occurs.
pub(crate) fn jensen_deficit(
    t: &(impl DefiningFunction + ?Sized),
    z: &BallPoint,
    r: f64,
    rule: &LineRule,
) -> Result<f64> {
    let n = t.dim();
    check_inputs(n, z, r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let map = MobiusMap::new(z.clone());
    Ok(-line_mean(t, &map, r, rule, |d| line_excess(n, d, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DefiningPolynomial;

    #[test]
    fn zero_mean_is_continuous_at_the_radius_and_dominates_log() {
        for n in 1..=3 {
            let r = 0.6;
            assert!((zero_mean(n, r - 1e-9, r) - zero_mean(n, r, r)).abs() < 1e-7);
            for k in 0..20 {
                let a = k as f64 * 0.03;
                assert!(zero_mean(n, a, r) >= (a * a).ln());
            }
        }
    }

    #[test]
    fn split_rule_integrates_the_line_measure() {
        let opts = AverageOptions::default();
        let one = DefiningPolynomial::constant(2, C64::new(2.0, 0.0)).unwrap();
        let map = MobiusMap::new(BallPoint::origin(2));
        let rule = opts.rule(2);
        // E|u_2|^2 = 1/2 over lines
        let m = line_mean(&one, &map, 0.5, &rule, |d| d.log_lead);
        assert!((m - 4f64.ln()).abs() < 1e-13);
        let hyper = DefiningPolynomial::coordinate(2, 1).unwrap();
        let z = BallPoint::from_parts(&[(0.1, 0.0), (0.05, 0.02)]).unwrap();
        let d = jensen_deficit(&hyper, &z, 0.4, &rule).unwrap();
        let a = averaged_potential_with(&hyper, &z, 0.4, &rule).unwrap();
        assert!((d - (hyper.log_modulus_sq(z.coords()) - a)).abs() < 1e-12);
        assert!(d < 0.0);
    }
}
