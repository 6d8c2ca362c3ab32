use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::average::AverageOptions;
use super::tensor::{spread_directions, upsilon_with, DensityForms};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::geometry::BallPoint;
use crate::poly::DefiningFunction;

/// Fraction of grid cells that may fail before a sweep is rejected.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.1;

/// `D_{z,r}` over a grid and a ladder of radii, with per-radius extremes
/// extrapolated toward `r = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub grid: Vec<BallPoint>,
    pub r_ladder: Vec<f64>,
    /// `values[i][k]` is `D_{grid[i], r_ladder[k]}`, `None` when excluded.
    pub values: Vec<Vec<Option<f64>>>,
    pub sup_curve: Vec<f64>,
    pub inf_curve: Vec<f64>,
    pub extrapolated_plus: f64,
    pub extrapolated_minus: f64,
    /// Per radius, the sup over the grid of the best `θ_v` quotient among
    /// the sampled directions.
    pub theta_sup_curve: Vec<f64>,
    pub excluded: usize,
    /// Cells where `Υ_r` has a step-stable negative eigenvalue.
    pub indefinite_cells: usize,
}

/// Intercept at `x = 0` of the least-squares line through `(x_k, y_k)`.
pub fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    my - (sxy / sxx) * mx
}

/// Fill `D_{z,r}` for every grid point and radius.
///
/// Cells whose difference Hessian fails are excluded and counted; more than
/// 10% exclusions fails the sweep. The limits `r → 1` are approximated by a
/// linear fit in `1 − r` through the last three radii (or fewer if the
/// ladder is shorter).
pub fn density_sweep(
    t: &(impl DefiningFunction + ?Sized),
    weight: &Weight,
    grid: &[BallPoint],
    r_ladder: &[f64],
    opts: &AverageOptions,
    theta_directions: usize,
) -> Result<DensityReport> {
    if grid.is_empty() || r_ladder.is_empty() {
        return Err(Error::InvalidParameter(
            "grid and radius ladder must be non-empty".into(),
        ));
    }
    if r_ladder.windows(2).any(|w| w[1] <= w[0])
        || r_ladder.iter().any(|&r| !(r > 0.0 && r <= 0.95))
    {
        return Err(Error::InvalidParameter(
            "radii must increase within (0, 0.95]".into(),
        ));
    }
    let rule = opts.rule(t.dim());
    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| (0..r_ladder.len()).map(move |k| (i, k)))
        .collect();
    let results: Vec<Result<Option<(f64, f64, bool)>>> = cells
        .par_iter()
        .map(|&(i, k)| {
            let z = &grid[i];
            let ups = match upsilon_with(t, z, r_ladder[k], opts, &rule) {
                Ok(u) => u,
                Err(Error::FiniteDifference { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let indefinite = ups.indefinite;
            let forms = DensityForms::new(ups.form, z, weight)?;
            let d = forms.local_density()?.0;
            let mut best = f64::NEG_INFINITY;
            if theta_directions > 0 {
                for v in spread_directions(&forms.denominator, theta_directions, 0)? {
                    best = best.max(forms.theta(&v)?);
                }
            }
            Ok(Some((d, best, indefinite)))
        })
        .collect();
    let mut values = vec![vec![None; r_ladder.len()]; grid.len()];
    let mut theta = vec![vec![f64::NEG_INFINITY; r_ladder.len()]; grid.len()];
    let mut excluded = 0;
    let mut indefinite_cells = 0;
    for (&(i, k), res) in cells.iter().zip(results) {
        match res? {
            Some((d, th, indef)) => {
                values[i][k] = Some(d);
                theta[i][k] = th;
                indefinite_cells += usize::from(indef);
            }
            None => excluded += 1,
        }
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * cells.len() as f64 {
        return Err(Error::SweepFailed {
            excluded,
            total: cells.len(),
        });
    }
    let mut sup_curve = Vec::new();
    let mut inf_curve = Vec::new();
    let mut theta_sup_curve = Vec::new();
    for k in 0..r_ladder.len() {
        let col: Vec<f64> = values.iter().filter_map(|row| row[k]).collect();
        if col.is_empty() {
            return Err(Error::SweepFailed {
                excluded,
                total: cells.len(),
            });
        }
        sup_curve.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        inf_curve.push(col.iter().copied().fold(f64::INFINITY, f64::min));
        theta_sup_curve.push(
            theta
                .iter()
                .map(|row| row[k])
                .fold(f64::NEG_INFINITY, f64::max),
        );
    }
    let tail = r_ladder.len().min(3);
    let xs: Vec<f64> = r_ladder[r_ladder.len() - tail..]
        .iter()
        .map(|r| 1.0 - r)
        .collect();
    let extrapolated_plus = linear_intercept(&xs, &sup_curve[sup_curve.len() - tail..]);
    let extrapolated_minus = linear_intercept(&xs, &inf_curve[inf_curve.len() - tail..]);
    Ok(DensityReport {
        grid: grid.to_vec(),
        r_ladder: r_ladder.to_vec(),
        values,
        sup_curve,
        inf_curve,
        extrapolated_plus,
        extrapolated_minus,
        theta_sup_curve,
        excluded,
        indefinite_cells,
    })
}

impl DensityReport {
    /// One row per `(z, r)`: real and imaginary parts of `z`, `r`, `D`
    /// (empty when excluded).
    pub fn to_csv(&self) -> String {
        let n = self.grid.first().map_or(0, BallPoint::dim);
        let mut out = String::new();
        for i in 1..=n {
            let _ = write!(out, "z{i}_re,z{i}_im,");
        }
        out.push_str("r,D\n");
        for (z, row) in self.grid.iter().zip(&self.values) {
            for (r, d) in self.r_ladder.iter().zip(row) {
                for c in z.coords() {
                    let _ = write!(out, "{:.12e},{:.12e},", c.re, c.im);
                }
                match d {
                    Some(d) => {
                        let _ = writeln!(out, "{r},{d:.12e}");
                    }
                    None => {
                        let _ = writeln!(out, "{r},");
                    }
                }
            }
        }
        out
    }
}

/// Pseudohyperbolically spaced grid: rings at `tanh(k · artanh(R) / rings)`.
///
/// For `n = 1` ring `k` carries `6k` points; for `n ≥ 2` each ring point is
/// `ρ (cos φ, sin φ e^{iψ}, 0, …)` over a small set of `(φ, ψ)`.
pub fn pseudo_grid(n: usize, max_pseudoradius: f64, rings: usize) -> Result<Vec<BallPoint>> {
    if !(0.0..1.0).contains(&max_pseudoradius) || n == 0 {
        return Err(Error::InvalidParameter(
            "grid radius must lie in [0, 1)".into(),
        ));
    }
    let mut pts = vec![BallPoint::origin(n)];
    let step = max_pseudoradius.atanh() / rings.max(1) as f64;
    for k in 1..=rings {
        let rho = (step * k as f64).tanh();
        if n == 1 {
            let m = 6 * k;
            for j in 0..m {
                let th = std::f64::consts::TAU * j as f64 / m as f64;
                pts.push(BallPoint::new_unchecked(vec![crate::C64::from_polar(
                    rho, th,
                )]));
            }
        } else {
            for &(phi, psi) in &[
                (0.0, 0.0),
                (0.5, 1.0),
                (1.0, 2.5),
                (std::f64::consts::FRAC_PI_2, 4.0),
                (0.8, 5.3),
            ] {
                let mut c = vec![crate::C64::new(0.0, 0.0); n];
                c[0] = crate::C64::new(rho * f64::cos(phi), 0.0);
                c[1] = crate::C64::from_polar(rho * f64::sin(phi), psi);
                pts.push(BallPoint::new_unchecked(c));
            }
        }
    }
    Ok(pts)
}
