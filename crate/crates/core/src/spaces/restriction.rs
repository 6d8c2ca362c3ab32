use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{quadratic, TruncatedSpace};
use crate::error::{Error, Result};
use crate::hypersurface::HypersurfaceSample;
use crate::poly::DefiningFunction;
use crate::C64;

/// Relative spectral cutoff for kernel solves.
pub const SPECTRAL_CUTOFF: f64 = 1e-12;

const DUPLICATE_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;

/// A truncated space together with its restriction to a sample of `W`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestrictionData {
    pub space: TruncatedSpace,
    pub w_sample: HypersurfaceSample,
    /// `∫_W conj(z^α) z^β e^{−κ} ω_B^{n−1}`.
    pub gram_w: DMatrix<C64>,
    /// `K(w_i, w_j)`.
    pub kernel_at_nodes: DMatrix<C64>,
    /// Area weight times `e^{−κ}` at each node.
    pub node_weights: Vec<f64>,
    /// Row `i` holds the monomials at node `i`.
    pub evaluations: DMatrix<C64>,
    /// Duplicate nodes were found and a ridge was added to the kernel matrix.
    pub regularized: bool,
}

/// Restrict `space` to the sample of `W = {T = 0}`.
pub fn restriction(
    space: &TruncatedSpace,
    t: &(impl DefiningFunction + ?Sized),
    w_sample: &HypersurfaceSample,
) -> Result<RestrictionData> {
    if t.dim() != space.n {
        return Err(Error::DimensionMismatch {
            expected: space.n,
            got: t.dim(),
        });
    }
    for p in &w_sample.points {
        if p.dim() != space.n {
            return Err(Error::DimensionMismatch {
                expected: space.n,
                got: p.dim(),
            });
        }
        let g: f64 = t
            .gradient(p.coords())
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let resid = t.value(p.coords()).norm();
        if resid > RESIDUAL_TOL * (1.0 + g) {
            return Err(Error::InvalidParameter(format!(
                "sample point {:?} is off W (|T| = {resid:e})",
                p.parts()
            )));
        }
    }
    let m = w_sample.len();
    let size = space.size();
    let mut node_weights = Vec::with_capacity(m);
    for (p, a) in w_sample.points.iter().zip(&w_sample.area_weights) {
        node_weights.push(a * (-space.weight.value(p.coords())?).exp());
    }
    let mut evaluations = DMatrix::<C64>::zeros(m, size);
    for (i, p) in w_sample.points.iter().enumerate() {
        for (j, v) in space.monomials(p.coords()).into_iter().enumerate() {
            evaluations[(i, j)] = v;
        }
    }
    let weighted = DMatrix::from_fn(m, size, |i, j| evaluations[(i, j)] * node_weights[i]);
    let gram_w = evaluations.adjoint() * weighted;
    let gram_w = (&gram_w + gram_w.adjoint()) * C64::new(0.5, 0.0);
    let mut kernel = &evaluations * &space.gram_inverse * evaluations.adjoint();
    kernel = (&kernel + kernel.adjoint()) * C64::new(0.5, 0.0);
    let mut regularized = false;
    'outer: for i in 0..m {
        for j in 0..i {
            let d: f64 = w_sample.points[i]
                .coords()
                .iter()
                .zip(w_sample.points[j].coords())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if d < DUPLICATE_TOL {
                regularized = true;
                break 'outer;
            }
        }
    }
    if regularized {
        let ridge = 1e-12 * (0..m).map(|i| kernel[(i, i)].re).fold(0.0, f64::max);
        for i in 0..m {
            kernel[(i, i)] += C64::new(ridge, 0.0);
        }
    }
    Ok(RestrictionData {
        space: space.clone(),
        w_sample: w_sample.clone(),
        gram_w,
        kernel_at_nodes: kernel,
        node_weights,
        evaluations,
        regularized,
    })
}

/// Eigenvalues of `(a, b)` with `b` positive definite, ascending.
fn generalized_eigenvalues(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Vec<f64>> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("ball Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L^{-1} A L^{-†}
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.adjoint())
        .ok_or_else(|| Error::LinearAlgebra("singular Cholesky factor".into()))?;
    let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    let mut vals: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `(λ_min, λ_max)` of `∫_W |F|^2 e^{−κ} / ∫_B |F|^2 e^{−κ}` over the space:
/// the extreme generalized eigenvalues of `(gram_w, gram_ball)`.
pub fn sampling_constants(rd: &RestrictionData) -> Result<(f64, f64)> {
    if rd.w_sample.is_empty() {
        return Ok((0.0, 0.0));
    }
    let vals = generalized_eigenvalues(&rd.gram_w, &rd.space.gram_ball)?;
    Ok((vals[0].max(0.0), vals[vals.len() - 1].max(0.0)))
}

/// Worst ratio `‖F‖^2 / ∫_W |f|^2 e^{−κ}` of the least-norm extension `F` of
/// data `f` that are restrictions of space elements.
///
/// With `Y = V L^{−†}` (`V` the node evaluations, `gram_ball = L L†`) the
/// kernel matrix is `Y Y†`, and the ratio is the reciprocal of the smallest
/// sampling eigenvalue on the range of `Y†`, whose dimension is the rank of
/// `V`. For `m ≥ N` distinct nodes this is `1/λ_min`.
pub fn extension_constant(rd: &RestrictionData) -> Result<f64> {
    if rd.w_sample.is_empty() {
        return Ok(f64::INFINITY);
    }
    let vals = generalized_eigenvalues(&rd.gram_w, &rd.space.gram_ball)?;
    let top = vals[vals.len() - 1];
    if !(top > 0.0) {
        return Ok(f64::INFINITY);
    }
    let sv = rd.evaluations.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv
        .iter()
        .filter(|&&s| s > 1e-10 * smax)
        .count()
        .min(vals.len());
    let lambda = vals[vals.len() - rank];
    Ok(if lambda > 0.0 {
        1.0 / lambda
    } else {
        f64::INFINITY
    })
}

/// Minimal-norm interpolant of node data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extension {
    /// Monomial coefficients of the extension.
    pub coefficients: Vec<C64>,
    /// `‖F‖^2 = f† c` with `K c = f`.
    pub norm_sq: f64,
    /// `λ_max / λ_min` of the kernel matrix.
    pub condition: f64,
    /// Condition above `1/SPECTRAL_CUTOFF`; the solve used a truncated spectral inverse.
    pub ill_conditioned: bool,
}

/// Least-norm extension of `values` at the sample nodes:
/// `F = Σ c_i K(·, w_i)` with `K c = values`.
pub fn least_norm_extension(rd: &RestrictionData, values: &[C64]) -> Result<Extension> {
    let m = rd.w_sample.len();
    if values.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: values.len(),
        });
    }
    let size = rd.space.size();
    if m == 0 {
        return Ok(Extension {
            coefficients: vec![C64::new(0.0, 0.0); size],
            norm_sq: 0.0,
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    let eig = rd.kernel_at_nodes.clone().symmetric_eigen();
    let lmax = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let lmin = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    let cutoff = SPECTRAL_CUTOFF * lmax;
    let f = nalgebra::DVector::from_column_slice(values);
    let mut c = nalgebra::DVector::<C64>::zeros(m);
    for k in 0..m {
        let lam = eig.eigenvalues[k];
        if lam > cutoff {
            let u = eig.eigenvectors.column(k);
            let proj = u.dotc(&f);
            c += u * (proj / lam);
        }
    }
    let coeffs = &rd.space.gram_inverse * rd.evaluations.adjoint() * &c;
    let norm_sq = f.dotc(&c).re.max(0.0);
    Ok(Extension {
        coefficients: coeffs.iter().copied().collect(),
        norm_sq,
        condition,
        ill_conditioned: condition > 1.0 / SPECTRAL_CUTOFF,
    })
}

impl RestrictionData {
    /// `∫_W |F|^2 e^{−κ} ω_B^{n−1}` for coefficients `c`.
    pub fn w_norm_sq(&self, c: &[C64]) -> f64 {
        quadratic(&self.gram_w, c)
    }

    /// Node data `∫_W |f|^2 e^{−κ}` for values at the nodes.
    pub fn data_norm_sq(&self, values: &[C64]) -> f64 {
        values
            .iter()
            .zip(&self.node_weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum()
    }
}
