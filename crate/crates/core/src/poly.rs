//! Holomorphic defining functions `T` with `W = {T = 0}`.
//!
//! Every defining function can report, for a complex line through a center
//! `z` in direction `u`, the zeros of `λ ↦ T(F_z(λu))` and the log-modulus of
//! the factored leading coefficient. The averaged potential and the singular
//! function are built from that line data by Jensen's formula.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inner, MobiusMap};
use crate::numeric::{poly_mul, poly_roots};

/// One monomial record of the shared text format: `{alpha, re, im}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Zeros of `λ ↦ T(F_z(λu))` written as `c Π (λ − λ_j)` times a factor
/// with no zeros on the unit disk that equals one at `λ = 0`.
///
/// Jensen's formula then gives the circle mean over `|λ| = ρ` as
/// `log|c|^2 + Σ_j max(log|λ_j|^2, log ρ^2)`; roots off the unit disk may be
/// included, they only contribute their fixed `log|λ_j|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineData {
    pub log_lead: f64,
    pub roots: Vec<C64>,
}

impl LineData {
    /// `log|T(z)|^2` recovered from the factorization.
    pub fn log_at_center(&self) -> f64 {
        self.log_lead + self.roots.iter().map(|r| r.norm_sqr().ln()).sum::<f64>()
    }
}

/// How the zero set of a defining function is represented.
#[derive(Debug, Clone, Copy)]
pub enum ZeroLocus<'a> {
    Polynomial(&'a DefiningPolynomial),
    /// A finite set of points (dimension one).
    Points(&'a [C64]),
}

/// A holomorphic function on the ball whose zero set is the hypersurface.
pub trait DefiningFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: &[C64]) -> C64;
    /// Holomorphic gradient `(∂T/∂z_1, …, ∂T/∂z_n)`.
    fn gradient(&self, z: &[C64]) -> Vec<C64>;
    fn log_modulus_sq(&self, z: &[C64]) -> f64 {
        self.value(z).norm_sqr().ln()
    }
    /// Factored data of `λ ↦ T(F_z(λu))` where `z = map.center()`.
    fn line_data(&self, map: &MobiusMap, u: &[C64]) -> LineData;
    fn zero_locus(&self) -> ZeroLocus<'_>;
}

/// A polynomial `T(z) = Σ c_α z^α` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningPolynomial {
    n: usize,
    terms: Vec<(Vec<u32>, C64)>,
}

impl DefiningPolynomial {
    /// Build from `(α, c_α)` pairs; repeated multi-indices are summed and
    /// zero coefficients dropped. Fails on an identically zero result.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: alpha.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidParameter(
                    "coefficients must be finite".into(),
                ));
            }
            *map.entry(alpha).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let terms: Vec<_> = map
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "defining polynomial is identically zero".into(),
            ));
        }
        Ok(Self { n, terms })
    }

    pub fn from_records(n: usize, records: &[Term]) -> Result<Self> {
        Self::new(
            n,
            records
                .iter()
                .map(|t| (t.alpha.clone(), C64::new(t.re, t.im))),
        )
    }

    /// Parse the JSON list-of-records format; the dimension is the length of
    /// the first multi-index.
    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<Term> =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = records
            .first()
            .map(|t| t.alpha.len())
            .ok_or_else(|| Error::Parse("empty polynomial".into()))?;
        Self::from_records(n, &records)
    }

    pub fn to_records(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(a, c)| Term {
                alpha: a.clone(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_records()).expect("records serialize")
    }

    pub fn constant(n: usize, c: C64) -> Result<Self> {
        Self::new(n, [(vec![0; n], c)])
    }

    /// The coordinate function `z_i` (zero-based `i`).
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} out of range"
            )));
        }
        let mut alpha = vec![0; n];
        alpha[i] = 1;
        Self::new(n, [(alpha, C64::new(1.0, 0.0))])
    }

    pub fn terms(&self) -> &[(Vec<u32>, C64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(a, _)| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(self.n, self.terms.iter().map(|(a, k)| (a.clone(), k * c)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Self::new(self.n, self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.push((a.iter().zip(b).map(|(i, j)| i + j).collect(), x * y));
            }
        }
        Self::new(self.n, out)
    }

    /// Affine polynomial `c_0 + Σ c_j z_j`.
    pub fn affine(c0: C64, linear: &[C64]) -> Result<Self> {
        Self::new(linear.len(), Self::affine_raw(c0, linear).terms)
    }

    /// Numerator `N` of the pullback through `F_z`:
    /// `T(F_z(η)) = N(η) / (1 − ⟨η, z⟩)^D` with `D` the degree of `T`.
    /// `N` and `T ∘ F_z` have the same zeros in the ball.
    pub fn pullback(&self, map: &MobiusMap) -> Result<Self> {
        let n = self.n;
        let z = map.center().coords();
        let mz = map.linear_part(z);
        // (M(z − η))_i = (Mz)_i − Σ_j M_ij η_j ; column j of M is M e_j
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            cols.push(map.linear_part(&e));
        }
        let forms: Vec<Self> = (0..n)
            .map(|i| {
                let lin: Vec<C64> = (0..n).map(|j| -cols[j][i]).collect();
                Self::affine_raw(mz[i], &lin)
            })
            .collect();
        let denom = Self::affine_raw(
            C64::new(1.0, 0.0),
            &z.iter().map(|c| -c.conj()).collect::<Vec<_>>(),
        );
        let deg = self.degree();
        let one = Self {
            n,
            terms: vec![(vec![0; n], C64::new(1.0, 0.0))],
        };
        let mut out: Vec<(Vec<u32>, C64)> = Vec::new();
        for (alpha, c) in &self.terms {
            let mut prod = one.clone();
            for (i, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    prod = prod.mul_raw(&forms[i]);
                }
            }
            let total: u32 = alpha.iter().sum();
            for _ in total..deg {
                prod = prod.mul_raw(&denom);
            }
            out.extend(prod.terms.into_iter().map(|(a, x)| (a, x * c)));
        }
        Self::new(n, out)
    }

    fn affine_raw(c0: C64, linear: &[C64]) -> Self {
        let n = linear.len();
        let mut terms = vec![(vec![0; n], c0)];
        for (j, &c) in linear.iter().enumerate() {
            let mut a = vec![0; n];
            a[j] = 1;
            terms.push((a, c));
        }
        Self { n, terms }
    }

    // Product without dropping zero coefficients or rejecting zero results.
    fn mul_raw(&self, other: &Self) -> Self {
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let k: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                *map.entry(k).or_insert(C64::new(0.0, 0.0)) += x * y;
            }
        }
        Self {
            n: self.n,
            terms: map.into_iter().collect(),
        }
    }

    fn monomial(z: &[C64], alpha: &[u32]) -> C64 {
        z.iter()
            .zip(alpha)
            .fold(C64::new(1.0, 0.0), |acc, (zi, &k)| acc * zi.powu(k))
    }

    /// Coefficients (ascending in `λ`) of `λ ↦ T(p + λ v)`.
    pub fn restrict_affine(&self, p: &[C64], v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.degree() as usize + 1];
        for (alpha, c) in &self.terms {
            let mut prod = vec![*c];
            for (i, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    prod = poly_mul(&prod, &[p[i], v[i]]);
                }
            }
            for (j, x) in prod.into_iter().enumerate() {
                out[j] += x;
            }
        }
        out
    }

    /// Numerator of `λ ↦ T(F_z(λu))`: with `F_z(λu) = (z − λMu)/(1 − λ⟨u,z⟩)`,
    /// returns the coefficients of `Σ c_α Π (z_i − λ(Mu)_i)^{α_i} (1 − λ⟨u,z⟩)^{D−|α|}`.
    pub fn line_numerator(&self, map: &MobiusMap, u: &[C64]) -> Vec<C64> {
        let z = map.center().coords();
        let b = map.linear_part(u);
        let d = inner(u, z);
        let deg = self.degree();
        let mut out = vec![C64::new(0.0, 0.0); deg as usize + 1];
        for (alpha, c) in &self.terms {
            let mut prod = vec![*c];
            for (i, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    prod = poly_mul(&prod, &[z[i], -b[i]]);
                }
            }
            let total: u32 = alpha.iter().sum();
            for _ in total..deg {
                prod = poly_mul(&prod, &[C64::new(1.0, 0.0), -d]);
            }
            for (j, x) in prod.into_iter().enumerate() {
                out[j] += x;
            }
        }
        out
    }
}

impl DefiningFunction for DefiningPolynomial {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, z: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(a, c)| c * Self::monomial(z, a))
            .sum()
    }

    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        let mut g = vec![C64::new(0.0, 0.0); self.n];
        for (alpha, c) in &self.terms {
            for i in 0..self.n {
                if alpha[i] == 0 {
                    continue;
                }
                let mut a = alpha.clone();
                a[i] -= 1;
                g[i] += c * alpha[i] as f64 * Self::monomial(z, &a);
            }
        }
        g
    }

    fn line_data(&self, map: &MobiusMap, u: &[C64]) -> LineData {
        let coeffs = self.line_numerator(map, u);
        let roots = poly_roots(&coeffs);
        // poly_roots trims exactly-zero leading coefficients; the lead is the
        // last nonzero one.
        let lead = coeffs
            .iter()
            .rev()
            .find(|c| **c != C64::new(0.0, 0.0))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0));
        LineData {
            log_lead: lead.norm_sqr().ln(),
            roots,
        }
    }

    fn zero_locus(&self) -> ZeroLocus<'_> {
        ZeroLocus::Polynomial(self)
    }
}

/// `T(ζ) = Π_k (ζ − a_k)` in one variable, evaluated in factored form so
/// large point sets do not overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDivisor {
    points: Vec<C64>,
}

impl PointDivisor {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(p.norm_sqr() < 1.0)) {
            return Err(Error::OutsideBall {
                norm_sq: p.norm_sqr(),
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl DefiningFunction for PointDivisor {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, z: &[C64]) -> C64 {
        self.points.iter().map(|a| z[0] - a).product()
    }

    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        let mut total = C64::new(0.0, 0.0);
        for k in 0..self.points.len() {
            let mut prod = C64::new(1.0, 0.0);
            for (j, a) in self.points.iter().enumerate() {
                if j != k {
                    prod *= z[0] - a;
                }
            }
            total += prod;
        }
        vec![total]
    }

    fn log_modulus_sq(&self, z: &[C64]) -> f64 {
        self.points.iter().map(|a| (z[0] - a).norm_sqr().ln()).sum()
    }

    // F_z(λu) − a = ((z − a) − λu(1 − a z̄)) / (1 − λu z̄): one root
    // (z − a)/(u(1 − a z̄)) with leading factor −u(1 − a z̄).
    fn line_data(&self, map: &MobiusMap, u: &[C64]) -> LineData {
        let z = map.center()[0];
        let u = u[0];
        let mut log_lead = 0.0;
        let mut roots = Vec::with_capacity(self.points.len());
        for a in &self.points {
            let lead = u * (1.0 - a * z.conj());
            log_lead += lead.norm_sqr().ln();
            roots.push((z - a) / lead);
        }
        LineData { log_lead, roots }
    }

    fn zero_locus(&self) -> ZeroLocus<'_> {
        ZeroLocus::Points(&self.points)
    }
}

/// `e^h T`: same zero set as `T`, different defining function.
#[derive(Debug, Clone)]
pub struct Twisted<T> {
    pub base: T,
    pub h: DefiningPolynomial,
}

impl<T: DefiningFunction> Twisted<T> {
    pub fn new(base: T, h: DefiningPolynomial) -> Result<Self> {
        if h.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: h.dim(),
            });
        }
        Ok(Self { base, h })
    }
}

impl<T: DefiningFunction> DefiningFunction for Twisted<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, z: &[C64]) -> C64 {
        self.h.value(z).exp() * self.base.value(z)
    }

    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        let e = self.h.value(z).exp();
        let t = self.base.value(z);
        let gh = self.h.gradient(z);
        self.base
            .gradient(z)
            .iter()
            .zip(gh)
            .map(|(gt, gh)| e * (gt + t * gh))
            .collect()
    }

    fn log_modulus_sq(&self, z: &[C64]) -> f64 {
        self.base.log_modulus_sq(z) + 2.0 * self.h.value(z).re
    }

    // e^{h(F_z(λu))} has no zeros; dividing out its value at λ = 0 leaves a
    // zero-free factor equal to one at the origin.
    fn line_data(&self, map: &MobiusMap, u: &[C64]) -> LineData {
        let mut data = self.base.line_data(map, u);
        data.log_lead += 2.0 * self.h.value(map.center().coords()).re;
        data
    }

    fn zero_locus(&self) -> ZeroLocus<'_> {
        self.base.zero_locus()
    }
}

impl<T: DefiningFunction + ?Sized> DefiningFunction for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, z: &[C64]) -> C64 {
        (**self).value(z)
    }
    fn gradient(&self, z: &[C64]) -> Vec<C64> {
        (**self).gradient(z)
    }
    fn log_modulus_sq(&self, z: &[C64]) -> f64 {
        (**self).log_modulus_sq(z)
    }
    fn line_data(&self, map: &MobiusMap, u: &[C64]) -> LineData {
        (**self).line_data(map, u)
    }
    fn zero_locus(&self) -> ZeroLocus<'_> {
        (**self).zero_locus()
    }
}
