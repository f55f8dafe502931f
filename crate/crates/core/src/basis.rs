//! Polynomial bases over the normalized Laplacian.
//!
//! The decoupled filter is `Z = (Σ_i α_i (2I − L)^i + Σ_j β_j L^j) X`. Powers
//! are never formed as operators: each block `(2I − L)^{i+1} X` is one sparse
//! application to the previous block, so a cache of degree `(K1, K2)` costs
//! `(K1 + K2) · nnz · d` multiply-adds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{gcn_norm_apply, laplacian_apply, shifted_apply, SparseGraph};
use crate::matrix::FeatureMatrix;

/// Coefficients of the positive `(2I − L)^i` and negative `L^j` halves.
///
/// `alpha[i]` multiplies `(2I − L)^i`. An empty vector disables that half,
/// which is how the pure-positive and pure-negative ablations are expressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterSpecJson", into = "FilterSpecJson")]
pub struct FilterSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Wire form: `{"k1": int|null, "k2": int|null, "alpha": [...], "beta": [...]}`.
#[derive(Serialize, Deserialize)]
struct FilterSpecJson {
    k1: Option<usize>,
    k2: Option<usize>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl TryFrom<FilterSpecJson> for FilterSpec {
    type Error = String;

    fn try_from(raw: FilterSpecJson) -> Result<Self, String> {
        let expect = |k: Option<usize>| k.map_or(0, |k| k + 1);
        if raw.alpha.len() != expect(raw.k1) {
            return Err(format!(
                "alpha has {} coefficients but k1 = {:?}",
                raw.alpha.len(),
                raw.k1
            ));
        }
        if raw.beta.len() != expect(raw.k2) {
            return Err(format!(
                "beta has {} coefficients but k2 = {:?}",
                raw.beta.len(),
                raw.k2
            ));
        }
        Ok(FilterSpec {
            alpha: raw.alpha,
            beta: raw.beta,
        })
    }
}

impl From<FilterSpec> for FilterSpecJson {
    fn from(spec: FilterSpec) -> Self {
        FilterSpecJson {
            k1: spec.k1(),
            k2: spec.k2(),
            alpha: spec.alpha,
            beta: spec.beta,
        }
    }
}

impl FilterSpec {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        FilterSpec { alpha, beta }
    }

    /// All-ones coefficients of degrees `(k1, k2)`; `None` disables a half.
    pub fn uniform(k1: Option<usize>, k2: Option<usize>) -> Self {
        FilterSpec {
            alpha: vec![1.0; k1.map_or(0, |k| k + 1)],
            beta: vec![1.0; k2.map_or(0, |k| k + 1)],
        }
    }

    pub fn k1(&self) -> Option<usize> {
        self.alpha.len().checked_sub(1)
    }

    pub fn k2(&self) -> Option<usize> {
        self.beta.len().checked_sub(1)
    }

    /// Scalar frequency response `h(λ) = Σ α_i (2 − λ)^i + Σ β_j λ^j`.
    pub fn response(&self, lambda: f64) -> f64 {
        self.positive_response(lambda) + self.negative_response(lambda)
    }

    pub fn positive_response(&self, lambda: f64) -> f64 {
        horner(&self.alpha, 2.0 - lambda)
    }

    pub fn negative_response(&self, lambda: f64) -> f64 {
        horner(&self.beta, lambda)
    }

    /// `a·self + b·other`, padding the shorter coefficient list with zeros.
    pub fn linear_combination(&self, a: f64, other: &FilterSpec, b: f64) -> FilterSpec {
        let mix = |x: &[f64], y: &[f64]| {
            (0..x.len().max(y.len()))
                .map(|i| a * x.get(i).copied().unwrap_or(0.0) + b * y.get(i).copied().unwrap_or(0.0))
                .collect()
        };
        FilterSpec {
            alpha: mix(&self.alpha, &other.alpha),
            beta: mix(&self.beta, &other.beta),
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheProvenance {
    pub graph_hash: u64,
    pub feature_hash: u64,
    pub k1: usize,
    pub k2: usize,
}

/// Propagated feature blocks `P_i = (2I − L)^i X` and `Q_j = L^j X`.
#[derive(Clone, Debug)]
pub struct BasisCache {
    positive: Vec<FeatureMatrix>,
    negative: Vec<FeatureMatrix>,
    provenance: CacheProvenance,
}

impl BasisCache {
    pub fn positive(&self) -> &[FeatureMatrix] {
        &self.positive
    }

    pub fn negative(&self) -> &[FeatureMatrix] {
        &self.negative
    }

    pub fn provenance(&self) -> CacheProvenance {
        self.provenance
    }

    pub fn block_count(&self) -> usize {
        self.positive.len() + self.negative.len()
    }
}

pub fn build_basis_cache(
    g: &SparseGraph,
    x: &FeatureMatrix,
    k1: usize,
    k2: usize,
) -> Result<BasisCache> {
    let positive = power_blocks(x, k1, |m| shifted_apply(g, m))?;
    let negative = power_blocks(x, k2, |m| laplacian_apply(g, m))?;
    Ok(BasisCache {
        positive,
        negative,
        provenance: CacheProvenance {
            graph_hash: g.hash_bits(),
            feature_hash: x.hash_bits(),
            k1,
            k2,
        },
    })
}

/// `[X, op X, op² X, …, op^k X]`.
pub(crate) fn power_blocks(
    x: &FeatureMatrix,
    k: usize,
    op: impl Fn(&FeatureMatrix) -> Result<FeatureMatrix>,
) -> Result<Vec<FeatureMatrix>> {
    let mut blocks = Vec::with_capacity(k + 1);
    blocks.push(x.clone());
    for i in 0..k {
        let next = op(&blocks[i])?;
        blocks.push(next);
    }
    Ok(blocks)
}

/// `Z = Σ α_i P_i + Σ β_j Q_j`.
pub fn gsc_combine(cache: &BasisCache, spec: &FilterSpec) -> Result<FeatureMatrix> {
    if spec.alpha.len() > cache.positive.len() || spec.beta.len() > cache.negative.len() {
        return Err(Error::input(format!(
            "filter degrees ({:?}, {:?}) exceed cache degrees ({}, {})",
            spec.k1(),
            spec.k2(),
            cache.provenance.k1,
            cache.provenance.k2
        )));
    }
    let x = &cache.positive[0];
    let mut z = FeatureMatrix::zeros(x.rows(), x.cols());
    for (a, p) in spec.alpha.iter().zip(&cache.positive) {
        z.axpy(*a, p);
    }
    for (b, q) in spec.beta.iter().zip(&cache.negative) {
        z.axpy(*b, q);
    }
    Ok(z)
}

/// Convenience: build a cache of exactly the filter's degrees and combine.
pub fn gsc_filter(g: &SparseGraph, x: &FeatureMatrix, spec: &FilterSpec) -> Result<FeatureMatrix> {
    let cache = build_basis_cache(g, x, spec.k1().unwrap_or(0), spec.k2().unwrap_or(0))?;
    gsc_combine(&cache, spec)
}

/// Bernstein-type term `(2I − L)^{K−k} L^k X`, unnormalised.
pub fn bernstein_term(g: &SparseGraph, x: &FeatureMatrix, big_k: usize, k: usize) -> Result<FeatureMatrix> {
    if k > big_k {
        return Err(Error::input(format!("bernstein index k = {k} exceeds K = {big_k}")));
    }
    let mut out = x.clone();
    for _ in 0..k {
        out = laplacian_apply(g, &out)?;
    }
    for _ in 0..big_k - k {
        out = shifted_apply(g, &out)?;
    }
    Ok(out)
}

/// All `K + 1` Bernstein terms, sharing the `L^k X` prefix. The suffix
/// `(2I − L)^{K−k}` cannot be shared across `k`, so the cost is quadratic in
/// `K`.
pub fn bernstein_terms(g: &SparseGraph, x: &FeatureMatrix, big_k: usize) -> Result<Vec<FeatureMatrix>> {
    let lap = power_blocks(x, big_k, |m| laplacian_apply(g, m))?;
    lap.into_iter()
        .enumerate()
        .map(|(k, mut block)| {
            for _ in 0..big_k - k {
                block = shifted_apply(g, &block)?;
            }
            Ok(block)
        })
        .collect()
}

/// `(D̂^{-1/2} Â D̂^{-1/2})^k X`.
pub fn monomial_prop(g: &SparseGraph, x: &FeatureMatrix, k: usize) -> Result<FeatureMatrix> {
    let mut out = x.clone();
    for _ in 0..k {
        out = gcn_norm_apply(g, &out)?;
    }
    Ok(out)
}

/// `[Â X, Â² X, …, Â^k X]`, the jumping-knowledge inputs.
pub fn monomial_blocks(g: &SparseGraph, x: &FeatureMatrix, k: usize) -> Result<Vec<FeatureMatrix>> {
    let mut blocks = power_blocks(x, k, |m| gcn_norm_apply(g, m))?;
    blocks.remove(0);
    Ok(blocks)
}
