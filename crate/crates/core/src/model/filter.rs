//! Propagation stages for the four architectures and their backward passes.
//!
//! Every propagation operator here is a polynomial in a symmetric matrix, so
//! it is self-adjoint: the gradient with respect to the input is the same
//! filter applied to the upstream gradient.

use serde::{Deserialize, Serialize};

use crate::basis::{bernstein_terms, build_basis_cache, gsc_combine, monomial_blocks, monomial_prop, FilterSpec};
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::FeatureMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Gscnet,
    Gcn,
    Jknet,
    Bernnet,
}

impl Arch {
    pub const ALL: [Arch; 4] = [Arch::Gcn, Arch::Jknet, Arch::Bernnet, Arch::Gscnet];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Gscnet => "gscnet",
            Arch::Gcn => "gcn",
            Arch::Jknet => "jknet",
            Arch::Bernnet => "bernnet",
        }
    }
}

/// Trainable (or fixed, for GCN) propagation stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "snake_case")]
pub enum Filter {
    /// `Σ α_i (2I − L)^i + Σ β_j L^j`.
    Gscnet { spec: FilterSpec },
    /// `Â^depth`, no coefficients.
    Gcn { depth: usize },
    /// `Σ_{k=1}^{K} α_k Â^k`; `alpha[k - 1]` multiplies `Â^k`.
    Jknet { alpha: Vec<f64> },
    /// `Σ_{k=0}^{K} θ_k · C(K, k) / 2^K · (2I − L)^{K−k} L^k`.
    Bernnet { theta: Vec<f64> },
}

impl Filter {
    pub fn arch(&self) -> Arch {
        match self {
            Filter::Gscnet { .. } => Arch::Gscnet,
            Filter::Gcn { .. } => Arch::Gcn,
            Filter::Jknet { .. } => Arch::Jknet,
            Filter::Bernnet { .. } => Arch::Bernnet,
        }
    }

    /// Coefficient vectors in a fixed order, with names.
    pub fn coefficients(&self) -> Vec<(&'static str, &[f64])> {
        match self {
            Filter::Gscnet { spec } => vec![("alpha", &spec.alpha), ("beta", &spec.beta)],
            Filter::Gcn { .. } => vec![],
            Filter::Jknet { alpha } => vec![("alpha", alpha)],
            Filter::Bernnet { theta } => vec![("theta", theta)],
        }
    }

    pub fn coefficients_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        match self {
            Filter::Gscnet { spec } => vec![("alpha", &mut spec.alpha), ("beta", &mut spec.beta)],
            Filter::Gcn { .. } => vec![],
            Filter::Jknet { alpha } => vec![("alpha", alpha)],
            Filter::Bernnet { theta } => vec![("theta", theta)],
        }
    }

    /// Same structure, zero coefficients. Used as a gradient container.
    pub fn zeros_like(&self) -> Filter {
        let mut f = self.clone();
        for (_, c) in f.coefficients_mut() {
            c.iter_mut().for_each(|v| *v = 0.0);
        }
        f
    }

    pub fn apply(&self, g: &SparseGraph, h: &FeatureMatrix) -> Result<(FeatureMatrix, FilterTape)> {
        match self {
            Filter::Gscnet { spec } => {
                let cache = build_basis_cache(g, h, spec.k1().unwrap_or(0), spec.k2().unwrap_or(0))?;
                let z = gsc_combine(&cache, spec)?;
                let mut blocks = cache.positive()[..spec.alpha.len()].to_vec();
                blocks.extend_from_slice(&cache.negative()[..spec.beta.len()]);
                Ok((z, FilterTape { blocks }))
            }
            Filter::Gcn { depth } => Ok((monomial_prop(g, h, *depth)?, FilterTape::default())),
            Filter::Jknet { alpha } => {
                let blocks = monomial_blocks(g, h, alpha.len())?;
                let z = weighted_sum(h, &blocks, alpha.iter().copied());
                Ok((z, FilterTape { blocks }))
            }
            Filter::Bernnet { theta } => {
                let big_k = bernnet_order(theta)?;
                let blocks = bernstein_terms(g, h, big_k)?;
                let w = bernstein_weights(big_k);
                let z = weighted_sum(h, &blocks, theta.iter().zip(&w).map(|(t, c)| t * c));
                Ok((z, FilterTape { blocks }))
            }
        }
    }

    /// Returns `(∂/∂input, ∂/∂coefficients)`. The input gradient is skipped
    /// (returned as `None`) when `need_input_grad` is false.
    pub fn backward(
        &self,
        g: &SparseGraph,
        tape: &FilterTape,
        dz: &FeatureMatrix,
        need_input_grad: bool,
    ) -> Result<(Option<FeatureMatrix>, Filter)> {
        let mut grad = self.zeros_like();
        let inner: Vec<f64> = tape.blocks.iter().map(|b| b.inner(dz)).collect();
        match &mut grad {
            Filter::Gscnet { spec } => {
                let na = spec.alpha.len();
                spec.alpha.copy_from_slice(&inner[..na]);
                spec.beta.copy_from_slice(&inner[na..]);
            }
            Filter::Gcn { .. } => {}
            Filter::Jknet { alpha } => alpha.copy_from_slice(&inner),
            Filter::Bernnet { theta } => {
                let w = bernstein_weights(theta.len() - 1);
                for ((t, i), c) in theta.iter_mut().zip(&inner).zip(&w) {
                    *t = i * c;
                }
            }
        }
        let dh = if need_input_grad {
            Some(self.apply(g, dz)?.0)
        } else {
            None
        };
        Ok((dh, grad))
    }
}

/// Propagated blocks kept for the coefficient gradients, one per coefficient.
#[derive(Clone, Debug, Default)]
pub struct FilterTape {
    blocks: Vec<FeatureMatrix>,
}

fn weighted_sum(like: &FeatureMatrix, blocks: &[FeatureMatrix], w: impl Iterator<Item = f64>) -> FeatureMatrix {
    let mut z = FeatureMatrix::zeros(like.rows(), like.cols());
    for (b, c) in blocks.iter().zip(w) {
        z.axpy(c, b);
    }
    z
}

fn bernnet_order(theta: &[f64]) -> Result<usize> {
    theta
        .len()
        .checked_sub(1)
        .ok_or_else(|| Error::input("Bernstein filter needs at least one coefficient"))
}

/// `C(K, k) / 2^K` for `k = 0..=K`.
pub fn bernstein_weights(big_k: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(big_k + 1);
    let mut binom = 1.0f64;
    let scale = 0.5f64.powi(big_k as i32);
    for k in 0..=big_k {
        w.push(binom * scale);
        binom = binom * (big_k - k) as f64 / (k + 1) as f64;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_weights_sum_to_one() {
        for k in 0..12 {
            let s: f64 = bernstein_weights(k).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(bernstein_weights(2), vec![0.25, 0.5, 0.25]);
    }
}
