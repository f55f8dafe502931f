//! Dense oracles for the sparse fast paths.
//!
//! These materialise `n x n` operators and are guarded to small graphs. They
//! are independent of the CSR operators: every entry is written from the
//! definition `L = I − D^{-1/2} A D^{-1/2}` rather than by applying
//! [`crate::graph::laplacian_apply`] to basis vectors.

mod eigen;
pub mod suite;

pub use eigen::{symmetric_eigen, EigenSystem};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{IsolatedPolicy, SparseGraph};
use crate::matrix::Matrix;

/// Largest graph the dense oracles will materialise.
pub const ORACLE_MAX_NODES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseOperator {
    /// `2I − L`
    Shifted,
    /// `L`
    Laplacian,
    /// `D̂^{-1/2} Â D̂^{-1/2}` with self-loops added.
    GcnNorm,
}

fn guard(g: &SparseGraph) -> Result<()> {
    if g.n() > ORACLE_MAX_NODES {
        return Err(Error::Size {
            what: "dense oracle graph",
            n: g.n(),
            limit: ORACLE_MAX_NODES,
        });
    }
    Ok(())
}

fn dense_adjacency(g: &SparseGraph) -> Matrix {
    let n = g.n();
    let mut a = Matrix::zeros(n, n);
    for (u, v) in g.undirected_edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// `D^{-1/2} A D^{-1/2}` with zero rows for isolated nodes.
fn dense_normalized_adjacency(g: &SparseGraph) -> Result<Matrix> {
    guard(g)?;
    let a = dense_adjacency(g);
    let n = g.n();
    let deg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).sum()).collect();
    if deg.contains(&0.0) && g.isolated_policy() == IsolatedPolicy::Reject {
        return Err(Error::Degenerate("isolated node without policy".into()));
    }
    Ok(Matrix::from_fn(n, n, |i, j| {
        if deg[i] == 0.0 || deg[j] == 0.0 {
            0.0
        } else {
            a[(i, j)] / (deg[i].sqrt() * deg[j].sqrt())
        }
    }))
}

pub fn dense_laplacian(g: &SparseGraph) -> Result<Matrix> {
    let s = dense_normalized_adjacency(g)?;
    let n = g.n();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 - s[(i, j)]
        } else {
            -s[(i, j)]
        }
    }))
}

pub fn dense_shifted(g: &SparseGraph) -> Result<Matrix> {
    let s = dense_normalized_adjacency(g)?;
    let n = g.n();
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 + s[(i, j)]
        } else {
            s[(i, j)]
        }
    }))
}

pub fn dense_gcn_norm(g: &SparseGraph) -> Result<Matrix> {
    guard(g)?;
    let n = g.n();
    let mut a = dense_adjacency(g);
    for i in 0..n {
        a[(i, i)] = 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).sum()).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        a[(i, j)] / (deg[i].sqrt() * deg[j].sqrt())
    }))
}

pub fn dense_operator(g: &SparseGraph, op: DenseOperator) -> Result<Matrix> {
    match op {
        DenseOperator::Shifted => dense_shifted(g),
        DenseOperator::Laplacian => dense_laplacian(g),
        DenseOperator::GcnNorm => dense_gcn_norm(g),
    }
}

/// `op^k` by repeated dense multiplication.
pub fn dense_matrix_power(g: &SparseGraph, op: DenseOperator, k: usize) -> Result<Matrix> {
    let m = dense_operator(g, op)?;
    let mut out = Matrix::identity(g.n());
    for _ in 0..k {
        out = out.matmul(&m);
    }
    Ok(out)
}

/// Eigen-decomposition of the dense normalized Laplacian.
pub fn dense_eigensystem(g: &SparseGraph) -> Result<EigenSystem> {
    symmetric_eigen(&dense_laplacian(g)?)
}

/// `U diag(h(λ)) Uᵀ x`.
pub fn spectral_filter_oracle(eig: &EigenSystem, h: impl Fn(f64) -> f64, x: &[f64]) -> Vec<f64> {
    let u = &eig.vectors;
    let n = eig.values.len();
    assert_eq!(x.len(), n, "signal length must match the eigensystem");
    let coeffs: Vec<f64> = (0..n)
        .map(|k| {
            let proj: f64 = (0..n).map(|i| u[(i, k)] * x[i]).sum();
            h(eig.values[k]) * proj
        })
        .collect();
    (0..n)
        .map(|i| (0..n).map(|k| u[(i, k)] * coeffs[k]).sum())
        .collect()
}

/// Column-wise [`spectral_filter_oracle`].
pub fn spectral_filter_matrix(eig: &EigenSystem, h: impl Fn(f64) -> f64, x: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    for c in 0..x.cols() {
        let col = spectral_filter_oracle(eig, &h, &x.col(c));
        for (i, v) in col.into_iter().enumerate() {
            out[(i, c)] = v;
        }
    }
    out
}

/// Central differences `(f(θ + ε e_i) − f(θ − ε e_i)) / 2ε` for every
/// coordinate.
pub fn finite_difference_gradient(
    mut loss: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    eps: f64,
) -> Vec<f64> {
    let mut theta = params.to_vec();
    (0..params.len())
        .map(|i| {
            let orig = theta[i];
            theta[i] = orig + eps;
            let plus = loss(&theta);
            theta[i] = orig - eps;
            let minus = loss(&theta);
            theta[i] = orig;
            (plus - minus) / (2.0 * eps)
        })
        .collect()
}

/// Relative error used by the gradient checks: `|a − b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;

    #[test]
    fn known_spectra() {
        let k2 = build_csr(&[(0, 1)], 2).unwrap();
        let es = dense_eigensystem(&k2).unwrap();
        assert!((es.values[0]).abs() < 1e-14 && (es.values[1] - 2.0).abs() < 1e-14);

        let k3 = build_csr(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        let es = dense_eigensystem(&k3).unwrap();
        for (v, e) in es.values.iter().zip([0.0, 1.5, 1.5]) {
            assert!((v - e).abs() < 1e-14, "{:?}", es.values);
        }
    }

    #[test]
    fn spectral_filter_examples() {
        let k2 = build_csr(&[(0, 1)], 2).unwrap();
        let es = dense_eigensystem(&k2).unwrap();
        let x = [0.3, -1.7];
        let y = spectral_filter_oracle(&es, |_| 1.0, &x);
        assert!((y[0] - 0.3).abs() < 1e-14 && (y[1] + 1.7).abs() < 1e-14);
        let y = spectral_filter_oracle(&es, |l| l, &[1.0, 0.0]);
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dense_power_examples() {
        let k2 = build_csr(&[(0, 1)], 2).unwrap();
        assert_eq!(
            dense_matrix_power(&k2, DenseOperator::Laplacian, 0).unwrap(),
            Matrix::identity(2)
        );
        let s = dense_matrix_power(&k2, DenseOperator::Shifted, 1).unwrap();
        assert_eq!(s, Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap());
    }

    #[test]
    fn guard_rejects_large_graphs() {
        let g = build_csr(&[], ORACLE_MAX_NODES + 1).unwrap();
        assert!(matches!(dense_gcn_norm(&g), Err(Error::Size { .. })));
        assert!(matches!(dense_eigensystem(&g), Err(Error::Size { .. })));
    }

    #[test]
    fn finite_difference_examples() {
        let g = finite_difference_gradient(|t| t[0] * t[0], &[3.0], 1e-5);
        assert!((g[0] - 6.0).abs() < 1e-6);
        let a = -2.5;
        let g = finite_difference_gradient(|t| a * t[0], &[0.75], 1e-5);
        assert!((g[0] - a).abs() < 1e-9);
    }

    #[test]
    fn dense_laplacian_is_exactly_symmetric() {
        let g = build_csr(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 4).unwrap();
        let l = dense_laplacian(&g).unwrap();
        assert_eq!(l, l.transpose());
    }
}
