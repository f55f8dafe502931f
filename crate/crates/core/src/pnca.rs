//! Positive/negative activation calculus.
//!
//! A node activation is `x*_t = α_t x_t + Σ_{k ≤ K} Σ_{s ∈ N_k(t)} α_s x_s`;
//! a graph activation is any `X* = T X`. The classifiers below decide
//! positivity literally from the coefficient signs (nodes) or from the support
//! pattern of `T` against the graph (graphs).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{laplacian_apply, SparseGraph};
use crate::matrix::{dot, FeatureMatrix, Matrix};
use crate::verify::{dense_matrix_power, dense_shifted, DenseOperator};

/// Largest `n` for which a graph activation matrix is densified.
pub const DENSE_CLASSIFY_MAX_NODES: usize = 2000;

/// Why an activation is negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Every coefficient is zero. Negative by the catch-all rule, reported
    /// separately because it is usually a configuration mistake.
    AllZero,
    /// The self coefficient is not strictly positive.
    SelfCoefficient { value: f64 },
    /// A neighbour carries a negative coefficient.
    NeighborCoefficient { node: usize, value: f64 },
    /// No neighbour carries a strictly positive coefficient.
    NoPositiveNeighbor,
    /// First matrix entry (row-major) that breaks the support pattern:
    /// non-positive inside the pattern or non-zero outside it.
    Entry {
        row: usize,
        col: usize,
        value: f64,
        in_pattern: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ActivationClass {
    Positive,
    Negative { witness: Witness },
}

impl ActivationClass {
    pub fn is_positive(&self) -> bool {
        matches!(self, ActivationClass::Positive)
    }

    fn negative(witness: Witness) -> Self {
        ActivationClass::Negative { witness }
    }
}

/// Coefficients of a single node's `K`-hop activation.
///
/// `neighbors` must list every node at hop distance `1..=hops` from `target`
/// exactly once. Its order is the summation order of [`node_activation`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeActivationSpec {
    pub target: usize,
    pub hops: usize,
    pub self_coeff: f64,
    pub neighbors: Vec<(usize, f64)>,
}

impl NodeActivationSpec {
    /// Checks that the coefficient list covers exactly `N_1(t) ∪ … ∪ N_K(t)`.
    pub fn validate(&self, g: &SparseGraph) -> Result<()> {
        if self.target >= g.n() {
            return Err(Error::input(format!("target {} out of range", self.target)));
        }
        if self.self_coeff < 0.0 {
            return Err(Error::input("self coefficient must be non-negative"));
        }
        let dist = g.hop_distances(self.target);
        let mut covered = vec![false; g.n()];
        for &(s, _) in &self.neighbors {
            let d = dist.get(s).copied().ok_or_else(|| {
                Error::input(format!("neighbour {s} out of range"))
            })?;
            if d == 0 || d > self.hops {
                return Err(Error::input(format!(
                    "node {s} is not within 1..={} hops of {}",
                    self.hops, self.target
                )));
            }
            if std::mem::replace(&mut covered[s], true) {
                return Err(Error::input(format!("node {s} listed twice")));
            }
        }
        if let Some(missing) = (0..g.n()).find(|&s| dist[s] >= 1 && dist[s] <= self.hops && !covered[s]) {
            return Err(Error::input(format!(
                "node {missing} lies within {} hops of {} but has no coefficient",
                self.hops, self.target
            )));
        }
        Ok(())
    }

    /// The same activation after relabelling node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> NodeActivationSpec {
        NodeActivationSpec {
            target: perm[self.target],
            hops: self.hops,
            self_coeff: self.self_coeff,
            neighbors: self.neighbors.iter().map(|&(s, a)| (perm[s], a)).collect(),
        }
    }
}

/// `α_t x_t + Σ α_s x_s`, summed in listed order.
pub fn node_activation(
    x: &FeatureMatrix,
    g: &SparseGraph,
    spec: &NodeActivationSpec,
) -> Result<Vec<f64>> {
    spec.validate(g)?;
    if x.rows() != g.n() {
        return Err(Error::input("feature rows do not match node count"));
    }
    let mut out: Vec<f64> = x.row(spec.target).iter().map(|v| spec.self_coeff * v).collect();
    for &(s, a) in &spec.neighbors {
        for (o, &v) in out.iter_mut().zip(x.row(s)) {
            *o += a * v;
        }
    }
    Ok(out)
}

/// Positive iff every neighbour coefficient is `≥ 0`, at least one is `> 0`,
/// and the self coefficient is `> 0`. Everything else is negative.
pub fn classify_node_activation(spec: &NodeActivationSpec) -> ActivationClass {
    if spec.self_coeff == 0.0 && spec.neighbors.iter().all(|&(_, a)| a == 0.0) {
        return ActivationClass::negative(Witness::AllZero);
    }
    if let Some(&(node, value)) = spec.neighbors.iter().find(|&&(_, a)| !(a >= 0.0)) {
        return ActivationClass::negative(Witness::NeighborCoefficient { node, value });
    }
    if !spec.neighbors.iter().any(|&(_, a)| a > 0.0) {
        return ActivationClass::negative(Witness::NoPositiveNeighbor);
    }
    if !(spec.self_coeff > 0.0) {
        return ActivationClass::negative(Witness::SelfCoefficient {
            value: spec.self_coeff,
        });
    }
    ActivationClass::Positive
}

/// Classifies `T` as a `steps`-step graph activation of `g`.
///
/// `g` must carry a self-loop on every node. The reference pattern is the set
/// of pairs at hop distance `≤ steps` in `g` (the support of `T^steps` for any
/// conformant `T`); with `steps = 1` this is the edge set itself. `T` is
/// positive iff it is strictly positive on the pattern and exactly zero off
/// it.
pub fn classify_graph_activation(t: &Matrix, g: &SparseGraph, steps: usize) -> Result<ActivationClass> {
    let n = g.n();
    if n > DENSE_CLASSIFY_MAX_NODES {
        return Err(Error::Size {
            what: "dense activation classification (use a sampled check instead)",
            n,
            limit: DENSE_CLASSIFY_MAX_NODES,
        });
    }
    if t.shape() != (n, n) {
        return Err(Error::input(format!(
            "activation matrix is {:?}, graph has {n} nodes",
            t.shape()
        )));
    }
    if let Some(i) = (0..n).find(|&i| !g.has_self_loop(i)) {
        return Err(Error::input(format!(
            "graph activation is defined on graphs with self-loops; node {i} has none"
        )));
    }
    for i in 0..n {
        let dist = g.hop_distances(i);
        for j in 0..n {
            let in_pattern = dist[j] <= steps;
            let value = t[(i, j)];
            let ok = if in_pattern { value > 0.0 } else { value == 0.0 };
            if !ok {
                return Ok(ActivationClass::negative(Witness::Entry {
                    row: i,
                    col: j,
                    value,
                    in_pattern,
                }));
            }
        }
    }
    Ok(ActivationClass::Positive)
}

/// Expands `Σ_j α_j (2I − L)^j` densely and classifies it.
///
/// The reference step count is the highest index with a non-zero coefficient,
/// but never less than one: a graph activation has to reach the graph's own
/// edges.
pub fn positive_combination_check(coeffs: &[f64], g: &SparseGraph) -> Result<ActivationClass> {
    if let Some((j, a)) = coeffs.iter().enumerate().find(|(_, &a)| !(a >= 0.0)) {
        return Err(Error::Contract(format!(
            "coefficient α_{j} = {a} is negative; the non-negative combination hypothesis does not hold"
        )));
    }
    let Some(top) = coeffs.iter().rposition(|&a| a > 0.0) else {
        return Ok(ActivationClass::negative(Witness::AllZero));
    };
    let n = g.n();
    let shifted = dense_shifted(g)?;
    let mut power = Matrix::identity(n);
    let mut total = Matrix::zeros(n, n);
    for &a in &coeffs[..=top] {
        total.axpy(a, &power);
        power = power.matmul(&shifted);
    }
    classify_graph_activation(&total, &g.with_self_loops(), top.max(1))
}

/// Dense `Σ_j β_j L^j`, classified the same way as the positive half.
pub fn negative_combination_check(coeffs: &[f64], g: &SparseGraph) -> Result<ActivationClass> {
    let n = g.n();
    let mut total = Matrix::zeros(n, n);
    for (j, &b) in coeffs.iter().enumerate() {
        total.axpy(b, &dense_matrix_power(g, DenseOperator::Laplacian, j)?);
    }
    let top = coeffs.iter().rposition(|&b| b != 0.0).unwrap_or(0);
    classify_graph_activation(&total, &g.with_self_loops(), top.max(1))
}

/// Fraction of undirected non-loop edges whose endpoints carry different
/// labels. Each edge counts once.
pub fn label_smoothness(g: &SparseGraph, labels: &[usize]) -> Result<f64> {
    if labels.len() != g.n() {
        return Err(Error::input(format!(
            "{} labels for {} nodes",
            labels.len(),
            g.n()
        )));
    }
    let mut edges = 0usize;
    let mut cross = 0usize;
    for (u, v) in g.undirected_edges() {
        if u == v {
            continue;
        }
        edges += 1;
        if labels[u] != labels[v] {
            cross += 1;
        }
    }
    if edges == 0 {
        return Err(Error::Degenerate("label smoothness needs at least one edge".into()));
    }
    Ok(cross as f64 / edges as f64)
}

/// `xᵀ L x / xᵀ x`.
pub fn rayleigh_quotient(g: &SparseGraph, x: &[f64]) -> Result<f64> {
    let norm2 = dot(x, x);
    if norm2 == 0.0 {
        return Err(Error::input("Rayleigh quotient of the zero vector"));
    }
    let lx = laplacian_apply(g, &Matrix::column(x))?;
    Ok(dot(x, lx.as_slice()) / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_csr;
    use crate::verify::dense_laplacian;

    fn k2() -> SparseGraph {
        build_csr(&[(0, 1)], 2).unwrap()
    }

    fn p3() -> SparseGraph {
        build_csr(&[(0, 1), (1, 2)], 3).unwrap()
    }

    fn spec(target: usize, hops: usize, self_coeff: f64, neighbors: &[(usize, f64)]) -> NodeActivationSpec {
        NodeActivationSpec {
            target,
            hops,
            self_coeff,
            neighbors: neighbors.to_vec(),
        }
    }

    #[test]
    fn node_activation_examples() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![10.0, 20.0], vec![100.0, 200.0]]).unwrap();
        let g = p3();
        let id = spec(0, 1, 1.0, &[(1, 0.0)]);
        assert_eq!(node_activation(&x, &g, &id).unwrap(), vec![1.0, 2.0]);

        let xk = Matrix::from_rows(&[vec![1.5], vec![-4.0]]).unwrap();
        let s = spec(0, 1, 1.0, &[(1, 1.0)]);
        assert_eq!(node_activation(&xk, &k2(), &s).unwrap(), vec![-2.5]);

        let s = spec(0, 2, 2.0, &[(1, 1.0), (2, 1.0)]);
        assert_eq!(node_activation(&x, &g, &s).unwrap(), vec![112.0, 224.0]);
    }

    #[test]
    fn node_activation_rejects_non_neighbors() {
        let x = Matrix::zeros(3, 1);
        let s = spec(0, 1, 1.0, &[(1, 1.0), (2, 1.0)]);
        assert!(matches!(node_activation(&x, &p3(), &s), Err(Error::Input(_))));
        let missing = spec(0, 2, 1.0, &[(1, 1.0)]);
        assert!(node_activation(&x, &p3(), &missing).is_err());
    }

    #[test]
    fn node_classification_examples() {
        assert!(classify_node_activation(&spec(0, 2, 1.0, &[(1, 1.0), (2, 0.0)])).is_positive());
        assert_eq!(
            classify_node_activation(&spec(0, 1, 1.0, &[(1, -1.0)])),
            ActivationClass::Negative {
                witness: Witness::NeighborCoefficient { node: 1, value: -1.0 }
            }
        );
        assert_eq!(
            classify_node_activation(&spec(0, 1, 0.0, &[(1, 1.0)])),
            ActivationClass::Negative {
                witness: Witness::SelfCoefficient { value: 0.0 }
            }
        );
        assert_eq!(
            classify_node_activation(&spec(0, 1, 0.0, &[(1, 0.0)])),
            ActivationClass::Negative { witness: Witness::AllZero }
        );
        assert_eq!(
            classify_node_activation(&spec(0, 1, 1.0, &[(1, 0.0)])),
            ActivationClass::Negative { witness: Witness::NoPositiveNeighbor }
        );
    }

    #[test]
    fn graph_classification_examples() {
        let k2l = k2().with_self_loops();
        let t = dense_shifted(&k2()).unwrap();
        assert!(classify_graph_activation(&t, &k2l, 1).unwrap().is_positive());

        let l = dense_laplacian(&k2()).unwrap();
        match classify_graph_activation(&l, &k2l, 1).unwrap() {
            ActivationClass::Negative {
                witness: Witness::Entry { row: 0, col: 1, value, in_pattern: true },
            } => assert_eq!(value, -1.0),
            other => panic!("unexpected {other:?}"),
        }

        let s = dense_shifted(&p3()).unwrap();
        let s2 = s.matmul(&s);
        assert!(s2[(0, 2)] > 0.0);
        assert!(classify_graph_activation(&s2, &p3().with_self_loops(), 2).unwrap().is_positive());
        assert!(!classify_graph_activation(&s2, &p3().with_self_loops(), 1).unwrap().is_positive());
    }

    #[test]
    fn graph_classification_guards() {
        assert!(classify_graph_activation(&Matrix::identity(2), &k2(), 1).is_err());
        let big = build_csr(&[], DENSE_CLASSIFY_MAX_NODES + 1).unwrap();
        assert!(matches!(
            classify_graph_activation(&Matrix::zeros(1, 1), &big, 1),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn positive_combination_examples() {
        assert!(positive_combination_check(&[1.0, 1.0], &k2()).unwrap().is_positive());
        assert!(!positive_combination_check(&[1.0, 0.0], &p3()).unwrap().is_positive());
        assert!(matches!(
            positive_combination_check(&[1.0, -0.5], &k2()),
            Err(Error::Contract(_))
        ));
        assert!(positive_combination_check(&[0.3, 0.7, 0.1], &p3()).unwrap().is_positive());
    }

    #[test]
    fn negative_half_is_negative_including_identity() {
        assert!(!negative_combination_check(&[1.0, 1.0], &p3()).unwrap().is_positive());
        assert!(!negative_combination_check(&[1.0, 0.0], &p3()).unwrap().is_positive());
    }

    #[test]
    fn label_smoothness_examples() {
        let tri = build_csr(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        assert!((label_smoothness(&tri, &[0, 0, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(label_smoothness(&tri, &[4, 4, 4]).unwrap(), 0.0);
        assert_eq!(label_smoothness(&k2(), &[0, 1]).unwrap(), 1.0);
        let loops_only = build_csr(&[(0, 0)], 2).unwrap();
        assert!(matches!(label_smoothness(&loops_only, &[0, 1]), Err(Error::Degenerate(_))));
        let with_loop = build_csr(&[(0, 1), (1, 1)], 2).unwrap();
        assert_eq!(label_smoothness(&with_loop, &[0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn rayleigh_examples() {
        assert!(rayleigh_quotient(&k2(), &[1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!((rayleigh_quotient(&k2(), &[1.0, -1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((rayleigh_quotient(&p3(), &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(rayleigh_quotient(&p3(), &[0.0; 3]).is_err());
    }
}
