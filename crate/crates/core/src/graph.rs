//! Sparse undirected graphs in CSR form and the matrix-free normalized
//! Laplacian family of operators built on them.
//!
//! Every operator here works from `row_ptr`/`col_idx` and the degree vector
//! directly. Nothing of size `n x n` is ever formed; the dense versions live in
//! [`crate::verify`] and exist only to check these.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

/// How `D^{-1/2} A D^{-1/2}` treats a node with no neighbours.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsolatedPolicy {
    /// Laplacian-family operators fail on graphs with isolated nodes.
    #[default]
    Reject,
    /// The isolated node's row of the normalized adjacency is zero, so `L`
    /// acts as the identity there and `2I − L` as well.
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    degrees: Vec<f64>,
    inv_sqrt_deg: Vec<f64>,
    isolated: usize,
    policy: IsolatedPolicy,
}

/// Builds a symmetric, deduplicated CSR graph from an undirected edge list.
///
/// Each pair may be listed in either or both directions. Self-loops are kept
/// once.
pub fn build_csr(edges: &[(usize, usize)], n: usize) -> Result<SparseGraph> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (line, &(u, v)) in edges.iter().enumerate() {
        if u >= n || v >= n {
            return Err(Error::input(format!(
                "edge #{line} ({u}, {v}) out of range for n = {n}"
            )));
        }
        adj[u].push(v);
        if u != v {
            adj[v].push(u);
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for nbrs in &mut adj {
        nbrs.sort_unstable();
        nbrs.dedup();
        col_idx.extend_from_slice(nbrs);
        row_ptr.push(col_idx.len());
    }
    Ok(SparseGraph::from_csr_unchecked(n, row_ptr, col_idx))
}

impl SparseGraph {
    fn from_csr_unchecked(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        let degrees: Vec<f64> = row_ptr.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        let inv_sqrt_deg = degrees
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let isolated = degrees.iter().filter(|&&d| d == 0.0).count();
        SparseGraph {
            n,
            row_ptr,
            col_idx,
            degrees,
            inv_sqrt_deg,
            isolated,
            policy: IsolatedPolicy::Reject,
        }
    }

    pub fn with_isolated_policy(mut self, policy: IsolatedPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn isolated_policy(&self) -> IsolatedPolicy {
        self.policy
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Number of stored (directed) CSR entries.
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.has_edge(i, i)
    }

    pub fn isolated_count(&self) -> usize {
        self.isolated
    }

    /// Undirected edges with `u <= v`, self-loops included.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v >= u)
                .map(move |v| (u, v))
        })
    }

    /// Undirected edge count, self-loops excluded. This is the "Edges" column
    /// convention of the usual citation-graph statistics tables.
    pub fn undirected_edge_count(&self) -> usize {
        self.undirected_edges().filter(|(u, v)| u != v).count()
    }

    /// Copy of the graph with a self-loop on every node. Existing self-loops
    /// are not doubled.
    pub fn with_self_loops(&self) -> SparseGraph {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut col_idx = Vec::with_capacity(self.nnz() + self.n);
        row_ptr.push(0);
        for i in 0..self.n {
            let nbrs = self.neighbors(i);
            let pos = nbrs.partition_point(|&j| j < i);
            col_idx.extend_from_slice(&nbrs[..pos]);
            col_idx.push(i);
            let rest = if nbrs.get(pos) == Some(&i) { pos + 1 } else { pos };
            col_idx.extend_from_slice(&nbrs[rest..]);
            row_ptr.push(col_idx.len());
        }
        SparseGraph::from_csr_unchecked(self.n, row_ptr, col_idx).with_isolated_policy(self.policy)
    }

    /// Number of connected components (BFS).
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn hop_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn hash_bits(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.n.hash(&mut h);
        self.row_ptr.hash(&mut h);
        self.col_idx.hash(&mut h);
        h.finish()
    }

    fn check_operator_input(&self, x: &FeatureMatrix) -> Result<()> {
        if x.rows() != self.n {
            return Err(Error::input(format!(
                "feature matrix has {} rows, graph has {} nodes",
                x.rows(),
                self.n
            )));
        }
        if self.isolated > 0 && self.policy == IsolatedPolicy::Reject {
            return Err(Error::Degenerate(format!(
                "{} isolated node(s); D^-1/2 is undefined without an isolated-node policy",
                self.isolated
            )));
        }
        Ok(())
    }

    /// `D^{-1/2} A D^{-1/2} X` written into `out`.
    fn normalized_adjacency_into(&self, x: &FeatureMatrix, out: &mut FeatureMatrix) {
        let d = x.cols();
        for i in 0..self.n {
            let row = out.row_mut(i);
            row.iter_mut().for_each(|v| *v = 0.0);
            let si = self.inv_sqrt_deg[i];
            if si == 0.0 {
                continue;
            }
            for &j in self.neighbors(i) {
                let w = si * self.inv_sqrt_deg[j];
                let xj = x.row(j);
                for c in 0..d {
                    row[c] += w * xj[c];
                }
            }
        }
    }
}

/// `L X = X − D^{-1/2} A D^{-1/2} X`, the symmetric normalized Laplacian.
pub fn laplacian_apply(g: &SparseGraph, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    g.check_operator_input(x)?;
    let mut out = FeatureMatrix::zeros(x.rows(), x.cols());
    g.normalized_adjacency_into(x, &mut out);
    for (o, &v) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *o = v - *o;
    }
    Ok(out)
}

/// `(2I − L) X = X + D^{-1/2} A D^{-1/2} X`.
pub fn shifted_apply(g: &SparseGraph, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    g.check_operator_input(x)?;
    let mut out = FeatureMatrix::zeros(x.rows(), x.cols());
    g.normalized_adjacency_into(x, &mut out);
    for (o, &v) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *o += v;
    }
    Ok(out)
}

/// `D̂^{-1/2} Â D̂^{-1/2} X` with `Â` the adjacency with a self-loop on every
/// node (an existing self-loop is kept at weight one, not doubled).
pub fn gcn_norm_apply(g: &SparseGraph, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.rows() != g.n {
        return Err(Error::input(format!(
            "feature matrix has {} rows, graph has {} nodes",
            x.rows(),
            g.n
        )));
    }
    let d = x.cols();
    let hat_inv_sqrt: Vec<f64> = (0..g.n)
        .map(|i| {
            let extra = if g.has_self_loop(i) { 0.0 } else { 1.0 };
            1.0 / (g.degrees[i] + extra).sqrt()
        })
        .collect();
    let mut out = FeatureMatrix::zeros(g.n, d);
    for i in 0..g.n {
        let si = hat_inv_sqrt[i];
        let row = out.row_mut(i);
        let nbrs = g.neighbors(i);
        let self_listed = nbrs.binary_search(&i).is_ok();
        if !self_listed {
            let w = si * si;
            for (r, &v) in row.iter_mut().zip(x.row(i)) {
                *r += w * v;
            }
        }
        for &j in nbrs {
            let w = si * hat_inv_sqrt[j];
            for (r, &v) in row.iter_mut().zip(x.row(j)) {
                *r += w * v;
            }
        }
    }
    Ok(out)
}

/// Relabels node `i` as `perm[i]`. The result has adjacency `P A Pᵀ` and
/// features `P X`.
pub fn permute_graph(
    g: &SparseGraph,
    x: &FeatureMatrix,
    perm: &[usize],
) -> Result<(SparseGraph, FeatureMatrix)> {
    check_permutation(perm, g.n)?;
    if x.rows() != g.n {
        return Err(Error::input("feature rows do not match node count"));
    }
    let edges: Vec<(usize, usize)> = g
        .undirected_edges()
        .map(|(u, v)| (perm[u], perm[v]))
        .collect();
    let pg = build_csr(&edges, g.n)?.with_isolated_policy(g.policy);
    let mut px = FeatureMatrix::zeros(x.rows(), x.cols());
    for (i, &p) in perm.iter().enumerate() {
        px.row_mut(p).copy_from_slice(x.row(i));
    }
    Ok((pg, px))
}

pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::input(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::input(format!("permutation is not a bijection on [0, {n})")));
        }
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Parses a `u v` per line edge list; `#` starts a comment.
pub fn parse_edge_list(reader: impl BufRead, path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut it = content.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(format!("expected `u v`, got {content:?}")));
        };
        let u = a
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad node index {a:?}: {e}")))?;
        let v = b
            .parse::<usize>()
            .map_err(|e| parse_err(format!("bad node index {b:?}: {e}")))?;
        edges.push((u, v));
    }
    Ok(edges)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), path)
}

/// Writes each undirected edge once.
pub fn write_edge_list(g: &SparseGraph, mut w: impl Write) -> std::io::Result<()> {
    for (u, v) in g.undirected_edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}
