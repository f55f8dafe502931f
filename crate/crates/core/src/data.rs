//! Datasets, train/validation/test splits and the two-class contextual
//! stochastic block model.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_csr, read_edge_list, write_edge_list, IsolatedPolicy, SparseGraph};
use crate::matrix::FeatureMatrix;
use crate::pnca::label_smoothness;

#[derive(Clone, Debug)]
pub struct Dataset {
    pub graph: SparseGraph,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn new(graph: SparseGraph, features: FeatureMatrix, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != graph.n() || labels.len() != graph.n() {
            return Err(Error::input(format!(
                "graph has {} nodes, features {} rows, labels {} entries",
                graph.n(),
                features.rows(),
                labels.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::input("features contain NaN or infinity"));
        }
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        Ok(Dataset {
            graph,
            features,
            labels,
            num_classes,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            nodes: self.n(),
            edges: self.graph.undirected_edge_count(),
            features: self.features.cols(),
            classes: self.num_classes,
            isolated_nodes: self.graph.isolated_count(),
            components: self.graph.component_count(),
            label_smoothness: label_smoothness(&self.graph, &self.labels).ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub nodes: usize,
    /// Undirected, self-loops excluded.
    pub edges: usize,
    pub features: usize,
    pub classes: usize,
    pub isolated_nodes: usize,
    pub components: usize,
    pub label_smoothness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Split {
    pub fn sizes(&self) -> (usize, usize, usize) {
        let count = |m: &[bool]| m.iter().filter(|&&b| b).count();
        (count(&self.train), count(&self.val), count(&self.test))
    }
}

/// Random split with `floor(ratio · n)` validation and test nodes; the
/// remainder goes to training.
pub fn random_split(n: usize, ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (tr, va, te) = ratios;
    if [tr, va, te].iter().any(|r| !(0.0..=1.0).contains(r)) || ((tr + va + te) - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split ratios {ratios:?} must be in [0,1] and sum to 1")));
    }
    let n_val = (va * n as f64 + 1e-9).floor() as usize;
    let n_test = (te * n as f64 + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut split = Split {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    };
    for (rank, &node) in order.iter().enumerate() {
        if rank < n_val {
            split.val[node] = true;
        } else if rank < n_val + n_test {
            split.test[node] = true;
        } else {
            split.train[node] = true;
        }
    }
    Ok(split)
}

pub const STANDARD_RATIOS: (f64, f64, f64) = (0.6, 0.2, 0.2);

/// Two balanced classes, Bernoulli edges, Gaussian features around `±μ u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsbmParams {
    pub n: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub mu: f64,
    pub sigma: f64,
    pub d: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsbmPreset {
    Homophily,
    Heterophily,
}

impl CsbmParams {
    /// Parameters with a target expected degree and `p_intra / p_inter = ratio`.
    pub fn with_degree_ratio(n: usize, expected_degree: f64, ratio: f64, seed: u64) -> Self {
        // Expected degree ≈ (n/2)·p_intra + (n/2)·p_inter.
        let p_inter = 2.0 * expected_degree / (n as f64 * (1.0 + ratio));
        CsbmParams {
            n,
            p_intra: (ratio * p_inter).min(1.0),
            p_inter: p_inter.min(1.0),
            mu: 1.0,
            sigma: 1.0,
            d: 16,
            seed,
        }
    }

    /// The declared presets: n = 1000, d = 16, μ = σ = 1, expected degree 10,
    /// intra/inter ratio 4 (homophily) or 1/4 (heterophily).
    pub fn preset(preset: CsbmPreset, seed: u64) -> Self {
        let ratio = match preset {
            CsbmPreset::Homophily => 4.0,
            CsbmPreset::Heterophily => 0.25,
        };
        CsbmParams::with_degree_ratio(1000, 10.0, ratio, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!("CSBM needs an even n >= 4, got {}", self.n)));
        }
        for p in [self.p_intra, self.p_inter] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("edge probability {p} outside [0, 1]")));
            }
        }
        if self.p_intra == 0.0 && self.p_inter == 0.0 {
            return Err(Error::Degenerate("both CSBM edge probabilities are zero".into()));
        }
        if !(self.sigma >= 0.0) || self.d == 0 {
            return Err(Error::Config("CSBM needs sigma >= 0 and d >= 1".into()));
        }
        Ok(())
    }
}

/// Nodes `0..n/2` are class 0, the rest class 1. Isolated nodes, if any, are
/// handled by the identity policy.
pub fn csbm_generate(params: &CsbmParams) -> Result<Dataset> {
    params.validate()?;
    let n = params.n;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= half)).collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] {
                params.p_intra
            } else {
                params.p_inter
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = build_csr(&edges, n)?.with_isolated_policy(IsolatedPolicy::Identity);

    let mut u: Vec<f64> = (0..params.d).map(|_| rng.sample(StandardNormal)).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);

    let mut features = FeatureMatrix::zeros(n, params.d);
    for i in 0..n {
        let sign = if labels[i] == 0 { 1.0 } else { -1.0 };
        for (j, uj) in u.iter().enumerate() {
            let noise: f64 = rng.sample(StandardNormal);
            features[(i, j)] = params.mu * sign * uj + params.sigma * noise;
        }
    }
    Dataset::new(graph, features, labels)
}

/// Erdős–Rényi graph with an added random spanning path, so it is connected.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> SparseGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    build_csr(&edges, n).expect("indices are in range by construction")
}

/// Paths of the three dataset files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
}

impl DatasetFiles {
    pub fn in_dir(dir: &Path) -> Self {
        DatasetFiles {
            edges: dir.join("edges.txt"),
            features: dir.join("features.csv"),
            labels: dir.join("labels.txt"),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<std::fs::File>> {
    std::fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Comma-separated floats, one row per node. Every row must have the width
/// of the first.
pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| parse_error(path, i + 1, format!("bad float {field:?}: {e}")))?;
            if !v.is_finite() {
                return Err(parse_error(path, i + 1, "non-finite feature value"));
            }
            data.push(v);
        }
        let w = data.len() - before;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(parse_error(
                    path,
                    i + 1,
                    format!("row has {w} columns, expected {expected}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    FeatureMatrix::from_vec(rows, width.unwrap_or(0), data)
}

/// One non-negative integer class id per line.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: i64 = t
            .parse()
            .map_err(|e| parse_error(path, i + 1, format!("bad label {t:?}: {e}")))?;
        if v < 0 {
            return Err(parse_error(path, i + 1, format!("label {v} out of range")));
        }
        labels.push(v as usize);
    }
    Ok(labels)
}

/// Loads and validates the three-file layout. Node count comes from the
/// feature file; label count and edge endpoints are checked against it.
pub fn load_dataset(files: &DatasetFiles) -> Result<Dataset> {
    let features = read_features(&files.features)?;
    let n = features.rows();
    let labels = read_labels(&files.labels)?;
    if labels.len() != n {
        return Err(parse_error(
            &files.labels,
            labels.len().min(n) + 1,
            format!("{} labels for {n} feature rows", labels.len()),
        ));
    }
    let edges = read_edge_list(&files.edges)?;
    if let Some(pos) = edges.iter().position(|&(u, v)| u >= n || v >= n) {
        let (u, v) = edges[pos];
        return Err(Error::Parse {
            path: files.edges.clone(),
            line: edge_line_number(&files.edges, pos)?,
            message: format!("edge ({u}, {v}) references a node >= {n}"),
        });
    }
    let graph = build_csr(&edges, n)?.with_isolated_policy(IsolatedPolicy::Identity);
    Dataset::new(graph, features, labels)
}

fn edge_line_number(path: &Path, edge_index: usize) -> Result<usize> {
    let mut seen = 0;
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.split('#').next().unwrap_or("").trim().is_empty() {
            continue;
        }
        if seen == edge_index {
            return Ok(i + 1);
        }
        seen += 1;
    }
    Ok(0)
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the three-file layout. Floats use shortest round-trip formatting,
/// so loading gives back bit-identical features.
pub fn save_dataset(ds: &Dataset, files: &DatasetFiles) -> Result<()> {
    let mut w = create(&files.edges)?;
    write_edge_list(&ds.graph, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&files.edges, e))?;

    let mut w = create(&files.features)?;
    for i in 0..ds.n() {
        let row: Vec<String> = ds.features.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", row.join(",")).map_err(|e| Error::io(&files.features, e))?;
    }
    w.flush().map_err(|e| Error::io(&files.features, e))?;

    let mut w = create(&files.labels)?;
    for l in &ds.labels {
        writeln!(w, "{l}").map_err(|e| Error::io(&files.labels, e))?;
    }
    w.flush().map_err(|e| Error::io(&files.labels, e))
}
