//! Node classifiers: a two-layer MLP paired with a polynomial propagation
//! stage, trained with hand-derived gradients and Adam.
//!
//! The default order is decoupled: `H = MLP(X)` then `Z = filter(H)`. With
//! [`PropagationOrder::PropagateFirst`] the filter runs on the raw features
//! and the MLP consumes the result.

mod adam;
mod filter;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, adam_update, AdamHyper, AdamState};
pub use filter::{bernstein_weights, Arch, Filter, FilterTape};

use crate::basis::FilterSpec;
use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::matrix::{FeatureMatrix, Matrix};

pub const CHECKPOINT_SCHEMA: &str = "gscnet/checkpoint/v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationOrder {
    #[default]
    Decoupled,
    PropagateFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub d_in: usize,
    pub hidden: usize,
    pub d_out: usize,
}

impl ModelDims {
    pub fn new(d_in: usize, d_out: usize) -> Self {
        ModelDims {
            d_in,
            hidden: 64,
            d_out,
        }
    }
}

/// Architecture and degree selection, as it appears in experiment configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "snake_case")]
pub enum ArchConfig {
    Gscnet { k1: Option<usize>, k2: Option<usize> },
    Gcn { depth: usize },
    Jknet { depth: usize },
    Bernnet { k: usize },
}

impl ArchConfig {
    pub fn arch(&self) -> Arch {
        match self {
            ArchConfig::Gscnet { .. } => Arch::Gscnet,
            ArchConfig::Gcn { .. } => Arch::Gcn,
            ArchConfig::Jknet { .. } => Arch::Jknet,
            ArchConfig::Bernnet { .. } => Arch::Bernnet,
        }
    }

    /// The same architecture at propagation depth `depth`. GSCNet uses
    /// `K1 = K2 = depth`.
    pub fn at_depth(arch: Arch, depth: usize) -> Self {
        match arch {
            Arch::Gscnet => ArchConfig::Gscnet {
                k1: Some(depth),
                k2: Some(depth),
            },
            Arch::Gcn => ArchConfig::Gcn { depth },
            Arch::Jknet => ArchConfig::Jknet { depth },
            Arch::Bernnet => ArchConfig::Bernnet { k: depth },
        }
    }

    /// Initial propagation stage. GSCNet and Bernstein coefficients start at
    /// one (the Bernstein filter is then the identity); jumping-knowledge
    /// weights start at `1/K`, an even average over depths.
    pub fn initial_filter(&self) -> Result<Filter> {
        Ok(match *self {
            ArchConfig::Gscnet { k1, k2 } => Filter::Gscnet {
                spec: FilterSpec::uniform(k1, k2),
            },
            ArchConfig::Gcn { depth } => Filter::Gcn { depth },
            ArchConfig::Jknet { depth } => {
                if depth == 0 {
                    return Err(Error::Config("JKNet depth must be at least 1".into()));
                }
                Filter::Jknet {
                    alpha: vec![1.0 / depth as f64; depth],
                }
            }
            ArchConfig::Bernnet { k } => Filter::Bernnet {
                theta: vec![1.0; k + 1],
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGroup {
    LinearWeight,
    LinearBias,
    Propagation,
}

pub struct Tensor<'a> {
    pub name: &'static str,
    pub group: ParamGroup,
    pub data: &'a [f64],
}

pub struct TensorMut<'a> {
    pub name: &'static str,
    pub group: ParamGroup,
    pub data: &'a mut [f64],
}

/// Full trainable state. Also used as the gradient container, with the same
/// shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub order: PropagationOrder,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub filter: Filter,
}

impl ModelParams {
    pub fn arch(&self) -> Arch {
        self.filter.arch()
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            d_in: self.w1.rows(),
            hidden: self.w1.cols(),
            d_out: self.w2.cols(),
        }
    }

    pub fn tensors(&self) -> Vec<Tensor<'_>> {
        let mut out = vec![
            Tensor { name: "w1", group: ParamGroup::LinearWeight, data: self.w1.as_slice() },
            Tensor { name: "b1", group: ParamGroup::LinearBias, data: &self.b1 },
            Tensor { name: "w2", group: ParamGroup::LinearWeight, data: self.w2.as_slice() },
            Tensor { name: "b2", group: ParamGroup::LinearBias, data: &self.b2 },
        ];
        for (name, data) in self.filter.coefficients() {
            out.push(Tensor { name, group: ParamGroup::Propagation, data });
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = vec![
            TensorMut { name: "w1", group: ParamGroup::LinearWeight, data: self.w1.as_mut_slice() },
            TensorMut { name: "b1", group: ParamGroup::LinearBias, data: &mut self.b1 },
            TensorMut { name: "w2", group: ParamGroup::LinearWeight, data: self.w2.as_mut_slice() },
            TensorMut { name: "b2", group: ParamGroup::LinearBias, data: &mut self.b2 },
        ];
        for (name, data) in self.filter.coefficients_mut() {
            out.push(TensorMut { name, group: ParamGroup::Propagation, data });
        }
        out
    }

    pub fn zeros_like(&self) -> ModelParams {
        ModelParams {
            order: self.order,
            w1: Matrix::zeros(self.w1.rows(), self.w1.cols()),
            b1: vec![0.0; self.b1.len()],
            w2: Matrix::zeros(self.w2.rows(), self.w2.cols()),
            b2: vec![0.0; self.b2.len()],
            filter: self.filter.zeros_like(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for t in self.tensors_mut() {
            let len = t.data.len();
            t.data.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        assert_eq!(offset, flat.len(), "flat parameter vector has the wrong length");
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(&Checkpoint {
            schema: CHECKPOINT_SCHEMA.to_string(),
            arch: self.arch(),
            params: self.clone(),
        })?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_slice(&bytes)?;
        if ck.schema != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!("unsupported checkpoint schema {:?}", ck.schema)));
        }
        if ck.arch != ck.params.arch() {
            return Err(Error::Config("checkpoint arch tag disagrees with its filter".into()));
        }
        Ok(ck.params)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    schema: String,
    arch: Arch,
    params: ModelParams,
}

/// Symmetric uniform fan-in initialisation, `U(−1/√fan_in, 1/√fan_in)`, for
/// both MLP layers and their biases.
pub fn init_params(arch: &ArchConfig, dims: ModelDims, order: PropagationOrder, seed: u64) -> Result<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |fan_in: usize, fan_out: usize| {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let w = Matrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-bound..bound));
        let b: Vec<f64> = (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect();
        (w, b)
    };
    let (w1, b1) = layer(dims.d_in, dims.hidden);
    let (w2, b2) = layer(dims.hidden, dims.d_out);
    Ok(ModelParams {
        order,
        w1,
        b1,
        w2,
        b2,
        filter: arch.initial_filter()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr_linear: f64,
    pub lr_prop: f64,
    pub weight_decay: f64,
    /// Dropout on the input of the propagation stage.
    pub dropout_conv: f64,
    /// Dropout on the input of the MLP.
    pub dropout_linear: f64,
    pub epochs: usize,
    pub patience: usize,
    pub hidden: usize,
    pub order: PropagationOrder,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr_linear: 0.01,
            lr_prop: 0.01,
            weight_decay: 5e-4,
            dropout_conv: 0.5,
            dropout_linear: 0.5,
            epochs: 300,
            patience: 200,
            hidden: 64,
            order: PropagationOrder::Decoupled,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_linear > 0.0 && self.lr_prop > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        for p in [self.dropout_conv, self.dropout_linear] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::Config(format!("dropout {p} outside [0, 1)")));
            }
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight decay must be non-negative".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Inverted dropout. Returns the mask (entries `0` or `1/(1−p)`), or `None`
/// when nothing is dropped.
fn dropout(x: &mut Matrix, p: f64, mode: Mode, rng: &mut impl Rng) -> Option<Vec<f64>> {
    if mode == Mode::Eval || p == 0.0 {
        return None;
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.as_slice().len())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    apply_mask(x, &Some(mask.clone()));
    Some(mask)
}

fn apply_mask(x: &mut Matrix, mask: &Option<Vec<f64>>) {
    if let Some(mask) = mask {
        for (v, m) in x.as_mut_slice().iter_mut().zip(mask) {
            *v *= m;
        }
    }
}

/// Intermediate values needed by [`backward`].
pub struct Tape {
    mlp_input: Matrix,
    pre_relu: Matrix,
    hidden: Matrix,
    drop_linear: Option<Vec<f64>>,
    drop_conv: Option<Vec<f64>>,
    filter: FilterTape,
}

fn mlp_forward(params: &ModelParams, input: &Matrix) -> (Matrix, Matrix, Matrix) {
    let mut pre = input.matmul(&params.w1);
    pre.add_row_vector(&params.b1);
    let mut hidden = pre.clone();
    hidden.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
    let mut out = hidden.matmul(&params.w2);
    out.add_row_vector(&params.b2);
    (pre, hidden, out)
}

pub fn forward(
    params: &ModelParams,
    g: &SparseGraph,
    x: &FeatureMatrix,
    config: &TrainConfig,
    mode: Mode,
    rng: &mut impl Rng,
) -> Result<(Matrix, Tape)> {
    let dims = params.dims();
    if x.cols() != dims.d_in {
        return Err(Error::input(format!(
            "features have width {}, model expects {}",
            x.cols(),
            dims.d_in
        )));
    }
    if x.rows() != g.n() {
        return Err(Error::input("feature rows do not match node count"));
    }
    match params.order {
        PropagationOrder::Decoupled => {
            let mut mlp_input = x.clone();
            let drop_linear = dropout(&mut mlp_input, config.dropout_linear, mode, rng);
            let (pre_relu, hidden, mut h) = mlp_forward(params, &mlp_input);
            let drop_conv = dropout(&mut h, config.dropout_conv, mode, rng);
            let (z, filter) = params.filter.apply(g, &h)?;
            Ok((z, Tape { mlp_input, pre_relu, hidden, drop_linear, drop_conv, filter }))
        }
        PropagationOrder::PropagateFirst => {
            let mut xin = x.clone();
            let drop_conv = dropout(&mut xin, config.dropout_conv, mode, rng);
            let (mut mlp_input, filter) = params.filter.apply(g, &xin)?;
            let drop_linear = dropout(&mut mlp_input, config.dropout_linear, mode, rng);
            let (pre_relu, hidden, z) = mlp_forward(params, &mlp_input);
            Ok((z, Tape { mlp_input, pre_relu, hidden, drop_linear, drop_conv, filter }))
        }
    }
}

/// Gradients of all parameters given `∂loss/∂logits`.
pub fn backward(params: &ModelParams, g: &SparseGraph, tape: &Tape, dlogits: &Matrix) -> Result<ModelParams> {
    let mut grads = params.zeros_like();
    let mlp_backward = |grads: &mut ModelParams, dout: &Matrix| -> Matrix {
        grads.w2 = tape.hidden.t_matmul(dout);
        grads.b2 = dout.column_sums();
        let mut dpre = dout.matmul_t(&params.w2);
        for (d, &p) in dpre.as_mut_slice().iter_mut().zip(tape.pre_relu.as_slice()) {
            if p <= 0.0 {
                *d = 0.0;
            }
        }
        grads.w1 = tape.mlp_input.t_matmul(&dpre);
        grads.b1 = dpre.column_sums();
        dpre
    };
    match params.order {
        PropagationOrder::Decoupled => {
            let (dh, fgrad) = params.filter.backward(g, &tape.filter, dlogits, true)?;
            let mut dh = dh.expect("input gradient was requested");
            apply_mask(&mut dh, &tape.drop_conv);
            mlp_backward(&mut grads, &dh);
            grads.filter = fgrad;
        }
        PropagationOrder::PropagateFirst => {
            let dpre = mlp_backward(&mut grads, dlogits);
            let mut du = dpre.matmul_t(&params.w1);
            apply_mask(&mut du, &tape.drop_linear);
            let (_, fgrad) = params.filter.backward(g, &tape.filter, &du, false)?;
            grads.filter = fgrad;
        }
    }
    Ok(grads)
}

/// Mean softmax cross-entropy over the masked rows and its gradient with
/// respect to the logits.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize], mask: &[bool]) -> Result<(f64, Matrix)> {
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::input("loss mask selects no nodes"));
    }
    if labels.len() != logits.rows() || mask.len() != logits.rows() {
        return Err(Error::input("labels and mask must have one entry per node"));
    }
    let c = logits.cols();
    let mut grad = Matrix::zeros(logits.rows(), c);
    let mut loss = 0.0;
    let inv = 1.0 / count as f64;
    for i in (0..logits.rows()).filter(|&i| mask[i]) {
        let row = logits.row(i);
        let y = labels[i];
        if y >= c {
            return Err(Error::input(format!("label {y} at node {i} exceeds {c} outputs")));
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        loss += log_z - row[y];
        let g = grad.row_mut(i);
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = (row[k] - log_z).exp() * inv;
        }
        g[y] -= inv;
    }
    Ok((loss * inv, grad))
}

/// Masked cross-entropy and all parameter gradients for one forward pass.
pub fn loss_and_grad(
    params: &ModelParams,
    g: &SparseGraph,
    x: &FeatureMatrix,
    labels: &[usize],
    mask: &[bool],
    config: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<(f64, ModelParams)> {
    let (logits, tape) = forward(params, g, x, config, Mode::Train, rng)?;
    let (loss, dlogits) = softmax_cross_entropy(&logits, labels, mask)?;
    let grads = backward(params, g, &tape, &dlogits)?;
    Ok((loss, grads))
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn predict(logits: &Matrix) -> Vec<usize> {
    (0..logits.rows())
        .map(|i| {
            let row = logits.row(i);
            let mut best = 0;
            for (k, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

pub fn accuracy(pred: &[usize], labels: &[usize], mask: &[bool]) -> f64 {
    let mut total = 0usize;
    let mut hit = 0usize;
    for i in (0..pred.len()).filter(|&i| mask[i]) {
        total += 1;
        hit += usize::from(pred[i] == labels[i]);
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
