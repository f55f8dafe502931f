use serde::{Deserialize, Serialize};

use super::{ModelParams, ParamGroup, TrainConfig};

/// Adam hyperparameters shared by every parameter group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub step: u64,
    /// First and second moments, one pair per parameter tensor in
    /// [`ModelParams::tensors`] order.
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl AdamState {
    pub fn new(params: &ModelParams, hyper: AdamHyper) -> Self {
        AdamState {
            hyper,
            step: 0,
            moments: params
                .tensors()
                .iter()
                .map(|t| (vec![0.0; t.data.len()], vec![0.0; t.data.len()]))
                .collect(),
        }
    }
}

/// One bias-corrected Adam update of `params` in place. `step` is the
/// 1-based step index after incrementing.
pub fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    step: u64,
    hyper: AdamHyper,
    weight_decay: f64,
) {
    let bc1 = 1.0 - hyper.beta1.powi(step as i32);
    let bc2 = 1.0 - hyper.beta2.powi(step as i32);
    for i in 0..params.len() {
        let g = grads[i] + weight_decay * params[i];
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + hyper.eps);
    }
}

/// Adam step over all parameter groups. Linear-layer weights use
/// `lr_linear` and L2 weight decay; biases use `lr_linear` without decay;
/// filter coefficients use `lr_prop` without decay.
pub fn adam_step(params: &mut ModelParams, grads: &ModelParams, state: &mut AdamState, config: &TrainConfig) {
    state.step += 1;
    let step = state.step;
    let hyper = state.hyper;
    let grad_tensors = grads.tensors();
    for ((p, g), (m, v)) in params
        .tensors_mut()
        .into_iter()
        .zip(&grad_tensors)
        .zip(&mut state.moments)
    {
        debug_assert_eq!(p.name, g.name);
        let (lr, wd) = match p.group {
            ParamGroup::LinearWeight => (config.lr_linear, config.weight_decay),
            ParamGroup::LinearBias => (config.lr_linear, 0.0),
            ParamGroup::Propagation => (config.lr_prop, 0.0),
        };
        adam_update(p.data, g.data, m, v, lr, step, hyper, wd);
    }
}
