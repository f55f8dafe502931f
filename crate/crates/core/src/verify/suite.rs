//! Randomised oracle checks with a machine-readable pass/fail report.
//!
//! Each check draws its own instances from a seeded generator, so a report is
//! reproducible from `(seed, trial counts)` alone.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    dense_eigensystem, dense_matrix_power, finite_difference_gradient, spectral_filter_matrix,
    DenseOperator,
};
use crate::basis::{build_basis_cache, gsc_combine, FilterSpec};
use crate::data::random_connected_graph;
use crate::error::Result;
use crate::graph::{permute_graph, SparseGraph};
use crate::matrix::Matrix;
use crate::model::{
    forward, init_params, loss_and_grad, predict, softmax_cross_entropy, Arch, ArchConfig, Mode,
    ModelDims, ModelParams, ParamGroup, PropagationOrder, TrainConfig,
};
use crate::pnca::{positive_combination_check, rayleigh_quotient, ActivationClass};

pub const SUITE_SCHEMA: &str = "gscnet/verify-report/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed error (or violation) across trials.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub first_failure: Option<String>,
}

impl CheckReport {
    fn new(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            worst: 0.0,
            tolerance,
            passed: true,
            first_failure: None,
        }
    }

    /// Records one trial whose error is `err`; NaN counts as a failure.
    fn record(&mut self, err: f64, describe: impl FnOnce() -> String) {
        self.trials += 1;
        if err.is_nan() || err > self.worst {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
        }
        if !(err <= self.tolerance) {
            self.fail(describe);
        }
    }

    fn fail(&mut self, describe: impl FnOnce() -> String) {
        self.failures += 1;
        self.passed = false;
        if self.first_failure.is_none() {
            self.first_failure = Some(describe());
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} trials, {} failures, worst {:.3e} (tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.failures,
            self.worst,
            self.tolerance
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub spectral: usize,
    pub positivity: usize,
    pub permutation: usize,
    pub gradient: usize,
    pub rayleigh: usize,
    pub recurrence: usize,
}

impl Default for TrialCounts {
    fn default() -> Self {
        TrialCounts {
            spectral: 100,
            positivity: 100,
            permutation: 100,
            gradient: 20,
            rayleigh: 1000,
            recurrence: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub seed: u64,
    pub counts: TrialCounts,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

pub fn run_suite(seed: u64, counts: TrialCounts) -> Result<SuiteReport> {
    let checks = vec![
        check_spectral_equivalence(counts.spectral, seed)?,
        check_eigen_range(counts.spectral, seed)?,
        check_recurrence(counts.recurrence, seed)?,
        check_positivity(counts.positivity, seed)?,
        check_permutation_equivariance(counts.permutation, seed)?,
        check_gradients(counts.gradient, seed)?,
        check_rayleigh_surrogate(counts.rayleigh, seed)?,
    ];
    Ok(SuiteReport {
        schema: SUITE_SCHEMA.to_string(),
        seed,
        counts,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn random_graph(rng: &mut ChaCha8Rng, min_n: usize, max_n: usize) -> SparseGraph {
    let n = rng.random_range(min_n..=max_n);
    let p = rng.random_range(0.05..0.5);
    random_connected_graph(n, p, rng)
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn random_coeffs(rng: &mut ChaCha8Rng, max_degree: usize) -> Vec<f64> {
    if rng.random_bool(0.15) {
        return Vec::new();
    }
    let k = rng.random_range(0..=max_degree);
    (0..=k).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Sparse basis combination against `U diag(h(λ)) Uᵀ X`.
pub fn check_spectral_equivalence(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eec);
    let mut report = CheckReport::new("spectral_equivalence", 1e-8);
    for t in 0..trials {
        let g = random_graph(&mut rng, 2, 50);
        let spec = FilterSpec::new(random_coeffs(&mut rng, 6), random_coeffs(&mut rng, 6));
        let x = random_matrix(&mut rng, g.n(), 3);
        let cache = build_basis_cache(&g, &x, spec.k1().unwrap_or(0), spec.k2().unwrap_or(0))?;
        let sparse = gsc_combine(&cache, &spec)?;
        let eig = dense_eigensystem(&g)?;
        let dense = spectral_filter_matrix(&eig, |l| spec.response(l), &x);
        let err = if dense.frobenius() == 0.0 {
            sparse.frobenius()
        } else {
            sparse.rel_frobenius_error(&dense)
        };
        report.record(err, || format!("trial {t}: n={}, spec={spec:?}, error {err:e}", g.n()));
    }
    Ok(report)
}

/// Eigenvalues of `L` lie in `[0, 2]` and the decomposition reconstructs `L`.
pub fn check_eigen_range(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe16e);
    let mut report = CheckReport::new("eigen_range_and_reconstruction", 1e-9);
    for t in 0..trials {
        let g = random_graph(&mut rng, 2, 50);
        let eig = dense_eigensystem(&g)?;
        let below = eig.values.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        let above = eig.values.iter().map(|&v| (v - 2.0).max(0.0)).fold(0.0, f64::max);
        let recon = eig.reconstruct().max_abs_diff(&super::dense_laplacian(&g)?);
        let orth = eig.orthogonality_error();
        let err = below.max(above).max(recon).max(orth);
        report.record(err, || format!("trial {t}: n={}, range/reconstruction error {err:e}", g.n()));
    }
    Ok(report)
}

/// Cached blocks equal dense operator powers applied to the features.
pub fn check_recurrence(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4ec0);
    let mut report = CheckReport::new("recurrence_vs_dense_power", 1e-10);
    for t in 0..trials {
        let g = random_graph(&mut rng, 2, 40);
        let (k1, k2) = (rng.random_range(0..=6), rng.random_range(0..=6));
        let x = random_matrix(&mut rng, g.n(), 2);
        let cache = build_basis_cache(&g, &x, k1, k2)?;
        let mut err: f64 = 0.0;
        for (blocks, op) in [
            (cache.positive(), DenseOperator::Shifted),
            (cache.negative(), DenseOperator::Laplacian),
        ] {
            for (i, block) in blocks.iter().enumerate() {
                let dense = dense_matrix_power(&g, op, i)?.matmul(&x);
                err = err.max(block.rel_frobenius_error(&dense));
            }
        }
        report.record(err, || format!("trial {t}: n={}, K1={k1}, K2={k2}, error {err:e}", g.n()));
    }
    Ok(report)
}

/// Non-negative combinations of the positive basis with `α_0, α_1 > 0`
/// classify as positive activations.
pub fn check_positivity(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9051);
    let mut report = CheckReport::new("positive_combination", 0.0);
    for t in 0..trials {
        let g = random_graph(&mut rng, 2, 30);
        let k = rng.random_range(1..=5);
        let coeffs: Vec<f64> = (0..=k)
            .map(|i| {
                if i < 2 {
                    rng.random_range(0.05..1.0)
                } else if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        match positive_combination_check(&coeffs, &g)? {
            ActivationClass::Positive => report.record(0.0, String::new),
            ActivationClass::Negative { witness } => {
                report.record(1.0, || format!("trial {t}: n={}, α={coeffs:?}, witness {witness:?}", g.n()))
            }
        }
    }
    Ok(report)
}

fn random_arch(rng: &mut ChaCha8Rng) -> ArchConfig {
    let depth = rng.random_range(1..=4);
    match Arch::ALL[rng.random_range(0..Arch::ALL.len())] {
        Arch::Gscnet => ArchConfig::Gscnet {
            k1: rng.random_bool(0.85).then(|| rng.random_range(0..=depth)),
            k2: Some(rng.random_range(0..=depth)),
        },
        arch => ArchConfig::at_depth(arch, depth),
    }
}

/// Eval-mode logits commute with node relabelling.
pub fn check_permutation_equivariance(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let mut report = CheckReport::new("permutation_equivariance", 1e-9);
    let cfg = TrainConfig::default();
    for t in 0..trials {
        let g = random_graph(&mut rng, 3, 40);
        let n = g.n();
        let d = rng.random_range(1..=5);
        let x = random_matrix(&mut rng, n, d);
        let arch = random_arch(&mut rng);
        let order = if rng.random_bool(0.5) { PropagationOrder::Decoupled } else { PropagationOrder::PropagateFirst };
        let dims = ModelDims { d_in: d, hidden: 16, d_out: 3 };
        let params = init_params(&arch, dims, order, rng.random())?;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let (pg, px) = permute_graph(&g, &x, &perm)?;
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        let (z, _) = forward(&params, &g, &x, &cfg, Mode::Eval, &mut unused)?;
        let (pz, _) = forward(&params, &pg, &px, &cfg, Mode::Eval, &mut unused)?;
        let pred = predict(&z);
        let ppred = predict(&pz);
        let mut err: f64 = 0.0;
        let mut labels_agree = true;
        for i in 0..n {
            let (a, b) = (z.row(i), pz.row(perm[i]));
            err = a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(err, f64::max);
            labels_agree &= pred[i] == ppred[perm[i]];
        }
        if !labels_agree {
            err = err.max(f64::INFINITY);
        }
        report.record(err, || format!("trial {t}: n={n}, {arch:?} {order:?}, max logit diff {err:e}"));
    }
    Ok(report)
}

fn group_norms(params: &ModelParams, values: &[f64]) -> Vec<(ParamGroup, Vec<f64>)> {
    let mut out: Vec<(ParamGroup, Vec<f64>)> = Vec::new();
    let mut offset = 0;
    for t in params.tensors() {
        let slice = &values[offset..offset + t.data.len()];
        offset += t.data.len();
        match out.iter_mut().find(|(g, _)| *g == t.group) {
            Some((_, v)) => v.extend_from_slice(slice),
            None => out.push((t.group, slice.to_vec())),
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Analytic gradients against central differences, per parameter group:
/// `‖g_analytic − g_numeric‖ / max(‖g_analytic‖, ‖g_numeric‖)`.
pub fn check_gradients(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x64ad);
    let mut report = CheckReport::new("finite_difference_gradients", 1e-4);
    let cfg = TrainConfig { dropout_conv: 0.0, dropout_linear: 0.0, ..TrainConfig::default() };
    let (n, d, classes) = (10, 4, 3);
    for t in 0..trials {
        let g = random_connected_graph(n, rng.random_range(0.15..0.5), &mut rng);
        let x = random_matrix(&mut rng, n, d);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.7)).collect();
        let mask = if mask.iter().any(|&m| m) { mask } else { vec![true; n] };
        let arch = ArchConfig::Gscnet {
            k1: Some(rng.random_range(0..=3)),
            k2: rng.random_bool(0.85).then(|| rng.random_range(0..=3)),
        };
        let order = if t % 2 == 0 { PropagationOrder::Decoupled } else { PropagationOrder::PropagateFirst };
        let dims = ModelDims { d_in: d, hidden: 16, d_out: classes };
        let mut params = init_params(&arch, dims, order, rng.random())?;
        for tensor in params.tensors_mut() {
            if tensor.group == ParamGroup::Propagation {
                tensor.data.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            }
        }
        let (_, grads) = loss_and_grad(&params, &g, &x, &labels, &mask, &cfg, &mut ChaCha8Rng::seed_from_u64(0))?;
        let analytic = grads.flatten();
        let mut probe = params.clone();
        let numeric = finite_difference_gradient(
            |theta| {
                probe.assign_flat(theta);
                let mut unused = ChaCha8Rng::seed_from_u64(0);
                forward(&probe, &g, &x, &cfg, Mode::Eval, &mut unused)
                    .and_then(|(logits, _)| softmax_cross_entropy(&logits, &labels, &mask))
                    .map_or(f64::NAN, |(loss, _)| loss)
            },
            &params.flatten(),
            1e-5,
        );
        let a_groups = group_norms(&params, &analytic);
        let n_groups = group_norms(&params, &numeric);
        let mut err: f64 = 0.0;
        let mut worst_group = ParamGroup::LinearWeight;
        for ((group, a), (_, b)) in a_groups.iter().zip(&n_groups) {
            let diff: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
            let scale = norm(a).max(norm(b)).max(1e-12);
            let e = norm(&diff) / scale;
            if e > err || e.is_nan() {
                err = if e.is_nan() { f64::INFINITY } else { e };
                worst_group = *group;
            }
        }
        report.record(err, || format!("trial {t}: {arch:?} {order:?}, group {worst_group:?} error {err:e}"));
    }
    Ok(report)
}

/// The Rayleigh quotient never rises under `2I − L` and never falls under `L`.
pub fn check_rayleigh_surrogate(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4a11);
    let mut report = CheckReport::new("rayleigh_surrogate", 1e-12);
    for t in 0..trials {
        let g = random_graph(&mut rng, 2, 40);
        let x = random_matrix(&mut rng, g.n(), 1);
        let r0 = rayleigh_quotient(&g, x.as_slice())?;
        let up = crate::graph::shifted_apply(&g, &x)?;
        let down = crate::graph::laplacian_apply(&g, &x)?;
        let r_low = rayleigh_quotient(&g, up.as_slice())?;
        let mut violation = (r_low - r0).max(0.0);
        if down.frobenius() > 1e-12 {
            let r_high = rayleigh_quotient(&g, down.as_slice())?;
            violation = violation.max(r0 - r_high);
        }
        report.record(violation, || {
            format!("trial {t}: n={}, quotient moved the wrong way by {violation:e}", g.n())
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_serialises() {
        let counts = TrialCounts {
            spectral: 5,
            positivity: 5,
            permutation: 5,
            gradient: 2,
            rayleigh: 20,
            recurrence: 5,
        };
        let report = run_suite(1, counts).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}", c.line());
            assert!(c.trials > 0);
        }
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(SUITE_SCHEMA));
    }

    #[test]
    fn nan_counts_as_failure() {
        let mut r = CheckReport::new("x", 1.0);
        r.record(f64::NAN, || "nan".into());
        assert!(!r.passed);
        assert_eq!(r.first_failure.as_deref(), Some("nan"));
    }
}
