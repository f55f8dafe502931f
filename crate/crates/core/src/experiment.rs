//! Training runs and the comparison experiments built from them.
//!
//! Every comparison shares one seed list across the models it compares, so
//! differences are paired: seed `s` fixes the split, the MLP initialisation
//! and the dropout stream for every model in the comparison.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::basis::build_basis_cache;
use crate::data::{random_split, Dataset, Split, STANDARD_RATIOS};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::model::{
    accuracy, adam_step, forward, init_params, loss_and_grad, predict, AdamHyper, AdamState, Arch,
    ArchConfig, Filter, ModelDims, Mode, TrainConfig,
};
use crate::graph::SparseGraph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub epoch_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub arch: ArchConfig,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose validation accuracy was best (0 = untrained model).
    pub best_epoch: usize,
    pub best_val_acc: f64,
    /// Test accuracy at `best_epoch`.
    pub test_acc: f64,
    pub total_seconds: f64,
    pub learned_filter: Filter,
}

impl RunRecord {
    /// The record with wall-clock fields zeroed, for determinism checks.
    pub fn without_timings(&self) -> RunRecord {
        let mut r = self.clone();
        r.total_seconds = 0.0;
        r.epochs.iter_mut().for_each(|e| e.epoch_ms = 0.0);
        r
    }
}

/// Mixes a run seed with a stream id so splits, initialisation and dropout
/// draw from unrelated generators.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Evaluation {
    train: f64,
    val: f64,
    test: f64,
}

fn evaluate(
    params: &crate::model::ModelParams,
    ds: &Dataset,
    split: &Split,
    cfg: &TrainConfig,
) -> Result<Evaluation> {
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let (logits, _) = forward(params, &ds.graph, &ds.features, cfg, Mode::Eval, &mut unused)?;
    let pred = predict(&logits);
    Ok(Evaluation {
        train: accuracy(&pred, &ds.labels, &split.train),
        val: accuracy(&pred, &ds.labels, &split.val),
        test: accuracy(&pred, &ds.labels, &split.test),
    })
}

/// One full training run with best-validation model selection and
/// early stopping on validation accuracy.
pub fn train_run(
    ds: &Dataset,
    arch: &ArchConfig,
    cfg: &TrainConfig,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<RunRecord> {
    cfg.validate()?;
    let split = random_split(ds.n(), ratios, derive_seed(seed, 1))?;
    let dims = ModelDims {
        d_in: ds.features.cols(),
        hidden: cfg.hidden,
        d_out: ds.num_classes.max(2),
    };
    let mut params = init_params(arch, dims, cfg.order, derive_seed(seed, 2))?;
    let mut adam = AdamState::new(&params, AdamHyper::default());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));

    let start = Instant::now();
    let init = evaluate(&params, ds, &split, cfg)?;
    let mut best = (0usize, init.val, init.test, params.filter.clone());
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut since_best = 0usize;
    for epoch in 1..=cfg.epochs {
        let t0 = Instant::now();
        let (loss, grads) = loss_and_grad(&params, &ds.graph, &ds.features, &ds.labels, &split.train, cfg, &mut rng)?;
        adam_step(&mut params, &grads, &mut adam, cfg);
        let epoch_ms = t0.elapsed().as_secs_f64() * 1e3;
        if !params.is_finite() {
            return Err(Error::Degenerate(format!("parameters diverged at epoch {epoch}")));
        }
        let ev = evaluate(&params, ds, &split, cfg)?;
        records.push(EpochRecord {
            epoch,
            train_loss: loss,
            train_acc: ev.train,
            val_acc: ev.val,
            test_acc: ev.test,
            epoch_ms,
        });
        if epoch == 1 || ev.val > best.1 {
            best = (epoch, ev.val, ev.test, params.filter.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(RunRecord {
        seed,
        arch: *arch,
        epochs: records,
        best_epoch: best.0,
        best_val_acc: best.1,
        test_acc: best.2,
        total_seconds: start.elapsed().as_secs_f64(),
        learned_filter: best.3,
    })
}

/// Runs every seed, fanning out across the rayon pool when available.
/// Output order follows `seeds`.
pub fn run_seeds(
    ds: &Dataset,
    arch: &ArchConfig,
    cfg: &TrainConfig,
    ratios: (f64, f64, f64),
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    map_maybe_parallel(seeds, |&s| train_run(ds, arch, cfg, ratios, s))
}

#[cfg(feature = "parallel")]
fn map_maybe_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_maybe_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    items.iter().map(f).collect()
}

/// Mean with a two-sided 95% Student-t interval half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
}

pub fn mean_ci95(values: &[f64]) -> MeanCi {
    let n = values.len();
    if n == 0 {
        return MeanCi { mean: f64::NAN, ci95: f64::NAN, n };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return MeanCi { mean, ci95: 0.0, n };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    MeanCi {
        mean,
        ci95: t * (var / n as f64).sqrt(),
        n,
    }
}

pub fn summarize(runs: &[RunRecord]) -> MeanCi {
    mean_ci95(&runs.iter().map(|r| r.test_acc).collect::<Vec<_>>())
}

/// Explicit hyperparameter grid searched on validation accuracy. An empty
/// axis keeps the base configuration's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuneGrid {
    pub lr_linear: Vec<f64>,
    pub lr_prop: Vec<f64>,
    pub weight_decay: Vec<f64>,
    /// Applied to both dropout sites.
    pub dropout: Vec<f64>,
}

impl TuneGrid {
    /// Learning rates for the propagation coefficients at the two ends of the
    /// usual search range; every other setting stays at its base value.
    pub fn desk() -> Self {
        TuneGrid { lr_prop: vec![0.01, 0.05], ..TuneGrid::default() }
    }

    /// Cartesian product over the non-empty axes, in axis order. The
    /// propagation learning rate axis collapses for architectures without
    /// trainable propagation coefficients.
    pub fn points(&self, base: &TrainConfig, arch: &ArchConfig) -> Vec<TrainConfig> {
        let axis = |v: &[f64], fallback: f64| if v.is_empty() { vec![fallback] } else { v.to_vec() };
        let has_prop = !matches!(arch, ArchConfig::Gcn { .. });
        let lr_prop = if has_prop { axis(&self.lr_prop, base.lr_prop) } else { vec![base.lr_prop] };
        let mut out = Vec::new();
        for &lr_linear in &axis(&self.lr_linear, base.lr_linear) {
            for &lr_prop in &lr_prop {
                for &weight_decay in &axis(&self.weight_decay, base.weight_decay) {
                    for &dropout in &axis(&self.dropout, f64::NAN) {
                        let (dropout_conv, dropout_linear) = if dropout.is_nan() {
                            (base.dropout_conv, base.dropout_linear)
                        } else {
                            (dropout, dropout)
                        };
                        out.push(TrainConfig {
                            lr_linear,
                            lr_prop,
                            weight_decay,
                            dropout_conv,
                            dropout_linear,
                            ..base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

/// Runs of the grid point with the best mean validation accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedRuns {
    pub chosen: TrainConfig,
    pub mean_val_acc: f64,
    pub points_tried: usize,
    pub runs: Vec<RunRecord>,
}

impl TunedRuns {
    pub fn accuracy(&self) -> MeanCi {
        summarize(&self.runs)
    }
}

/// Every grid point on every seed; the winner is chosen on validation
/// accuracy only (ties go to the earlier point).
pub fn tuned_runs(
    ds: &Dataset,
    arch: &ArchConfig,
    base: &TrainConfig,
    grid: &TuneGrid,
    ratios: (f64, f64, f64),
    seeds: &[u64],
) -> Result<TunedRuns> {
    let points = grid.points(base, arch);
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let mut runs = map_maybe_parallel(&jobs, |&(p, s)| train_run(ds, arch, &points[p], ratios, s))?;
    let per_point = seeds.len().max(1);
    let mut best: Option<(usize, f64)> = None;
    for (p, chunk) in runs.chunks(per_point).enumerate() {
        let val = chunk.iter().map(|r| r.best_val_acc).sum::<f64>() / chunk.len() as f64;
        if best.is_none_or(|(_, b)| val > b) {
            best = Some((p, val));
        }
    }
    let (p, mean_val_acc) = best.ok_or_else(|| Error::Config("empty seed list".into()))?;
    let chosen_runs = runs.drain(p * per_point..(p + 1) * per_point).collect();
    Ok(TunedRuns {
        chosen: points[p].clone(),
        mean_val_acc,
        points_tried: points.len(),
        runs: chosen_runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub k1: usize,
    pub k2: usize,
    pub accuracy: MeanCi,
    pub chosen: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeGrid {
    pub cells: Vec<GridCell>,
}

impl DegreeGrid {
    /// `max − min` of the cell means.
    pub fn spread(&self) -> f64 {
        let means = self.cells.iter().map(|c| c.accuracy.mean);
        let (lo, hi) = means.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
        hi - lo
    }
}

pub const MAX_SWEEP_DEGREE: usize = 6;

/// Mean test accuracy of GSCNet for every `(K1, K2)` pair, each tuned
/// separately over `grid`.
pub fn sweep_degrees(
    ds: &Dataset,
    k1s: &[usize],
    k2s: &[usize],
    cfg: &TrainConfig,
    grid: &TuneGrid,
    ratios: (f64, f64, f64),
    seeds: &[u64],
) -> Result<DegreeGrid> {
    if k1s.iter().chain(k2s).any(|&k| k > MAX_SWEEP_DEGREE) {
        return Err(Error::Config(format!("sweep degrees must lie in 0..={MAX_SWEEP_DEGREE}")));
    }
    let mut cells = Vec::with_capacity(k1s.len() * k2s.len());
    for &k1 in k1s {
        for &k2 in k2s {
            let arch = ArchConfig::Gscnet { k1: Some(k1), k2: Some(k2) };
            let tuned = tuned_runs(ds, &arch, cfg, grid, ratios, seeds)?;
            cells.push(GridCell { k1, k2, accuracy: tuned.accuracy(), chosen: tuned.chosen });
        }
    }
    Ok(DegreeGrid { cells })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub arch: Arch,
    pub depth: usize,
    pub accuracy: MeanCi,
    pub chosen: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OversmoothTable {
    pub depths: Vec<usize>,
    pub rows: Vec<DepthRow>,
}

impl OversmoothTable {
    pub fn accuracy(&self, arch: Arch, depth: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.arch == arch && r.depth == depth)
            .map(|r| r.accuracy.mean)
    }

    /// Best mean accuracy over all depths minus the mean at the deepest.
    pub fn drop(&self, arch: Arch) -> f64 {
        let deepest = *self.depths.iter().max().expect("at least one depth");
        let best = self
            .rows
            .iter()
            .filter(|r| r.arch == arch)
            .map(|r| r.accuracy.mean)
            .fold(f64::NEG_INFINITY, f64::max);
        best - self.accuracy(arch, deepest).unwrap_or(f64::NAN)
    }
}

/// Accuracy against propagation depth for each architecture. GSCNet at depth
/// `k` uses `K1 = K2 = k`.
pub fn oversmooth(
    ds: &Dataset,
    depths: &[usize],
    archs: &[Arch],
    cfg: &TrainConfig,
    grid: &TuneGrid,
    ratios: (f64, f64, f64),
    seeds: &[u64],
) -> Result<OversmoothTable> {
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::Config("over-smoothing depths must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &arch in archs {
        for &depth in depths {
            let tuned = tuned_runs(ds, &ArchConfig::at_depth(arch, depth), cfg, grid, ratios, seeds)?;
            rows.push(DepthRow { arch, depth, accuracy: tuned.accuracy(), chosen: tuned.chosen });
        }
    }
    Ok(OversmoothTable { depths: depths.to_vec(), rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// `Σ_{i ≤ K} α_i (2I − L)^i` only.
    PositiveOnly,
    /// `Σ_{j ≤ K} β_j L^j` only.
    NegativeOnly,
    /// Both halves.
    Mixed,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [BasisKind::PositiveOnly, BasisKind::NegativeOnly, BasisKind::Mixed];

    pub fn arch(self, k: usize) -> ArchConfig {
        match self {
            BasisKind::PositiveOnly => ArchConfig::Gscnet { k1: Some(k), k2: None },
            BasisKind::NegativeOnly => ArchConfig::Gscnet { k1: None, k2: Some(k) },
            BasisKind::Mixed => ArchConfig::Gscnet { k1: Some(k), k2: Some(k) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub basis: BasisKind,
    pub accuracy: MeanCi,
    pub per_seed: Vec<f64>,
    pub chosen: TrainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub degree: usize,
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn mean(&self, basis: BasisKind) -> f64 {
        self.rows
            .iter()
            .find(|r| r.basis == basis)
            .map_or(f64::NAN, |r| r.accuracy.mean)
    }
}

pub fn ablate_activations(
    ds: &Dataset,
    degree: usize,
    cfg: &TrainConfig,
    grid: &TuneGrid,
    ratios: (f64, f64, f64),
    seeds: &[u64],
) -> Result<AblationTable> {
    let rows = BasisKind::ALL
        .iter()
        .map(|&basis| {
            let tuned = tuned_runs(ds, &basis.arch(degree), cfg, grid, ratios, seeds)?;
            let per_seed: Vec<f64> = tuned.runs.iter().map(|r| r.test_acc).collect();
            Ok(AblationRow { basis, accuracy: mean_ci95(&per_seed), per_seed, chosen: tuned.chosen })
        })
        .collect::<Result<_>>()?;
    Ok(AblationTable { degree, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub arch: ArchConfig,
    pub warmup: usize,
    /// Every epoch's wall time, warm-up included.
    pub epoch_ms: Vec<f64>,
    /// Running total in seconds, for cumulative-time curves.
    pub cumulative_s: Vec<f64>,
    /// Mean over the epochs after warm-up.
    pub mean_epoch_ms: f64,
    /// Median over the epochs after warm-up.
    pub median_epoch_ms: f64,
    pub total_s: f64,
}

/// Times `epochs` training steps (forward, backward, Adam) with no early
/// stopping or evaluation in the loop.
pub fn bench(ds: &Dataset, arch: &ArchConfig, cfg: &TrainConfig, epochs: usize, warmup: usize, seed: u64) -> Result<BenchReport> {
    if epochs <= warmup {
        return Err(Error::Config(format!(
            "{epochs} epochs with {warmup} warm-up epochs leaves nothing to measure"
        )));
    }
    cfg.validate()?;
    let split = random_split(ds.n(), STANDARD_RATIOS, derive_seed(seed, 1))?;
    let dims = ModelDims { d_in: ds.features.cols(), hidden: cfg.hidden, d_out: ds.num_classes.max(2) };
    let mut params = init_params(arch, dims, cfg.order, derive_seed(seed, 2))?;
    let mut adam = AdamState::new(&params, AdamHyper::default());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let mut epoch_ms = Vec::with_capacity(epochs);
    for _ in 0..epochs {
        let t0 = Instant::now();
        let (_, grads) = loss_and_grad(&params, &ds.graph, &ds.features, &ds.labels, &split.train, cfg, &mut rng)?;
        adam_step(&mut params, &grads, &mut adam, cfg);
        epoch_ms.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    let cumulative_s = epoch_ms
        .iter()
        .scan(0.0, |acc, ms| {
            *acc += ms / 1e3;
            Some(*acc)
        })
        .collect::<Vec<_>>();
    let measured = &epoch_ms[warmup..];
    Ok(BenchReport {
        arch: *arch,
        warmup,
        mean_epoch_ms: measured.iter().sum::<f64>() / measured.len() as f64,
        median_epoch_ms: median(measured),
        total_s: *cumulative_s.last().unwrap_or(&0.0),
        epoch_ms,
        cumulative_s,
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median wall time in milliseconds of building a `(k1, k2)` basis cache.
pub fn time_cache_build(g: &SparseGraph, x: &FeatureMatrix, k1: usize, k2: usize, reps: usize) -> Result<f64> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        let cache = build_basis_cache(g, x, k1, k2)?;
        times.push(t0.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(cache);
    }
    Ok(median(&times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{csbm_generate, CsbmParams};

    fn small() -> Dataset {
        csbm_generate(&CsbmParams::with_degree_ratio(80, 6.0, 4.0, 1)).unwrap()
    }

    #[test]
    fn ci_uses_student_t() {
        let m = mean_ci95(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        // t_{0.975, 2} = 4.302653; s = 1; half-width = t / sqrt(3).
        assert!((m.ci95 - 4.302652729911275 / 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(mean_ci95(&[0.5]).ci95, 0.0);
    }

    #[test]
    fn zero_epochs_reports_the_untrained_model() {
        let ds = small();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let r = train_run(&ds, &ArchConfig::Gscnet { k1: Some(2), k2: Some(2) }, &cfg, STANDARD_RATIOS, 3).unwrap();
        assert!(r.epochs.is_empty());
        assert_eq!(r.best_epoch, 0);
    }

    #[test]
    fn identical_config_gives_identical_records() {
        let ds = small();
        let cfg = TrainConfig { epochs: 15, ..TrainConfig::default() };
        let arch = ArchConfig::Gscnet { k1: Some(2), k2: Some(1) };
        let a = train_run(&ds, &arch, &cfg, STANDARD_RATIOS, 7).unwrap();
        let b = train_run(&ds, &arch, &cfg, STANDARD_RATIOS, 7).unwrap();
        assert_eq!(a.without_timings(), b.without_timings());
        let losses_a: Vec<u64> = a.epochs.iter().map(|e| e.train_loss.to_bits()).collect();
        let losses_b: Vec<u64> = b.epochs.iter().map(|e| e.train_loss.to_bits()).collect();
        assert_eq!(losses_a, losses_b);
    }

    #[test]
    fn bench_needs_a_measurement_window() {
        let ds = small();
        let err = bench(&ds, &ArchConfig::Gcn { depth: 1 }, &TrainConfig::default(), 1, 1, 0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn sweep_rejects_out_of_range_degrees() {
        let ds = small();
        assert!(sweep_degrees(&ds, &[7], &[0], &TrainConfig::default(), &TuneGrid::default(), STANDARD_RATIOS, &[0]).is_err());
    }

    #[test]
    fn single_cell_sweep_equals_train() {
        let ds = small();
        let cfg = TrainConfig { epochs: 10, ..TrainConfig::default() };
        let grid = sweep_degrees(&ds, &[1], &[2], &cfg, &TuneGrid::default(), STANDARD_RATIOS, &[4]).unwrap();
        let run = train_run(&ds, &ArchConfig::Gscnet { k1: Some(1), k2: Some(2) }, &cfg, STANDARD_RATIOS, 4).unwrap();
        assert_eq!(grid.cells.len(), 1);
        assert_eq!(grid.cells[0].accuracy.mean, run.test_acc);
    }

    #[test]
    fn grid_points_cover_the_product_and_collapse_for_gcn() {
        let grid = TuneGrid { lr_prop: vec![0.01, 0.05], dropout: vec![0.0, 0.3], ..TuneGrid::default() };
        let base = TrainConfig::default();
        let pts = grid.points(&base, &ArchConfig::Gscnet { k1: Some(1), k2: None });
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[3].lr_prop, pts[3].dropout_conv, pts[3].dropout_linear), (0.05, 0.3, 0.3));
        assert!(pts.iter().all(|p| p.lr_linear == base.lr_linear));
        assert_eq!(grid.points(&base, &ArchConfig::Gcn { depth: 2 }).len(), 2);
        assert_eq!(TuneGrid::default().points(&base, &ArchConfig::Gcn { depth: 2 }), vec![base]);
    }

    #[test]
    fn tuning_selects_on_validation_and_keeps_its_runs() {
        let ds = small();
        let cfg = TrainConfig { epochs: 8, ..TrainConfig::default() };
        let arch = ArchConfig::Gscnet { k1: Some(2), k2: Some(2) };
        let grid = TuneGrid { lr_prop: vec![0.01, 0.05], ..TuneGrid::default() };
        let tuned = tuned_runs(&ds, &arch, &cfg, &grid, STANDARD_RATIOS, &[1, 2]).unwrap();
        assert_eq!(tuned.points_tried, 2);
        for point in grid.points(&cfg, &arch) {
            let runs = run_seeds(&ds, &arch, &point, STANDARD_RATIOS, &[1, 2]).unwrap();
            let val = runs.iter().map(|r| r.best_val_acc).sum::<f64>() / 2.0;
            assert!(val <= tuned.mean_val_acc);
            if point == tuned.chosen {
                let strip = |v: &[RunRecord]| v.iter().map(RunRecord::without_timings).collect::<Vec<_>>();
                assert_eq!(strip(&runs), strip(&tuned.runs));
            }
        }
    }
}
