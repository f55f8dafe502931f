mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gscnet::basis::FilterSpec;
use gscnet::data::{csbm_generate, save_dataset, CsbmParams, CsbmPreset, DatasetFiles};
use gscnet::experiment::{
    ablate_activations, bench, oversmooth, sweep_degrees, time_cache_build, tuned_runs, RunRecord,
    MAX_SWEEP_DEGREE,
};
use gscnet::model::{Arch, ArchConfig};
use gscnet::pnca::{negative_combination_check, positive_combination_check};
use gscnet::verify::suite::{run_suite, TrialCounts};
use gscnet::{Error, Result};
use serde::Serialize;
use serde_json::json;

use config::{DatasetSource, ExperimentConfig};
use output::{ensure_dir, write_csv, write_json, write_jsonl};

#[derive(Parser, Debug)]
#[command(name = "gscnet", version, about = "Spectral graph filter experiments")]
struct Cli {
    /// Experiment configuration (JSON). Missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comma-separated seeds; overrides the config's seeds and repeats.
    #[arg(long, global = true, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Directory holding edges.txt, features.csv and labels.txt; overrides
    /// the config's dataset.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Worker threads for multi-seed and grid runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the configured model once per seed.
    Train,
    /// Mean accuracy over a (K1, K2) grid.
    Sweep {
        /// Degrees as `a..=b`, `a..b` or a comma list.
        #[arg(long, default_value = "0..=6", value_parser = parse_degrees)]
        k1: Degrees,
        #[arg(long, default_value = "0..=6", value_parser = parse_degrees)]
        k2: Degrees,
    },
    /// Accuracy against propagation depth for several architectures.
    Oversmooth {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8, 16])]
        depths: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_enum, default_values_t = vec![ArchName::Gcn, ArchName::Jknet, ArchName::Bernnet, ArchName::Gscnet])]
        archs: Vec<ArchName>,
    },
    /// Positive-only, negative-only and mixed bases at one degree.
    Ablate {
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Per-epoch timing of the configured model.
    Bench {
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 10)]
        warmup: usize,
        /// Also time basis-cache construction at the configured and doubled
        /// degrees.
        #[arg(long)]
        cache_scaling: bool,
    },
    /// Generate a CSBM dataset as files plus a JSON sidecar.
    CsbmGen {
        #[arg(long, value_enum, default_value_t = PresetName::Homophily)]
        preset: PresetName,
        #[arg(long)]
        n: Option<usize>,
        /// Expected node degree.
        #[arg(long)]
        degree: Option<f64>,
        /// Intra/inter edge probability ratio.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dataset statistics, label smoothness and activation classes of a
    /// filter.
    Analyze {
        /// Positive-basis coefficients (defaults to the configured GSCNet
        /// degrees, all ones).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        alpha: Option<Vec<f64>>,
        /// Negative-basis coefficients.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        beta: Option<Vec<f64>>,
    },
    /// Run the oracle suite; exits with 4 if any check fails.
    Verify {
        /// One tenth of the default trial counts.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ArchName {
    Gscnet,
    Gcn,
    Jknet,
    Bernnet,
}

impl From<ArchName> for Arch {
    fn from(a: ArchName) -> Arch {
        match a {
            ArchName::Gscnet => Arch::Gscnet,
            ArchName::Gcn => Arch::Gcn,
            ArchName::Jknet => Arch::Jknet,
            ArchName::Bernnet => Arch::Bernnet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PresetName {
    Homophily,
    Heterophily,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Degrees(Vec<usize>);

fn parse_degrees(s: &str) -> std::result::Result<Degrees, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let v: Vec<usize> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<std::result::Result<_, _>>()?
    };
    if v.is_empty() {
        return Err(format!("degree range {s:?} is empty"));
    }
    if let Some(k) = v.iter().find(|&&k| k > MAX_SWEEP_DEGREE) {
        return Err(format!("degree {k} outside 0..={MAX_SWEEP_DEGREE}"));
    }
    Ok(Degrees(v))
}

enum Outcome {
    Success,
    VerifyFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerifyFailed) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        e if e.is_data_error() || matches!(e, Error::Input(_)) => 3,
        _ => 1,
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seeds) = &cli.seed_list {
        cfg.seeds = Some(seeds.clone());
        cfg.repeats = Some(seeds.len());
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(dir) = &cli.data_dir {
        cfg.dataset = DatasetSource::Files { dir: dir.clone() };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = resolve_config(&cli)?;
    match &cli.command {
        Command::Train => cmd_train(&cfg),
        Command::Sweep { k1, k2 } => cmd_sweep(&cfg, &k1.0, &k2.0),
        Command::Oversmooth { depths, archs } => cmd_oversmooth(&cfg, depths, archs),
        Command::Ablate { degree } => cmd_ablate(&cfg, *degree),
        Command::Bench { epochs, warmup, cache_scaling } => cmd_bench(&cfg, *epochs, *warmup, *cache_scaling),
        Command::CsbmGen { preset, n, degree, ratio, mu, sigma, d, seed } => {
            let preset = match preset {
                PresetName::Homophily => CsbmPreset::Homophily,
                PresetName::Heterophily => CsbmPreset::Heterophily,
            };
            let base = CsbmParams::preset(preset, *seed);
            let default_ratio = base.p_intra / base.p_inter;
            let mut params = CsbmParams::with_degree_ratio(
                n.unwrap_or(base.n),
                degree.unwrap_or(10.0),
                ratio.unwrap_or(default_ratio),
                *seed,
            );
            params.mu = mu.unwrap_or(base.mu);
            params.sigma = sigma.unwrap_or(base.sigma);
            params.d = d.unwrap_or(base.d);
            cmd_csbm_gen(&cfg.out_dir, &params)
        }
        Command::Analyze { alpha, beta } => cmd_analyze(&cfg, alpha.clone(), beta.clone()),
        Command::Verify { quick, seed } => cmd_verify(&cfg.out_dir, *quick, *seed),
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    seed: u64,
    best_epoch: usize,
    best_val_acc: f64,
    test_acc: f64,
    total_seconds: f64,
    learned_filter: &'a gscnet::model::Filter,
}

fn run_summaries(runs: &[RunRecord]) -> Vec<RunSummary<'_>> {
    runs.iter()
        .map(|r| RunSummary {
            seed: r.seed,
            best_epoch: r.best_epoch,
            best_val_acc: r.best_val_acc,
            test_acc: r.test_acc,
            total_seconds: r.total_seconds,
            learned_filter: &r.learned_filter,
        })
        .collect()
}

fn cmd_train(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let seeds = cfg.seed_list()?;
    let tuned = tuned_runs(&ds, &cfg.arch, &cfg.train, &cfg.tune, cfg.split, &seeds)?;
    let mut runs = tuned.runs.clone();
    runs.sort_by_key(|r| r.seed);
    let acc = tuned.accuracy();
    ensure_dir(&cfg.out_dir)?;
    write_jsonl(
        &cfg.out_dir.join("epochs.jsonl"),
        "gscnet/epoch/v1",
        runs.iter().flat_map(|r| {
            r.epochs.iter().map(move |e| {
                json!({
                    "seed": r.seed, "epoch": e.epoch, "train_loss": e.train_loss, "train_acc": e.train_acc,
                    "val_acc": e.val_acc, "test_acc": e.test_acc, "epoch_ms": e.epoch_ms,
                })
            })
        }),
    )?;
    write_json(
        &cfg.out_dir.join("summary.json"),
        "gscnet/train-summary/v1",
        &json!({
            "config": cfg,
            "stats": ds.stats(),
            "chosen": tuned.chosen,
            "mean_val_acc": tuned.mean_val_acc,
            "points_tried": tuned.points_tried,
            "accuracy": acc,
            "runs": run_summaries(&runs),
        }),
    )?;
    write_csv(
        &cfg.out_dir.join("runs.csv"),
        &["seed", "best_epoch", "best_val_acc", "test_acc", "total_seconds"],
        runs.iter().map(|r| {
            vec![
                r.seed.to_string(),
                r.best_epoch.to_string(),
                r.best_val_acc.to_string(),
                r.test_acc.to_string(),
                format!("{:.6}", r.total_seconds),
            ]
        }),
    )?;
    println!("test accuracy {:.4} ± {:.4} over {} seeds", acc.mean, acc.ci95, acc.n);
    Ok(Outcome::Success)
}

fn cmd_sweep(cfg: &ExperimentConfig, k1: &[usize], k2: &[usize]) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let grid = sweep_degrees(&ds, k1, k2, &cfg.train, &cfg.tune, cfg.split, &cfg.seed_list()?)?;
    ensure_dir(&cfg.out_dir)?;
    write_csv(
        &cfg.out_dir.join("grid.csv"),
        &["k1", "k2", "mean", "ci95", "n"],
        grid.cells.iter().map(|c| {
            vec![
                c.k1.to_string(),
                c.k2.to_string(),
                c.accuracy.mean.to_string(),
                c.accuracy.ci95.to_string(),
                c.accuracy.n.to_string(),
            ]
        }),
    )?;
    write_json(
        &cfg.out_dir.join("summary.json"),
        "gscnet/sweep-summary/v1",
        &json!({ "config": cfg, "spread": grid.spread(), "grid": grid }),
    )?;
    println!("accuracy spread {:.4} over {} cells", grid.spread(), grid.cells.len());
    Ok(Outcome::Success)
}

fn cmd_oversmooth(cfg: &ExperimentConfig, depths: &[usize], archs: &[ArchName]) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let archs: Vec<Arch> = archs.iter().map(|&a| a.into()).collect();
    let table = oversmooth(&ds, depths, &archs, &cfg.train, &cfg.tune, cfg.split, &cfg.seed_list()?)?;
    ensure_dir(&cfg.out_dir)?;
    write_csv(
        &cfg.out_dir.join("oversmooth.csv"),
        &["arch", "depth", "mean", "ci95", "n"],
        table.rows.iter().map(|r| {
            vec![
                r.arch.name().to_string(),
                r.depth.to_string(),
                r.accuracy.mean.to_string(),
                r.accuracy.ci95.to_string(),
                r.accuracy.n.to_string(),
            ]
        }),
    )?;
    let drops: serde_json::Map<String, serde_json::Value> =
        archs.iter().map(|&a| (a.name().to_string(), json!(table.drop(a)))).collect();
    write_json(
        &cfg.out_dir.join("summary.json"),
        "gscnet/oversmooth-summary/v1",
        &json!({ "config": cfg, "drops": drops, "table": table }),
    )?;
    for a in &archs {
        println!("{:<8} drop {:.4}", a.name(), table.drop(*a));
    }
    Ok(Outcome::Success)
}

fn cmd_ablate(cfg: &ExperimentConfig, degree: usize) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let table = ablate_activations(&ds, degree, &cfg.train, &cfg.tune, cfg.split, &cfg.seed_list()?)?;
    ensure_dir(&cfg.out_dir)?;
    write_csv(
        &cfg.out_dir.join("ablation.csv"),
        &["basis", "mean", "ci95", "n"],
        table.rows.iter().map(|r| {
            vec![
                serde_json::to_value(r.basis).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                r.accuracy.mean.to_string(),
                r.accuracy.ci95.to_string(),
                r.accuracy.n.to_string(),
            ]
        }),
    )?;
    write_json(
        &cfg.out_dir.join("summary.json"),
        "gscnet/ablation-summary/v1",
        &json!({ "config": cfg, "table": table }),
    )?;
    for r in &table.rows {
        println!("{:?}: {:.4} ± {:.4}", r.basis, r.accuracy.mean, r.accuracy.ci95);
    }
    Ok(Outcome::Success)
}

fn cmd_bench(cfg: &ExperimentConfig, epochs: usize, warmup: usize, cache_scaling: bool) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let seed = cfg.seed_list()?[0];
    let report = bench(&ds, &cfg.arch, &cfg.train, epochs, warmup, seed)?;
    let scaling = if cache_scaling {
        let (k1, k2) = match cfg.arch {
            ArchConfig::Gscnet { k1, k2 } => (k1.unwrap_or(0), k2.unwrap_or(0)),
            _ => return Err(Error::Config("--cache-scaling needs a GSCNet arch".into())),
        };
        if k1 + k2 == 0 {
            return Err(Error::Config("--cache-scaling needs K1 + K2 > 0".into()));
        }
        let base = time_cache_build(&ds.graph, &ds.features, k1, k2, 7)?;
        let doubled = time_cache_build(&ds.graph, &ds.features, 2 * k1, 2 * k2, 7)?;
        Some(json!({ "k1": k1, "k2": k2, "base_ms": base, "doubled_ms": doubled, "ratio": doubled / base }))
    } else {
        None
    };
    ensure_dir(&cfg.out_dir)?;
    write_csv(
        &cfg.out_dir.join("bench_epochs.csv"),
        &["epoch", "epoch_ms", "cumulative_s", "measured"],
        report.epoch_ms.iter().zip(&report.cumulative_s).enumerate().map(|(i, (ms, cum))| {
            vec![(i + 1).to_string(), format!("{ms:.6}"), format!("{cum:.6}"), (i >= warmup).to_string()]
        }),
    )?;
    write_json(
        &cfg.out_dir.join("bench.json"),
        "gscnet/bench/v1",
        &json!({ "config": cfg, "report": report, "cache_scaling": scaling }),
    )?;
    println!(
        "{}: {:.3} ms/epoch (median {:.3}), total {:.3} s",
        cfg.arch.arch().name(),
        report.mean_epoch_ms,
        report.median_epoch_ms,
        report.total_s
    );
    Ok(Outcome::Success)
}

fn cmd_csbm_gen(out_dir: &Path, params: &CsbmParams) -> Result<Outcome> {
    let ds = csbm_generate(params)?;
    ensure_dir(out_dir)?;
    save_dataset(&ds, &DatasetFiles::in_dir(out_dir))?;
    let stats = ds.stats();
    write_json(
        &out_dir.join("csbm.json"),
        "gscnet/csbm/v1",
        &json!({ "params": params, "edges": stats.edges, "label_smoothness": stats.label_smoothness, "stats": stats }),
    )?;
    println!(
        "{} nodes, {} edges, label smoothness {:.4}",
        stats.nodes,
        stats.edges,
        stats.label_smoothness.unwrap_or(f64::NAN)
    );
    Ok(Outcome::Success)
}

fn cmd_analyze(cfg: &ExperimentConfig, alpha: Option<Vec<f64>>, beta: Option<Vec<f64>>) -> Result<Outcome> {
    let ds = cfg.dataset.load()?;
    let (alpha, beta) = match (alpha, beta, cfg.arch) {
        (None, None, ArchConfig::Gscnet { k1, k2 }) => {
            let spec = FilterSpec::uniform(k1, k2);
            (spec.alpha, spec.beta)
        }
        (a, b, _) => (a.unwrap_or_default(), b.unwrap_or_default()),
    };
    let classify = |r: Result<gscnet::pnca::ActivationClass>| match r {
        Ok(class) => json!(class),
        Err(e) => json!({ "class": "unavailable", "reason": e.to_string() }),
    };
    let positive = (!alpha.is_empty()).then(|| classify(positive_combination_check(&alpha, &ds.graph)));
    let negative = (!beta.is_empty()).then(|| classify(negative_combination_check(&beta, &ds.graph)));
    let stats = ds.stats();
    let report = json!({
        "stats": stats,
        "label_smoothness": stats.label_smoothness,
        "filter": { "alpha": alpha, "beta": beta },
        "positive_half": positive,
        "negative_half": negative,
    });
    ensure_dir(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join("analysis.json"), "gscnet/analysis/v1", &report)?;
    println!("{}", serde_json::to_string_pretty(&output::with_schema("gscnet/analysis/v1", &report)?)?);
    Ok(Outcome::Success)
}

fn cmd_verify(out_dir: &Path, quick: bool, seed: u64) -> Result<Outcome> {
    let mut counts = TrialCounts::default();
    if quick {
        counts = TrialCounts {
            spectral: counts.spectral / 10,
            positivity: counts.positivity / 10,
            permutation: counts.permutation / 10,
            gradient: (counts.gradient / 10).max(1),
            rayleigh: counts.rayleigh / 10,
            recurrence: counts.recurrence / 10,
        };
    }
    let report = run_suite(seed, counts)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("verify.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    Ok(if report.passed { Outcome::Success } else { Outcome::VerifyFailed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_ranges_parse() {
        assert_eq!(parse_degrees("0..=2").unwrap(), Degrees(vec![0, 1, 2]));
        assert_eq!(parse_degrees("1..3").unwrap(), Degrees(vec![1, 2]));
        assert_eq!(parse_degrees("4,0").unwrap(), Degrees(vec![4, 0]));
        assert!(parse_degrees("0..=7").is_err());
        assert!(parse_degrees("3..3").is_err());
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code(&Error::Parse { path: "f".into(), line: 1, message: "m".into() }),
            3
        );
        assert_eq!(exit_code(&Error::Contract("c".into())), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
