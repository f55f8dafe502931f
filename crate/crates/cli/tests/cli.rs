use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gscnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gscnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_CSBM: &str = r#""dataset": {"csbm_params": {"n": 120, "p_intra": 0.08, "p_inter": 0.02, "mu": 1.0, "sigma": 1.0, "d": 8, "seed": 3}}"#;

/// Drops wall-clock fields so two runs can be compared byte for byte.
fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("total_seconds");
            map.remove("epoch_ms");
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn csbm_gen_then_analyze_and_train_from_files() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let data_s = data.to_str().unwrap();
    ok(&gscnet(&["csbm-gen", "--preset", "heterophily", "--n", "200", "--seed", "5", "--out-dir", data_s]));
    for f in ["edges.txt", "features.csv", "labels.txt", "csbm.json"] {
        assert!(data.join(f).exists(), "{f} missing");
    }
    let sidecar = read_json(&data.join("csbm.json"));
    assert_eq!(sidecar["schema"], "gscnet/csbm/v1");
    assert!(sidecar["edges"].as_u64().unwrap() > 0);
    assert!(sidecar["label_smoothness"].as_f64().unwrap() > 0.5);

    let analysis = tmp.path().join("analysis");
    let out = gscnet(&[
        "analyze", "--data-dir", data_s, "--out-dir", analysis.to_str().unwrap(),
        "--alpha", "1,0", "--beta", "0.5,-1",
    ]);
    ok(&out);
    let report = read_json(&analysis.join("analysis.json"));
    assert_eq!(report["schema"], "gscnet/analysis/v1");
    assert_eq!(report["positive_half"]["class"], "negative");
    assert_eq!(report["stats"]["nodes"], 200);

    let cfg = write_config(tmp.path(), r#"{"train": {"epochs": 5}, "seeds": [1, 2]}"#);
    let run = tmp.path().join("run");
    ok(&gscnet(&["train", "--config", &cfg, "--data-dir", data_s, "--out-dir", run.to_str().unwrap()]));
    let summary = read_json(&run.join("summary.json"));
    assert_eq!(summary["schema"], "gscnet/train-summary/v1");
    assert_eq!(summary["runs"].as_array().unwrap().len(), 2);
    let lines = fs::read_to_string(run.join("epochs.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 10);
    for line in lines.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], "gscnet/epoch/v1");
        let acc = v["test_acc"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
    let csv = fs::read_to_string(run.join("runs.csv")).unwrap();
    assert!(csv.starts_with("seed,best_epoch,best_val_acc,test_acc,total_seconds\n"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn train_is_deterministic_apart_from_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!(r#"{{{SMALL_CSBM}, "train": {{"epochs": 8}}, "seeds": [0, 1, 2]}}"#));
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        ok(&gscnet(&["train", "--config", &cfg, "--out-dir", dir.to_str().unwrap(), "--threads", "2"]));
        let mut summary = read_json(&dir.join("summary.json"));
        summary["config"]["out_dir"] = Value::Null;
        strip_timings(&mut summary);
        let mut epochs: Vec<Value> = fs::read_to_string(dir.join("epochs.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        epochs.iter_mut().for_each(strip_timings);
        outputs.push((summary, epochs));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn untrained_model_is_near_chance() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("zero");
    ok(&gscnet(&["train", "--seed-list", "0,1,2,3,4,5,6,7,8,9", "--out-dir", dir.to_str().unwrap(), "--config", &write_config(tmp.path(), r#"{"train": {"epochs": 0}}"#)]));
    let summary = read_json(&dir.join("summary.json"));
    let mean = summary["accuracy"]["mean"].as_f64().unwrap();
    assert!((mean - 0.5).abs() <= 0.1, "untrained mean accuracy {mean}");
    for run in summary["runs"].as_array().unwrap() {
        assert_eq!(run["best_epoch"], 0);
    }
}

#[test]
fn single_cell_sweep_matches_train() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(r#"{{{SMALL_CSBM}, "arch": {{"arch": "gscnet", "k1": 1, "k2": 3}}, "train": {{"epochs": 6}}, "seeds": [4, 9]}}"#),
    );
    let sweep = tmp.path().join("sweep");
    let train = tmp.path().join("train");
    ok(&gscnet(&["sweep", "--config", &cfg, "--k1", "1", "--k2", "3", "--out-dir", sweep.to_str().unwrap()]));
    ok(&gscnet(&["train", "--config", &cfg, "--out-dir", train.to_str().unwrap()]));
    let grid = read_json(&sweep.join("summary.json"));
    let cells = grid["grid"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 1);
    let summary = read_json(&train.join("summary.json"));
    assert_eq!(cells[0]["accuracy"]["mean"], summary["accuracy"]["mean"]);
    let csv = fs::read_to_string(sweep.join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn ablate_oversmooth_and_bench_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!(r#"{{{SMALL_CSBM}, "train": {{"epochs": 3}}, "seeds": [0, 1]}}"#));
    let ablate = tmp.path().join("ablate");
    ok(&gscnet(&["ablate", "--config", &cfg, "--degree", "2", "--out-dir", ablate.to_str().unwrap()]));
    let table = read_json(&ablate.join("summary.json"));
    assert_eq!(table["table"]["rows"].as_array().unwrap().len(), 3);
    assert!(fs::read_to_string(ablate.join("ablation.csv")).unwrap().contains("positive_only"));

    let over = tmp.path().join("over");
    ok(&gscnet(&["oversmooth", "--config", &cfg, "--depths", "1,2", "--archs", "gcn,gscnet", "--out-dir", over.to_str().unwrap()]));
    let summary = read_json(&over.join("summary.json"));
    assert_eq!(summary["schema"], "gscnet/oversmooth-summary/v1");
    assert!(summary["drops"]["gcn"].as_f64().unwrap() >= 0.0);
    assert_eq!(fs::read_to_string(over.join("oversmooth.csv")).unwrap().lines().count(), 5);

    let bench = tmp.path().join("bench");
    ok(&gscnet(&["bench", "--config", &cfg, "--epochs", "6", "--warmup", "2", "--cache-scaling", "--out-dir", bench.to_str().unwrap()]));
    let report = read_json(&bench.join("bench.json"));
    assert_eq!(report["report"]["epoch_ms"].as_array().unwrap().len(), 6);
    assert!(report["cache_scaling"]["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let bad = write_config(tmp.path(), r#"{"repeats": 3, "seeds": [1]}"#);
    assert_eq!(gscnet(&["train", "--config", &bad, "--out-dir", out]).status.code(), Some(2));
    let unknown = write_config(tmp.path(), r#"{"epochs": 3}"#);
    assert_eq!(gscnet(&["train", "--config", &unknown, "--out-dir", out]).status.code(), Some(2));
    let empty_window = gscnet(&["bench", "--epochs", "1", "--warmup", "1", "--out-dir", out]);
    assert_eq!(empty_window.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty_window.stderr).contains("nothing to measure"));
    assert_eq!(gscnet(&["sweep", "--k1", "0..=7", "--out-dir", out]).status.code(), Some(2));
}

#[test]
fn malformed_data_exits_with_3_and_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir(&data).unwrap();
    fs::write(data.join("edges.txt"), "0 1\n1 x\n").unwrap();
    fs::write(data.join("features.csv"), "1.0\n2.0\n").unwrap();
    fs::write(data.join("labels.txt"), "0\n1\n").unwrap();
    let out = gscnet(&["analyze", "--data-dir", data.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("edges.txt:2"), "{err}");
}

#[test]
fn quick_verify_passes_and_reports_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gscnet(&["verify", "--quick", "--out-dir", tmp.path().to_str().unwrap()]);
    ok(&out);
    let report = read_json(&tmp.path().join("verify.json"));
    assert_eq!(report["schema"], "gscnet/verify-report/v1");
    assert_eq!(report["passed"], true);
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}
