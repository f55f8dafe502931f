use std::path::{Path, PathBuf};

use gscnet::data::{csbm_generate, load_dataset, CsbmParams, CsbmPreset, Dataset, DatasetFiles, STANDARD_RATIOS};
use gscnet::experiment::TuneGrid;
use gscnet::model::{ArchConfig, TrainConfig};
use gscnet::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA: &str = "gscnet/experiment-config/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// One of the declared CSBM presets, generated from `seed`.
    Csbm { preset: CsbmPreset, seed: u64 },
    /// Fully specified CSBM parameters.
    CsbmParams(CsbmParams),
    /// `edges.txt`, `features.csv` and `labels.txt` in `dir`.
    Files { dir: PathBuf },
}

impl DatasetSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSource::Csbm { preset, seed } => csbm_generate(&CsbmParams::preset(*preset, *seed)),
            DatasetSource::CsbmParams(p) => csbm_generate(p),
            DatasetSource::Files { dir } => load_dataset(&DatasetFiles::in_dir(dir)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default = "default_dataset")]
    pub dataset: DatasetSource,
    #[serde(default = "default_arch")]
    pub arch: ArchConfig,
    #[serde(default)]
    pub train: TrainConfig,
    /// Hyperparameter grid searched on validation accuracy; empty axes keep
    /// the `train` values.
    #[serde(default)]
    pub tune: TuneGrid,
    /// Must equal `seeds.len()` when both are given.
    #[serde(default)]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_ratios")]
    pub split: (f64, f64, f64),
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_schema() -> String {
    CONFIG_SCHEMA.to_string()
}

fn default_dataset() -> DatasetSource {
    DatasetSource::Csbm { preset: CsbmPreset::Homophily, seed: 0 }
}

fn default_arch() -> ArchConfig {
    ArchConfig::Gscnet { k1: Some(2), k2: Some(2) }
}

fn default_ratios() -> (f64, f64, f64) {
    STANDARD_RATIOS
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Resolved seed list: explicit seeds, else `0..repeats`, else `0..10`.
    pub fn seed_list(&self) -> Result<Vec<u64>> {
        match (&self.seeds, self.repeats) {
            (Some(s), Some(r)) if s.len() != r => Err(Error::Config(format!(
                "seed list has {} entries but repeats is {r}",
                s.len()
            ))),
            (Some(s), _) if s.is_empty() => Err(Error::Config("seed list is empty".into())),
            (Some(s), _) => Ok(s.clone()),
            (None, Some(0)) => Err(Error::Config("repeats must be at least 1".into())),
            (None, Some(r)) => Ok((0..r as u64).collect()),
            (None, None) => Ok((0..10).collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported config schema {:?}, expected {CONFIG_SCHEMA:?}",
                self.schema
            )));
        }
        self.train.validate()?;
        for point in self.tune.points(&self.train, &self.arch) {
            point.validate()?;
        }
        self.seed_list()?;
        let (a, b, c) = self.split;
        if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split ratios {:?} must be in [0, 1] and sum to 1", self.split)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default_config() {
        let c = ExperimentConfig::default();
        assert_eq!(c.seed_list().unwrap(), (0..10).collect::<Vec<_>>());
        c.validate().unwrap();
    }

    #[test]
    fn seed_count_must_match_repeats() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"repeats": 3, "seeds": [1, 2]}"#).unwrap();
        assert!(matches!(c.seed_list(), Err(Error::Config(_))));
    }

    #[test]
    fn round_trips_through_json() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"dataset": {"files": {"dir": "data/cora"}},
                "arch": {"arch": "bernnet", "k": 10},
                "train": {"epochs": 5}, "tune": {"lr_prop": [0.01, 0.05]}, "seeds": [4, 5]}"#,
        )
        .unwrap();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
        assert_eq!(back.train.epochs, 5);
        assert_eq!(back.train.lr_linear, TrainConfig::default().lr_linear);
        assert_eq!(back.tune.lr_prop, vec![0.01, 0.05]);
    }

    #[test]
    fn grid_values_are_validated() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"tune": {"dropout": [0.2, 1.5]}}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"epochs": 5}"#).is_err());
    }
}
