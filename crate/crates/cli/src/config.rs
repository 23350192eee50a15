use std::path::{Path, PathBuf};

use mel_core::baselines::ExtraTreesConfig;
use mel_core::bm25::Bm25Params;
use mel_core::experiment::ExperimentConfig;
use mel_core::features::SynthFeatureConfig;
use mel_core::forge::ForgeConfig;
use mel_core::fusion::FusionConfig;
use mel_core::jmel::JmelConfig;
use mel_core::trainer::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Artifact locations. Inputs default to the matching directory under `out`;
/// outputs always go under `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub out: PathBuf,
    /// Directory holding `kb.jsonl`, `tweets.jsonl` and `mentions.jsonl`.
    pub data: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub models: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out: PathBuf::from("run"),
            data: None,
            features: None,
            index: None,
            models: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedStore {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Scorer specs, see [`crate::rows::RowSpec`].
    pub rows: Vec<String>,
    /// Feature stores compared by `ablate`. Empty means the run's own store.
    pub ablation_stores: Vec<NamedStore>,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            rows: crate::rows::DEFAULT_ROWS.iter().map(|s| s.to_string()).collect(),
            ablation_stores: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed. Every stage seed below is derived from it and any seed
    /// given inside a section is overwritten.
    pub seed: u64,
    pub paths: Paths,
    pub forge: ForgeConfig,
    pub features: SynthFeatureConfig,
    pub bm25: Bm25Params,
    pub jmel: JmelConfig,
    pub train: TrainConfig,
    pub fusion: FusionConfig,
    /// Joint model feeding the `jmel` feature of fusion and Extra-Trees.
    pub fusion_jmel: String,
    pub extratrees: ExtraTreesConfig,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            seed: 0,
            paths: Paths::default(),
            forge: e.forge,
            features: e.features,
            bm25: Bm25Params::default(),
            jmel: e.jmel,
            train: e.train,
            fusion: e.fusion,
            fusion_jmel: "s2v+img".into(),
            extratrees: e.extratrees,
            eval: EvalSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Overlays `text` on the run defaults key by key, so a partial section
    /// keeps the run's values rather than the section type's own defaults.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        let mut merged = serde_json::to_value(Self::default())?;
        overlay(&mut merged, user);
        serde_json::from_value(merged)
    }

    /// Section configs with stage seeds derived from the master seed.
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            forge: self.forge.clone(),
            features: self.features.clone(),
            jmel: self.jmel,
            train: self.train,
            fusion: self.fusion.clone(),
            extratrees: self.extratrees,
        }
        .seeded(self.seed)
    }

    pub fn out(&self) -> &Path {
        &self.paths.out
    }

    pub fn data_in(&self) -> PathBuf {
        self.paths.data.clone().unwrap_or_else(|| self.data_out())
    }

    pub fn features_in(&self) -> PathBuf {
        self.paths.features.clone().unwrap_or_else(|| self.features_out())
    }

    pub fn index_in(&self) -> PathBuf {
        self.paths.index.clone().unwrap_or_else(|| self.index_out())
    }

    pub fn models_in(&self) -> PathBuf {
        self.paths.models.clone().unwrap_or_else(|| self.models_out())
    }

    pub fn data_out(&self) -> PathBuf {
        self.out().join("data")
    }

    pub fn features_out(&self) -> PathBuf {
        self.out().join("features")
    }

    pub fn index_out(&self) -> PathBuf {
        self.out().join("index").join("bm25.json")
    }

    pub fn models_out(&self) -> PathBuf {
        self.out().join("models")
    }
}

fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
