//! End-to-end desk experiment: forge a corpus, generate features, train
//! every model and evaluate the full row set.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{Bm25Scorer, ExtraTreesConfig, ExtraTreesScorer, PopularityScorer, RawModality, RawScorer};
use crate::corpus::{
    load_kb, load_records, load_split, save_kb, save_records, save_split, validate_mentions, DatasetPaths,
    DatasetSplit, KnowledgeBase, MentionRecord, SplitName,
};
use crate::error::{Error, Result};
use crate::eval::{run_matrix, JmelScorer, ResultRow, Scorer};
use crate::features::{synth_features, FeatureDims, FeatureStore, SynthFeatureConfig};
use crate::forge::{generate_mentions, split_mentions, synth_corpus, AmbiguityGroup, ForgeConfig, MentionReport, TopicRecord};
use crate::fusion::{fit_fusion, FeatureMask, FusionConfig};
use crate::jmel::{JmelConfig, ModalityMask};
use crate::nn::LbfgsConfig;
use crate::pipeline::{JmelEncoder, LinkingContext};
use crate::rng::derive_seed;
use crate::trainer::{train_jmel, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub forge: ForgeConfig,
    pub features: SynthFeatureConfig,
    pub jmel: JmelConfig,
    pub train: TrainConfig,
    pub fusion: FusionConfig,
    pub extratrees: ExtraTreesConfig,
}

impl Default for ExperimentConfig {
    /// Desk scale: 20 entities (one group of 18 persons, one of 2 orgs),
    /// about 16 candidates per mention, informative images under a low-rank
    /// nuisance that raw cosine cannot ignore.
    fn default() -> Self {
        let dims = FeatureDims { dim_u: 32, dim_b: 32, dim_i: 64 };
        Self {
            forge: ForgeConfig {
                n_person_entities: 18,
                person_group_size: 18,
                n_org_entities: 2,
                org_group_size: 2,
                mentions_min: 60,
                mentions_max: 120,
                popularity_bias: 0.0,
                pool_size: 8,
                timeline_topic_prob: 0.7,
                mention_topic_prob: 0.6,
                image_snr: 4.0,
                ..ForgeConfig::default()
            },
            features: SynthFeatureConfig {
                dims,
                image_offset: 1.0,
                image_nuisance: 2.5,
                nuisance_rank: 4,
                ..SynthFeatureConfig::default()
            },
            jmel: JmelConfig {
                dims,
                d_hidden: 256,
                d_branch: 64,
                d_joint: 64,
                second_relu: false,
                ..JmelConfig::default()
            },
            train: TrainConfig {
                max_epochs: 20,
                early_stop_start: 10,
                batch_size: 128,
                lr0: 0.02,
                ..TrainConfig::default()
            },
            fusion: FusionConfig {
                lbfgs: LbfgsConfig { step_scale: 1.0, max_iters: 50, ..LbfgsConfig::default() },
                seed: 0,
            },
            extratrees: ExtraTreesConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Derives every stage seed from one master seed.
    pub fn seeded(mut self, master: u64) -> Self {
        self.forge.seed = derive_seed(master, "forge");
        self.features.seed = derive_seed(master, "features");
        self.train.seed = derive_seed(master, "train");
        self.fusion.seed = derive_seed(master, "fusion");
        self.extratrees.seed = derive_seed(master, "extratrees");
        self
    }

    pub fn split_seed(&self) -> u64 {
        derive_seed(self.forge.seed, "split")
    }
}

pub struct Dataset {
    /// Knowledge base including the rewritten mention tweets.
    pub kb: KnowledgeBase,
    pub mentions: Vec<MentionRecord>,
    pub split: DatasetSplit,
    pub topics: Vec<TopicRecord>,
    pub groups: Vec<AmbiguityGroup>,
    pub report: MentionReport,
}

pub fn forge_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let corpus = synth_corpus(&config.forge)?;
    let generated = generate_mentions(&corpus.kb, &corpus.raw_tweets);
    let kb = corpus.kb.with_tweets(generated.tweets)?;
    let split = split_mentions(&generated.mentions, config.split_seed())?;
    Ok(Dataset {
        kb,
        mentions: generated.mentions,
        split,
        topics: corpus.topics,
        groups: corpus.planted_groups,
        report: generated.report,
    })
}

/// Writes the knowledge base, split-labelled mentions, topics, groups and
/// the mention report under `dir`.
pub fn save_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    save_kb(&dataset.kb, dir)?;
    let paths = DatasetPaths::new(dir);
    save_split(&dataset.split, &paths.mentions())?;
    save_records(&paths.topics(), &dataset.topics)?;
    save_records(&paths.groups(), &dataset.groups)?;
    let report = dir.join(REPORT_FILE);
    std::fs::write(&report, serde_json::to_string_pretty(&dataset.report)?).map_err(|e| Error::io(&report, e))
}

pub const REPORT_FILE: &str = "mention_report.json";

/// Reads a directory written by [`save_dataset`]. `mentions` is the
/// concatenation of train, valid and test.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let kb = load_kb(dir)?;
    let paths = DatasetPaths::new(dir);
    let split = load_split(&paths.mentions())?;
    let mentions: Vec<MentionRecord> = SplitName::ALL
        .into_iter()
        .flat_map(|name| split.section(name).iter().cloned())
        .collect();
    let violations = validate_mentions(&kb, &mentions);
    if let Some(v) = violations.first() {
        return Err(Error::Data(format!("{}: {v}", paths.mentions().display())));
    }
    let report_path = dir.join(REPORT_FILE);
    let report = match std::fs::read_to_string(&report_path) {
        Ok(text) => serde_json::from_str(&text)?,
        Err(_) => MentionReport::default(),
    };
    Ok(Dataset {
        kb,
        mentions,
        topics: load_records(&paths.topics())?,
        groups: load_records(&paths.groups())?,
        split,
        report,
    })
}

pub fn dataset_features(dataset: &Dataset, config: &ExperimentConfig) -> Result<FeatureStore> {
    let features = SynthFeatureConfig {
        image_snr: config.forge.image_snr,
        ..config.features.clone()
    };
    synth_features(&dataset.kb, &dataset.mentions, &dataset.topics, &features)
}

pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub jmel_reports: Vec<(String, TrainReport)>,
    pub seconds: f64,
}

impl ExperimentOutcome {
    pub fn row(&self, config: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.config == config)
    }
}

/// Forges, trains and evaluates every configuration of the result table.
pub fn run_experiment(config: &ExperimentConfig, seed: u64) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    let dataset = forge_dataset(config)?;
    let store = dataset_features(&dataset, config)?;
    let ctx = LinkingContext::new(dataset.kb.clone(), store)?;
    let split = &dataset.split;

    let mut reports = Vec::new();
    let mut encoders = Vec::new();
    for mask in [ModalityMask::TEXT, ModalityMask::ALL] {
        let outcome = train_jmel(&ctx, split, JmelConfig { mask, ..config.jmel }, &config.train)?;
        reports.push((format!("JMEL({})", mask.label()), outcome.report));
        encoders.push(JmelEncoder::new(outcome.model, &ctx)?);
    }
    let full = encoders[1].clone();

    let mut scorers: Vec<Box<dyn Scorer>> = vec![
        Box::new(PopularityScorer),
        Box::new(Bm25Scorer),
        Box::new(RawScorer(RawModality::Uni)),
        Box::new(RawScorer(RawModality::Bi)),
        Box::new(RawScorer(RawModality::Img)),
    ];
    for mask in ["s2v", "s2v+img", "s2v+img+pop", "s2v+img+pop+bm25"] {
        let mask: FeatureMask = mask.parse()?;
        scorers.push(Box::new(ExtraTreesScorer::fit(&ctx, &split.train, mask, None, &config.extratrees)?));
    }
    for enc in encoders {
        scorers.push(Box::new(JmelScorer { encoder: enc }));
    }
    for mask in ["jmel+pop", "jmel+pop+bm25"] {
        let mask: FeatureMask = mask.parse()?;
        let (scorer, _) = fit_fusion(&ctx, &split.train, mask, Some(full.clone()), &config.fusion)?;
        scorers.push(Box::new(scorer));
    }
    let refs: Vec<&dyn Scorer> = scorers.iter().map(|s| s.as_ref()).collect();
    let rows = run_matrix(&ctx, split, &refs, seed)?;
    Ok(ExperimentOutcome {
        rows,
        jmel_reports: reports,
        seconds: start.elapsed().as_secs_f64(),
    })
}
