use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mel_core::baselines::extratrees::ExtraTreesModel;
use mel_core::baselines::{Bm25Scorer, ExtraTreesScorer, PopularityScorer, RawScorer};
use mel_core::bm25::TimelineIndex;
use mel_core::corpus::SplitName;
use mel_core::eval::{ablation_matrix, ablation_text, results_csv, results_text, run_matrix, JmelScorer, Scorer};
use mel_core::experiment::{dataset_features, forge_dataset, load_dataset, save_dataset, Dataset};
use mel_core::features::{FeatureStore, MANIFEST_FILE};
use mel_core::forge::{dataset_stats, unseen_test_fraction};
use mel_core::fusion::{fit_fusion, FeatureMask, FusionModel, FusionScorer};
use mel_core::jmel::{JmelConfig, JmelParams, ModalityMask};
use mel_core::pipeline::{JmelEncoder, LinkingContext};
use mel_core::trainer;
use mel_core::Error;

use crate::config::RunConfig;
use crate::rows::{et_path, fusion_path, jmel_log_path, jmel_path, RowSpec};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn missing(path: &Path, what: &str) -> CliError {
    Error::MissingArtifact(format!("{what} ({}); run `mel {}` first", path.display(), producer(what))).into()
}

fn require(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(missing(path, what))
    }
}

fn producer(what: &str) -> &'static str {
    match what {
        "dataset" => "forge",
        "feature store" => "features",
        "bm25 index" => "index",
        w if w.starts_with("jmel") => "train-jmel",
        w if w.starts_with("fusion") => "train-fusion",
        w if w.starts_with("extra-trees") => "train-et",
        _ => "forge",
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e }.into())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e }.into())
}

fn modality_mask(s: &str) -> Result<ModalityMask> {
    s.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn feature_mask(s: &str) -> Result<FeatureMask> {
    s.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn dataset(config: &RunConfig) -> Result<Dataset> {
    let dir = config.data_in();
    require(&dir.join("kb.jsonl"), "dataset")?;
    Ok(load_dataset(&dir)?)
}

fn store_at(dir: &Path) -> Result<FeatureStore> {
    require(&dir.join(MANIFEST_FILE), "feature store")?;
    Ok(FeatureStore::read(dir)?)
}

/// Loads dataset, features and, when present or needed, the BM25 index.
fn context(config: &RunConfig, need_bm25: bool) -> Result<(Dataset, LinkingContext)> {
    let data = dataset(config)?;
    let store = store_at(&config.features_in())?;
    let index_path = config.index_in();
    let bm25 = if index_path.exists() {
        TimelineIndex::load(&index_path)?
    } else if need_bm25 {
        return Err(missing(&index_path, "bm25 index"));
    } else {
        TimelineIndex::build(&data.kb, config.bm25)?
    };
    let ctx = LinkingContext::with_bm25(data.kb.clone(), store, bm25)?;
    Ok((data, ctx))
}

fn encoder(config: &RunConfig, mask: ModalityMask, ctx: &LinkingContext) -> Result<JmelEncoder> {
    let path = jmel_path(&config.models_in(), mask);
    require(&path, &format!("jmel model over {mask}"))?;
    let model = JmelParams::load(&path)?;
    if model.config.mask != mask {
        return Err(Error::Data(format!("{} holds a model over {}", path.display(), model.config.mask)).into());
    }
    Ok(JmelEncoder::new(model, ctx)?)
}

fn fusion_encoder(config: &RunConfig, mask: FeatureMask, ctx: &LinkingContext) -> Result<Option<JmelEncoder>> {
    if !mask.jmel {
        return Ok(None);
    }
    let jm = modality_mask(&config.fusion_jmel)?;
    encoder(config, jm, ctx).map(Some)
}

pub fn forge(config: &RunConfig) -> Result<()> {
    let exp = config.experiment();
    let data = forge_dataset(&exp)?;
    let dir = config.data_out();
    save_dataset(&data, &dir)?;
    println!(
        "forged {} entities, {} mentions (train {}, valid {}, test {}) into {}",
        data.kb.num_entities(),
        data.mentions.len(),
        data.split.train.len(),
        data.split.valid.len(),
        data.split.test.len(),
        dir.display()
    );
    Ok(())
}

pub fn features(config: &RunConfig) -> Result<()> {
    let data = dataset(config)?;
    let store = dataset_features(&data, &config.experiment())?;
    let dir = config.features_out();
    store.write(&dir)?;
    println!("wrote {} feature records into {}", store.len(), dir.display());
    Ok(())
}

pub fn index(config: &RunConfig) -> Result<()> {
    let data = dataset(config)?;
    let index = TimelineIndex::build(&data.kb, config.bm25)?;
    let path = config.index_out();
    create_dir(path.parent().expect("index path has a parent"))?;
    index.save(&path)?;
    println!("wrote bm25 index over {} timelines to {}", data.kb.num_entities(), path.display());
    Ok(())
}

pub fn train_jmel(config: &RunConfig, mask: Option<&str>) -> Result<()> {
    let mask = modality_mask(mask.unwrap_or("s2v+img"))?;
    let exp = config.experiment();
    let (data, ctx) = context(config, false)?;
    let outcome = trainer::train_jmel(&ctx, &data.split, JmelConfig { mask, ..exp.jmel }, &exp.train)?;
    for e in &outcome.report.epochs {
        eprintln!(
            "epoch {:>3}  loss {:.5}  lr {:.5}  valid {:.4}",
            e.epoch, e.mean_loss, e.lr, e.valid_acc
        );
    }
    let models = config.models_out();
    create_dir(&models)?;
    outcome.model.save(&jmel_path(&models, mask))?;
    outcome.report.write_jsonl(&jmel_log_path(&models, mask))?;
    println!(
        "JMEL({}): best epoch {} valid {:.4}{}",
        mask.label(),
        outcome.report.best_epoch,
        outcome.report.best_valid_acc,
        if outcome.report.stopped_early { " (stopped early)" } else { "" }
    );
    Ok(())
}

pub fn train_fusion(config: &RunConfig, mask: Option<&str>) -> Result<()> {
    let mask = feature_mask(mask.unwrap_or("jmel+pop+bm25"))?;
    let exp = config.experiment();
    let (data, ctx) = context(config, mask.bm25)?;
    let jmel = fusion_encoder(config, mask, &ctx)?;
    let (scorer, report) = fit_fusion(&ctx, &data.split.train, mask, jmel, &exp.fusion)?;
    let models = config.models_out();
    create_dir(&models)?;
    scorer.model.save(&fusion_path(&models, mask))?;
    println!(
        "{}: objective {:.6} after {} iterations, gradient norm {:.3e}{}",
        scorer.name(),
        report.value,
        report.iterations,
        report.grad_norm,
        if report.converged { "" } else { " (iteration cap)" }
    );
    Ok(())
}

pub fn train_et(config: &RunConfig, mask: Option<&str>) -> Result<()> {
    let mask = feature_mask(mask.unwrap_or("s2v+img+pop+bm25"))?;
    let exp = config.experiment();
    let (data, ctx) = context(config, mask.bm25)?;
    let jmel = fusion_encoder(config, mask, &ctx)?;
    let scorer = ExtraTreesScorer::fit(&ctx, &data.split.train, mask, jmel, &exp.extratrees)?;
    let models = config.models_out();
    create_dir(&models)?;
    scorer.model.save(&et_path(&models, mask))?;
    println!("{}: {} trees", scorer.name(), scorer.model.forest.trees.len());
    Ok(())
}

fn scorer(config: &RunConfig, spec: RowSpec, ctx: &LinkingContext) -> Result<Box<dyn Scorer>> {
    let models = config.models_in();
    Ok(match spec {
        RowSpec::Popularity => Box::new(PopularityScorer),
        RowSpec::Bm25 => Box::new(Bm25Scorer),
        RowSpec::Raw(m) => Box::new(RawScorer(m)),
        RowSpec::Jmel(m) => Box::new(JmelScorer { encoder: encoder(config, m, ctx)? }),
        RowSpec::ExtraTrees(m) => {
            let path = et_path(&models, m);
            require(&path, &format!("extra-trees model over {m}"))?;
            let model = ExtraTreesModel::load(&path)?;
            let jmel = fusion_encoder(config, m, ctx)?;
            Box::new(ExtraTreesScorer::new(model, jmel)?)
        }
        RowSpec::Fusion(m) => {
            let path = fusion_path(&models, m);
            require(&path, &format!("fusion model over {m}"))?;
            let model = FusionModel::load(&path)?;
            let jmel = match model.jmel_mask {
                Some(jm) if model.mask.jmel => Some(encoder(config, jm, ctx)?),
                _ => None,
            };
            Box::new(FusionScorer::new(model, jmel)?)
        }
    })
}

pub fn eval(config: &RunConfig) -> Result<()> {
    let specs = config
        .eval
        .rows
        .iter()
        .map(|r| r.parse::<RowSpec>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>>>()?;
    if specs.is_empty() {
        return Err(CliError::Usage("eval.rows is empty".into()));
    }
    let (data, ctx) = context(config, specs.iter().any(RowSpec::needs_bm25))?;
    let scorers = specs
        .iter()
        .map(|s| scorer(config, *s, &ctx))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn Scorer> = scorers.iter().map(|s| s.as_ref()).collect();
    let rows = run_matrix(&ctx, &data.split, &refs, config.seed)?;
    let text = results_text(&rows);
    write(&config.out().join("results.csv"), &results_csv(&rows))?;
    write(&config.out().join("results.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn ablate(config: &RunConfig, mask: Option<&str>) -> Result<()> {
    let mask = modality_mask(mask.unwrap_or("s2v"))?;
    if mask.without_img().is_empty() {
        return Err(CliError::Usage("ablation mask needs at least one text modality".into()));
    }
    let exp = config.experiment();
    let data = dataset(config)?;
    let named = if config.eval.ablation_stores.is_empty() {
        vec![("synthetic".to_string(), config.features_in())]
    } else {
        config.eval.ablation_stores.iter().map(|s| (s.name.clone(), s.path.clone())).collect()
    };
    let stores = named
        .into_iter()
        .map(|(name, path)| Ok((name, store_at(&path)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells = ablation_matrix(stores, &data.kb, &data.split, &JmelConfig { mask, ..exp.jmel }, &exp.train)?;
    let text = ablation_text(&cells);
    write(&config.out().join("ablation.txt"), &text)?;
    write(
        &config.out().join("ablation.json"),
        &serde_json::to_string_pretty(&cells).map_err(Error::from)?,
    )?;
    print!("{text}");
    Ok(())
}

pub fn stats(config: &RunConfig) -> Result<()> {
    let data = dataset(config)?;
    let stats = dataset_stats(&data.kb, &data.mentions);
    let mut text = stats.to_text();
    let _ = writeln!(
        text,
        "# split {}  unseen-entity test fraction {:.3}",
        SplitName::ALL
            .iter()
            .map(|s| format!("{} {}", s.as_str(), data.split.section(*s).len()))
            .collect::<Vec<_>>()
            .join("  "),
        unseen_test_fraction(&data.split)
    );
    write(&config.out().join("stats.txt"), &text)?;
    write(&config.out().join("stats.csv"), &stats.to_csv())?;
    print!("{text}");
    Ok(())
}
