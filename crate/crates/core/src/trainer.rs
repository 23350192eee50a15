//! Triplet training of the joint model: per-epoch negative sampling,
//! minibatch SGD with momentum, plateau learning-rate decay, and early
//! stopping on validation accuracy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{IndexedRandom, IteratorRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetSplit, MentionRecord};
use crate::error::{Error, Result};
use crate::eval::{evaluate, JmelScorer};
use crate::features::FeatureBundle;
use crate::jmel::{triplet_loss, JmelConfig, JmelParams};
use crate::nn::{Momentum, Params};
use crate::pipeline::LinkingContext;
use crate::rng::{derive_seed, derive_seed_indexed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr0: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub plateau_tol: f64,
    pub plateau_window: usize,
    pub early_stop_start: usize,
    pub early_stop_patience: usize,
    pub negatives_per_positive: usize,
    /// Top up small candidate sets with random non-matching entities.
    pub random_fill: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            lr0: 0.1,
            momentum: 0.9,
            max_epochs: 100,
            plateau_tol: 1e-4,
            plateau_window: 6,
            early_stop_start: 50,
            early_stop_patience: 5,
            negatives_per_positive: 16,
            random_fill: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.batch_size > 0
            && self.lr0 > 0.0
            && (0.0..1.0).contains(&self.momentum)
            && self.max_epochs > 0
            && self.plateau_tol >= 0.0
            && self.plateau_window > 0
            && self.early_stop_patience >= 1
            && self.negatives_per_positive > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training config {self:?}")))
        }
    }
}

/// Index into the training mentions plus positive and negative entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub mention: usize,
    pub pos: String,
    pub neg: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleReport {
    pub triplets: usize,
    pub skipped_empty: usize,
    pub filled: usize,
}

pub fn sample_triplets(
    mentions: &[MentionRecord],
    ctx: &LinkingContext,
    config: &TrainConfig,
    epoch_seed: u64,
) -> (Vec<Triplet>, SampleReport) {
    let mut rng = rng_from(epoch_seed);
    let mut report = SampleReport::default();
    let mut out = Vec::new();
    for (k, m) in mentions.iter().enumerate() {
        let cands = ctx.candidates(m);
        if cands.is_empty() {
            report.skipped_empty += 1;
            continue;
        }
        let names: Vec<&str> = cands.names();
        let pool: Vec<&str> = names.iter().copied().filter(|n| *n != m.gold).collect();
        let mut negs: Vec<&str> = pool
            .choose_multiple(&mut rng, config.negatives_per_positive.min(pool.len()))
            .copied()
            .collect();
        if config.random_fill && negs.len() < config.negatives_per_positive {
            let matched: BTreeSet<&str> = names.iter().copied().collect();
            let need = config.negatives_per_positive - negs.len();
            let fill = ctx
                .entity_bundles
                .keys()
                .map(String::as_str)
                .filter(|n| !matched.contains(n) && *n != m.gold)
                .choose_multiple(&mut rng, need);
            report.filled += fill.len();
            negs.extend(fill);
        }
        for n in negs {
            out.push(Triplet {
                mention: k,
                pos: m.gold.clone(),
                neg: n.to_string(),
            });
        }
    }
    out.shuffle(&mut rng);
    report.triplets = out.len();
    (out, report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleState {
    pub lr: f64,
    /// Index into the loss history where the current plateau window starts.
    pub window_start: usize,
}

/// Divides the learning rate by 10 when the last `plateau_window` epoch
/// losses since the previous decay span at most `plateau_tol`.
pub fn lr_schedule_step(history: &[f64], state: &mut ScheduleState, config: &TrainConfig) -> f64 {
    let since = &history[state.window_start.min(history.len())..];
    if since.len() >= config.plateau_window {
        let window = &since[since.len() - config.plateau_window..];
        let hi = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = window.iter().copied().fold(f64::INFINITY, f64::min);
        if hi - lo <= config.plateau_tol {
            state.lr /= 10.0;
            state.window_start = history.len();
        }
    }
    state.lr
}

/// `epoch` counts completed epochs starting at 1.
pub fn early_stop_check(epoch: usize, stale: usize, config: &TrainConfig) -> bool {
    epoch >= config.early_stop_start && stale >= config.early_stop_patience
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub mean_loss: f64,
    pub valid_acc: f64,
    pub stale_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_valid_acc: f64,
    pub skipped_mentions: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut s = String::new();
        for e in &self.epochs {
            let _ = writeln!(s, "{}", serde_json::to_string(e)?);
        }
        Ok(s)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }
}

pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation accuracy.
    pub model: JmelParams,
    pub report: TrainReport,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key<'a> {
    Mention(usize),
    Entity(&'a str),
}

/// Mean triplet loss of one batch; accumulates its gradient into `grad`.
/// Each distinct mention or entity goes through forward and backward once.
fn batch_step<'a>(
    model: &JmelParams,
    batch: &'a [Triplet],
    mention_bundles: &'a [FeatureBundle],
    ctx: &'a LinkingContext,
    grad: &mut JmelParams,
) -> Result<f64> {
    let mut nodes: BTreeMap<Key<'a>, usize> = BTreeMap::new();
    let mut bundles: Vec<&'a FeatureBundle> = Vec::new();
    let mut index = |key: Key<'a>| -> Result<usize> {
        if let Some(&i) = nodes.get(&key) {
            return Ok(i);
        }
        let b = match key {
            Key::Mention(k) => &mention_bundles[k],
            Key::Entity(name) => ctx.entity_bundle(name)?,
        };
        bundles.push(b);
        nodes.insert(key, bundles.len() - 1);
        Ok(bundles.len() - 1)
    };
    let mut ids = Vec::with_capacity(batch.len());
    for t in batch {
        let m = index(Key::Mention(t.mention))?;
        let p = index(Key::Entity(&t.pos))?;
        let n = index(Key::Entity(&t.neg))?;
        ids.push((m, p, n));
    }
    let forward = bundles
        .iter()
        .map(|b| model.forward_cached(b))
        .collect::<Result<Vec<_>>>()?;
    let mut d_joint: Vec<Vec<f64>> = forward.iter().map(|(j, _)| vec![0.0; j.len()]).collect();
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for &(m, p, n) in &ids {
        let out = triplet_loss(&forward[m].0, &forward[p].0, &forward[n].0, model.config.margin);
        total += out.loss;
        if out.loss > 0.0 {
            for (node, g) in [(m, &out.d_mention), (p, &out.d_pos), (n, &out.d_neg)] {
                d_joint[node].iter_mut().zip(g).for_each(|(a, b)| *a += scale * b);
            }
        }
    }
    for (k, b) in bundles.iter().enumerate() {
        if d_joint[k].iter().any(|v| *v != 0.0) {
            model.backward_into(b, &forward[k].1, &d_joint[k], grad)?;
        }
    }
    Ok(total * scale)
}

pub fn train_jmel(
    ctx: &LinkingContext,
    split: &DatasetSplit,
    model_config: JmelConfig,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if split.valid.is_empty() {
        return Err(Error::Data("training needs a nonempty validation section".into()));
    }
    let model = JmelParams::new(model_config, derive_seed(config.seed, "jmel.init"))?;
    train_jmel_from(ctx, split, model, config)
}

/// Trains starting from the given parameters.
pub fn train_jmel_from(
    ctx: &LinkingContext,
    split: &DatasetSplit,
    mut model: JmelParams,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let train = &split.train;
    let mention_bundles = train
        .iter()
        .map(|m| ctx.mention_bundle(m))
        .collect::<Result<Vec<_>>>()?;

    let mut momentum = Momentum::new(model.num_params(), config.momentum);
    let mut schedule = ScheduleState { lr: config.lr0, window_start: 0 };
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, JmelParams)> = None;
    let mut stale = 0;
    let mut records = Vec::new();
    let mut skipped = 0;
    let mut stopped_early = false;

    for epoch in 1..=config.max_epochs {
        let (triplets, sampled) = sample_triplets(
            train,
            ctx,
            config,
            derive_seed_indexed(config.seed, "epoch", epoch as u64),
        );
        skipped = sampled.skipped_empty;
        let lr = schedule.lr;
        let mut loss_sum = 0.0;
        for (b, batch) in triplets.chunks(config.batch_size).enumerate() {
            let mut grad = model.zeros_like();
            let loss = batch_step(&model, batch, &mention_bundles, ctx, &mut grad)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at epoch {epoch}, batch {b}, lr {lr}"
                )));
            }
            loss_sum += loss * batch.len() as f64;
            let mut flat = model.flatten();
            momentum.step(&mut flat, &grad.flatten(), lr)?;
            model.load_flat(&flat)?;
        }
        let mean_loss = if triplets.is_empty() { 0.0 } else { loss_sum / triplets.len() as f64 };

        let scorer = JmelScorer::new(model.clone(), ctx)?;
        let valid_acc = evaluate(&split.valid, ctx, &scorer)?.value();
        match &best {
            Some((acc, _, _)) if valid_acc <= *acc => stale += 1,
            _ => {
                best = Some((valid_acc, epoch, model.clone()));
                stale = 0;
            }
        }
        records.push(EpochRecord {
            epoch,
            lr,
            mean_loss,
            valid_acc,
            stale_count: stale,
        });
        history.push(mean_loss);
        lr_schedule_step(&history, &mut schedule, config);
        if early_stop_check(epoch, stale, config) {
            stopped_early = epoch < config.max_epochs;
            break;
        }
    }
    let (best_valid_acc, best_epoch, model) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        report: TrainReport {
            epochs: records,
            best_epoch,
            best_valid_acc,
            skipped_mentions: skipped,
            stopped_early,
        },
    })
}
