//! Extremely randomized trees for binary classification.

use std::path::Path;

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candgen::CandidateSet;
use crate::corpus::MentionRecord;
use crate::error::{Error, Result};
use crate::eval::Scorer;
use crate::fusion::{sort_by_score_then_followers, FeatureMask, Featurizer, Standardizer};
use crate::pipeline::{JmelEncoder, LinkingContext};
use crate::rng::{derive_seed_indexed, rng_from, Rng};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtraTreesConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub k: Option<usize>,
    pub n_min: usize,
    pub seed: u64,
}

impl Default for ExtraTreesConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            k: None,
            n_min: 2,
            seed: 0,
        }
    }
}

/// Tree nodes stored in a flat array; children are indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        cut: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Fraction of positive training samples in the leaf.
        p: f64,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { p, .. } => return *p,
                Node::Split { feature, cut, left, right } => {
                    i = if x[*feature] <= *cut { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub version: u32,
    pub config: ExtraTreesConfig,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

fn build_tree(x: &[Vec<f64>], y: &[bool], k: usize, n_min: usize, rng: &mut Rng) -> Tree {
    let d = x[0].len();
    let mut nodes = Vec::new();
    // (node slot, sample indices)
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, (0..x.len()).collect())];
    nodes.push(Node::Leaf { p: 0.0, n: 0 });
    while let Some((slot, idx)) = stack.pop() {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| y[i]).count();
        let leaf = Node::Leaf { p: pos as f64 / n as f64, n };
        if n < n_min || pos == 0 || pos == n {
            nodes[slot] = leaf;
            continue;
        }
        let ranges: Vec<(usize, f64, f64)> = (0..d)
            .filter_map(|f| {
                let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(x[i][f]), hi.max(x[i][f]))
                });
                (hi > lo).then_some((f, lo, hi))
            })
            .collect();
        if ranges.is_empty() {
            nodes[slot] = leaf;
            continue;
        }
        let parent = gini(pos, n);
        let mut best: Option<(f64, usize, f64)> = None;
        for j in sample(rng, ranges.len(), k.min(ranges.len())) {
            let (f, lo, hi) = ranges[j];
            let cut = rng.random_range(lo..hi);
            let (mut nl, mut pl) = (0, 0);
            for &i in &idx {
                if x[i][f] <= cut {
                    nl += 1;
                    pl += usize::from(y[i]);
                }
            }
            let nr = n - nl;
            let pr = pos - pl;
            let child = (nl as f64 * gini(pl, nl) + nr as f64 * gini(pr, nr)) / n as f64;
            let gain = parent - child;
            if best.is_none_or(|b| gain > b.0) {
                best = Some((gain, f, cut));
            }
        }
        let (_, feature, cut) = best.expect("at least one candidate split");
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= cut);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { p: 0.0, n: 0 });
        nodes.push(Node::Leaf { p: 0.0, n: 0 });
        nodes[slot] = Node::Split { feature, cut, left, right };
        stack.push((right, right_idx));
        stack.push((left, left_idx));
    }
    Tree { nodes }
}

pub fn extratrees_train(x: &[Vec<f64>], y: &[bool], config: &ExtraTreesConfig) -> Result<Forest> {
    if config.n_trees == 0 || config.n_min < 2 {
        return Err(Error::Config("extra-trees needs n_trees >= 1 and n_min >= 2".into()));
    }
    if x.len() != y.len() || x.len() < config.n_min {
        return Err(Error::Data(format!(
            "extra-trees needs at least n_min = {} labeled rows, got {} rows and {} labels",
            config.n_min,
            x.len(),
            y.len()
        )));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(Error::Shape("extra-trees rows must share a nonzero width".into()));
    }
    let k = config.k.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize);
    if k == 0 || k > d {
        return Err(Error::Config(format!("extra-trees K = {k} outside 1..={d}")));
    }
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(derive_seed_indexed(config.seed, "extratrees.tree", t as u64));
            build_tree(x, y, k, config.n_min, &mut rng)
        })
        .collect();
    Ok(Forest {
        version: FOREST_FORMAT_VERSION,
        config: *config,
        n_features: d,
        trees,
    })
}

impl Forest {
    /// Mean positive-class leaf frequency over the trees.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!("forest expects {} features, got {}", self.n_features, x.len())));
        }
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_proba(x)? > 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesModel {
    pub mask: FeatureMask,
    pub standardizer: Standardizer,
    pub forest: Forest,
}

impl ExtraTreesModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Self = serde_json::from_str(&text)?;
        if model.forest.version != FOREST_FORMAT_VERSION {
            return Err(Error::Data(format!("unsupported forest version {}", model.forest.version)));
        }
        Ok(model)
    }
}

pub struct ExtraTreesScorer {
    pub model: ExtraTreesModel,
    featurizer: Featurizer,
}

impl ExtraTreesScorer {
    pub fn new(model: ExtraTreesModel, jmel: Option<JmelEncoder>) -> Result<Self> {
        let mut featurizer = Featurizer::new(model.mask, jmel)?;
        featurizer.standardizer = model.standardizer.clone();
        Ok(Self { model, featurizer })
    }

    /// Fits features and forest on the training mentions.
    pub fn fit(
        ctx: &LinkingContext,
        train: &[MentionRecord],
        mask: FeatureMask,
        jmel: Option<JmelEncoder>,
        config: &ExtraTreesConfig,
    ) -> Result<Self> {
        let mut featurizer = Featurizer::new(mask, jmel)?;
        let (x, y) = featurizer.fit(ctx, train)?;
        let forest = extratrees_train(&x, &y, config)?;
        Ok(Self {
            model: ExtraTreesModel {
                mask,
                standardizer: featurizer.standardizer.clone(),
                forest,
            },
            featurizer,
        })
    }
}

impl Scorer for ExtraTreesScorer {
    fn name(&self) -> String {
        format!("ET({})", self.model.mask.label())
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        let mut set = ctx.candidates(mention);
        if set.is_empty() {
            return Ok(set);
        }
        let names: Vec<String> = set.candidates.iter().map(|c| c.screen_name.clone()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rows = self.featurizer.assemble(ctx, mention, &refs)?;
        for (c, row) in set.candidates.iter_mut().zip(&rows) {
            c.score = Some(self.model.forest.predict_proba(row)?);
        }
        sort_by_score_then_followers(ctx, &mut set);
        Ok(set)
    }
}
