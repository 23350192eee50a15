//! Pairwise (mention, entity) classifier over the joint similarity,
//! popularity counts and BM25, trained with binary cross-entropy by L-BFGS.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::popularity_order;
use crate::candgen::CandidateSet;
use crate::corpus::MentionRecord;
use crate::error::{Error, Result};
use crate::eval::Scorer;
use crate::jmel::{cosine_or_zero, ModalityMask};
use crate::nn::{checkpoint, lbfgs_minimize, Activation, DenseLayer, LbfgsConfig, LbfgsReport, Params};
use crate::nn::params::join_name;
use crate::pipeline::{JmelEncoder, LinkingContext};
use crate::rng::derive_seed;

pub const PROB_CLIP: f64 = 1e-12;

/// Active pair features. Vector order: jmel, uni, bi, img, pop (3), bm25.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FeatureMask {
    pub jmel: bool,
    pub uni: bool,
    pub bi: bool,
    pub img: bool,
    pub pop: bool,
    pub bm25: bool,
}

impl FeatureMask {
    pub fn len(&self) -> usize {
        [self.jmel, self.uni, self.bi, self.img].iter().filter(|b| **b).count()
            + if self.pop { 3 } else { 0 }
            + usize::from(self.bm25)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn text_label(&self) -> Vec<&'static str> {
        let mut parts = Vec::new();
        match (self.uni, self.bi) {
            (true, true) => parts.push("S2V"),
            (true, false) => parts.push("S2V-uni"),
            (false, true) => parts.push("S2V-bi"),
            _ => {}
        }
        if self.img {
            parts.push("Img");
        }
        if self.pop {
            parts.push("Pop");
        }
        if self.bm25 {
            parts.push("BM25");
        }
        parts
    }

    /// Table label such as `S2V + Img + Pop`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.jmel {
            parts.push("JMEL");
        }
        parts.extend(self.text_label());
        parts.join(" + ")
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        for (on, name) in [
            (self.jmel, "jmel"),
            (self.uni, "uni"),
            (self.bi, "bi"),
            (self.img, "img"),
            (self.pop, "pop"),
            (self.bm25, "bm25"),
        ] {
            if on {
                names.push(name);
            }
        }
        f.write_str(&names.join("+"))
    }
}

impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = FeatureMask::default();
        for tok in s.split(['+', ',']).map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()) {
            match tok.as_str() {
                "jmel" => m.jmel = true,
                "uni" => m.uni = true,
                "bi" => m.bi = true,
                "s2v" | "txt" => {
                    m.uni = true;
                    m.bi = true;
                }
                "img" => m.img = true,
                "pop" => m.pop = true,
                "bm25" => m.bm25 = true,
                other => return Err(Error::Config(format!("unknown feature `{other}`"))),
            }
        }
        if m.is_empty() {
            return Err(Error::Config(format!("empty feature mask `{s}`")));
        }
        Ok(m)
    }
}

/// Train-set mean and standard deviation of the popularity and BM25 features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub pop_mean: [f64; 3],
    pub pop_std: [f64; 3],
    pub bm25_mean: f64,
    pub bm25_std: f64,
}

impl Default for Standardizer {
    fn default() -> Self {
        Self {
            pop_mean: [0.0; 3],
            pop_std: [1.0; 3],
            bm25_mean: 0.0,
            bm25_std: 1.0,
        }
    }
}

fn moments(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 1.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    (mean, if sd > 1e-12 { sd } else { 1.0 })
}

/// Unstandardized features of one pair.
#[derive(Debug, Clone, PartialEq)]
struct RawPair {
    sims: Vec<f64>,
    pop: [f64; 3],
    bm25: f64,
}

pub struct Featurizer {
    pub mask: FeatureMask,
    pub jmel: Option<JmelEncoder>,
    pub standardizer: Standardizer,
}

impl Featurizer {
    pub fn new(mask: FeatureMask, jmel: Option<JmelEncoder>) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::Config("empty feature mask".into()));
        }
        if mask.jmel && jmel.is_none() {
            return Err(Error::MissingArtifact("jmel model required by the feature mask".into()));
        }
        Ok(Self {
            mask,
            jmel,
            standardizer: Standardizer::default(),
        })
    }

    fn raw(&self, ctx: &LinkingContext, mention: &MentionRecord, entities: &[&str]) -> Result<Vec<RawPair>> {
        let m = self.mask;
        let bundle = if m.uni || m.bi || m.img { Some(ctx.mention_bundle(mention)?) } else { None };
        let rep = match (&self.jmel, m.jmel) {
            (Some(enc), true) => Some(enc.mention_rep(ctx, mention)?),
            _ => None,
        };
        let query = if m.bm25 { ctx.bm25_query(mention)? } else { Vec::new() };
        entities
            .iter()
            .map(|name| {
                let mut sims = Vec::new();
                if let (Some(rep), Some(enc)) = (&rep, &self.jmel) {
                    sims.push(enc.similarity(rep, name)?);
                }
                if let Some(mb) = &bundle {
                    let eb = ctx.entity_bundle(name)?;
                    if m.uni {
                        sims.push(cosine_or_zero(&mb.u, &eb.u));
                    }
                    if m.bi {
                        sims.push(cosine_or_zero(&mb.b, &eb.b));
                    }
                    if m.img {
                        sims.push(cosine_or_zero(&mb.i, &eb.i));
                    }
                }
                let e = ctx.kb.entity(name).ok_or_else(|| Error::UnknownEntity(name.to_string()))?;
                let pop = [
                    (e.followers as f64).ln_1p(),
                    (e.friends as f64).ln_1p(),
                    (e.tweet_count as f64).ln_1p(),
                ];
                let bm25 = if m.bm25 { ctx.bm25.score(&query, name)? } else { 0.0 };
                Ok(RawPair { sims, pop, bm25 })
            })
            .collect()
    }

    fn finish(&self, raw: RawPair) -> Vec<f64> {
        let s = &self.standardizer;
        let mut out = raw.sims;
        if self.mask.pop {
            for k in 0..3 {
                out.push((raw.pop[k] - s.pop_mean[k]) / s.pop_std[k]);
            }
        }
        if self.mask.bm25 {
            out.push((raw.bm25 - s.bm25_mean) / s.bm25_std);
        }
        out
    }

    /// Feature vectors of `mention` paired with each entity, in the given order.
    pub fn assemble(&self, ctx: &LinkingContext, mention: &MentionRecord, entities: &[&str]) -> Result<Vec<Vec<f64>>> {
        Ok(self.raw(ctx, mention, entities)?.into_iter().map(|r| self.finish(r)).collect())
    }

    /// Fits the standardizer on the training pairs and returns their features and labels.
    pub fn fit(&mut self, ctx: &LinkingContext, train: &[MentionRecord]) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
        let mut raws = Vec::new();
        let mut labels = Vec::new();
        for m in train {
            let names = pair_entities(ctx, m);
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            for (r, name) in self.raw(ctx, m, &names)?.into_iter().zip(&names) {
                raws.push(r);
                labels.push(*name == m.gold);
            }
        }
        let mut s = Standardizer::default();
        for k in 0..3 {
            (s.pop_mean[k], s.pop_std[k]) = moments(raws.iter().map(|r| r.pop[k]));
        }
        (s.bm25_mean, s.bm25_std) = moments(raws.iter().map(|r| r.bm25));
        self.standardizer = s;
        Ok((raws.into_iter().map(|r| self.finish(r)).collect(), labels))
    }
}

/// Gold first, then every other candidate.
pub fn pair_entities(ctx: &LinkingContext, mention: &MentionRecord) -> Vec<String> {
    let mut out = vec![mention.gold.clone()];
    out.extend(
        ctx.candidates(mention)
            .candidates
            .into_iter()
            .map(|c| c.screen_name)
            .filter(|n| *n != mention.gold),
    );
    out
}

/// Two tanh layers of width `n_in + 1` and a sigmoid output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionMlp {
    pub hidden1: DenseLayer,
    pub hidden2: DenseLayer,
    pub output: DenseLayer,
}

pub struct MlpCache {
    h1: Vec<f64>,
    h2: Vec<f64>,
    p: f64,
}

impl FusionMlp {
    pub fn new(n_in: usize, seed: u64) -> Self {
        let w = n_in + 1;
        Self {
            hidden1: DenseLayer::xavier(n_in, w, derive_seed(seed, "hidden1")),
            hidden2: DenseLayer::xavier(w, w, derive_seed(seed, "hidden2")),
            output: DenseLayer::xavier(w, 1, derive_seed(seed, "output")),
        }
    }

    pub fn zeros(n_in: usize) -> Self {
        let w = n_in + 1;
        Self {
            hidden1: DenseLayer::zeros(n_in, w),
            hidden2: DenseLayer::zeros(w, w),
            output: DenseLayer::zeros(w, 1),
        }
    }

    pub fn n_in(&self) -> usize {
        self.hidden1.in_dim()
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<MlpCache> {
        let h1 = Activation::Tanh.forward(&self.hidden1.forward(x)?);
        let h2 = Activation::Tanh.forward(&self.hidden2.forward(&h1)?);
        let z = self.output.forward(&h2)?[0];
        Ok(MlpCache { h1, h2, p: crate::nn::activation::sigmoid(z) })
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward_cached(x)?.p)
    }

    /// Accumulates the gradient of `dz · z`, `z` being the output logit.
    pub fn backward_logit(&self, x: &[f64], cache: &MlpCache, dz: f64, grad: &mut FusionMlp) -> Result<()> {
        let dh2 = self.output.backward_into(&cache.h2, &[dz], &mut grad.output)?;
        let dz2 = Activation::Tanh.backward(&[], &cache.h2, &dh2);
        let dh1 = self.hidden2.backward_into(&cache.h1, &dz2, &mut grad.hidden2)?;
        let dz1 = Activation::Tanh.backward(&[], &cache.h1, &dh1);
        self.hidden1.backward_into(x, &dz1, &mut grad.hidden1)?;
        Ok(())
    }

    /// Accumulates the gradient of `dp · p`.
    pub fn backward(&self, x: &[f64], cache: &MlpCache, dp: f64, grad: &mut FusionMlp) -> Result<()> {
        self.backward_logit(x, cache, dp * cache.p * (1.0 - cache.p), grad)
    }
}

impl Params for FusionMlp {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        self.hidden1.visit(&join_name(prefix, "hidden1"), f);
        self.hidden2.visit(&join_name(prefix, "hidden2"), f);
        self.output.visit(&join_name(prefix, "output"), f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.hidden1.visit_mut(f);
        self.hidden2.visit_mut(f);
        self.output.visit_mut(f);
    }
}

/// Binary cross-entropy with probabilities clipped to `[1e-12, 1 − 1e-12]`.
pub fn bce(p: f64, label: bool) -> f64 {
    let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
    if label {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean BCE over the rows and its gradient.
pub fn bce_objective(mlp: &FusionMlp, x: &[Vec<f64>], y: &[bool]) -> Result<(f64, FusionMlp)> {
    const CHUNK: usize = 256;
    let scale = 1.0 / x.len().max(1) as f64;
    let partials = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(xs, ys)| {
            let mut grad = mlp.zeros_like();
            let mut loss = 0.0;
            for (row, &label) in xs.iter().zip(ys) {
                let cache = mlp.forward_cached(row)?;
                loss += bce(cache.p, label);
                let clipped = cache.p < PROB_CLIP || cache.p > 1.0 - PROB_CLIP;
                if !clipped {
                    let dz = (cache.p - f64::from(u8::from(label))) * scale;
                    mlp.backward_logit(row, &cache, dz, &mut grad)?;
                }
            }
            Ok((loss, grad.flatten()))
        })
        .collect::<Result<Vec<_>>>()?;
    // fixed-order reduction
    let mut total = 0.0;
    let mut flat = vec![0.0; mlp.num_params()];
    for (l, g) in partials {
        total += l;
        flat.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    let mut grad = mlp.zeros_like();
    grad.load_flat(&flat)?;
    Ok((total * scale, grad))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub lbfgs: LbfgsConfig,
    pub seed: u64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            lbfgs: LbfgsConfig::default(),
            seed: 0,
        }
    }
}

pub fn train_fusion(x: &[Vec<f64>], y: &[bool], config: &FusionConfig) -> Result<(FusionMlp, LbfgsReport)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Data(format!("fusion training needs matching rows and labels ({} vs {})", x.len(), y.len())));
    }
    let n_in = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != n_in) {
        return Err(Error::Shape(format!("fusion rows of width {} and {n_in}", bad.len())));
    }
    let mut mlp = FusionMlp::new(n_in, derive_seed(config.seed, "fusion.init"));
    let x0 = mlp.flatten();
    let mut probe = mlp.clone();
    let mut failure = None;
    let report = lbfgs_minimize(
        |w| {
            let eval = probe.load_flat(w).and_then(|_| bce_objective(&probe, x, y));
            match eval {
                Ok((loss, grad)) => (loss, grad.flatten()),
                Err(e) => {
                    failure.get_or_insert(e);
                    (f64::NAN, vec![f64::NAN; w.len()])
                }
            }
        },
        &x0,
        &config.lbfgs,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let report = report?;
    mlp.load_flat(&report.x)?;
    Ok((mlp, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FusionHeader {
    mask: FeatureMask,
    jmel_mask: Option<ModalityMask>,
    standardizer: Standardizer,
    n_in: usize,
}

/// Trained classifier plus the feature settings it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub mask: FeatureMask,
    /// Modalities of the joint model feeding the `jmel` feature.
    pub jmel_mask: Option<ModalityMask>,
    pub standardizer: Standardizer,
    pub mlp: FusionMlp,
}

impl FusionModel {
    pub fn label(&self) -> String {
        match (self.mask.jmel, self.jmel_mask) {
            (true, Some(jm)) => {
                let mut parts = vec![jm.label()];
                let rest = FeatureMask { jmel: false, ..self.mask };
                if !rest.is_empty() {
                    parts.push(rest.label());
                }
                format!("JMEL({})", parts.join(" + "))
            }
            _ => format!("MLP({})", self.mask.label()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = FusionHeader {
            mask: self.mask,
            jmel_mask: self.jmel_mask,
            standardizer: self.standardizer.clone(),
            n_in: self.mlp.n_in(),
        };
        checkpoint::save(&self.mlp, serde_json::to_value(header)?, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (header, values) = checkpoint::load(path)?;
        let meta: FusionHeader = serde_json::from_value(header.model.clone())?;
        let mut mlp = FusionMlp::zeros(meta.n_in);
        checkpoint::restore_into(&mut mlp, &header, values)?;
        Ok(Self {
            mask: meta.mask,
            jmel_mask: meta.jmel_mask,
            standardizer: meta.standardizer,
            mlp,
        })
    }
}

/// Fits the standardizer and classifier on the training mentions.
pub fn fit_fusion(
    ctx: &LinkingContext,
    train: &[MentionRecord],
    mask: FeatureMask,
    jmel: Option<JmelEncoder>,
    config: &FusionConfig,
) -> Result<(FusionScorer, LbfgsReport)> {
    let mut featurizer = Featurizer::new(mask, jmel)?;
    let (x, y) = featurizer.fit(ctx, train)?;
    let (mlp, report) = train_fusion(&x, &y, config)?;
    let model = FusionModel {
        mask,
        jmel_mask: featurizer.jmel.as_ref().map(|e| e.model.config.mask),
        standardizer: featurizer.standardizer.clone(),
        mlp,
    };
    Ok((FusionScorer { model, featurizer }, report))
}

pub struct FusionScorer {
    pub model: FusionModel,
    featurizer: Featurizer,
}

impl FusionScorer {
    pub fn new(model: FusionModel, jmel: Option<JmelEncoder>) -> Result<Self> {
        if model.mask.jmel {
            match &jmel {
                None => return Err(Error::MissingArtifact("jmel model for the fusion scorer".into())),
                Some(enc) if Some(enc.model.config.mask) != model.jmel_mask => {
                    return Err(Error::Config(format!(
                        "fusion model expects a jmel model over {:?}, got {}",
                        model.jmel_mask.map(|m| m.to_string()),
                        enc.model.config.mask
                    )))
                }
                _ => {}
            }
        }
        let mut featurizer = Featurizer::new(model.mask, jmel)?;
        featurizer.standardizer = model.standardizer.clone();
        Ok(Self { model, featurizer })
    }
}

impl Scorer for FusionScorer {
    fn name(&self) -> String {
        self.model.label()
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        fusion_rank(ctx, mention, &self.featurizer, &self.model.mlp)
    }
}

/// Candidates by classifier probability; ties by followers then name.
pub fn fusion_rank(ctx: &LinkingContext, mention: &MentionRecord, featurizer: &Featurizer, mlp: &FusionMlp) -> Result<CandidateSet> {
    let mut set = ctx.candidates(mention);
    if set.is_empty() {
        return Ok(set);
    }
    let names: Vec<String> = set.candidates.iter().map(|c| c.screen_name.clone()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = featurizer.assemble(ctx, mention, &refs)?;
    for (c, row) in set.candidates.iter_mut().zip(&rows) {
        c.score = Some(mlp.forward(row)?);
    }
    sort_by_score_then_followers(ctx, &mut set);
    Ok(set)
}

pub(crate) fn sort_by_score_then_followers(ctx: &LinkingContext, set: &mut CandidateSet) {
    set.candidates.sort_by(|a, b| {
        let sa = a.score.unwrap_or(f64::NEG_INFINITY);
        let sb = b.score.unwrap_or(f64::NEG_INFINITY);
        sb.total_cmp(&sa).then_with(|| {
            let ea = ctx.kb.entity(&a.screen_name);
            let eb = ctx.kb.entity(&b.screen_name);
            match (ea, eb) {
                (Some(ea), Some(eb)) => popularity_order(ea, eb),
                _ => a.screen_name.cmp(&b.screen_name),
            }
        })
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_diff_grad, max_relative_error};
    use crate::rng::rng_from;
    use rand::Rng as _;

    #[test]
    fn mask_lengths() {
        assert_eq!("jmel".parse::<FeatureMask>().unwrap().len(), 1);
        let m: FeatureMask = "jmel+pop+bm25".parse().unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m.to_string(), "jmel+pop+bm25");
        assert_eq!("s2v+img+pop".parse::<FeatureMask>().unwrap().label(), "S2V + Img + Pop");
        assert!("".parse::<FeatureMask>().is_err());
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let mlp = FusionMlp::zeros(5);
        assert_eq!(mlp.forward(&[3.0, -1.0, 0.2, 9.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn hidden_widths_are_one_more_than_inputs() {
        let mlp = FusionMlp::new(5, 0);
        assert_eq!(mlp.hidden1.out_dim(), 6);
        assert_eq!(mlp.hidden2.out_dim(), 6);
        assert_eq!(mlp.output.out_dim(), 1);
        assert!(mlp.forward(&[0.0; 4]).is_err());
    }

    #[test]
    fn bce_of_confident_correct_prediction_is_tiny() {
        assert!(bce(1.0 - 1e-12, true) < 1e-11);
        assert!(bce(1.0, false).is_finite());
        assert!((bce(0.5, true) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let mut rng = rng_from(3);
        let mlp = FusionMlp::new(4, 9);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cache = mlp.forward_cached(&x).unwrap();
        let mut grad = mlp.zeros_like();
        mlp.backward(&x, &cache, 1.0, &mut grad).unwrap();
        let mut probe = mlp.clone();
        let num = finite_diff_grad(
            |w| {
                probe.load_flat(w).unwrap();
                probe.forward(&x).unwrap()
            },
            &mlp.flatten(),
            1e-5,
        );
        assert!(max_relative_error(&grad.flatten(), &num, 1e-4) < 1e-5);
    }

    #[test]
    fn bce_objective_gradient_matches_finite_differences() {
        let mut rng = rng_from(4);
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<bool> = (0..30).map(|k| k % 3 == 0).collect();
        let mlp = FusionMlp::new(3, 1);
        let (_, grad) = bce_objective(&mlp, &x, &y).unwrap();
        let mut probe = mlp.clone();
        let num = finite_diff_grad(
            |w| {
                probe.load_flat(w).unwrap();
                bce_objective(&probe, &x, &y).unwrap().0
            },
            &mlp.flatten(),
            1e-5,
        );
        assert!(max_relative_error(&grad.flatten(), &num, 1e-4) < 1e-5);
    }

    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = rng_from(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let a: f64 = rng.random_range(-1.0..1.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let shift = if a + b > 0.0 { 0.3 } else { -0.3 };
                vec![a + shift, b + shift]
            })
            .collect();
        let y = x.iter().map(|r| r[0] + r[1] > 0.0).collect();
        (x, y)
    }

    #[test]
    fn separable_toy_is_learned() {
        let (x, y) = separable(200, 5);
        let cfg = FusionConfig {
            lbfgs: LbfgsConfig { step_scale: 1.0, ..LbfgsConfig::default() },
            seed: 2,
        };
        let (mlp, report) = train_fusion(&x, &y, &cfg).unwrap();
        assert!(report.value <= 0.05, "{}", report.value);
        let (again, _) = train_fusion(&x, &y, &cfg).unwrap();
        assert_eq!(mlp, again);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let model = FusionModel {
            mask: "jmel+pop+bm25".parse().unwrap(),
            jmel_mask: Some(ModalityMask::ALL),
            standardizer: Standardizer { pop_mean: [1.0, 2.0, 3.0], pop_std: [0.5, 0.25, 2.0], bm25_mean: 4.0, bm25_std: 1.5 },
            mlp: FusionMlp::new(5, 8),
        };
        let path = dir.path().join("fusion.ckpt");
        model.save(&path).unwrap();
        assert_eq!(FusionModel::load(&path).unwrap(), model);
        assert_eq!(model.label(), "JMEL(S2V + Img + Pop + BM25)");
    }
}
