//! Context representations: sentence vectors composed from n-gram tables,
//! timeline averages for entities, a seeded synthetic feature generator, and
//! the on-disk feature store.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bm25::tokenize;
use crate::corpus::{Entity, KnowledgeBase, MentionRecord, Tweet};
use crate::error::{Error, Result};
use crate::forge::TopicRecord;
use crate::rng::{derive_seed, rng_from, stable_hash};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const IMAGES_FILE: &str = "images.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDims {
    pub dim_u: usize,
    pub dim_b: usize,
    pub dim_i: usize,
}

impl FeatureDims {
    pub const REFERENCE: FeatureDims = FeatureDims {
        dim_u: 700,
        dim_b: 700,
        dim_i: 1000,
    };
}

/// Unigram sentence vector `u`, unigram+bigram sentence vector `b`, image vector `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub i: Vec<f64>,
}

impl FeatureBundle {
    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            dim_u: self.u.len(),
            dim_b: self.b.len(),
            dim_i: self.i.len(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.b).chain(&self.i).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeMode {
    Unigram,
    UnigramBigram,
}

/// Embedding lookup for unigrams and adjacent-token bigrams. Anything outside
/// the vocabulary maps to the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramTables {
    dim: usize,
    unigrams: BTreeMap<String, Vec<f64>>,
    bigrams: BTreeMap<(String, String), Vec<f64>>,
}

fn seeded_gaussian(seed: u64, dim: usize, scale: f64) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

impl NgramTables {
    pub fn from_vectors(
        dim: usize,
        unigrams: BTreeMap<String, Vec<f64>>,
        bigrams: BTreeMap<(String, String), Vec<f64>>,
    ) -> Result<Self> {
        for (k, v) in &unigrams {
            if v.len() != dim {
                return Err(Error::DimMismatch { key: k.clone(), expected: dim, got: v.len() });
            }
        }
        for ((a, b), v) in &bigrams {
            if v.len() != dim {
                return Err(Error::DimMismatch { key: format!("{a}_{b}"), expected: dim, got: v.len() });
            }
        }
        Ok(Self { dim, unigrams, bigrams })
    }

    /// Builds tables over every n-gram seen at least `min_count` times in
    /// `texts`. Each vector is `offset + N(0, I/dim)` drawn from a stream keyed
    /// by the n-gram itself, so vectors do not depend on corpus order.
    pub fn from_corpus<'a>(
        texts: impl IntoIterator<Item = &'a str>,
        dim: usize,
        min_count: usize,
        common_offset: f64,
        seed: u64,
    ) -> Self {
        let mut uni_counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut bi_counts: BTreeMap<(String, String), usize> = BTreeMap::new();
        for text in texts {
            let toks = tokenize(text);
            for t in &toks {
                *uni_counts.entry(t.clone()).or_default() += 1;
            }
            for w in toks.windows(2) {
                *bi_counts.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
        let scale = 1.0 / (dim as f64).sqrt();
        let offset = seeded_gaussian(derive_seed(seed, "offset"), dim, scale * common_offset);
        let make = |key: &str| {
            let mut v = seeded_gaussian(seed ^ stable_hash(key.as_bytes()), dim, scale);
            v.iter_mut().zip(&offset).for_each(|(x, o)| *x += o);
            v
        };
        let unigrams = uni_counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .map(|(k, _)| {
                let v = make(&format!("u:{k}"));
                (k, v)
            })
            .collect();
        let bigrams = bi_counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .map(|((a, b), _)| {
                let v = make(&format!("b:{a} {b}"));
                ((a, b), v)
            })
            .collect();
        Self { dim, unigrams, bigrams }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unigram(&self, tok: &str) -> Option<&[f64]> {
        self.unigrams.get(tok).map(Vec::as_slice)
    }

    pub fn bigram(&self, a: &str, b: &str) -> Option<&[f64]> {
        self.bigrams.get(&(a.to_string(), b.to_string())).map(Vec::as_slice)
    }

    pub fn vocab_size(&self) -> (usize, usize) {
        (self.unigrams.len(), self.bigrams.len())
    }
}

/// Mean of the vectors of the distinct n-grams of `tokens`. Unseen n-grams
/// contribute zero but still count in the denominator.
pub fn compose_sentence(tokens: &[String], tables: &NgramTables, mode: ComposeMode) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Data("cannot compose an empty sentence".into()));
    }
    let unigrams: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    let bigrams: BTreeSet<(&str, &str)> = match mode {
        ComposeMode::Unigram => BTreeSet::new(),
        ComposeMode::UnigramBigram => tokens.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect(),
    };
    let mut sum = vec![0.0; tables.dim];
    let mut add = |v: Option<&[f64]>| {
        if let Some(v) = v {
            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        }
    };
    for u in &unigrams {
        add(tables.unigram(u));
    }
    for (a, b) in &bigrams {
        add(tables.bigram(a, b));
    }
    let n = (unigrams.len() + bigrams.len()) as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

fn mean_of<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for r in rows {
        sum.iter_mut().zip(r).for_each(|(s, x)| *s += x);
        n += 1;
    }
    sum.into_iter().map(|s| s / n as f64).collect()
}

/// Component-wise mean of the timeline bundles.
pub fn entity_features(entity: &Entity, bundles: &[FeatureBundle]) -> Result<FeatureBundle> {
    if entity.timeline.is_empty() || bundles.is_empty() {
        return Err(Error::Data(format!("entity `{}` has an empty timeline", entity.screen_name)));
    }
    if bundles.len() != entity.timeline.len() {
        return Err(Error::Shape(format!(
            "entity `{}`: {} bundles for {} timeline tweets",
            entity.screen_name,
            bundles.len(),
            entity.timeline.len()
        )));
    }
    let dims = bundles[0].dims();
    if let Some(bad) = bundles.iter().find(|b| b.dims() != dims) {
        return Err(Error::Shape(format!("inconsistent bundle dims {:?} vs {dims:?}", bad.dims())));
    }
    Ok(FeatureBundle {
        u: mean_of(bundles.iter().map(|b| b.u.as_slice()), dims.dim_u),
        b: mean_of(bundles.iter().map(|b| b.b.as_slice()), dims.dim_b),
        i: mean_of(bundles.iter().map(|b| b.i.as_slice()), dims.dim_i),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoreManifest {
    dim_u: usize,
    dim_b: usize,
    dim_i: usize,
    count: usize,
    #[serde(default)]
    image_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TextRow {
    key: String,
    u: Vec<f64>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    i: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ImageRow {
    key: String,
    i: Vec<f64>,
}

/// Text vectors keyed by tweet id, image vectors keyed by image reference.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dims: FeatureDims,
    text: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
    images: BTreeMap<String, Vec<f64>>,
}

impl FeatureStore {
    pub fn new(dims: FeatureDims) -> Self {
        Self {
            dims,
            text: BTreeMap::new(),
            images: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> FeatureDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn insert_text(&mut self, key: &str, u: Vec<f64>, b: Vec<f64>) -> Result<()> {
        check_dim(key, self.dims.dim_u, u.len())?;
        check_dim(key, self.dims.dim_b, b.len())?;
        self.text.insert(key.to_string(), (u, b));
        Ok(())
    }

    pub fn insert_image(&mut self, key: &str, i: Vec<f64>) -> Result<()> {
        check_dim(key, self.dims.dim_i, i.len())?;
        self.images.insert(key.to_string(), i);
        Ok(())
    }

    pub fn text_keys(&self) -> impl Iterator<Item = &String> {
        self.text.keys()
    }

    pub fn bundle_for(&self, tweet: &Tweet) -> Result<FeatureBundle> {
        let (u, b) = self
            .text
            .get(&tweet.id)
            .ok_or_else(|| Error::MissingKey(tweet.id.clone()))?;
        let i = tweet
            .image_ref
            .as_ref()
            .and_then(|r| self.images.get(r))
            .or_else(|| self.images.get(&tweet.id))
            .ok_or_else(|| Error::MissingKey(tweet.image_ref.clone().unwrap_or_else(|| tweet.id.clone())))?;
        Ok(FeatureBundle {
            u: u.clone(),
            b: b.clone(),
            i: i.clone(),
        })
    }

    /// Timeline average for one entity.
    pub fn entity_bundle(&self, kb: &KnowledgeBase, entity: &Entity) -> Result<FeatureBundle> {
        let bundles = kb
            .timeline(entity)
            .into_iter()
            .map(|t| self.bundle_for(t))
            .collect::<Result<Vec<_>>>()?;
        entity_features(entity, &bundles)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = StoreManifest {
            dim_u: self.dims.dim_u,
            dim_b: self.dims.dim_b,
            dim_i: self.dims.dim_i,
            count: self.text.len(),
            image_count: self.images.len(),
        };
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_vec_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;

        let mut buf = Vec::new();
        for (key, (u, b)) in &self.text {
            serde_json::to_writer(&mut buf, &TextRow { key: key.clone(), u: u.clone(), b: b.clone(), i: None })?;
            buf.push(b'\n');
        }
        write_file(&dir.join(RECORDS_FILE), &buf)?;

        buf.clear();
        for (key, i) in &self.images {
            serde_json::to_writer(&mut buf, &ImageRow { key: key.clone(), i: i.clone() })?;
            buf.push(b'\n');
        }
        write_file(&dir.join(IMAGES_FILE), &buf)
    }

    /// Reads a store and checks every row against the manifest dims. The
    /// images file is optional; rows may carry their image inline as `i`.
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: StoreManifest = serde_json::from_slice(&bytes)?;
        let mut store = FeatureStore::new(FeatureDims {
            dim_u: manifest.dim_u,
            dim_b: manifest.dim_b,
            dim_i: manifest.dim_i,
        });
        let path = dir.join(RECORDS_FILE);
        for (line, text) in read_lines(&path)? {
            let row: TextRow = parse_row(&path, line, &text)?;
            if let Some(i) = row.i {
                store.insert_image(&row.key, i)?;
            }
            store.insert_text(&row.key, row.u, row.b)?;
        }
        if store.text.len() != manifest.count {
            return Err(Error::Data(format!(
                "manifest declares {} records, found {}",
                manifest.count,
                store.text.len()
            )));
        }
        let path = dir.join(IMAGES_FILE);
        if path.exists() {
            for (line, text) in read_lines(&path)? {
                let row: ImageRow = parse_row(&path, line, &text)?;
                store.insert_image(&row.key, row.i)?;
            }
        }
        Ok(store)
    }
}

/// Lists every way `store` fails to cover `kb` and `mentions`. Empty means
/// the store can drive training and evaluation.
pub fn validate_store(store: &FeatureStore, kb: &KnowledgeBase, mentions: &[MentionRecord]) -> Vec<String> {
    let mut problems = Vec::new();
    let check = |t: &Tweet, problems: &mut Vec<String>| {
        if let Err(e) = store.bundle_for(t) {
            problems.push(format!("{}: {e}", t.id));
        }
    };
    for e in kb.entities() {
        for t in kb.timeline(e) {
            check(t, &mut problems);
        }
    }
    for m in mentions {
        match kb.tweet(&m.tweet_id) {
            Some(t) => check(t, &mut problems),
            None => problems.push(format!("{}: unknown mention tweet", m.tweet_id)),
        }
    }
    problems
}

fn check_dim(key: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimMismatch {
            key: key.to_string(),
            expected,
            got,
        });
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

fn parse_row<T: serde::de::DeserializeOwned>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    })
}

/// Parameters of the synthetic feature oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthFeatureConfig {
    pub dims: FeatureDims,
    /// Per-component signal-to-noise power ratio of image vectors.
    pub image_snr: f64,
    /// Constant vector added to every image, in units of the noise std.
    pub image_offset: f64,
    /// Shared component of every word vector, relative to a word's own part.
    pub text_offset: f64,
    /// Std of a low-rank image component that ignores the subject.
    pub image_nuisance: f64,
    pub nuisance_rank: usize,
    /// Share one nuisance draw across all images of an author.
    pub nuisance_per_author: bool,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SynthFeatureConfig {
    fn default() -> Self {
        Self {
            dims: FeatureDims {
                dim_u: 16,
                dim_b: 16,
                dim_i: 32,
            },
            image_snr: 1.0,
            image_offset: 0.0,
            text_offset: 0.0,
            image_nuisance: 0.0,
            nuisance_rank: 4,
            nuisance_per_author: false,
            min_count: 1,
            seed: 0,
        }
    }
}

/// Generates a feature store for every tweet reachable from `kb` and
/// `mentions`.
///
/// Text vectors are composed from seeded n-gram tables. An image vector is
/// `sqrt(snr) · P θ / |θ| + offset + A z + noise`, where θ is the topic of the entity
/// the tweet is about (the author for timeline tweets, the gold entity for
/// mention tweets), `P` a fixed Gaussian projection, and noise unit Gaussian.
/// `A` is a fixed `dim_i × rank` matrix and `z` a Gaussian draw per image, or
/// per posting account with `nuisance_per_author`, scaled so each component
/// of `A z` has std `image_nuisance`.
pub fn synth_features(
    kb: &KnowledgeBase,
    mentions: &[MentionRecord],
    topics: &[TopicRecord],
    config: &SynthFeatureConfig,
) -> Result<FeatureStore> {
    let topic_map: BTreeMap<&str, &[f64]> = topics
        .iter()
        .map(|t| (t.screen_name.as_str(), t.topic.as_slice()))
        .collect();
    for e in kb.entities() {
        if !topic_map.contains_key(e.screen_name.as_str()) {
            return Err(Error::MissingArtifact(format!("topic vector for `{}`", e.screen_name)));
        }
    }
    let topic_dim = topics.first().map_or(0, |t| t.topic.len());
    if topics.iter().any(|t| t.topic.len() != topic_dim) {
        return Err(Error::Data("topic vectors differ in length".into()));
    }

    let dims = config.dims;
    let texts: Vec<&str> = kb.tweets().map(|t| t.text.as_str()).collect();
    let uni = NgramTables::from_corpus(
        texts.iter().copied(),
        dims.dim_u,
        config.min_count,
        config.text_offset,
        derive_seed(config.seed, "tables.unigram"),
    );
    let bi = NgramTables::from_corpus(
        texts.iter().copied(),
        dims.dim_b,
        config.min_count,
        config.text_offset,
        derive_seed(config.seed, "tables.bigram"),
    );
    let projection: Vec<Vec<f64>> = (0..dims.dim_i)
        .map(|r| seeded_gaussian(derive_seed(config.seed, &format!("projection.{r}")), topic_dim, 1.0))
        .collect();
    let offset = seeded_gaussian(derive_seed(config.seed, "image.offset"), dims.dim_i, 1.0)
        .into_iter()
        .map(|v| v.abs() * config.image_offset)
        .collect::<Vec<_>>();
    let signal_gain = config.image_snr.max(0.0).sqrt();
    let rank = config.nuisance_rank;
    let nuisance_gain = if rank == 0 { 0.0 } else { config.image_nuisance / (rank as f64).sqrt() };
    let mixing: Vec<Vec<f64>> = (0..dims.dim_i)
        .map(|r| seeded_gaussian(derive_seed(config.seed, &format!("nuisance.{r}")), rank, 1.0))
        .collect();

    let mut subject: BTreeMap<&str, &str> = BTreeMap::new();
    for e in kb.entities() {
        for id in &e.timeline {
            subject.insert(id, &e.screen_name);
        }
    }
    for m in mentions {
        subject.insert(&m.tweet_id, &m.gold);
    }

    let mut store = FeatureStore::new(dims);
    for (id, about) in &subject {
        let tweet = kb.tweet(id).ok_or_else(|| Error::MissingKey(id.to_string()))?;
        let tokens = tokenize(&tweet.text);
        if tokens.is_empty() {
            return Err(Error::Data(format!("tweet `{id}` has no tokens")));
        }
        let u = compose_sentence(&tokens, &uni, ComposeMode::Unigram)?;
        let b = compose_sentence(&tokens, &bi, ComposeMode::UnigramBigram)?;
        store.insert_text(id, u, b)?;

        let key = tweet.image_ref.clone().unwrap_or_else(|| tweet.id.clone());
        let theta = topic_map
            .get(about)
            .ok_or_else(|| Error::MissingArtifact(format!("topic vector for `{about}`")))?;
        let theta_norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let noise = seeded_gaussian(derive_seed(config.seed, &format!("image.noise.{key}")), dims.dim_i, 1.0);
        let z_label = if config.nuisance_per_author {
            format!("image.style.{}", tweet.author)
        } else {
            format!("image.nuisance.{key}")
        };
        let z = seeded_gaussian(derive_seed(config.seed, &z_label), rank, nuisance_gain);
        let image: Vec<f64> = projection
            .iter()
            .zip(&mixing)
            .zip(noise)
            .zip(&offset)
            .map(|(((row, a), n), o)| {
                let s: f64 = row.iter().zip(theta.iter()).map(|(p, t)| p * t).sum::<f64>() / theta_norm;
                let q: f64 = a.iter().zip(&z).map(|(a, z)| a * z).sum();
                signal_gain * s + q + o + n
            })
            .collect();
        store.insert_image(&key, image)?;
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EntityKind;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn tables() -> NgramTables {
        let mut uni = BTreeMap::new();
        uni.insert("a".to_string(), vec![1.0, 0.0, 2.0]);
        uni.insert("b".to_string(), vec![0.0, 3.0, -1.0]);
        uni.insert("c".to_string(), vec![1.0, 1.0, 1.0]);
        let mut bi = BTreeMap::new();
        bi.insert(("a".to_string(), "b".to_string()), vec![3.0, 3.0, 3.0]);
        bi.insert(("b".to_string(), "a".to_string()), vec![-6.0, 0.0, 0.0]);
        NgramTables::from_vectors(3, uni, bi).unwrap()
    }

    #[test]
    fn single_token_returns_its_vector() {
        let v = compose_sentence(&toks("a"), &tables(), ComposeMode::UnigramBigram).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 2.0]);
    }

    #[test]
    fn bigram_mode_averages_three_ngrams() {
        let v = compose_sentence(&toks("a b"), &tables(), ComposeMode::UnigramBigram).unwrap();
        // (v_a + v_b + v_ab) / 3
        assert_eq!(v, vec![4.0 / 3.0, 2.0, 4.0 / 3.0]);
    }

    #[test]
    fn order_matters_only_with_bigrams() {
        let t = tables();
        let ab = toks("a b c");
        let ba = toks("b a c");
        assert_eq!(
            compose_sentence(&ab, &t, ComposeMode::Unigram).unwrap(),
            compose_sentence(&ba, &t, ComposeMode::Unigram).unwrap()
        );
        assert_ne!(
            compose_sentence(&ab, &t, ComposeMode::UnigramBigram).unwrap(),
            compose_sentence(&ba, &t, ComposeMode::UnigramBigram).unwrap()
        );
    }

    #[test]
    fn unseen_ngrams_count_in_the_denominator() {
        let v = compose_sentence(&toks("a zzz"), &tables(), ComposeMode::Unigram).unwrap();
        assert_eq!(v, vec![0.5, 0.0, 1.0]);
    }

    #[test]
    fn empty_sentence_is_an_error() {
        assert!(compose_sentence(&[], &tables(), ComposeMode::Unigram).is_err());
    }

    #[test]
    fn composition_is_homogeneous() {
        let t = tables();
        let scaled = NgramTables::from_vectors(
            3,
            t.unigrams.iter().map(|(k, v)| (k.clone(), v.iter().map(|x| x * 2.5).collect())).collect(),
            t.bigrams.iter().map(|(k, v)| (k.clone(), v.iter().map(|x| x * 2.5).collect())).collect(),
        )
        .unwrap();
        let s = toks("a b c a");
        let base = compose_sentence(&s, &t, ComposeMode::UnigramBigram).unwrap();
        let big = compose_sentence(&s, &scaled, ComposeMode::UnigramBigram).unwrap();
        for (x, y) in base.iter().zip(&big) {
            assert!((x * 2.5 - y).abs() < 1e-12);
        }
    }

    fn entity(n: usize) -> Entity {
        Entity {
            screen_name: "e".into(),
            user_name: "E".into(),
            kind: EntityKind::Person,
            followers: 0,
            friends: 0,
            tweet_count: n as u64,
            timeline: (0..n).map(|i| format!("t{i}")).collect(),
        }
    }

    fn bundle(v: f64, d: usize) -> FeatureBundle {
        FeatureBundle {
            u: vec![v; d],
            b: vec![-v; d],
            i: vec![v; d + 1],
        }
    }

    #[test]
    fn single_tweet_timeline_is_that_bundle() {
        let b = bundle(0.3, 4);
        assert_eq!(entity_features(&entity(1), &[b.clone()]).unwrap(), b);
    }

    #[test]
    fn image_average_of_zero_and_two_is_one() {
        let avg = entity_features(&entity(2), &[bundle(0.0, 3), bundle(2.0, 3)]).unwrap();
        assert_eq!(avg.i, vec![1.0; 4]);
    }

    #[test]
    fn empty_timeline_is_an_error() {
        assert!(entity_features(&entity(0), &[]).is_err());
    }

    #[test]
    fn fifty_tweet_average_matches_compensated_sum() {
        let mut rng = rng_from(3);
        let bundles: Vec<FeatureBundle> = (0..50)
            .map(|_| FeatureBundle {
                u: (0..8).map(|_| rng.random_range(-1e3..1e3)).collect(),
                b: (0..8).map(|_| rng.random_range(-1.0..1.0)).collect(),
                i: (0..8).map(|_| rng.random_range(0.0..50.0)).collect(),
            })
            .collect();
        let avg = entity_features(&entity(50), &bundles).unwrap();
        // Kahan-Neumaier summation as the higher-precision reference
        let oracle = |pick: &dyn Fn(&FeatureBundle) -> &Vec<f64>, c: usize| {
            let (mut sum, mut comp) = (0.0f64, 0.0f64);
            for b in &bundles {
                let x = pick(b)[c];
                let t = sum + x;
                if sum.abs() >= x.abs() {
                    comp += (sum - t) + x;
                } else {
                    comp += (x - t) + sum;
                }
                sum = t;
            }
            (sum + comp) / 50.0
        };
        for c in 0..8 {
            assert!((avg.u[c] - oracle(&|b| &b.u, c)).abs() <= 1e-12 * oracle(&|b| &b.u, c).abs().max(1.0));
            assert!((avg.b[c] - oracle(&|b| &b.b, c)).abs() <= 1e-12);
            assert!((avg.i[c] - oracle(&|b| &b.i, c)).abs() <= 1e-12 * 50.0);
        }
    }

    #[test]
    fn dim_mismatch_names_the_key() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = FeatureStore::new(FeatureDims { dim_u: 3, dim_b: 3, dim_i: 2 });
        store.insert_text("t1", vec![0.0; 3], vec![0.0; 3]).unwrap();
        store.write(dir.path()).unwrap();
        let path = dir.path().join(RECORDS_FILE);
        fs::write(&path, "{\"key\":\"bad\",\"u\":[0,0],\"b\":[0,0,0]}\n").unwrap();
        match FeatureStore::read(dir.path()).unwrap_err() {
            Error::DimMismatch { key, expected, got } => {
                assert_eq!(key, "bad");
                assert_eq!((expected, got), (3, 2));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn empty_store_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = FeatureStore::new(FeatureDims::REFERENCE);
        store.write(dir.path()).unwrap();
        let back = FeatureStore::read(dir.path()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dims(), FeatureDims::REFERENCE);
    }

    #[test]
    fn inline_images_are_accepted() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"dim_u":1,"dim_b":1,"dim_i":2,"count":1}"#,
        )
        .unwrap();
        fs::write(dir.path().join(RECORDS_FILE), "{\"key\":\"t\",\"u\":[1],\"b\":[2],\"i\":[3,4]}\n").unwrap();
        let store = FeatureStore::read(dir.path()).unwrap();
        let tweet = Tweet {
            id: "t".into(),
            author: "a".into(),
            text: "x".into(),
            image_ref: None,
            is_retweet: false,
        };
        assert_eq!(store.bundle_for(&tweet).unwrap().i, vec![3.0, 4.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn store_round_trip_is_lossless(seed in any::<u64>(), n in 0usize..100) {
            let dims = FeatureDims { dim_u: 4, dim_b: 3, dim_i: 5 };
            let mut rng = rng_from(seed);
            let mut store = FeatureStore::new(dims);
            for k in 0..n {
                let key = format!("k{k}");
                let mut draw = |d: usize| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * 1e3).collect::<Vec<_>>();
                let (u, b, i) = (draw(4), draw(3), draw(5));
                store.insert_text(&key, u, b).unwrap();
                store.insert_image(&format!("img-{key}"), i).unwrap();
            }
            let dir = tempfile::tempdir().unwrap();
            store.write(dir.path()).unwrap();
            prop_assert_eq!(FeatureStore::read(dir.path()).unwrap(), store);
        }

        #[test]
        fn entity_average_ignores_timeline_order(seed in any::<u64>()) {
            let mut rng = rng_from(seed);
            let mut bundles: Vec<FeatureBundle> = (0..7).map(|_| bundle(rng.random_range(-5.0..5.0), 3)).collect();
            let a = entity_features(&entity(7), &bundles).unwrap();
            bundles.reverse();
            bundles.swap(0, 3);
            let b = entity_features(&entity(7), &bundles).unwrap();
            for (x, y) in a.i.iter().zip(&b.i) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
