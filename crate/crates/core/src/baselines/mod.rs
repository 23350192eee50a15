//! Non-neural rankers: popularity, single-feature cosine or BM25, and an
//! Extra-Trees classifier over pair features.

pub mod extratrees;

use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use extratrees::{extratrees_train, ExtraTreesConfig, ExtraTreesModel, ExtraTreesScorer, Forest};

use crate::candgen::CandidateSet;
use crate::corpus::{Entity, KnowledgeBase, MentionRecord};
use crate::error::{Error, Result};
use crate::eval::Scorer;
use crate::features::FeatureBundle;
use crate::jmel::cosine_or_zero;
use crate::pipeline::LinkingContext;

/// Followers desc, friends desc, tweet count desc, screen name asc.
pub fn popularity_order(a: &Entity, b: &Entity) -> Ordering {
    b.followers
        .cmp(&a.followers)
        .then(b.friends.cmp(&a.friends))
        .then(b.tweet_count.cmp(&a.tweet_count))
        .then_with(|| a.screen_name.cmp(&b.screen_name))
}

pub fn popularity_rank(candidates: &CandidateSet, kb: &KnowledgeBase) -> Result<CandidateSet> {
    if candidates.is_empty() {
        return Err(Error::Data(format!("no candidates for `{}`", candidates.tweet_id)));
    }
    let mut entities = candidates
        .candidates
        .iter()
        .map(|c| kb.entity(&c.screen_name).ok_or_else(|| Error::UnknownEntity(c.screen_name.clone())))
        .collect::<Result<Vec<_>>>()?;
    entities.sort_by(|a, b| popularity_order(a, b));
    let mut out = candidates.clone();
    out.candidates = entities
        .into_iter()
        .map(|e| crate::candgen::Candidate {
            screen_name: e.screen_name.clone(),
            score: Some(e.followers as f64),
        })
        .collect();
    Ok(out)
}

pub struct PopularityScorer;

impl Scorer for PopularityScorer {
    fn name(&self) -> String {
        "Popularity".into()
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        let set = ctx.candidates(mention);
        if set.is_empty() {
            return Ok(set);
        }
        popularity_rank(&set, &ctx.kb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawModality {
    Uni,
    Bi,
    Img,
    /// Mean of the unigram and bigram cosines.
    S2v,
}

impl RawModality {
    pub fn label(self) -> &'static str {
        match self {
            RawModality::Uni => "S2V-uni",
            RawModality::Bi => "S2V-bi",
            RawModality::Img => "Img",
            RawModality::S2v => "S2V",
        }
    }
}

impl FromStr for RawModality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "uni" => Ok(RawModality::Uni),
            "bi" => Ok(RawModality::Bi),
            "img" => Ok(RawModality::Img),
            "s2v" => Ok(RawModality::S2v),
            other => Err(Error::Config(format!("unknown raw modality `{other}`"))),
        }
    }
}

pub fn raw_similarity(mention: &FeatureBundle, entity: &FeatureBundle, modality: RawModality) -> f64 {
    match modality {
        RawModality::Uni => cosine_or_zero(&mention.u, &entity.u),
        RawModality::Bi => cosine_or_zero(&mention.b, &entity.b),
        RawModality::Img => cosine_or_zero(&mention.i, &entity.i),
        RawModality::S2v => {
            0.5 * (cosine_or_zero(&mention.u, &entity.u) + cosine_or_zero(&mention.b, &entity.b))
        }
    }
}

pub struct RawScorer(pub RawModality);

impl Scorer for RawScorer {
    fn name(&self) -> String {
        self.0.label().into()
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        let mut set = ctx.candidates(mention);
        if set.is_empty() {
            return Ok(set);
        }
        let mb = ctx.mention_bundle(mention)?;
        for c in &mut set.candidates {
            c.score = Some(raw_similarity(&mb, ctx.entity_bundle(&c.screen_name)?, self.0));
        }
        set.sort_by_score();
        Ok(set)
    }
}

pub struct Bm25Scorer;

impl Scorer for Bm25Scorer {
    fn name(&self) -> String {
        "BM25".into()
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        let mut set = ctx.candidates(mention);
        if set.is_empty() {
            return Ok(set);
        }
        let query = ctx.bm25_query(mention)?;
        for c in &mut set.candidates {
            c.score = Some(ctx.bm25.score(&query, &c.screen_name)?);
        }
        set.sort_by_score();
        Ok(set)
    }
}
