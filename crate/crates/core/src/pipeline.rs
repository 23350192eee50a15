//! Everything a scorer needs at link time, built once per run.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bm25::{mention_query, Bm25Params, TimelineIndex};
use crate::candgen::{CandidateIndex, CandidateSet};
use crate::corpus::{KnowledgeBase, MentionRecord};
use crate::error::{Error, Result};
use crate::features::{FeatureBundle, FeatureStore};
use crate::jmel::{cosine_or_zero, JmelParams};

pub struct LinkingContext {
    pub kb: KnowledgeBase,
    pub index: CandidateIndex,
    pub store: FeatureStore,
    /// Timeline-averaged bundle per entity; all zeros for an empty timeline.
    pub entity_bundles: BTreeMap<String, FeatureBundle>,
    pub bm25: TimelineIndex,
}

impl LinkingContext {
    pub fn new(kb: KnowledgeBase, store: FeatureStore) -> Result<Self> {
        let bm25 = TimelineIndex::build(&kb, Bm25Params::default())?;
        Self::with_bm25(kb, store, bm25)
    }

    pub fn with_bm25(kb: KnowledgeBase, store: FeatureStore, bm25: TimelineIndex) -> Result<Self> {
        let dims = store.dims();
        let entities: Vec<_> = kb.entities().collect();
        let bundles = entities
            .par_iter()
            .map(|e| {
                if e.timeline.is_empty() {
                    Ok(FeatureBundle {
                        u: vec![0.0; dims.dim_u],
                        b: vec![0.0; dims.dim_b],
                        i: vec![0.0; dims.dim_i],
                    })
                } else {
                    store.entity_bundle(&kb, e)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let entity_bundles = entities
            .iter()
            .map(|e| e.screen_name.clone())
            .zip(bundles)
            .collect();
        Ok(Self {
            index: CandidateIndex::new(&kb),
            kb,
            store,
            entity_bundles,
            bm25,
        })
    }

    pub fn candidates(&self, mention: &MentionRecord) -> CandidateSet {
        self.index.candidates(mention)
    }

    pub fn mention_bundle(&self, mention: &MentionRecord) -> Result<FeatureBundle> {
        let tweet = self
            .kb
            .tweet(&mention.tweet_id)
            .ok_or_else(|| Error::MissingKey(mention.tweet_id.clone()))?;
        self.store.bundle_for(tweet)
    }

    pub fn entity_bundle(&self, screen_name: &str) -> Result<&FeatureBundle> {
        self.entity_bundles
            .get(screen_name)
            .ok_or_else(|| Error::UnknownEntity(screen_name.to_string()))
    }

    pub fn bm25_query(&self, mention: &MentionRecord) -> Result<Vec<String>> {
        let tweet = self
            .kb
            .tweet(&mention.tweet_id)
            .ok_or_else(|| Error::MissingKey(mention.tweet_id.clone()))?;
        Ok(mention_query(&tweet.text, &mention.words))
    }
}

/// A trained joint model with every entity representation precomputed.
#[derive(Debug, Clone)]
pub struct JmelEncoder {
    pub model: JmelParams,
    pub entity_reps: BTreeMap<String, Vec<f64>>,
}

impl JmelEncoder {
    pub fn new(model: JmelParams, ctx: &LinkingContext) -> Result<Self> {
        let items: Vec<(&String, &FeatureBundle)> = ctx.entity_bundles.iter().collect();
        let reps = items
            .par_iter()
            .map(|(name, b)| Ok(((*name).clone(), model.forward(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            entity_reps: reps.into_iter().collect(),
        })
    }

    pub fn mention_rep(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<Vec<f64>> {
        self.model.forward(&ctx.mention_bundle(mention)?)
    }

    pub fn similarity(&self, mention_rep: &[f64], entity: &str) -> Result<f64> {
        let e = self
            .entity_reps
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        Ok(cosine_or_zero(mention_rep, e))
    }
}
