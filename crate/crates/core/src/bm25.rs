//! BM25 over entity timelines: each entity's timeline is one document.
//!
//! score(q, d) = Σ_{t ∈ set(q)} idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·dl/avgdl))
//! idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candgen::normalize_name;
use crate::corpus::KnowledgeBase;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

fn is_url(tok: &str) -> bool {
    let t = tok.to_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}

/// Casefolds, drops URLs, splits on non-alphanumeric runs. `@`/`#` sigils
/// disappear with the split and the word after them is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace().filter(|t| !is_url(t)) {
        let lowered: String = raw.chars().flat_map(char::to_lowercase).collect();
        out.extend(
            lowered
                .split(|c: char| !c.is_alphanumeric())
                .filter(|s| !s.is_empty())
                .map(str::to_string),
        );
    }
    out
}

/// Tokens of a mention tweet with the mention words removed.
pub fn mention_query(tweet_text: &str, mention_words: &[String]) -> Vec<String> {
    let drop: BTreeSet<String> = mention_words.iter().flat_map(|w| normalize_name(w)).collect();
    tokenize(tweet_text)
        .into_iter()
        .filter(|t| !drop.contains(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub length: u64,
    pub tf: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineIndex {
    pub params: Bm25Params,
    pub docs: BTreeMap<String, DocStats>,
    pub df: BTreeMap<String, u64>,
    pub n_docs: u64,
    pub avgdl: f64,
}

impl TimelineIndex {
    pub fn build(kb: &KnowledgeBase, params: Bm25Params) -> Result<Self> {
        if kb.is_empty() {
            return Err(Error::Data("cannot index an empty knowledge base".into()));
        }
        let mut docs = BTreeMap::new();
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        for e in kb.entities() {
            let mut tf: BTreeMap<String, u64> = BTreeMap::new();
            let mut length = 0;
            for t in kb.timeline(e) {
                for tok in tokenize(&t.text) {
                    *tf.entry(tok).or_default() += 1;
                    length += 1;
                }
            }
            for term in tf.keys() {
                *df.entry(term.clone()).or_default() += 1;
            }
            docs.insert(e.screen_name.clone(), DocStats { length, tf });
        }
        let n_docs = docs.len() as u64;
        let avgdl = docs.values().map(|d| d.length as f64).sum::<f64>() / n_docs as f64;
        Ok(Self {
            params,
            docs,
            df,
            n_docs,
            avgdl,
        })
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        let n = self.n_docs as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn score(&self, query: &[String], entity: &str) -> Result<f64> {
        let doc = self
            .docs
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        let Bm25Params { k1, b } = self.params;
        // an all-empty corpus has avgdl 0; every tf is 0 then and the sum is empty
        let norm = if self.avgdl > 0.0 {
            1.0 - b + b * doc.length as f64 / self.avgdl
        } else {
            1.0
        };
        let unique: BTreeSet<&String> = query.iter().collect();
        Ok(unique
            .into_iter()
            .filter_map(|t| doc.tf.get(t).map(|&tf| (t, tf as f64)))
            .map(|(t, tf)| self.idf(t) * tf * (k1 + 1.0) / (tf + k1 * norm))
            .sum())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

pub fn build_index(kb: &KnowledgeBase) -> Result<TimelineIndex> {
    TimelineIndex::build(kb, Bm25Params::default())
}

pub fn bm25_score(query: &[String], entity: &str, index: &TimelineIndex) -> Result<f64> {
    index.score(query, entity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Entity, EntityKind, Tweet};
    use proptest::prelude::*;

    pub(crate) fn kb_from_docs(docs: &[(&str, &[&str])]) -> KnowledgeBase {
        let mut entities = Vec::new();
        let mut tweets = Vec::new();
        for (name, texts) in docs {
            let mut timeline = Vec::new();
            for (i, text) in texts.iter().enumerate() {
                let id = format!("{name}-{i}");
                tweets.push(Tweet {
                    id: id.clone(),
                    author: name.to_string(),
                    text: text.to_string(),
                    image_ref: Some(format!("img-{id}")),
                    is_retweet: false,
                });
                timeline.push(id);
            }
            entities.push(Entity {
                screen_name: name.to_string(),
                user_name: name.to_string(),
                kind: EntityKind::Person,
                followers: 0,
                friends: 0,
                tweet_count: texts.len() as u64,
                timeline,
            });
        }
        KnowledgeBase::new(entities, tweets).unwrap()
    }

    fn q(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Great talk by @AndrewYNg!"), q(&["great", "talk", "by", "andrewyng"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("see https://t.co/xyz #AI now"), q(&["see", "ai", "now"]));
    }

    #[test]
    fn single_doc_statistics() {
        let idx = build_index(&kb_from_docs(&[("e", &["a a b"])])).unwrap();
        let d = &idx.docs["e"];
        assert_eq!(d.length, 3);
        assert_eq!(d.tf["a"], 2);
        assert_eq!(idx.avgdl, 3.0);
    }

    #[test]
    fn equal_length_docs_have_that_average() {
        let idx = build_index(&kb_from_docs(&[("x", &["a b c"]), ("y", &["d e f"])])).unwrap();
        assert_eq!(idx.avgdl, 3.0);
    }

    #[test]
    fn two_doc_hand_evaluation() {
        let idx = build_index(&kb_from_docs(&[("d1", &["cat cat dog"]), ("d2", &["bird"])])).unwrap();
        // idf = ln(1 + 1.5/1.5) = ln 2; dl/avgdl = 3/2
        let expected = 2f64.ln() * (2.0 * 2.2) / (2.0 + 1.2 * (0.25 + 0.75 * 1.5));
        let got = idx.score(&q(&["cat"]), "d1").unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.835_6).abs() < 1e-4);
    }

    #[test]
    fn no_overlap_scores_zero() {
        let idx = build_index(&kb_from_docs(&[("d1", &["cat"]), ("d2", &["bird"])])).unwrap();
        assert_eq!(idx.score(&q(&["fish"]), "d1").unwrap(), 0.0);
    }

    #[test]
    fn duplicate_query_terms_count_once() {
        let idx = build_index(&kb_from_docs(&[("d1", &["cat dog"]), ("d2", &["bird"])])).unwrap();
        assert_eq!(
            idx.score(&q(&["cat", "cat"]), "d1").unwrap(),
            idx.score(&q(&["cat"]), "d1").unwrap()
        );
    }

    #[test]
    fn score_increases_with_tf() {
        // same length documents, different tf of "cat"
        let idx = build_index(&kb_from_docs(&[
            ("a", &["cat x y z"]),
            ("b", &["cat cat y z"]),
            ("c", &["cat cat cat z"]),
            ("d", &["w w w w"]),
        ]))
        .unwrap();
        let s: Vec<f64> = ["a", "b", "c"].iter().map(|e| idx.score(&q(&["cat"]), e).unwrap()).collect();
        assert!(s[0] < s[1] && s[1] < s[2]);
    }

    #[test]
    fn unknown_entity_is_an_error() {
        let idx = build_index(&kb_from_docs(&[("d1", &["cat"])])).unwrap();
        assert!(matches!(idx.score(&q(&["cat"]), "zz"), Err(Error::UnknownEntity(_))));
    }

    #[test]
    fn empty_kb_is_rejected() {
        assert!(build_index(&KnowledgeBase::default()).is_err());
    }

    #[test]
    fn mention_words_are_removed_from_query() {
        assert_eq!(mention_query("Great talk by Ng today", &q(&["Ng"])), q(&["great", "talk", "by", "today"]));
    }

    #[test]
    fn index_round_trips_through_json() {
        let idx = build_index(&kb_from_docs(&[("d1", &["cat dog"]), ("d2", &["bird"])])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bm25.json");
        idx.save(&path).unwrap();
        assert_eq!(TimelineIndex::load(&path).unwrap(), idx);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,60}") {
            let once = tokenize(&s);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }

        #[test]
        fn scores_are_nonnegative(words in proptest::collection::vec("[a-d]{1,2}", 0..6)) {
            let idx = build_index(&kb_from_docs(&[("x", &["a b c d"]), ("y", &["a a"]), ("z", &["cc dd b"])])).unwrap();
            for e in ["x", "y", "z"] {
                prop_assert!(idx.score(&words, e).unwrap() >= 0.0);
            }
        }
    }
}
