//! Candidate generation: an entity is a candidate for a mention when every
//! mention token appears among the tokens of its user name.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{KnowledgeBase, MentionRecord};

/// Casefolds, strips punctuation inside tokens, splits on whitespace.
pub fn normalize_name(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|tok| {
            tok.chars()
                .flat_map(char::to_lowercase)
                .filter(|c| c.is_alphanumeric())
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub screen_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    pub tweet_id: String,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn names(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.screen_name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, screen_name: &str) -> bool {
        self.candidates.iter().any(|c| c.screen_name == screen_name)
    }

    pub fn top(&self) -> Option<&Candidate> {
        self.candidates.first()
    }

    /// Score descending, then screen name ascending. Unscored entries sort last.
    pub fn sort_by_score(&mut self) {
        self.candidates.sort_by(|a, b| {
            let sa = a.score.unwrap_or(f64::NEG_INFINITY);
            let sb = b.score.unwrap_or(f64::NEG_INFINITY);
            sb.total_cmp(&sa).then_with(|| a.screen_name.cmp(&b.screen_name))
        });
    }
}

/// Inverted index from normalized user-name tokens to screen names.
#[derive(Debug, Clone, Default)]
pub struct CandidateIndex {
    postings: BTreeMap<String, BTreeSet<String>>,
    all: BTreeSet<String>,
}

impl CandidateIndex {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut postings: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut all = BTreeSet::new();
        for e in kb.entities() {
            all.insert(e.screen_name.clone());
            for tok in normalize_name(&e.user_name) {
                postings.entry(tok).or_default().insert(e.screen_name.clone());
            }
        }
        Self { postings, all }
    }

    /// Screen names matching every token, ascending. An empty token list
    /// matches every entity.
    pub fn lookup(&self, words: &[String]) -> Vec<String> {
        let tokens: BTreeSet<String> = words.iter().flat_map(|w| normalize_name(w)).collect();
        let mut lists: Vec<&BTreeSet<String>> = Vec::with_capacity(tokens.len());
        for t in &tokens {
            match self.postings.get(t) {
                Some(p) => lists.push(p),
                None => return Vec::new(),
            }
        }
        lists.sort_by_key(|p| p.len());
        let Some((first, rest)) = lists.split_first() else {
            return self.all.iter().cloned().collect();
        };
        first
            .iter()
            .filter(|name| rest.iter().all(|p| p.contains(*name)))
            .cloned()
            .collect()
    }

    pub fn candidates(&self, mention: &MentionRecord) -> CandidateSet {
        CandidateSet {
            tweet_id: mention.tweet_id.clone(),
            candidates: self
                .lookup(&mention.words)
                .into_iter()
                .map(|screen_name| Candidate {
                    screen_name,
                    score: None,
                })
                .collect(),
        }
    }
}

/// One-off convenience; build a [`CandidateIndex`] when linking many mentions.
pub fn candidates(mention: &MentionRecord, kb: &KnowledgeBase) -> CandidateSet {
    CandidateIndex::new(kb).candidates(mention)
}

/// Row of the optional candidates cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCacheRow {
    pub tweet_id: String,
    pub candidates: Vec<String>,
}
