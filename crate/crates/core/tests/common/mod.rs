#![allow(dead_code)]

use mel_core::corpus::{Entity, EntityKind, KnowledgeBase, Tweet};
use mel_core::experiment::ExperimentConfig;
use mel_core::rng::Rng;
use rand::Rng as _;

/// A few seconds end to end: 28 entities, short training.
pub fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.forge.n_person_entities = 24;
    c.forge.person_group_size = 8;
    c.forge.n_org_entities = 4;
    c.forge.org_group_size = 2;
    c.forge.mentions_min = 8;
    c.forge.mentions_max = 12;
    c.train.max_epochs = 3;
    c.train.early_stop_start = 2;
    c.fusion.lbfgs.max_iters = 40;
    c.extratrees.n_trees = 8;
    c
}

/// One entity per `(screen name, timeline texts)`, every tweet with an image.
pub fn kb_from_docs(docs: &[(&str, &[&str])]) -> KnowledgeBase {
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
            followers: 10,
            friends: 10,
            tweet_count: texts.len() as u64,
            timeline,
        });
    }
    KnowledgeBase::new(entities, tweets).unwrap()
}

pub fn uniform(rng: &mut Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Every file under `dir`, keyed by relative path.
pub fn read_tree(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
