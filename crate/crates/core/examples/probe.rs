//! Per-epoch test accuracy of the joint model, split into mentions of
//! entities seen in training and unseen ones.
//!
//! `cargo run --release --example probe -- [--config file.json] [--mask s2v+img] [seed]`

use std::collections::BTreeSet;

use mel_core::corpus::MentionRecord;
use mel_core::eval::{evaluate, JmelScorer};
use mel_core::experiment::{dataset_features, forge_dataset, ExperimentConfig};
use mel_core::jmel::{JmelConfig, JmelParams, ModalityMask};
use mel_core::pipeline::LinkingContext;
use mel_core::rng::derive_seed_indexed;
use mel_core::trainer::{train_jmel_from, TrainConfig};

fn main() {
    let mut config = ExperimentConfig::default();
    let mut mask = ModalityMask::ALL;
    let mut seed = 0;
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--config" => {
                let path = args.next().expect("config path");
                config = serde_json::from_str(&std::fs::read_to_string(path).expect("read")).expect("parse");
            }
            "--mask" => mask = args.next().expect("mask").parse().expect("mask"),
            s => seed = s.parse().expect("seed"),
        }
    }
    let cfg = config.seeded(seed);
    let data = forge_dataset(&cfg).expect("forge");
    let store = dataset_features(&data, &cfg).expect("features");
    let ctx = LinkingContext::new(data.kb.clone(), store).expect("context");
    let seen: BTreeSet<&str> = data.split.train.iter().map(|m| m.gold.as_str()).collect();
    let (test_seen, test_unseen): (Vec<MentionRecord>, Vec<MentionRecord>) =
        data.split.test.iter().cloned().partition(|m| seen.contains(m.gold.as_str()));
    println!(
        "entities {} seen {} test seen/unseen {}/{}",
        data.kb.num_entities(),
        seen.len(),
        test_seen.len(),
        test_unseen.len()
    );

    let mut model = JmelParams::new(JmelConfig { mask, ..cfg.jmel }, 7).expect("model");
    let mut lr = cfg.train.lr0;
    for epoch in 1..=cfg.train.max_epochs {
        let one = TrainConfig {
            max_epochs: 1,
            lr0: lr,
            seed: derive_seed_indexed(cfg.train.seed, "probe", epoch as u64),
            ..cfg.train
        };
        let out = train_jmel_from(&ctx, &data.split, model, &one).expect("train");
        model = out.model;
        lr = out.report.epochs[0].lr;
        let scorer = JmelScorer::new(model.clone(), &ctx).expect("scorer");
        let acc = |s: &[MentionRecord]| evaluate(s, &ctx, &scorer).expect("eval").value();
        println!(
            "epoch {epoch:>2} loss {:.4} valid {:.3} test {:.3} seen {:.3} unseen {:.3}",
            out.report.epochs[0].mean_loss,
            acc(&data.split.valid),
            acc(&data.split.test),
            acc(&test_seen),
            acc(&test_unseen)
        );
    }
}
