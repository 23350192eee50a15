mod common;

use mel_core::experiment::{forge_dataset, run_experiment};
use mel_core::Error;

use common::small_config;

const ROWS: [&str; 13] = [
    "Popularity",
    "BM25",
    "S2V-uni",
    "S2V-bi",
    "Img",
    "ET(S2V)",
    "ET(S2V + Img)",
    "ET(S2V + Img + Pop)",
    "ET(S2V + Img + Pop + BM25)",
    "JMEL(S2V)",
    "JMEL(S2V + Img)",
    "JMEL(S2V + Img + Pop)",
    "JMEL(S2V + Img + Pop + BM25)",
];

#[test]
fn experiment_reports_every_row_over_the_full_sections() {
    let cfg = small_config().seeded(9);
    let data = forge_dataset(&cfg).unwrap();
    let out = run_experiment(&cfg, 9).unwrap();
    let names: Vec<&str> = out.rows.iter().map(|r| r.config.as_str()).collect();
    assert_eq!(names, ROWS);
    for row in &out.rows {
        assert_eq!(row.valid.n, data.split.valid.len(), "{}", row.config);
        assert_eq!(row.test.n, data.split.test.len(), "{}", row.config);
        assert_eq!(row.test.empty, 0, "{}: forged mentions always have candidates", row.config);
        assert!(row.test.correct <= row.test.n);
        assert_eq!(row.seed, 9);
    }
    assert_eq!(out.jmel_reports.len(), 2);
    for (_, report) in &out.jmel_reports {
        assert!(!report.epochs.is_empty() && report.epochs.len() <= cfg.train.max_epochs);
        assert!(report.epochs.iter().any(|e| e.epoch == report.best_epoch));
    }
}

#[test]
fn invalid_training_config_is_a_config_error() {
    let mut cfg = small_config().seeded(9);
    cfg.train.batch_size = 0;
    assert!(matches!(run_experiment(&cfg, 9), Err(Error::Config(_))));
}

#[test]
fn infeasible_split_is_reported() {
    let mut cfg = small_config().seeded(9);
    cfg.forge.n_person_entities = 2;
    cfg.forge.person_group_size = 2;
    cfg.forge.n_org_entities = 0;
    assert!(matches!(forge_dataset(&cfg), Err(Error::Infeasible(_))));
}
