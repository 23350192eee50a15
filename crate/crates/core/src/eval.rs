//! Linking by argmax over candidates, accuracy, and the result tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candgen::CandidateSet;
use crate::corpus::{DatasetSplit, MentionRecord, SplitName};
use crate::error::{Error, Result};
use crate::features::FeatureStore;
use crate::jmel::{JmelConfig, JmelParams, ModalityMask};
use crate::pipeline::{JmelEncoder, LinkingContext};
use crate::trainer::{train_jmel, TrainConfig};

/// Ranks the candidates of a mention; the first one is the link.
pub trait Scorer: Sync {
    fn name(&self) -> String;

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet>;
}

/// The top-ranked candidate, or `None` for an empty candidate set.
pub fn link(ctx: &LinkingContext, mention: &MentionRecord, scorer: &dyn Scorer) -> Result<Option<String>> {
    Ok(scorer.rank(ctx, mention)?.top().map(|c| c.screen_name.clone()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub n: usize,
    /// Mentions with no candidate at all; always counted as misses.
    pub empty: usize,
}

impl Accuracy {
    pub fn value(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.correct as f64 / self.n as f64
        }
    }
}

pub fn evaluate(section: &[MentionRecord], ctx: &LinkingContext, scorer: &dyn Scorer) -> Result<Accuracy> {
    let outcomes = section
        .par_iter()
        .map(|m| {
            let ranked = scorer.rank(ctx, m)?;
            Ok((ranked.is_empty(), ranked.top().is_some_and(|c| c.screen_name == m.gold)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Accuracy {
        correct: outcomes.iter().filter(|o| o.1).count(),
        n: section.len(),
        empty: outcomes.iter().filter(|o| o.0).count(),
    })
}

pub fn accuracy(section: &[MentionRecord], ctx: &LinkingContext, scorer: &dyn Scorer) -> Result<f64> {
    if section.is_empty() {
        return Err(Error::Data("accuracy over an empty section".into()));
    }
    Ok(evaluate(section, ctx, scorer)?.value())
}

/// Cosine between joint representations.
pub struct JmelScorer {
    pub encoder: JmelEncoder,
}

impl JmelScorer {
    pub fn new(model: JmelParams, ctx: &LinkingContext) -> Result<Self> {
        Ok(Self {
            encoder: JmelEncoder::new(model, ctx)?,
        })
    }
}

impl Scorer for JmelScorer {
    fn name(&self) -> String {
        format!("JMEL({})", self.encoder.model.config.mask.label())
    }

    fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
        let mut set = ctx.candidates(mention);
        if set.is_empty() {
            return Ok(set);
        }
        let rep = self.encoder.mention_rep(ctx, mention)?;
        for c in &mut set.candidates {
            c.score = Some(self.encoder.similarity(&rep, &c.screen_name)?);
        }
        set.sort_by_score();
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: String,
    pub valid: Accuracy,
    pub test: Accuracy,
    pub seed: u64,
}

/// Reference accuracies (valid, test) of the collected corpus, keyed by row name.
pub const REFERENCE_TABLE: &[(&str, f64, f64)] = &[
    ("Popularity", 0.369, 0.590),
    ("BM25", 0.415, 0.433),
    ("S2V-uni", 0.482, 0.513),
    ("S2V-bi", 0.487, 0.523),
    ("Img", 0.290, 0.299),
    ("ET(S2V)", 0.495, 0.529),
    ("ET(S2V + Img)", 0.507, 0.542),
    ("ET(S2V + Img + Pop)", 0.585, 0.627),
    ("ET(S2V + Img + Pop + BM25)", 0.654, 0.671),
    ("JMEL(S2V)", 0.628, 0.724),
    ("JMEL(S2V + Img)", 0.639, 0.731),
    ("JMEL(S2V + Img + Pop)", 0.767, 0.776),
    ("JMEL(S2V + Img + Pop + BM25)", 0.795, 0.803),
];

pub fn reference_result(config: &str) -> Option<(f64, f64)> {
    REFERENCE_TABLE.iter().find(|r| r.0 == config).map(|r| (r.1, r.2))
}

/// Evaluates every scorer on valid and test, preserving the requested order.
pub fn run_matrix(
    ctx: &LinkingContext,
    split: &DatasetSplit,
    scorers: &[&dyn Scorer],
    seed: u64,
) -> Result<Vec<ResultRow>> {
    scorers
        .iter()
        .map(|s| {
            Ok(ResultRow {
                config: s.name(),
                valid: evaluate(&split.valid, ctx, *s)?,
                test: evaluate(&split.test, ctx, *s)?,
                seed,
            })
        })
        .collect()
}

pub const RESULTS_CSV_HEADER: &str = "config,split,accuracy,n,empty_candidates,seed";

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = format!("{RESULTS_CSV_HEADER}\n");
    for r in rows {
        for (split, acc) in [(SplitName::Valid, &r.valid), (SplitName::Test, &r.test)] {
            let _ = writeln!(s, "{},{split},{},{},{},{}", r.config, acc.value(), acc.n, acc.empty, r.seed);
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub config: String,
    pub split: String,
    pub accuracy: f64,
    pub n: usize,
    pub empty_candidates: usize,
    pub seed: u64,
}

pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_CSV_HEADER) {
        return Err(Error::Data("results csv: unexpected header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || Error::Data(format!("results csv: bad line `{l}`"));
            if f.len() != 6 {
                return Err(bad());
            }
            Ok(CsvRecord {
                config: f[0].to_string(),
                split: f[1].to_string(),
                accuracy: f[2].parse().map_err(|_| bad())?,
                n: f[3].parse().map_err(|_| bad())?,
                empty_candidates: f[4].parse().map_err(|_| bad())?,
                seed: f[5].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Aligned table with the reference accuracies in the last two columns.
pub fn results_text(rows: &[ResultRow]) -> String {
    let width = rows.iter().map(|r| r.config.len()).max().unwrap_or(0).max(30);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>7}  {:>7}  {:>5}  {:>13}  {:>12}",
        "config", "valid", "test", "empty", "ref valid", "ref test"
    );
    for r in rows {
        let (pv, pt) = match reference_result(&r.config) {
            Some((v, t)) => (format!("{v:.3}"), format!("{t:.3}")),
            None => ("-".into(), "-".into()),
        };
        let _ = writeln!(
            s,
            "{:<width$}  {:>7.3}  {:>7.3}  {:>5}  {:>13}  {:>12}",
            r.config,
            r.valid.value(),
            r.test.value(),
            r.valid.empty + r.test.empty,
            pv,
            pt
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub store: String,
    pub valid_txt: f64,
    pub valid_txt_img: f64,
    pub test_txt: f64,
    pub test_txt_img: f64,
}

/// Trains a text-only and a text+image joint model per feature store.
pub fn ablation_matrix(
    stores: Vec<(String, FeatureStore)>,
    kb: &crate::corpus::KnowledgeBase,
    split: &DatasetSplit,
    model: &JmelConfig,
    train: &TrainConfig,
) -> Result<Vec<AblationCell>> {
    let mut out = Vec::new();
    for (name, store) in stores {
        if store.dims() != model.dims {
            return Err(Error::DimMismatch {
                key: format!("store `{name}`"),
                expected: model.dims.dim_u,
                got: store.dims().dim_u,
            });
        }
        let ctx = LinkingContext::new(kb.clone(), store)?;
        let mut acc = BTreeMap::new();
        for (key, mask) in [("txt", model.mask.without_img()), ("txt_img", ModalityMask { img: true, ..model.mask })] {
            let cfg = JmelConfig { mask, ..*model };
            let outcome = train_jmel(&ctx, split, cfg, train)?;
            let scorer = JmelScorer::new(outcome.model, &ctx)?;
            acc.insert(key, (accuracy(&split.valid, &ctx, &scorer)?, accuracy(&split.test, &ctx, &scorer)?));
        }
        out.push(AblationCell {
            store: name,
            valid_txt: acc["txt"].0,
            valid_txt_img: acc["txt_img"].0,
            test_txt: acc["txt"].1,
            test_txt_img: acc["txt_img"].1,
        });
    }
    Ok(out)
}

pub fn ablation_text(cells: &[AblationCell]) -> String {
    let width = cells.iter().map(|c| c.store.len()).max().unwrap_or(0).max(10);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>9}  {:>13}  {:>9}  {:>13}",
        "", "Valid Txt", "Valid Txt+Img", "Test Txt", "Test Txt+Img"
    );
    for c in cells {
        let _ = writeln!(
            s,
            "{:<width$}  {:>9.3}  {:>13.3}  {:>9.3}  {:>13.3}",
            c.store, c.valid_txt, c.valid_txt_img, c.test_txt, c.test_txt_img
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scores candidates from a fixed table.
    struct TableScorer(BTreeMap<String, f64>);

    impl Scorer for TableScorer {
        fn name(&self) -> String {
            "table".into()
        }

        fn rank(&self, ctx: &LinkingContext, mention: &MentionRecord) -> Result<CandidateSet> {
            let mut set = ctx.candidates(mention);
            for c in &mut set.candidates {
                c.score = self.0.get(&c.screen_name).copied();
            }
            set.sort_by_score();
            Ok(set)
        }
    }

    pub(crate) fn fixture_ctx() -> LinkingContext {
        use crate::corpus::{Entity, EntityKind, KnowledgeBase, Tweet};
        use crate::features::FeatureDims;
        let mut entities = Vec::new();
        let mut tweets = Vec::new();
        for (k, (sn, un)) in [("a", "Ann Lee"), ("b", "Bob Lee"), ("c", "Cal Lee"), ("d", "Dan Park")]
            .into_iter()
            .enumerate()
        {
            let id = format!("t{k}");
            tweets.push(Tweet {
                id: id.clone(),
                author: sn.into(),
                text: format!("post number {k}"),
                image_ref: None,
                is_retweet: false,
            });
            entities.push(Entity {
                screen_name: sn.into(),
                user_name: un.into(),
                kind: EntityKind::Person,
                followers: 10 * k as u64,
                friends: 1,
                tweet_count: 1,
                timeline: vec![id],
            });
        }
        for k in 0..20 {
            tweets.push(Tweet {
                id: format!("m{k}"),
                author: "fan".into(),
                text: "hello there lee".into(),
                image_ref: None,
                is_retweet: false,
            });
        }
        let kb = KnowledgeBase::new(entities, tweets).unwrap();
        let mut store = FeatureStore::new(FeatureDims { dim_u: 2, dim_b: 2, dim_i: 2 });
        for t in kb.tweets() {
            store.insert_text(&t.id, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
            store.insert_image(&t.id, vec![1.0, 1.0]).unwrap();
        }
        LinkingContext::new(kb, store).unwrap()
    }

    fn mention(k: usize, words: &str, gold: &str) -> MentionRecord {
        MentionRecord {
            words: vec![words.into()],
            tweet_id: format!("m{k}"),
            gold: gold.into(),
        }
    }

    fn table(entries: &[(&str, f64)]) -> TableScorer {
        TableScorer(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn single_candidate_is_linked() {
        let ctx = fixture_ctx();
        let got = link(&ctx, &mention(0, "park", "d"), &table(&[])).unwrap();
        assert_eq!(got.as_deref(), Some("d"));
    }

    #[test]
    fn empty_candidate_set_is_a_counted_miss() {
        let ctx = fixture_ctx();
        let m = mention(0, "smith", "a");
        assert_eq!(link(&ctx, &m, &table(&[])).unwrap(), None);
        let acc = evaluate(&[m], &ctx, &table(&[])).unwrap();
        assert_eq!((acc.correct, acc.n, acc.empty), (0, 1, 1));
    }

    #[test]
    fn link_equals_brute_force_argmax() {
        let ctx = fixture_ctx();
        let scores: [(&str, f64); 3] = [("a", 0.3), ("b", 0.9), ("c", 0.5)];
        let m = mention(0, "lee", "a");
        let best = scores.iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap().0;
        assert_eq!(link(&ctx, &m, &table(&scores)).unwrap().as_deref(), Some(best));
    }

    #[test]
    fn three_of_four_is_point_seven_five() {
        let ctx = fixture_ctx();
        let s = table(&[("a", 1.0), ("b", 0.5), ("c", 0.0)]);
        let ms = vec![mention(0, "lee", "a"), mention(1, "lee", "a"), mention(2, "park", "d"), mention(3, "lee", "b")];
        assert_eq!(accuracy(&ms, &ctx, &s).unwrap(), 0.75);
        assert!(accuracy(&[], &ctx, &s).is_err());
    }

    #[test]
    fn hand_recount_on_twenty_mentions() {
        let ctx = fixture_ctx();
        let s = table(&[("a", 1.0), ("b", 0.5), ("c", 0.0)]);
        let golds = ["a", "b", "c", "d", "a", "a", "b", "d", "c", "a", "a", "b", "b", "a", "d", "c", "a", "b", "a", "d"];
        let ms: Vec<MentionRecord> = golds
            .iter()
            .enumerate()
            .map(|(k, g)| mention(k, if *g == "d" { "park" } else { "lee" }, g))
            .collect();
        // every "a" (8) and every "d" (4) is right
        assert_eq!(accuracy(&ms, &ctx, &s).unwrap(), 12.0 / 20.0);
        let mut rev = ms.clone();
        rev.reverse();
        assert_eq!(accuracy(&rev, &ctx, &s).unwrap(), 12.0 / 20.0);
    }

    #[test]
    fn csv_round_trip_and_row_order() {
        let rows = vec![
            ResultRow {
                config: "Popularity".into(),
                valid: Accuracy { correct: 3, n: 4, empty: 0 },
                test: Accuracy { correct: 1, n: 3, empty: 1 },
                seed: 7,
            },
            ResultRow {
                config: "JMEL(S2V + Img)".into(),
                valid: Accuracy { correct: 4, n: 4, empty: 0 },
                test: Accuracy { correct: 2, n: 3, empty: 0 },
                seed: 7,
            },
        ];
        let parsed = parse_results_csv(&results_csv(&rows)).unwrap();
        assert_eq!(parsed.len(), 4);
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(parsed[2 * k].config, r.config);
            assert_eq!(parsed[2 * k].accuracy, r.valid.value());
            assert_eq!(parsed[2 * k + 1].accuracy, r.test.value());
            assert_eq!(parsed[2 * k + 1].empty_candidates, r.test.empty);
        }
        let text = results_text(&rows);
        assert!(text.contains("0.590"));
        assert!(text.contains("0.731"));
    }

    #[test]
    fn reference_values_match_the_source_table() {
        assert_eq!(reference_result("Popularity"), Some((0.369, 0.590)));
        assert_eq!(reference_result("JMEL(S2V + Img + Pop + BM25)"), Some((0.795, 0.803)));
        assert_eq!(reference_result("nope"), None);
    }

    #[test]
    fn run_matrix_preserves_requested_order() {
        let ctx = fixture_ctx();
        let split = DatasetSplit {
            train: vec![],
            valid: vec![mention(0, "lee", "a")],
            test: vec![mention(1, "lee", "b")],
        };
        struct Named(&'static str, TableScorer);
        impl Scorer for Named {
            fn name(&self) -> String {
                self.0.into()
            }
            fn rank(&self, ctx: &LinkingContext, m: &MentionRecord) -> Result<CandidateSet> {
                self.1.rank(ctx, m)
            }
        }
        let x = Named("x", table(&[("a", 1.0)]));
        let y = Named("y", table(&[("b", 1.0)]));
        let rows = run_matrix(&ctx, &split, &[&y, &x], 0).unwrap();
        assert_eq!(rows.iter().map(|r| r.config.as_str()).collect::<Vec<_>>(), vec!["y", "x"]);
        assert_eq!(rows[0].test.correct, 1);
        assert_eq!(rows[1].valid.correct, 1);
    }
}
