//! Tweets, entities, knowledge bases, mentions and splits, with JSONL
//! persistence.
//!
//! A knowledge base on disk is a directory holding `kb.jsonl` (a manifest line
//! followed by one entity per line) and `tweets.jsonl` (one tweet per line).
//! Output is sorted so that saving the same KB twice is byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const KB_FILE: &str = "kb.jsonl";
pub const TWEETS_FILE: &str = "tweets.jsonl";
const KB_FORMAT: &str = "mel-kb";
const KB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub author: String,
    pub text: String,
    #[serde(rename = "image", default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    #[serde(rename = "retweet", default)]
    pub is_retweet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Person,
    Organization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    /// Stored without the leading `@`.
    pub screen_name: String,
    pub user_name: String,
    pub kind: EntityKind,
    pub followers: u64,
    pub friends: u64,
    pub tweet_count: u64,
    pub timeline: Vec<String>,
}

impl Entity {
    pub fn handle(&self) -> String {
        format!("@{}", self.screen_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    #[serde(rename = "mention")]
    pub words: Vec<String>,
    pub tweet_id: String,
    pub gold: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Valid,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Valid, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Valid => "valid",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<MentionRecord>,
    pub valid: Vec<MentionRecord>,
    pub test: Vec<MentionRecord>,
}

impl DatasetSplit {
    pub fn section(&self, name: SplitName) -> &[MentionRecord] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Valid => &self.valid,
            SplitName::Test => &self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable collection of entities and every tweet they reference.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    entities: BTreeMap<String, Entity>,
    tweets: BTreeMap<String, Tweet>,
}

impl KnowledgeBase {
    /// Builds a KB, rejecting duplicate keys and dangling timeline ids.
    /// Other invariants are reported by [`validate_kb`].
    pub fn new(entities: Vec<Entity>, tweets: Vec<Tweet>) -> Result<Self> {
        let mut tweet_map = BTreeMap::new();
        for t in tweets {
            if tweet_map.contains_key(&t.id) {
                return Err(Error::Data(format!("duplicate tweet id `{}`", t.id)));
            }
            tweet_map.insert(t.id.clone(), t);
        }
        let mut entity_map = BTreeMap::new();
        for e in entities {
            for id in &e.timeline {
                if !tweet_map.contains_key(id) {
                    return Err(Error::DanglingTweet {
                        entity: e.screen_name.clone(),
                        tweet: id.clone(),
                    });
                }
            }
            if entity_map.contains_key(&e.screen_name) {
                return Err(Error::Data(format!("duplicate screen name `{}`", e.screen_name)));
            }
            entity_map.insert(e.screen_name.clone(), e);
        }
        Ok(Self {
            entities: entity_map,
            tweets: tweet_map,
        })
    }

    /// Assembles a KB without any checks, for building invalid fixtures.
    pub fn from_parts_unchecked(entities: BTreeMap<String, Entity>, tweets: BTreeMap<String, Tweet>) -> Self {
        Self { entities, tweets }
    }

    /// A new KB with `extra` tweets added (e.g. rewritten mention tweets).
    pub fn with_tweets(&self, extra: impl IntoIterator<Item = Tweet>) -> Result<Self> {
        let mut tweets = self.tweets.clone();
        for t in extra {
            if tweets.contains_key(&t.id) {
                return Err(Error::Data(format!("duplicate tweet id `{}`", t.id)));
            }
            tweets.insert(t.id.clone(), t);
        }
        Ok(Self {
            entities: self.entities.clone(),
            tweets,
        })
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn tweets(&self) -> impl Iterator<Item = &Tweet> {
        self.tweets.values()
    }

    pub fn entity(&self, screen_name: &str) -> Option<&Entity> {
        self.entities.get(screen_name)
    }

    pub fn tweet(&self, id: &str) -> Option<&Tweet> {
        self.tweets.get(id)
    }

    pub fn timeline(&self, entity: &Entity) -> Vec<&Tweet> {
        entity.timeline.iter().filter_map(|id| self.tweets.get(id)).collect()
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_tweets(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    EmptyTweetId,
    EmptyTweetText,
    KeyMismatch,
    TimelineTweetMissing,
    TimelineWrongAuthor,
    TimelineRetweet,
    TimelineWithoutImage,
    TimelineDuplicate,
    MentionUnknownTweet,
    MentionUnknownGold,
    MentionEmpty,
    MentionWithoutImage,
    MentionInGoldTimeline,
    MentionBySelf,
    MentionDuplicateTweet,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::EmptyTweetId => "tweet id must be nonempty",
            Rule::EmptyTweetText => "tweet text must be nonempty after trimming",
            Rule::KeyMismatch => "map key differs from the record's own key",
            Rule::TimelineTweetMissing => "timeline references an unknown tweet",
            Rule::TimelineWrongAuthor => "timeline tweet is authored by another account",
            Rule::TimelineRetweet => "timeline tweet is a retweet",
            Rule::TimelineWithoutImage => "timeline tweet has no image",
            Rule::TimelineDuplicate => "timeline lists the same tweet twice",
            Rule::MentionUnknownTweet => "mention host tweet is unknown",
            Rule::MentionUnknownGold => "mention gold entity is unknown",
            Rule::MentionEmpty => "mention has no words",
            Rule::MentionWithoutImage => "mention host tweet has no image",
            Rule::MentionInGoldTimeline => "mention host tweet belongs to the gold entity's timeline",
            Rule::MentionBySelf => "mention host tweet is authored by the gold entity",
            Rule::MentionDuplicateTweet => "two mentions share a host tweet",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    /// Entity screen name, tweet id, or mention tweet id the rule fired on.
    pub subject: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.rule.describe())
    }
}

pub fn validate_kb(kb: &KnowledgeBase) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |subject: &str, rule| {
        out.push(Violation {
            subject: subject.to_string(),
            rule,
        })
    };
    for (key, t) in &kb.tweets {
        if key != &t.id {
            push(key, Rule::KeyMismatch);
        }
        if t.id.is_empty() {
            push(key, Rule::EmptyTweetId);
        }
        if t.text.trim().is_empty() {
            push(&t.id, Rule::EmptyTweetText);
        }
    }
    for (key, e) in &kb.entities {
        if key != &e.screen_name {
            push(key, Rule::KeyMismatch);
        }
        let mut seen = BTreeSet::new();
        for id in &e.timeline {
            if !seen.insert(id) {
                push(&e.screen_name, Rule::TimelineDuplicate);
            }
            let Some(t) = kb.tweets.get(id) else {
                push(&e.screen_name, Rule::TimelineTweetMissing);
                continue;
            };
            if t.author != e.screen_name {
                push(&t.id, Rule::TimelineWrongAuthor);
            }
            if t.is_retweet {
                push(&t.id, Rule::TimelineRetweet);
            }
            if t.image_ref.is_none() {
                push(&t.id, Rule::TimelineWithoutImage);
            }
        }
    }
    out.sort();
    out
}

/// Checks mention records against a KB. An entity mentioning itself is
/// rejected as well as a mention hosted in the gold entity's timeline.
pub fn validate_mentions(kb: &KnowledgeBase, mentions: &[MentionRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut hosts = BTreeSet::new();
    for m in mentions {
        let mut push = |rule| {
            out.push(Violation {
                subject: m.tweet_id.clone(),
                rule,
            })
        };
        if !hosts.insert(&m.tweet_id) {
            push(Rule::MentionDuplicateTweet);
        }
        if m.words.is_empty() {
            push(Rule::MentionEmpty);
        }
        let tweet = kb.tweet(&m.tweet_id);
        match tweet {
            None => push(Rule::MentionUnknownTweet),
            Some(t) if t.image_ref.is_none() => push(Rule::MentionWithoutImage),
            Some(_) => {}
        }
        match kb.entity(&m.gold) {
            None => push(Rule::MentionUnknownGold),
            Some(gold) => {
                if gold.timeline.iter().any(|id| id == &m.tweet_id) {
                    push(Rule::MentionInGoldTimeline);
                }
                if tweet.is_some_and(|t| t.author == gold.screen_name) {
                    push(Rule::MentionBySelf);
                }
            }
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct KbManifest {
    format: String,
    version: u32,
    entities: usize,
    tweets: usize,
}

fn jsonl_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

fn parse_line<T: serde::de::DeserializeOwned>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    })
}

fn write_jsonl<T: Serialize>(path: &Path, header: Option<&Value>, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut buf = Vec::new();
    if let Some(h) = header {
        serde_json::to_writer(&mut buf, h)?;
        buf.push(b'\n');
    }
    for row in rows {
        serde_json::to_writer(&mut buf, &row)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Writes one JSON object per line.
pub fn save_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_jsonl(path, None, rows.iter())
}

pub fn load_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    jsonl_lines(path)?
        .into_iter()
        .map(|(line, text)| parse_line(path, line, &text))
        .collect()
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Loads `kb.jsonl` and `tweets.jsonl` from `dir`. The result passes
/// [`validate_kb`]; any violation is reported as an error.
pub fn load_kb(dir: &Path) -> Result<KnowledgeBase> {
    let tweets_path = dir.join(TWEETS_FILE);
    let mut tweets = BTreeMap::new();
    for (line, text) in jsonl_lines(&tweets_path)? {
        let t: Tweet = parse_line(&tweets_path, line, &text)?;
        if tweets.contains_key(&t.id) {
            return Err(Error::Parse {
                path: tweets_path.clone(),
                line,
                msg: format!("duplicate tweet id `{}`", t.id),
            });
        }
        tweets.insert(t.id.clone(), t);
    }

    let kb_path = dir.join(KB_FILE);
    let mut entities = BTreeMap::new();
    let mut manifest: Option<(usize, KbManifest)> = None;
    for (line, text) in jsonl_lines(&kb_path)? {
        let value: Value = parse_line(&kb_path, line, &text)?;
        if value.get("format").is_some() {
            manifest = Some((line, parse_line(&kb_path, line, &text)?));
            continue;
        }
        let e: Entity = serde_json::from_value(value).map_err(|err| Error::Parse {
            path: kb_path.clone(),
            line,
            msg: err.to_string(),
        })?;
        if entities.contains_key(&e.screen_name) {
            return Err(Error::DuplicateName {
                path: kb_path.clone(),
                line,
                name: e.screen_name,
            });
        }
        for id in &e.timeline {
            if !tweets.contains_key(id) {
                return Err(Error::DanglingTweet {
                    entity: e.screen_name.clone(),
                    tweet: id.clone(),
                });
            }
        }
        entities.insert(e.screen_name.clone(), e);
    }
    if let Some((line, m)) = manifest {
        if m.format != KB_FORMAT || m.version != KB_VERSION {
            return Err(Error::Parse {
                path: kb_path,
                line,
                msg: format!("unsupported format {} v{}", m.format, m.version),
            });
        }
        if m.entities != entities.len() || m.tweets != tweets.len() {
            return Err(Error::Parse {
                path: kb_path,
                line,
                msg: format!(
                    "manifest declares {} entities / {} tweets, found {} / {}",
                    m.entities,
                    m.tweets,
                    entities.len(),
                    tweets.len()
                ),
            });
        }
    }
    let kb = KnowledgeBase { entities, tweets };
    let violations = validate_kb(&kb);
    if let Some(first) = violations.first() {
        return Err(Error::Data(format!(
            "{} violation(s) in {}, first: {first}",
            violations.len(),
            dir.display()
        )));
    }
    Ok(kb)
}

pub fn save_kb(kb: &KnowledgeBase, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    let manifest = serde_json::to_value(KbManifest {
        format: KB_FORMAT.to_string(),
        version: KB_VERSION,
        entities: kb.entities.len(),
        tweets: kb.tweets.len(),
    })?;
    write_jsonl(&dir.join(KB_FILE), Some(&manifest), kb.entities.values())?;
    write_jsonl(&dir.join(TWEETS_FILE), None, kb.tweets.values())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MentionLine {
    mention: Vec<String>,
    tweet_id: String,
    gold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitName>,
}

fn read_mention_lines(path: &Path) -> Result<Vec<(usize, MentionLine)>> {
    jsonl_lines(path)?
        .into_iter()
        .map(|(line, text)| Ok((line, parse_line(path, line, &text)?)))
        .collect()
}

pub fn load_mentions(path: &Path) -> Result<Vec<MentionRecord>> {
    Ok(read_mention_lines(path)?
        .into_iter()
        .map(|(_, m)| MentionRecord {
            words: m.mention,
            tweet_id: m.tweet_id,
            gold: m.gold,
        })
        .collect())
}

pub fn save_mentions(mentions: &[MentionRecord], path: &Path) -> Result<()> {
    write_jsonl(path, None, mentions.iter())
}

pub fn save_split(split: &DatasetSplit, path: &Path) -> Result<()> {
    let rows = SplitName::ALL.into_iter().flat_map(|name| {
        split.section(name).iter().map(move |m| MentionLine {
            mention: m.words.clone(),
            tweet_id: m.tweet_id.clone(),
            gold: m.gold.clone(),
            split: Some(name),
        })
    });
    write_jsonl(path, None, rows)
}

/// Reads a mentions file where every record carries its split label.
pub fn load_split(path: &Path) -> Result<DatasetSplit> {
    let mut split = DatasetSplit::default();
    for (line, m) in read_mention_lines(path)? {
        let record = MentionRecord {
            words: m.mention,
            tweet_id: m.tweet_id,
            gold: m.gold,
        };
        match m.split {
            Some(SplitName::Train) => split.train.push(record),
            Some(SplitName::Valid) => split.valid.push(record),
            Some(SplitName::Test) => split.test.push(record),
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: "record has no split label".into(),
                })
            }
        }
    }
    Ok(split)
}

/// Standard file locations inside a dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub root: PathBuf,
}

impl DatasetPaths {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn mentions(&self) -> PathBuf {
        self.root.join("mentions.jsonl")
    }

    pub fn topics(&self) -> PathBuf {
        self.root.join("topics.jsonl")
    }

    pub fn groups(&self) -> PathBuf {
        self.root.join("groups.jsonl")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tweet(id: &str, author: &str, text: &str) -> Tweet {
        Tweet {
            id: id.into(),
            author: author.into(),
            text: text.into(),
            image_ref: Some(format!("img-{id}")),
            is_retweet: false,
        }
    }

    fn entity(name: &str, user: &str, timeline: &[&str]) -> Entity {
        Entity {
            screen_name: name.into(),
            user_name: user.into(),
            kind: EntityKind::Person,
            followers: 10,
            friends: 5,
            tweet_count: timeline.len() as u64,
            timeline: timeline.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn fixture() -> KnowledgeBase {
        KnowledgeBase::new(
            vec![
                entity("AndrewYNg", "Andrew Ng", &["t1", "t2"]),
                entity("AliceNg", "Alice Ng", &["t3"]),
            ],
            vec![
                tweet("t1", "AndrewYNg", "deep learning course"),
                tweet("t2", "AndrewYNg", "new batch of lectures"),
                tweet("t3", "AliceNg", "gallery opening tonight"),
                tweet("m1", "someone", "great talk by Ng today"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn valid_fixture_has_no_violations() {
        assert!(validate_kb(&fixture()).is_empty());
    }

    #[test]
    fn two_entity_fixture_loads() {
        let dir = tempfile::tempdir().unwrap();
        save_kb(&fixture(), dir.path()).unwrap();
        let kb = load_kb(dir.path()).unwrap();
        assert_eq!(kb.num_entities(), 2);
        assert!(validate_kb(&kb).is_empty());
        assert_eq!(kb, fixture());
    }

    #[test]
    fn retweet_in_timeline_is_a_violation() {
        let kb = fixture();
        let mut tweets = kb.tweets.clone();
        tweets.get_mut("t3").unwrap().is_retweet = true;
        let bad = KnowledgeBase::from_parts_unchecked(kb.entities.clone(), tweets);
        let v = validate_kb(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::TimelineRetweet);
        assert_eq!(v[0].subject, "t3");
    }

    #[test]
    fn mention_inside_gold_timeline_is_detected() {
        let kb = fixture();
        let mention = MentionRecord {
            words: vec!["ng".into()],
            tweet_id: "t3".into(),
            gold: "AliceNg".into(),
        };
        let v = validate_mentions(&kb, &[mention]);
        assert!(v.iter().any(|v| v.rule == Rule::MentionInGoldTimeline));
        let ok = MentionRecord {
            words: vec!["ng".into()],
            tweet_id: "m1".into(),
            gold: "AndrewYNg".into(),
        };
        assert!(validate_mentions(&kb, &[ok]).is_empty());
    }

    #[test]
    fn duplicate_screen_name_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        save_kb(&fixture(), dir.path()).unwrap();
        let path = dir.path().join(KB_FILE);
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        // drop the manifest, duplicate the last entity
        lines.remove(0);
        let dup = lines[1].to_string();
        lines.push(&dup);
        fs::write(&path, lines.join("\n")).unwrap();
        match load_kb(dir.path()).unwrap_err() {
            Error::DuplicateName { line, name, .. } => {
                assert_eq!(line, 3);
                assert_eq!(name, "AndrewYNg");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        save_kb(&fixture(), dir.path()).unwrap();
        let path = dir.path().join(TWEETS_FILE);
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{not json}\n");
        fs::write(&path, text).unwrap();
        match load_kb(dir.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn dangling_timeline_id_is_rejected() {
        let err = KnowledgeBase::new(vec![entity("a", "A A", &["nope"])], vec![]).unwrap_err();
        assert!(matches!(err, Error::DanglingTweet { .. }));
    }

    #[test]
    fn empty_kb_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        save_kb(&KnowledgeBase::default(), dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join(KB_FILE)).unwrap();
        assert_eq!(text.lines().count(), 1);
        let m: KbManifest = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(m.entities, 0);
        assert!(load_kb(dir.path()).unwrap().is_empty());
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        save_kb(&fixture(), a.path()).unwrap();
        save_kb(&fixture(), b.path()).unwrap();
        for f in [KB_FILE, TWEETS_FILE] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let line = r#"{"id":"x","author":"a","text":"hi there","retweet":false,"lang":"en"}"#;
        let t: Tweet = serde_json::from_str(line).unwrap();
        assert_eq!(t.image_ref, None);
    }

    #[test]
    fn split_file_round_trips() {
        let m = |id: &str| MentionRecord {
            words: vec!["ng".into()],
            tweet_id: id.into(),
            gold: "AliceNg".into(),
        };
        let split = DatasetSplit {
            train: vec![m("a"), m("b")],
            valid: vec![m("c")],
            test: vec![m("d")],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mentions.jsonl");
        save_split(&split, &path).unwrap();
        assert_eq!(load_split(&path).unwrap(), split);
        assert_eq!(load_mentions(&path).unwrap().len(), 4);
    }
}
