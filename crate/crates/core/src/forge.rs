//! Synthetic benchmark construction: a Twitter-like corpus with planted name
//! collisions, ambiguous mentions made by replacing `@screen_name` with a last
//! name or acronym, noise filtering, and a train/valid/test split in which
//! half of the test mentions point at entities never seen in training.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::candgen::{normalize_name, CandidateIndex};
use crate::corpus::{DatasetSplit, Entity, EntityKind, KnowledgeBase, MentionRecord, Tweet};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalSpec {
    pub mu: f64,
    pub sigma: f64,
    pub min: usize,
    pub max: usize,
}

impl LogNormalSpec {
    pub fn sample(&self, rng: &mut Rng) -> usize {
        let dist = LogNormal::new(self.mu, self.sigma).expect("validated sigma");
        let v: f64 = dist.sample(rng);
        (v.round() as usize).clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseRates {
    /// Raw timeline posts that are retweets (discarded from the KB).
    pub timeline_retweet: f64,
    /// Raw timeline posts without an image (discarded from the KB).
    pub timeline_no_image: f64,
    pub mention_retweet: f64,
    pub mention_no_image: f64,
    /// Mention placed inside a leading list of recipients.
    pub recipient_list: f64,
    /// Too little text around the mention.
    pub short_text: f64,
    /// The mentioned entity authored the tweet itself.
    pub self_mention: f64,
    /// A second KB entity is mentioned in the same tweet.
    pub second_mention: f64,
}

impl Default for NoiseRates {
    fn default() -> Self {
        Self {
            timeline_retweet: 0.1,
            timeline_no_image: 0.1,
            mention_retweet: 0.05,
            mention_no_image: 0.05,
            recipient_list: 0.05,
            short_text: 0.03,
            self_mention: 0.02,
            second_mention: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForgeConfig {
    pub n_person_entities: usize,
    pub n_org_entities: usize,
    /// Persons per shared last name.
    pub person_group_size: usize,
    /// Organizations per shared acronym.
    pub org_group_size: usize,
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
    pub acronym_roots: Vec<String>,
    pub org_qualifiers: Vec<String>,
    /// Number of kept (text+image, non-retweet) timeline tweets per entity.
    pub timeline: LogNormalSpec,
    pub mentions_min: usize,
    pub mentions_max: usize,
    /// Popular entities get up to `1 + popularity_bias` times more mentions.
    pub popularity_bias: f64,
    pub topic_dim: usize,
    pub vocab_size: usize,
    pub pool_size: usize,
    /// Probability that a content word comes from the entity's own pool.
    pub timeline_topic_prob: f64,
    pub mention_topic_prob: f64,
    pub content_words_min: usize,
    pub content_words_max: usize,
    pub honorific_prob: f64,
    pub noise: NoiseRates,
    /// Image signal-to-noise ratio handed to the feature generator.
    pub image_snr: f64,
    pub seed: u64,
}

impl Default for ForgeConfig {
    /// Desk-scale corpus: 20 entities in two large ambiguity groups.
    fn default() -> Self {
        Self {
            n_person_entities: 16,
            n_org_entities: 4,
            person_group_size: 16,
            org_group_size: 4,
            first_names: words(FIRST_NAMES),
            last_names: words(LAST_NAMES),
            acronym_roots: words(ACRONYMS),
            org_qualifiers: words(ORG_QUALIFIERS),
            timeline: LogNormalSpec {
                mu: 20f64.ln(),
                sigma: 0.5,
                min: 5,
                max: 80,
            },
            mentions_min: 15,
            mentions_max: 30,
            popularity_bias: 1.0,
            topic_dim: 8,
            vocab_size: 400,
            pool_size: 12,
            timeline_topic_prob: 0.6,
            mention_topic_prob: 0.4,
            content_words_min: 2,
            content_words_max: 4,
            honorific_prob: 0.1,
            noise: NoiseRates::default(),
            image_snr: 1.0,
            seed: 0,
        }
    }
}

impl ForgeConfig {
    /// Timeline sizes shaped like the collected corpus: log-normal with
    /// median 52 and mean ≈ 127.9, clipped to [1, 3117].
    pub fn reference_scale() -> Self {
        let median: f64 = 52.0;
        let mean: f64 = 127.9;
        Self {
            n_person_entities: 1600,
            n_org_entities: 400,
            person_group_size: 16,
            org_group_size: 4,
            timeline: LogNormalSpec {
                mu: median.ln(),
                sigma: (2.0 * (mean / median).ln()).sqrt(),
                min: 1,
                max: 3117,
            },
            mentions_min: 1,
            mentions_max: 3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_person_entities + self.n_org_entities == 0 {
            return bad("forge needs at least one entity");
        }
        if self.person_group_size == 0 || self.org_group_size == 0 {
            return bad("group sizes must be positive");
        }
        if self.timeline.min == 0 || self.timeline.min > self.timeline.max || !(self.timeline.sigma >= 0.0) {
            return bad("timeline distribution must have 1 <= min <= max and sigma >= 0");
        }
        if self.mentions_min == 0 || self.mentions_min > self.mentions_max {
            return bad("mention range must have 1 <= min <= max");
        }
        if self.topic_dim == 0 || self.vocab_size == 0 || self.pool_size == 0 || self.pool_size > self.vocab_size {
            return bad("topic_dim, vocab_size, pool_size must be positive with pool_size <= vocab_size");
        }
        if self.content_words_min == 0 || self.content_words_min > self.content_words_max {
            return bad("content word range must have 1 <= min <= max");
        }
        if self.image_snr < 0.0 {
            return bad("image_snr must be nonnegative");
        }
        Ok(())
    }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const FIRST_NAMES: &[&str] = &[
    "Andrew", "Alice", "Maria", "James", "Sofia", "David", "Elena", "Omar", "Priya", "Lucas", "Hannah", "Mateo",
    "Chloe", "Ivan", "Grace", "Noah", "Leila", "Samuel", "Yuki", "Daniel", "Fatima", "Oscar", "Nina", "Victor",
    "Amara", "Hugo", "Ingrid", "Ravi", "Clara", "Felix", "Zara", "Tomas", "Mei", "Jonas", "Aisha", "Pablo",
    "Greta", "Kofi", "Lena", "Marco", "Rosa", "Emil", "Tara", "Diego", "Freya", "Hassan", "Julia", "Kenji",
];

const LAST_NAMES: &[&str] = &[
    "Ng", "Smith", "Garcia", "Chen", "Kowalski", "Okafor", "Silva", "Novak", "Haddad", "Larsen", "Moreau", "Tanaka",
    "Rossi", "Petrov", "Mendes", "Fischer", "Kaur", "Nakamura", "Dubois", "Jensen", "Costa", "Yilmaz", "Horvat",
    "Lindqvist", "Mensah", "Ortega", "Varga", "Brennan", "Sato", "Keller", "Bianchi", "Adeyemi", "Ivanova",
    "Popescu", "Walsh", "Hoffmann", "Castillo", "Nielsen", "Romero", "Weber", "Kim", "Park", "Lopez", "Fontaine",
];

const ACRONYMS: &[&str] = &[
    "ACM", "NBA", "WHO", "CIA", "BBC", "NPR", "ESA", "UFC", "MIT", "FAA", "IOC", "NFL", "PGA", "RAF", "WWF", "ICC",
    "AMD", "IBM", "CNN", "UCL", "NHS", "FDA", "EPA", "DOJ", "UEFA", "NASA", "IEEE", "AAAI",
];

const ORG_QUALIFIERS: &[&str] = &[
    "Records", "Sports", "Labs", "News", "Foundation", "Academy", "Studios", "Health", "Press", "Motors", "Energy",
    "Digital", "Travel", "Music", "Capital", "Games",
];

const HONORIFICS: &[&str] = &["mr", "mrs", "ms", "dr", "prof", "sir", "dame"];
const SUFFIXES: &[&str] = &["jr", "sr", "ii", "iii", "iv", "phd", "md"];

const TIMELINE_TEMPLATES: &[&str] = &[
    "new post on T and T",
    "thinking about T T today",
    "our T team just shipped T",
    "join us for T at the T event",
    "a thread on T T and T",
    "excited to share T results with you",
    "behind the scenes of T T",
    "this week in T and T",
    "so proud of the T crew T",
    "read our latest T story T",
];

const MENTION_TEMPLATES: &[&str] = &[
    "great talk by M today about T and T",
    "M just shared new work on T T",
    "loved the T session with M",
    "congrats M on the T award T",
    "what M said about T is so T",
    "M is live now talking T T",
    "reading the latest piece by M on T",
    "big news from M about T T",
    "cannot wait to see M at the T T",
    "watching M explain T and T",
];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ra", "zu", "ve", "to", "ni", "sa", "bre", "qui", "dor", "fen", "gal", "hix", "jor", "kel",
    "mun", "pax", "rul", "tev", "vok", "wim", "yad",
];

/// A set of entities sharing a surface form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AmbiguityGroup {
    pub surface: String,
    pub members: Vec<String>,
}

/// Hidden per-entity topic vector, consumed by the feature generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub screen_name: String,
    pub topic: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub kb: KnowledgeBase,
    /// Tweets that mention KB accounts by `@screen_name`, before filtering.
    pub raw_tweets: Vec<Tweet>,
    pub topics: Vec<TopicRecord>,
    pub planted_groups: Vec<AmbiguityGroup>,
    /// Raw timeline posts dropped because they were retweets or had no image.
    pub discarded_timeline: usize,
}

fn pseudo_word(index: usize) -> String {
    let n = SYLLABLES.len();
    let mut w = String::new();
    let mut i = index;
    loop {
        w.push_str(SYLLABLES[i % n]);
        i /= n;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    if w.len() < 4 {
        w.push_str(SYLLABLES[(index * 7 + 3) % n]);
    }
    w
}

fn build_vocab(size: usize) -> Vec<String> {
    let mut reserved: BTreeSet<String> = BTreeSet::new();
    for list in [TIMELINE_TEMPLATES, MENTION_TEMPLATES] {
        for t in list {
            reserved.extend(t.split_whitespace().map(str::to_lowercase));
        }
    }
    for list in [FIRST_NAMES, LAST_NAMES, ACRONYMS, ORG_QUALIFIERS] {
        reserved.extend(list.iter().map(|s| s.to_lowercase()));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(size);
    let mut i = 0;
    while out.len() < size {
        let w = pseudo_word(i);
        i += 1;
        if !reserved.contains(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Persona {
    screen_name: String,
    user_name: String,
    kind: EntityKind,
    pool: Vec<String>,
}

fn unique_handle(base: &str, taken: &mut BTreeSet<String>) -> String {
    let clean: String = base.chars().filter(|c| c.is_alphanumeric() || *c == '_').collect();
    let mut name = clean.clone();
    let mut k = 2;
    while !taken.insert(name.to_lowercase()) {
        name = format!("{clean}{k}");
        k += 1;
    }
    name
}

/// Splits `n` into groups of `size`; a leftover of one becomes a singleton.
fn group_sizes(n: usize, size: usize) -> Vec<usize> {
    let mut out = vec![size; n / size];
    if n % size > 0 {
        out.push(n % size);
    }
    out
}

fn fill_template(template: &str, pool: &[String], vocab: &[String], topic_prob: f64, rng: &mut Rng) -> Vec<String> {
    template
        .split_whitespace()
        .map(|tok| {
            if tok == "T" {
                if rng.random_bool(topic_prob) {
                    pool.choose(rng).expect("nonempty pool").clone()
                } else {
                    vocab.choose(rng).expect("nonempty vocab").clone()
                }
            } else {
                tok.to_string()
            }
        })
        .collect()
}

/// Adds content words until the template has at least `min` of them.
fn content_template(base: &str, min: usize, max: usize, rng: &mut Rng) -> String {
    let slots = base.split_whitespace().filter(|t| *t == "T").count();
    let want = rng.random_range(min..=max);
    let mut s = base.to_string();
    for _ in slots..want {
        s.push_str(" T");
    }
    s
}

pub fn synth_corpus(config: &ForgeConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut rng = rng_from(derive_seed(config.seed, "forge.names"));

    let person_groups = group_sizes(config.n_person_entities, config.person_group_size);
    let org_groups = group_sizes(config.n_org_entities, config.org_group_size);
    if person_groups.len() > config.last_names.len() {
        return Err(Error::Infeasible(format!(
            "{} last names needed, pool has {}",
            person_groups.len(),
            config.last_names.len()
        )));
    }
    if person_groups.first().copied().unwrap_or(0) > config.first_names.len() {
        return Err(Error::Infeasible(format!(
            "groups of {} persons need as many first names, pool has {}",
            config.person_group_size,
            config.first_names.len()
        )));
    }
    if org_groups.len() > config.acronym_roots.len() {
        return Err(Error::Infeasible(format!(
            "{} acronyms needed, pool has {}",
            org_groups.len(),
            config.acronym_roots.len()
        )));
    }
    if org_groups.first().copied().unwrap_or(0) > config.org_qualifiers.len() + 1 {
        return Err(Error::Infeasible(format!(
            "groups of {} organizations need {} qualifiers, pool has {}",
            config.org_group_size,
            config.org_group_size - 1,
            config.org_qualifiers.len()
        )));
    }

    let vocab = build_vocab(config.vocab_size);
    let mut taken = BTreeSet::new();
    let mut personas = Vec::new();
    let mut planted = Vec::new();

    let mut last_names = config.last_names.clone();
    last_names.shuffle(&mut rng);
    for (g, &size) in person_groups.iter().enumerate() {
        let last = &last_names[g];
        let mut firsts = config.first_names.clone();
        firsts.shuffle(&mut rng);
        let mut members = Vec::new();
        for first in firsts.iter().take(size) {
            let honorific = rng.random_bool(config.honorific_prob);
            let user_name = if honorific {
                format!("Dr. {first} {last}")
            } else {
                format!("{first} {last}")
            };
            let screen_name = unique_handle(&format!("{first}{last}"), &mut taken);
            members.push(screen_name.clone());
            personas.push(Persona {
                screen_name,
                user_name,
                kind: EntityKind::Person,
                pool: Vec::new(),
            });
        }
        if size >= 2 {
            members.sort();
            planted.push(AmbiguityGroup {
                surface: last.to_lowercase(),
                members,
            });
        }
    }

    let mut acronyms = config.acronym_roots.clone();
    acronyms.shuffle(&mut rng);
    for (g, &size) in org_groups.iter().enumerate() {
        let acr = &acronyms[g];
        let mut quals = config.org_qualifiers.clone();
        quals.shuffle(&mut rng);
        let mut members = Vec::new();
        for k in 0..size {
            let (user_name, handle) = if k == 0 {
                (acr.clone(), format!("{acr}_official"))
            } else {
                (format!("{acr} {}", quals[k - 1]), format!("{acr}{}", quals[k - 1]))
            };
            let screen_name = unique_handle(&handle, &mut taken);
            members.push(screen_name.clone());
            personas.push(Persona {
                screen_name,
                user_name,
                kind: EntityKind::Organization,
                pool: Vec::new(),
            });
        }
        if size >= 2 {
            members.sort();
            planted.push(AmbiguityGroup {
                surface: acr.to_lowercase(),
                members,
            });
        }
    }
    planted.sort();

    let mut pool_rng = rng_from(derive_seed(config.seed, "forge.pools"));
    for p in &mut personas {
        p.pool = vocab.choose_multiple(&mut pool_rng, config.pool_size).cloned().collect();
    }

    let mut topic_rng = rng_from(derive_seed(config.seed, "forge.topics"));
    let topics: Vec<TopicRecord> = personas
        .iter()
        .map(|p| TopicRecord {
            screen_name: p.screen_name.clone(),
            topic: (0..config.topic_dim).map(|_| topic_rng.sample(StandardNormal)).collect(),
        })
        .collect();

    let mut tl_rng = rng_from(derive_seed(config.seed, "forge.timelines"));
    let mut pop_rng = rng_from(derive_seed(config.seed, "forge.popularity"));
    let followers_dist = LogNormal::new(7.0, 2.0).expect("valid");
    let friends_dist = LogNormal::new(5.5, 1.2).expect("valid");
    let ratio_dist = LogNormal::new(2.0, 0.7).expect("valid");
    let mut entities = Vec::new();
    let mut tweets = Vec::new();
    let mut discarded = 0;
    for (ei, p) in personas.iter().enumerate() {
        let kept = config.timeline.sample(&mut tl_rng);
        let mut timeline = Vec::with_capacity(kept);
        let mut k = 0;
        while timeline.len() < kept {
            let id = format!("t{ei:05}-{k:05}");
            k += 1;
            let retweet = tl_rng.random_bool(config.noise.timeline_retweet);
            let no_image = tl_rng.random_bool(config.noise.timeline_no_image);
            let template = TIMELINE_TEMPLATES.choose(&mut tl_rng).expect("templates");
            let template = content_template(template, config.content_words_min, config.content_words_max, &mut tl_rng);
            let text = fill_template(&template, &p.pool, &vocab, config.timeline_topic_prob, &mut tl_rng).join(" ");
            if retweet || no_image {
                discarded += 1;
                continue;
            }
            tweets.push(Tweet {
                id: id.clone(),
                author: p.screen_name.clone(),
                text,
                image_ref: Some(format!("img/{id}")),
                is_retweet: false,
            });
            timeline.push(id);
        }
        let followers: f64 = followers_dist.sample(&mut pop_rng);
        let followers = followers.round() as u64;
        let friends: f64 = friends_dist.sample(&mut pop_rng);
        let friends = friends.round() as u64;
        let ratio: f64 = ratio_dist.sample(&mut pop_rng);
        let tweet_count = ((kept as f64) * (1.0 + ratio)).round() as u64;
        entities.push(Entity {
            screen_name: p.screen_name.clone(),
            user_name: p.user_name.clone(),
            kind: p.kind,
            followers,
            friends,
            tweet_count,
            timeline,
        });
    }

    let raw_tweets = synth_mention_tweets(config, &personas, &entities, &vocab)?;
    let kb = KnowledgeBase::new(entities, tweets)?;
    Ok(SynthCorpus {
        kb,
        raw_tweets,
        topics,
        planted_groups: planted,
        discarded_timeline: discarded,
    })
}

fn synth_mention_tweets(
    config: &ForgeConfig,
    personas: &[Persona],
    entities: &[Entity],
    vocab: &[String],
) -> Result<Vec<Tweet>> {
    let mut rng = rng_from(derive_seed(config.seed, "forge.mentions"));
    let noise = &config.noise;

    // followers quantile in [0, 1]
    let mut order: Vec<usize> = (0..entities.len()).collect();
    order.sort_by_key(|&i| (entities[i].followers, i));
    let mut quantile = vec![0.0; entities.len()];
    let denom = (entities.len().max(2) - 1) as f64;
    for (rank, &i) in order.iter().enumerate() {
        quantile[i] = rank as f64 / denom;
    }

    let mut raw = Vec::new();
    let mut n = 0usize;
    for (ei, p) in personas.iter().enumerate() {
        let base = rng.random_range(config.mentions_min..=config.mentions_max) as f64;
        let count = (base * (1.0 + config.popularity_bias * quantile[ei])).round().max(1.0) as usize;
        for _ in 0..count {
            let id = format!("r{n:07}");
            n += 1;
            let target = format!("@{}", p.screen_name);
            let other = |rng: &mut Rng| -> String {
                if personas.len() > 1 && rng.random_bool(0.5) {
                    let mut j = rng.random_range(0..personas.len() - 1);
                    if j >= ei {
                        j += 1;
                    }
                    format!("@{}", personas[j].screen_name)
                } else {
                    format!("@fan{}", rng.random_range(0..10_000))
                }
            };
            let author = if rng.random_bool(noise.self_mention) {
                p.screen_name.clone()
            } else {
                format!("fan{}", rng.random_range(0..10_000))
            };

            let template = MENTION_TEMPLATES.choose(&mut rng).expect("templates");
            let template = content_template(template, config.content_words_min, config.content_words_max, &mut rng);
            let mut toks = fill_template(&template, &p.pool, vocab, config.mention_topic_prob, &mut rng);
            for t in toks.iter_mut().filter(|t| *t == "M") {
                *t = target.clone();
            }
            if rng.random_bool(noise.second_mention) {
                toks.push("with".into());
                toks.push(other(&mut rng));
            }
            if rng.random_bool(noise.recipient_list) {
                let mut lead = vec![other(&mut rng), target.clone(), other(&mut rng)];
                lead.extend(toks.into_iter().map(|t| if t == target { "them".into() } else { t }));
                toks = lead;
            } else if rng.random_bool(noise.short_text) {
                toks = vec![target.clone(), "wow".into()];
            }
            if rng.random_bool(0.3) {
                if let Some(last) = toks.last_mut() {
                    last.push('!');
                }
            }
            raw.push(Tweet {
                id: id.clone(),
                author,
                text: toks.join(" "),
                image_ref: (!rng.random_bool(noise.mention_no_image)).then(|| format!("img/{id}")),
                is_retweet: rng.random_bool(noise.mention_retweet),
            });
        }
    }
    Ok(raw)
}

fn normalized(tok: &str) -> String {
    normalize_name(tok).join("")
}

fn strip_punct(tok: &str) -> String {
    tok.chars().filter(|c| c.is_alphanumeric()).collect()
}

/// Final name token after dropping honorifics and generational suffixes.
pub fn last_name(user_name: &str) -> Option<String> {
    let toks: Vec<&str> = user_name.split_whitespace().collect();
    let mut start = 0;
    while start < toks.len() && HONORIFICS.contains(&normalized(toks[start]).as_str()) {
        start += 1;
    }
    let mut end = toks.len();
    while end > start + 1 && SUFFIXES.contains(&normalized(toks[end - 1]).as_str()) {
        end -= 1;
    }
    toks[start..end]
        .iter()
        .rev()
        .map(|t| strip_punct(t))
        .find(|t| !t.is_empty())
}

fn is_all_caps(tok: &str) -> bool {
    let letters: Vec<char> = tok.chars().filter(|c| c.is_alphabetic()).collect();
    letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase())
}

/// The user name itself when it is all capitals, else the first all-caps
/// token, else the initials of the capitalized words.
pub fn acronym(user_name: &str) -> Option<String> {
    let trimmed = user_name.trim();
    if is_all_caps(trimmed) {
        let a = strip_punct(trimmed);
        return (!a.is_empty()).then_some(a);
    }
    if let Some(tok) = trimmed.split_whitespace().find(|t| is_all_caps(t)) {
        return Some(strip_punct(tok));
    }
    let initials: String = trimmed
        .split_whitespace()
        .filter_map(|t| t.chars().find(|c| c.is_alphabetic()))
        .filter(|c| c.is_uppercase())
        .collect();
    (initials.chars().count() >= 2).then_some(initials)
}

/// Surface form used to mention an entity ambiguously.
pub fn surface_form(entity: &Entity) -> Option<String> {
    match entity.kind {
        EntityKind::Person => last_name(&entity.user_name),
        EntityKind::Organization => acronym(&entity.user_name),
    }
}

/// Groups persons by last name and organizations by acronym; singletons are dropped.
pub fn select_ambiguous_entities(kb: &KnowledgeBase) -> Vec<AmbiguityGroup> {
    let mut groups: BTreeMap<(EntityKind, String), Vec<String>> = BTreeMap::new();
    for e in kb.entities() {
        if let Some(surface) = surface_form(e) {
            let key = normalized(&surface);
            if !key.is_empty() {
                groups.entry((e.kind, key)).or_default().push(e.screen_name.clone());
            }
        }
    }
    let mut out: Vec<AmbiguityGroup> = groups
        .into_iter()
        .filter(|(_, m)| m.len() >= 2)
        .map(|((_, surface), mut members)| {
            members.sort();
            AmbiguityGroup { surface, members }
        })
        .collect();
    out.sort();
    out
}

/// Placeholder for account-level filters of a live crawl (inactivity,
/// language, verification). Synthetic accounts always pass.
pub fn account_filter(_entity: &Entity) -> bool {
    true
}

/// Keeps a mention unless it sits in a leading run of two or more
/// `@`-mentions, or fewer than three tokens remain once `@`-mentions are removed.
pub fn filter_noise(text: &str, mention_pos: usize) -> bool {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let lead = toks.iter().take_while(|t| t.starts_with('@')).count();
    if lead >= 2 && mention_pos < lead {
        return false;
    }
    toks.iter().filter(|t| !t.starts_with('@')).count() >= 3
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionReport {
    pub considered: usize,
    pub emitted: usize,
    pub skipped_retweet: usize,
    pub skipped_no_image: usize,
    pub skipped_no_entity: usize,
    pub skipped_self: usize,
    pub skipped_noise: usize,
}

#[derive(Debug, Clone)]
pub struct GeneratedMentions {
    pub mentions: Vec<MentionRecord>,
    /// Host tweets with the screen name replaced; ids are `<raw id>~<screen name>`.
    pub tweets: Vec<Tweet>,
    pub report: MentionReport,
}

fn split_handle(tok: &str) -> Option<(&str, &str)> {
    let rest = tok.strip_prefix('@')?;
    let end = rest
        .char_indices()
        .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
        .map_or(rest.len(), |(i, _)| i);
    (end > 0).then(|| (&rest[..end], &rest[end..]))
}

/// Turns `@screen_name` references into ambiguous mentions.
pub fn generate_mentions(kb: &KnowledgeBase, raw: &[Tweet]) -> GeneratedMentions {
    let by_lower: BTreeMap<String, &Entity> = kb.entities().map(|e| (e.screen_name.to_lowercase(), e)).collect();
    let mut report = MentionReport::default();
    let mut mentions = Vec::new();
    let mut tweets = Vec::new();
    let mut sorted: Vec<&Tweet> = raw.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    for t in sorted {
        report.considered += 1;
        if t.is_retweet {
            report.skipped_retweet += 1;
            continue;
        }
        if t.image_ref.is_none() {
            report.skipped_no_image += 1;
            continue;
        }
        let toks: Vec<&str> = t.text.split_whitespace().collect();
        let mut seen = BTreeSet::new();
        let mut any = false;
        for (pos, tok) in toks.iter().enumerate() {
            let Some((handle, trailing)) = split_handle(tok) else { continue };
            let Some(entity) = by_lower.get(&handle.to_lowercase()) else { continue };
            if !seen.insert(entity.screen_name.clone()) {
                continue;
            }
            any = true;
            if t.author.eq_ignore_ascii_case(&entity.screen_name) {
                report.skipped_self += 1;
                continue;
            }
            if !filter_noise(&t.text, pos) {
                report.skipped_noise += 1;
                continue;
            }
            let Some(surface) = surface_form(entity) else {
                report.skipped_no_entity += 1;
                continue;
            };
            let mut new_toks: Vec<String> = toks.iter().map(|s| s.to_string()).collect();
            new_toks[pos] = format!("{surface}{trailing}");
            let id = format!("{}~{}", t.id, entity.screen_name);
            tweets.push(Tweet {
                id: id.clone(),
                author: t.author.clone(),
                text: new_toks.join(" "),
                image_ref: t.image_ref.clone(),
                is_retweet: false,
            });
            mentions.push(MentionRecord {
                words: normalize_name(&surface),
                tweet_id: id,
                gold: entity.screen_name.clone(),
            });
            report.emitted += 1;
        }
        if !any {
            report.skipped_no_entity += 1;
        }
    }
    GeneratedMentions {
        mentions,
        tweets,
        report,
    }
}

pub const TRAIN_FRACTION: f64 = 0.4;
pub const VALID_FRACTION: f64 = 0.2;
pub const UNSEEN_TEST_FRACTION: f64 = 0.5;

/// 40/20/40 split. Whole entities are first reserved for test until half of
/// the test quota is covered, then the remaining mentions are dealt across
/// the three sections proportionally, entity by entity.
pub fn split_mentions(mentions: &[MentionRecord], seed: u64) -> Result<DatasetSplit> {
    let n = mentions.len();
    let mut by_gold: BTreeMap<&str, Vec<&MentionRecord>> = BTreeMap::new();
    let mut ids = BTreeSet::new();
    for m in mentions {
        if !ids.insert(&m.tweet_id) {
            return Err(Error::Data(format!("duplicate mention tweet `{}`", m.tweet_id)));
        }
        by_gold.entry(&m.gold).or_default().push(m);
    }
    if n < 10 || by_gold.len() < 4 {
        return Err(Error::Infeasible(format!(
            "split needs >= 10 mentions over >= 4 entities, got {n} over {}",
            by_gold.len()
        )));
    }
    let n_train = (n as f64 * TRAIN_FRACTION).round() as usize;
    let n_valid = (n as f64 * VALID_FRACTION).round() as usize;
    let n_test = n - n_train - n_valid;
    let unseen_quota = (n_test as f64 * UNSEEN_TEST_FRACTION).ceil() as usize;

    let mut rng = rng_from(derive_seed(seed, "split"));
    let mut entities: Vec<&str> = by_gold.keys().copied().collect();
    entities.shuffle(&mut rng);

    let mut reserved = BTreeSet::new();
    let mut reserved_count = 0;
    for &e in &entities {
        if reserved_count >= unseen_quota {
            break;
        }
        let size = by_gold[e].len();
        // keep at least two entities for training
        if reserved_count + size <= n_test && reserved.len() + 2 < entities.len() {
            reserved.insert(e);
            reserved_count += size;
        }
    }
    if reserved_count < unseen_quota {
        return Err(Error::Infeasible(format!(
            "could only reserve {reserved_count} unseen test mentions, need {unseen_quota}"
        )));
    }

    let mut split = DatasetSplit::default();
    let mut rest = Vec::new();
    for &e in &entities {
        let mut group = by_gold[e].clone();
        group.shuffle(&mut rng);
        if reserved.contains(e) {
            split.test.extend(group.into_iter().cloned());
        } else {
            rest.extend(group);
        }
    }

    // Largest-deficit dealing spreads each entity's contiguous block
    // proportionally over the sections and hits every capacity exactly.
    let caps = [n_train, n_valid, n_test - reserved_count];
    let total = rest.len() as f64;
    let mut dealt = [0usize; 3];
    for (k, m) in rest.into_iter().enumerate() {
        let progress = (k + 1) as f64 / total;
        let pick = (0..3)
            .filter(|&s| dealt[s] < caps[s])
            .max_by(|&a, &b| {
                let da = caps[a] as f64 * progress - dealt[a] as f64;
                let db = caps[b] as f64 * progress - dealt[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("capacities sum to the remaining mentions");
        dealt[pick] += 1;
        match pick {
            0 => split.train.push(m.clone()),
            1 => split.valid.push(m.clone()),
            _ => split.test.push(m.clone()),
        }
    }
    Ok(split)
}

/// Fraction of test mentions whose gold entity never appears in train or valid.
pub fn unseen_test_fraction(split: &DatasetSplit) -> f64 {
    if split.test.is_empty() {
        return 0.0;
    }
    let seen: BTreeSet<&str> = split.train.iter().chain(&split.valid).map(|m| m.gold.as_str()).collect();
    let unseen = split.test.iter().filter(|m| !seen.contains(m.gold.as_str())).count();
    unseen as f64 / split.test.len() as f64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    pub stddev: f64,
}

impl Summary {
    /// Population standard deviation; median averages the middle pair.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        };
        Self {
            count: values.len(),
            mean,
            median,
            max: sorted[sorted.len() - 1],
            min: sorted[0],
            stddev: var.sqrt(),
        }
    }
}

/// Reference statistics of the collected corpus, shown next to measured ones.
pub const REFERENCE_TIMELINE_STATS: [f64; 5] = [127.9, 52.0, 3117.0, 1.0, 222.2];
pub const REFERENCE_CANDIDATE_STATS: [f64; 5] = [16.5, 16.0, 67.0, 2.0, 12.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub entities: usize,
    pub mentions: usize,
    pub empty_candidate_mentions: usize,
    pub timeline: Summary,
    pub candidates: Summary,
}

pub fn dataset_stats(kb: &KnowledgeBase, mentions: &[MentionRecord]) -> DatasetStats {
    let timeline: Vec<f64> = kb.entities().map(|e| e.timeline.len() as f64).collect();
    let index = CandidateIndex::new(kb);
    let cands: Vec<f64> = mentions.iter().map(|m| index.candidates(m).len() as f64).collect();
    DatasetStats {
        entities: kb.num_entities(),
        mentions: mentions.len(),
        empty_candidate_mentions: cands.iter().filter(|c| **c == 0.0).count(),
        timeline: Summary::of(&timeline),
        candidates: Summary::of(&cands),
    }
}

impl DatasetStats {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# reference corpus: tweets/timeline mean 127.9 median 52 max 3117 min 1 stddev 222.2");
        let _ = writeln!(s, "# reference corpus: candidates/mention mean 16.5 median 16 max 67 min 2 stddev 12");
        let _ = writeln!(
            s,
            "# entities {}  mentions {}  empty-candidate mentions {}",
            self.entities, self.mentions, self.empty_candidate_mentions
        );
        let _ = writeln!(
            s,
            "{:<34}{:>10}{:>10}{:>10}{:>10}{:>10}",
            "", "Mean", "Median", "Max", "Min", "StdDev"
        );
        for (label, v) in [
            ("nb Tweets / timeline (text+image)", &self.timeline),
            ("nb ambiguous entities/mention", &self.candidates),
        ] {
            let _ = writeln!(
                s,
                "{label:<34}{:>10.1}{:>10.1}{:>10.0}{:>10.0}{:>10.1}",
                v.mean, v.median, v.max, v.min, v.stddev
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,mean,median,max,min,stddev,count\n");
        for (label, v) in [("timeline", &self.timeline), ("candidates", &self.candidates)] {
            let _ = writeln!(
                s,
                "{label},{},{},{},{},{},{}",
                v.mean, v.median, v.max, v.min, v.stddev, v.count
            );
        }
        s
    }
}
