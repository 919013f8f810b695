//! Span-consistent augmentation of positive tweets.
//!
//! Three strategies are available: replacing every mention with an entry
//! from an [`EntityPool`], replacing every mention with a random letter
//! string, and dropping one non-mention word. Every augmented tweet draws
//! from its own random stream, seeded by [`derive_seed`], so results do not
//! depend on scheduling.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{AnnotatedTweet, Corpus, Mention, Tweet};
use crate::normalize::tokenize_str;
use crate::pool::EntityPool;
use crate::text::{casefold, char_len};

/// Letters used by the random-string strategy.
pub const RANDOM_ALPHABET: &[u8; 52] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
pub const RANDOM_MIN_LEN: usize = 3;
pub const RANDOM_MAX_LEN: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AugmentError {
    #[error("tweet {0:?} has no mentions to augment")]
    NotPositive(String),
    #[error("entity pool is empty")]
    EmptyPool,
    #[error("invalid augmentation plan: {0}")]
    InvalidPlan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    EntityReplace,
    RandomString,
    WordDrop,
}

impl Strategy {
    /// Numeric code used in ids and seed derivation.
    pub fn code(self) -> u8 {
        match self {
            Strategy::EntityReplace => 1,
            Strategy::RandomString => 2,
            Strategy::WordDrop => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::EntityReplace => "replace",
            Strategy::RandomString => "randstr",
            Strategy::WordDrop => "drop",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "replace" | "1" => Ok(Strategy::EntityReplace),
            "randstr" | "2" => Ok(Strategy::RandomString),
            "drop" | "3" => Ok(Strategy::WordDrop),
            other => Err(format!("unknown strategy {other:?} (expected replace, randstr or drop)")),
        }
    }
}

/// Random stream used for a single augmentation.
pub type AugmentRng = ChaCha8Rng;

/// Mixes the four inputs through SHA-256 and takes the first eight digest
/// bytes little-endian. Input layout: seed (u64 LE), id length (u64 LE), id
/// bytes, strategy code (u8), round (u32 LE).
pub fn derive_seed(global_seed: u64, tweet_id: &str, strategy: u8, round: u32) -> u64 {
    let mut h = Sha256::new();
    h.update(global_seed.to_le_bytes());
    h.update((tweet_id.len() as u64).to_le_bytes());
    h.update(tweet_id.as_bytes());
    h.update([strategy]);
    h.update(round.to_le_bytes());
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(first)
}

pub fn rng_from_seed(seed: u64) -> AugmentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rebuilds `t` with every mention replaced by `replacement(mention)`,
/// shifting later offsets by the accumulated length change.
fn replace_mentions(t: &AnnotatedTweet, mut replacement: impl FnMut(&Mention) -> String) -> AnnotatedTweet {
    let chars: Vec<char> = t.text().chars().collect();
    let mut text = String::with_capacity(t.text().len() + 16);
    let mut out_len = 0usize;
    let mut cursor = 0usize;
    let mut mentions = Vec::with_capacity(t.mentions().len());
    for m in t.mentions() {
        text.extend(&chars[cursor..m.start]);
        out_len += m.start - cursor;
        let surface = replacement(m);
        let len = char_len(&surface);
        text.push_str(&surface);
        mentions.push(Mention::new(out_len, out_len + len, surface));
        out_len += len;
        cursor = m.end;
    }
    text.extend(&chars[cursor..]);
    let tweet = Tweet {
        text,
        ..t.tweet().clone()
    };
    AnnotatedTweet::new(tweet, mentions, t.provenance().map(str::to_string))
        .expect("replacement preserves span integrity")
}

/// Replaces every mention with a pool entry sampled uniformly among entries
/// that differ (case-folded) from the original surface. Falls back to the
/// whole pool when no such entry exists.
pub fn augment_replace_entity(
    t: &AnnotatedTweet,
    pool: &EntityPool,
    rng: &mut AugmentRng,
) -> Result<AnnotatedTweet, AugmentError> {
    if !t.is_positive() {
        return Err(AugmentError::NotPositive(t.id().to_string()));
    }
    if pool.is_empty() {
        return Err(AugmentError::EmptyPool);
    }
    let surfaces = pool.surfaces();
    let keys: Vec<&str> = pool.keys().collect();
    Ok(replace_mentions(t, |m| {
        let original = casefold(&m.surface);
        let alternatives: Vec<usize> = (0..keys.len()).filter(|&i| keys[i] != original).collect();
        let pick = if alternatives.is_empty() {
            rng.random_range(0..surfaces.len())
        } else {
            alternatives[rng.random_range(0..alternatives.len())]
        };
        surfaces[pick].to_string()
    }))
}

/// A string of 3 to 10 ASCII letters, length and letters drawn uniformly.
pub fn random_string(rng: &mut AugmentRng) -> String {
    let len = rng.random_range(RANDOM_MIN_LEN..=RANDOM_MAX_LEN);
    (0..len)
        .map(|_| RANDOM_ALPHABET[rng.random_range(0..RANDOM_ALPHABET.len())] as char)
        .collect()
}

pub fn augment_random_string(t: &AnnotatedTweet, rng: &mut AugmentRng) -> Result<AnnotatedTweet, AugmentError> {
    if !t.is_positive() {
        return Err(AugmentError::NotPositive(t.id().to_string()));
    }
    Ok(replace_mentions(t, |_| random_string(rng)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WordDrop {
    Dropped(AnnotatedTweet),
    /// Every token overlaps a mention.
    Skipped,
}

/// Removes one uniformly chosen token that overlaps no mention, together
/// with the whitespace gap after it (or before it when it is the last
/// token and no whitespace trails it). A token glued to the next one has an
/// empty following gap, so only the token goes.
pub fn augment_word_drop(t: &AnnotatedTweet, rng: &mut AugmentRng) -> Result<WordDrop, AugmentError> {
    if !t.is_positive() {
        return Err(AugmentError::NotPositive(t.id().to_string()));
    }
    let mentions = t.mentions();
    let overlaps = |s: usize, e: usize| mentions.iter().any(|m| s < m.end && m.start < e);
    let tokens = tokenize_str(t.text());
    let candidates: Vec<usize> = (0..tokens.len())
        .filter(|&i| !overlaps(tokens[i].start, tokens[i].end))
        .collect();
    if candidates.is_empty() {
        return Ok(WordDrop::Skipped);
    }
    let i = candidates[rng.random_range(0..candidates.len())];
    let tok = &tokens[i];
    let text_len = char_len(t.text());
    let next_start = tokens.get(i + 1).map_or(text_len, |n| n.start);
    let prev_end = if i == 0 { 0 } else { tokens[i - 1].end };
    let (mut from, mut to) = if i + 1 < tokens.len() || next_start > tok.end {
        (tok.start, next_start)
    } else {
        (prev_end, tok.end)
    };
    // Mentions with whitespace at their edges must not lose characters.
    if overlaps(from, to) {
        (from, to) = (tok.start, tok.end);
    }

    let removed = to - from;
    let text: String = t
        .text()
        .chars()
        .enumerate()
        .filter(|&(j, _)| j < from || j >= to)
        .map(|(_, c)| c)
        .collect();
    let shifted = mentions
        .iter()
        .map(|m| {
            if m.start >= to {
                Mention::new(m.start - removed, m.end - removed, m.surface.clone())
            } else {
                m.clone()
            }
        })
        .collect();
    let tweet = Tweet {
        text,
        ..t.tweet().clone()
    };
    let out = AnnotatedTweet::new(tweet, shifted, t.provenance().map(str::to_string))
        .expect("word drop preserves span integrity");
    Ok(WordDrop::Dropped(out))
}

#[derive(Debug, Clone)]
pub struct PlanStep {
    pub strategy: Strategy,
    pub rounds: u32,
    /// Required for [`Strategy::EntityReplace`].
    pub pool: Option<Arc<EntityPool>>,
}

impl PlanStep {
    pub fn replace(rounds: u32, pool: Arc<EntityPool>) -> Self {
        PlanStep {
            strategy: Strategy::EntityReplace,
            rounds,
            pool: Some(pool),
        }
    }

    pub fn random_string(rounds: u32) -> Self {
        PlanStep {
            strategy: Strategy::RandomString,
            rounds,
            pool: None,
        }
    }

    pub fn word_drop(rounds: u32) -> Self {
        PlanStep {
            strategy: Strategy::WordDrop,
            rounds,
            pool: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AugmentationPlan {
    pub steps: Vec<PlanStep>,
    pub seed: u64,
}

impl AugmentationPlan {
    pub fn new(steps: Vec<PlanStep>, seed: u64) -> Self {
        AugmentationPlan { steps, seed }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        for (i, step) in self.steps.iter().enumerate() {
            if step.rounds == 0 {
                return Err(AugmentError::InvalidPlan(format!("step {} has zero rounds", i + 1)));
            }
            if step.strategy == Strategy::EntityReplace {
                match &step.pool {
                    None => {
                        return Err(AugmentError::InvalidPlan(format!(
                            "step {} (replace) has no entity pool",
                            i + 1
                        )))
                    }
                    Some(p) if p.is_empty() => return Err(AugmentError::EmptyPool),
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Compact summary such as `(1) x10 + (3) x1`.
    pub fn describe(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("({}) x{}", s.strategy.code(), s.rounds))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Which corpora feed the replacement pool of a preset step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolScope {
    /// Only the corpora being augmented.
    Base,
    /// The augmented corpora plus the external corpora.
    BaseAndExternal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetStep {
    pub strategy: Strategy,
    pub rounds: u32,
    pub pool_scope: Option<PoolScope>,
}

/// The three final training recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Submission1,
    Submission2,
    Submission3,
}

impl Preset {
    pub fn steps(self) -> Vec<PresetStep> {
        let replace = |rounds, scope| PresetStep {
            strategy: Strategy::EntityReplace,
            rounds,
            pool_scope: Some(scope),
        };
        let drop = PresetStep {
            strategy: Strategy::WordDrop,
            rounds: 1,
            pool_scope: None,
        };
        match self {
            Preset::Submission1 => vec![replace(1, PoolScope::Base)],
            Preset::Submission2 => vec![replace(10, PoolScope::BaseAndExternal), drop],
            Preset::Submission3 => vec![replace(3, PoolScope::Base), drop],
        }
    }

    /// Builds the plan. `extended_pool` is required when a step draws from
    /// the external corpora.
    pub fn plan(
        self,
        base_pool: Arc<EntityPool>,
        extended_pool: Option<Arc<EntityPool>>,
        seed: u64,
    ) -> Result<AugmentationPlan, AugmentError> {
        let mut steps = Vec::new();
        for s in self.steps() {
            let pool = match s.pool_scope {
                None => None,
                Some(PoolScope::Base) => Some(base_pool.clone()),
                Some(PoolScope::BaseAndExternal) => Some(extended_pool.clone().ok_or_else(|| {
                    AugmentError::InvalidPlan(format!("{self} draws its pool from external corpora; none given"))
                })?),
            };
            steps.push(PlanStep {
                strategy: s.strategy,
                rounds: s.rounds,
                pool,
            });
        }
        let plan = AugmentationPlan::new(steps, seed);
        plan.validate()?;
        Ok(plan)
    }

    pub fn needs_external_pool(self) -> bool {
        self.steps()
            .iter()
            .any(|s| s.pool_scope == Some(PoolScope::BaseAndExternal))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Submission1 => "submission1",
            Preset::Submission2 => "submission2",
            Preset::Submission3 => "submission3",
        })
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "submission1" => Ok(Preset::Submission1),
            "submission2" => Ok(Preset::Submission2),
            "submission3" => Ok(Preset::Submission3),
            other => Err(format!("unknown preset {other:?}")),
        }
    }
}

/// Where an augmented tweet came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage {
    pub corpus: String,
    pub source_id: String,
    pub strategy: Strategy,
    pub round: u32,
    pub global_seed: u64,
}

impl Lineage {
    pub fn augmented_id(&self) -> String {
        format!("{}#aug-{}{}", self.source_id, self.strategy.code(), self.round)
    }

    pub fn seed(&self) -> u64 {
        derive_seed(self.global_seed, &self.source_id, self.strategy.code(), self.round)
    }

    pub fn tag(&self) -> String {
        format!(
            "aug:corpus={};source={};strategy={};round={};seed={}",
            self.corpus,
            self.source_id,
            self.strategy.name(),
            self.round,
            self.global_seed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedTweet {
    pub tweet: AnnotatedTweet,
    pub lineage: Lineage,
}

/// Applies one strategy to `source` under `lineage`'s derived seed.
pub fn augment_one(
    source: &AnnotatedTweet,
    lineage: Lineage,
    pool: Option<&EntityPool>,
) -> Result<Option<AugmentedTweet>, AugmentError> {
    let mut rng = rng_from_seed(lineage.seed());
    let out = match lineage.strategy {
        Strategy::EntityReplace => {
            let pool = pool.ok_or(AugmentError::EmptyPool)?;
            augment_replace_entity(source, pool, &mut rng)?
        }
        Strategy::RandomString => augment_random_string(source, &mut rng)?,
        Strategy::WordDrop => match augment_word_drop(source, &mut rng)? {
            WordDrop::Dropped(t) => t,
            WordDrop::Skipped => {
                log::info!("word drop skipped for {}: no droppable token", source.id());
                return Ok(None);
            }
        },
    };
    let tweet = out.with_id(lineage.augmented_id()).with_provenance(Some(lineage.tag()));
    Ok(Some(AugmentedTweet { tweet, lineage }))
}

#[derive(Debug, Clone)]
pub struct AugmentOutcome {
    pub corpus: Corpus,
    /// `(source id, round)` of skipped word drops.
    pub skipped: Vec<(String, u32)>,
}

/// Runs every step of `plan` over the positive tweets of `corpus` and
/// returns only the augmented tweets, ordered by (source id, strategy,
/// round). Rounds for a strategy keep counting across repeated steps.
pub fn run_plan_detailed(corpus: &Corpus, plan: &AugmentationPlan) -> Result<AugmentOutcome, AugmentError> {
    plan.validate()?;
    let positives: Vec<&AnnotatedTweet> = corpus.positives().collect();

    let mut tasks: Vec<(&AnnotatedTweet, Strategy, u32, Option<&EntityPool>)> = Vec::new();
    let mut next_round = [1u32; 3];
    for step in &plan.steps {
        let counter = &mut next_round[usize::from(step.strategy.code() - 1)];
        for _ in 0..step.rounds {
            let round = *counter;
            *counter += 1;
            for &t in &positives {
                tasks.push((t, step.strategy, round, step.pool.as_deref()));
            }
        }
    }

    let results: Vec<Result<(String, Strategy, u32, Option<AugmentedTweet>), AugmentError>> = tasks
        .par_iter()
        .map(|&(t, strategy, round, pool)| {
            let lineage = Lineage {
                corpus: corpus.name().to_string(),
                source_id: t.id().to_string(),
                strategy,
                round,
                global_seed: plan.seed,
            };
            augment_one(t, lineage, pool).map(|a| (t.id().to_string(), strategy, round, a))
        })
        .collect();

    let mut produced = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for r in results {
        let (id, strategy, round, aug) = r?;
        match aug {
            Some(a) => produced.push(a),
            None => skipped.push((id, round, strategy)),
        }
    }
    produced.sort_by(|a, b| {
        (&a.lineage.source_id, a.lineage.strategy, a.lineage.round).cmp(&(
            &b.lineage.source_id,
            b.lineage.strategy,
            b.lineage.round,
        ))
    });
    skipped.sort();

    let tweets = produced.into_iter().map(|a| a.tweet).collect();
    let corpus = Corpus::new(format!("{}+aug", corpus.name()), tweets)
        .map_err(|e| AugmentError::InvalidPlan(e.to_string()))?;
    Ok(AugmentOutcome {
        corpus,
        skipped: skipped.into_iter().map(|(id, round, _)| (id, round)).collect(),
    })
}

pub fn run_plan(corpus: &Corpus, plan: &AugmentationPlan) -> Result<Corpus, AugmentError> {
    run_plan_detailed(corpus, plan).map(|o| o.corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotated(id: &str, text: &str, spans: &[(usize, usize)]) -> AnnotatedTweet {
        let mentions = spans
            .iter()
            .map(|&(s, e)| Mention::from_text(text, s, e).unwrap())
            .collect();
        AnnotatedTweet::new(Tweet::new(id, text), mentions, None).unwrap()
    }

    fn pool_of(surfaces: &[&str]) -> EntityPool {
        let mut p = EntityPool::default();
        for s in surfaces {
            p.insert(s, "test");
        }
        p
    }

    #[test]
    fn derive_seed_is_stable_and_distinct() {
        assert_eq!(derive_seed(42, "t1", 1, 1), derive_seed(42, "t1", 1, 1));
        assert_ne!(derive_seed(42, "t1", 1, 1), derive_seed(42, "t1", 1, 2));
        assert_ne!(derive_seed(42, "t1", 1, 1), derive_seed(42, "t2", 1, 1));
        assert_ne!(derive_seed(42, "t1", 1, 1), derive_seed(42, "t1", 3, 1));
        assert_ne!(derive_seed(42, "t1", 1, 1), derive_seed(43, "t1", 1, 1));
        // Length prefix keeps ("t1", 1) apart from ("t", ...) style splits.
        assert_ne!(derive_seed(0, "ab", 1, 1), derive_seed(0, "a", 1, 1));
    }

    #[test]
    fn replace_single_mention() {
        let t = annotated("t", "took tylenol today", &[(5, 12)]);
        let mut rng = rng_from_seed(1);
        let out = augment_replace_entity(&t, &pool_of(&["tylenol", "benadryl"]), &mut rng).unwrap();
        assert_eq!(out.text(), "took benadryl today");
        assert_eq!(out.mentions(), &[Mention::new(5, 13, "benadryl")]);
    }

    #[test]
    fn replace_shifts_following_mentions() {
        // "zofran" is one shorter than "tylenol": the second mention moves
        // from (12,17) to (11,16) before being replaced itself.
        let t = annotated("t", "tylenol and advil", &[(0, 7), (12, 17)]);
        let mut calls = 0;
        let out = replace_mentions(&t, |m| {
            calls += 1;
            if m.start == 0 {
                "zofran".into()
            } else {
                "advil".into()
            }
        });
        assert_eq!(calls, 2);
        assert_eq!(out.text(), "zofran and advil");
        assert_eq!(out.mentions()[1], Mention::new(11, 16, "advil"));
    }

    #[test]
    fn replace_falls_back_when_pool_has_only_original() {
        let t = annotated("t", "took Tylenol", &[(5, 12)]);
        let mut rng = rng_from_seed(3);
        let out = augment_replace_entity(&t, &pool_of(&["tylenol"]), &mut rng).unwrap();
        assert_eq!(casefold(&out.mentions()[0].surface), "tylenol");
    }

    #[test]
    fn replace_never_picks_original_when_alternatives_exist() {
        let t = annotated("t", "took tylenol", &[(5, 12)]);
        let pool = pool_of(&["Tylenol", "advil"]);
        for seed in 0..200 {
            let out = augment_replace_entity(&t, &pool, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(out.mentions()[0].surface, "advil");
        }
    }

    #[test]
    fn errors_on_negative_or_empty_pool() {
        let neg = annotated("n", "nothing here", &[]);
        let mut rng = rng_from_seed(0);
        assert_eq!(
            augment_replace_entity(&neg, &pool_of(&["a"]), &mut rng),
            Err(AugmentError::NotPositive("n".into()))
        );
        assert!(augment_random_string(&neg, &mut rng).is_err());
        assert!(augment_word_drop(&neg, &mut rng).is_err());
        let pos = annotated("p", "advil", &[(0, 5)]);
        assert_eq!(
            augment_replace_entity(&pos, &EntityPool::default(), &mut rng),
            Err(AugmentError::EmptyPool)
        );
    }

    #[test]
    fn random_strings_are_letters_of_valid_length() {
        let t = annotated("t", "advil then tylenol", &[(0, 5), (11, 18)]);
        for seed in 0..1000 {
            let out = augment_random_string(&t, &mut rng_from_seed(seed)).unwrap();
            assert_eq!(out.mentions().len(), 2);
            for m in out.mentions() {
                assert!((3..=10).contains(&m.len()), "len {}", m.len());
                assert!(m.surface.chars().all(|c| c.is_ascii_alphabetic()));
            }
            assert!(out.text().contains(" then "));
        }
    }

    #[test]
    fn random_string_lengths_are_uniform() {
        // Chi-square over 8 bins, 7 degrees of freedom; 24.32 is the 0.001
        // upper quantile.
        let mut rng = rng_from_seed(2024);
        let mut bins = [0usize; 8];
        for _ in 0..10_000 {
            bins[random_string(&mut rng).len() - 3] += 1;
        }
        let expected = 10_000.0 / 8.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 24.32, "chi2 = {chi2}, bins = {bins:?}");
    }

    fn drop_with(t: &AnnotatedTweet, want: &str) -> AnnotatedTweet {
        for seed in 0..500 {
            if let WordDrop::Dropped(out) = augment_word_drop(t, &mut rng_from_seed(seed)).unwrap() {
                let tokens: Vec<String> = tokenize_str(out.text()).into_iter().map(|t| t.text).collect();
                if !tokens.iter().any(|tok| tok == want) {
                    return out;
                }
            }
        }
        panic!("no seed dropped {want:?}");
    }

    #[test]
    fn word_drop_shifts_mentions() {
        let t = annotated("t", "I took tylenol", &[(7, 14)]);
        let out = drop_with(&t, "I");
        assert_eq!(out.text(), "took tylenol");
        // "I " is two code points, so the mention moves from 7 to 5.
        assert_eq!(out.mentions(), &[Mention::new(5, 12, "tylenol")]);

        let t = annotated("t", "took tylenol now", &[(5, 12)]);
        let out = drop_with(&t, "now");
        assert_eq!(out.text(), "took tylenol");
        assert_eq!(out.mentions(), &[Mention::new(5, 12, "tylenol")]);
    }

    #[test]
    fn word_drop_of_glued_token_keeps_neighbour_gap() {
        let t = annotated("t", "need aspirin #pregnancy", &[(5, 12)]);
        let out = drop_with(&t, "#");
        assert_eq!(out.text(), "need aspirin pregnancy");
        assert_eq!(out.mentions(), &[Mention::new(5, 12, "aspirin")]);

        let t = annotated("t", "took tylenol.", &[(5, 12)]);
        assert_eq!(drop_with(&t, ".").text(), "took tylenol");
    }

    #[test]
    fn word_drop_skips_all_mention_tweet() {
        let t = annotated("t", "tylenol", &[(0, 7)]);
        assert_eq!(augment_word_drop(&t, &mut rng_from_seed(0)).unwrap(), WordDrop::Skipped);
    }

    #[test]
    fn word_drop_keeps_whitespace_edged_mentions() {
        let t = annotated("t", "a tylenol", &[(1, 9)]);
        let out = match augment_word_drop(&t, &mut rng_from_seed(0)).unwrap() {
            WordDrop::Dropped(o) => o,
            WordDrop::Skipped => panic!("expected drop"),
        };
        assert_eq!(out.text(), " tylenol");
        assert_eq!(out.mentions(), &[Mention::new(0, 8, " tylenol")]);
    }

    fn small_corpus() -> Corpus {
        Corpus::new(
            "c",
            vec![
                annotated("a", "took tylenol today", &[(5, 12)]),
                annotated("b", "no drugs", &[]),
                annotated("c", "advil", &[(0, 5)]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn run_plan_counts_and_ids() {
        let pool = Arc::new(pool_of(&["tylenol", "advil", "zofran"]));
        let plan = AugmentationPlan::new(vec![PlanStep::replace(3, pool), PlanStep::word_drop(1)], 7);
        let out = run_plan_detailed(&small_corpus(), &plan).unwrap();
        // 2 positives x 3 rounds + 2 drops - 1 skip ("advil" is all mention).
        assert_eq!(out.corpus.len(), 7);
        assert_eq!(out.skipped, vec![("c".to_string(), 1)]);
        let ids: Vec<&str> = out.corpus.tweets().iter().map(|t| t.id()).collect();
        assert_eq!(ids, vec!["a#aug-11", "a#aug-12", "a#aug-13", "a#aug-31", "c#aug-11", "c#aug-12", "c#aug-13"]);
        assert!(out.corpus.tweets().iter().all(|t| t.is_positive()));
        assert_eq!(
            out.corpus.tweets()[0].provenance(),
            Some("aug:corpus=c;source=a;strategy=replace;round=1;seed=7")
        );
    }

    #[test]
    fn repeated_strategy_steps_continue_round_numbering() {
        let pool = Arc::new(pool_of(&["tylenol", "advil"]));
        let plan = AugmentationPlan::new(vec![PlanStep::replace(1, pool.clone()), PlanStep::replace(2, pool)], 1);
        let out = run_plan(&small_corpus(), &plan).unwrap();
        assert_eq!(out.len(), 6);
    }

    #[test]
    fn plan_validation() {
        let plan = AugmentationPlan::new(vec![PlanStep::word_drop(0)], 0);
        assert!(matches!(plan.validate(), Err(AugmentError::InvalidPlan(_))));
        let plan = AugmentationPlan::new(
            vec![PlanStep {
                strategy: Strategy::EntityReplace,
                rounds: 1,
                pool: None,
            }],
            0,
        );
        assert!(matches!(plan.validate(), Err(AugmentError::InvalidPlan(_))));
        let plan = AugmentationPlan::new(vec![PlanStep::replace(1, Arc::new(EntityPool::default()))], 0);
        assert_eq!(run_plan(&small_corpus(), &plan).unwrap_err(), AugmentError::EmptyPool);
    }

    #[test]
    fn empty_on_no_positives() {
        let c = Corpus::new("n", vec![annotated("x", "nothing", &[])]).unwrap();
        let plan = AugmentationPlan::new(vec![PlanStep::random_string(5), PlanStep::word_drop(2)], 0);
        assert!(run_plan(&c, &plan).unwrap().is_empty());
    }

    #[test]
    fn presets_match_final_recipes() {
        let base = Arc::new(pool_of(&["a"]));
        let ext = Arc::new(pool_of(&["a", "b"]));
        assert_eq!(Preset::Submission1.plan(base.clone(), None, 0).unwrap().describe(), "(1) x1");
        assert_eq!(
            Preset::Submission2.plan(base.clone(), Some(ext.clone()), 0).unwrap().describe(),
            "(1) x10 + (3) x1"
        );
        assert_eq!(Preset::Submission3.plan(base.clone(), None, 0).unwrap().describe(), "(1) x3 + (3) x1");
        assert!(Preset::Submission2.plan(base.clone(), None, 0).is_err());
        let p2 = Preset::Submission2.plan(base, Some(ext.clone()), 0).unwrap();
        assert!(Arc::ptr_eq(p2.steps[0].pool.as_ref().unwrap(), &ext));
        assert!(Preset::Submission2.needs_external_pool());
        assert!(!Preset::Submission3.needs_external_pool());
    }
}
