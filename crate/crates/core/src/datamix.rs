//! Corpus merging with deduplication, and the seeded stratified split.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{AnnotatedTweet, Corpus};
use crate::text::casefold;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dedupe {
    /// Drops a tweet whose (id, text) pair was already kept.
    #[default]
    ById,
    /// Drops a tweet whose case-folded, whitespace-collapsed text was already kept.
    ByNormalizedText,
    None,
}

impl FromStr for Dedupe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "id" => Ok(Dedupe::ById),
            "text" => Ok(Dedupe::ByNormalizedText),
            "none" => Ok(Dedupe::None),
            other => Err(format!("unknown dedupe policy {other:?} (expected id, text or none)")),
        }
    }
}

impl fmt::Display for Dedupe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dedupe::ById => "id",
            Dedupe::ByNormalizedText => "text",
            Dedupe::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train_parts: u32,
    pub val_parts: u32,
}

impl SplitRatio {
    pub fn new(train_parts: u32, val_parts: u32) -> Result<Self, MixError> {
        if train_parts == 0 || val_parts == 0 {
            return Err(MixError::InvalidRatio(format!("{train_parts}:{val_parts}")));
        }
        Ok(SplitRatio {
            train_parts,
            val_parts,
        })
    }

    /// `round_half_up(n * val_parts / total_parts)` in integer arithmetic.
    pub fn val_count(&self, n: usize) -> usize {
        let total = u64::from(self.train_parts + self.val_parts);
        let num = 2 * n as u64 * u64::from(self.val_parts) + total;
        (num / (2 * total)) as usize
    }
}

impl Default for SplitRatio {
    fn default() -> Self {
        SplitRatio {
            train_parts: 8,
            val_parts: 2,
        }
    }
}

impl FromStr for SplitRatio {
    type Err = MixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MixError::InvalidRatio(s.to_string());
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        SplitRatio::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for SplitRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.train_parts, self.val_parts)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MixError {
    #[error("invalid split ratio {0:?}; expected two positive integers like 8:2")]
    InvalidRatio(String),
    #[error("mix recipe has no inputs")]
    NoInputs,
}

#[derive(Debug, Clone)]
pub struct MixRecipe<'a> {
    pub inputs: Vec<&'a Corpus>,
    pub dedupe: Dedupe,
    pub split_ratio: SplitRatio,
    pub stratify: bool,
    pub seed: u64,
}

impl<'a> MixRecipe<'a> {
    pub fn new(inputs: Vec<&'a Corpus>, seed: u64) -> Self {
        MixRecipe {
            inputs,
            dedupe: Dedupe::default(),
            split_ratio: SplitRatio::default(),
            stratify: true,
            seed,
        }
    }

    pub fn merge(&self) -> Result<Corpus, MixError> {
        if self.inputs.is_empty() {
            return Err(MixError::NoInputs);
        }
        Ok(merge(&self.inputs, self.dedupe, "mixed"))
    }

    pub fn run(&self) -> Result<SplitOutcome, MixError> {
        let merged = self.merge()?;
        Ok(split(&merged, self.split_ratio, self.stratify, self.seed))
    }
}

fn normalized_text(text: &str) -> String {
    casefold(text).split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Concatenates `inputs` in order. Kept tweets without provenance are tagged
/// with their corpus name; an id already taken by a different tweet is
/// prefixed as `corpus/id` (with a `~k` suffix if that is taken too).
pub fn merge(inputs: &[&Corpus], dedupe: Dedupe, name: &str) -> Corpus {
    let mut used_ids: HashSet<String> = HashSet::new();
    let mut kept_pairs: HashSet<(String, String)> = HashSet::new();
    let mut kept_texts: HashSet<String> = HashSet::new();
    let mut tweets: Vec<AnnotatedTweet> = Vec::new();

    for corpus in inputs {
        for t in corpus.tweets() {
            match dedupe {
                Dedupe::ById => {
                    if !kept_pairs.insert((t.id().to_string(), t.text().to_string())) {
                        continue;
                    }
                }
                Dedupe::ByNormalizedText => {
                    if !kept_texts.insert(normalized_text(t.text())) {
                        continue;
                    }
                }
                Dedupe::None => {}
            }
            let mut id = t.id().to_string();
            if used_ids.contains(&id) {
                let base = format!("{}/{}", corpus.name(), t.id());
                id = base.clone();
                let mut k = 1;
                while used_ids.contains(&id) {
                    id = format!("{base}~{k}");
                    k += 1;
                }
            }
            used_ids.insert(id.clone());
            let provenance = t
                .provenance()
                .map(str::to_string)
                .or_else(|| Some(corpus.name().to_string()));
            tweets.push(t.clone().with_id(id).with_provenance(provenance));
        }
    }
    Corpus::new(name, tweets).expect("ids made unique during merge")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitWarning {
    /// A non-empty class landed entirely on one side of the split.
    DegenerateSplit { class: &'static str, size: usize, val: usize },
}

impl fmt::Display for SplitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitWarning::DegenerateSplit { class, size, val } => write!(
                f,
                "degenerate split: {val} of {size} {class} tweets go to validation, leaving one side without any"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Corpus,
    pub val: Corpus,
    pub warnings: Vec<SplitWarning>,
}

/// Seeded train/validation partition. With `stratify`, positives and
/// negatives are shuffled separately (positives first, from one stream) and
/// each class sends `ratio.val_count(class size)` tweets to validation.
/// Both outputs keep the input order.
pub fn split(corpus: &Corpus, ratio: SplitRatio, stratify: bool, seed: u64) -> SplitOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_val = vec![false; corpus.len()];
    let mut warnings = Vec::new();

    let classes: Vec<(&'static str, Vec<usize>)> = if stratify {
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..corpus.len()).partition(|&i| corpus.tweets()[i].is_positive());
        vec![("positive", pos), ("negative", neg)]
    } else {
        vec![("all", (0..corpus.len()).collect())]
    };

    for (class, mut members) in classes {
        members.shuffle(&mut rng);
        let val = ratio.val_count(members.len());
        if !members.is_empty() && (val == 0 || val == members.len()) {
            let w = SplitWarning::DegenerateSplit {
                class,
                size: members.len(),
                val,
            };
            log::warn!("{w}");
            warnings.push(w);
        }
        for &i in &members[..val] {
            in_val[i] = true;
        }
    }

    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (t, v) in corpus.tweets().iter().zip(in_val) {
        if v {
            val.push(t.clone());
        } else {
            train.push(t.clone());
        }
    }
    SplitOutcome {
        train: Corpus::new(format!("{}.train", corpus.name()), train).expect("subset of unique ids"),
        val: Corpus::new(format!("{}.val", corpus.name()), val).expect("subset of unique ids"),
        warnings,
    }
}

/// Per-id multiplicity, used to check partitions.
pub fn id_counts<'a>(corpora: impl IntoIterator<Item = &'a Corpus>) -> HashMap<String, usize> {
    let mut counts = HashMap::new();
    for c in corpora {
        for t in c.tweets() {
            *counts.entry(t.id().to_string()).or_insert(0) += 1;
        }
    }
    counts
}
