//! Tweet corpus data model, validation and summary statistics.

mod io;

pub use io::{
    load_corpus, read_annotations_tsv, read_interchange, read_interchange_from, read_tweets_tsv,
    save_corpus_tsv, write_annotations_tsv, write_interchange, write_interchange_to,
    write_tweets_tsv, AnnotationRow, TweetRow,
};

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{char_len, char_slice};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed row: {0}")]
    MalformedRow(String),
    #[error("unknown tweet id {0:?}")]
    UnknownTweetId(String),
    #[error("tweet {id:?}: span [{start}, {end}) out of bounds for text of length {len}")]
    SpanOutOfBounds {
        id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("tweet {id:?}: annotation surface {annotated:?} does not match text slice {actual:?} at [{start}, {end})")]
    SurfaceMismatch {
        id: String,
        start: usize,
        end: usize,
        annotated: String,
        actual: String,
    },
    #[error("tweet {id:?}: mention [{first_start}, {first_end}) overlaps [{second_start}, {second_end})")]
    OverlappingMentions {
        id: String,
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },
    #[error("duplicate tweet id {0:?}")]
    DuplicateTweetId(String),
    #[error("tweet id must be non-empty")]
    EmptyId,
    #[error("{}:{line}: {inner}", path.display())]
    InFile {
        path: PathBuf,
        line: usize,
        #[source]
        inner: Box<CorpusError>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    /// The underlying error with any file location stripped.
    pub fn kind(&self) -> &CorpusError {
        match self {
            CorpusError::InFile { inner, .. } => inner.kind(),
            other => other,
        }
    }

    /// Line number in the offending file, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::InFile { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub(crate) fn at(self, path: impl Into<PathBuf>, line: usize) -> CorpusError {
        CorpusError::InFile {
            path: path.into(),
            line,
            inner: Box::new(self),
        }
    }
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub user_id: Option<String>,
    pub created_at: Option<String>,
    pub text: String,
}

impl Tweet {
    /// A tweet with only an id and text.
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            user_id: None,
            created_at: None,
            text: text.into(),
        }
    }
}

/// A gold or predicted medication mention, `[start, end)` in code points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl Mention {
    pub fn new(start: usize, end: usize, surface: impl Into<String>) -> Self {
        Mention {
            start,
            end,
            surface: surface.into(),
        }
    }

    /// Builds a mention by slicing `text`, checking bounds.
    pub fn from_text(text: &str, start: usize, end: usize) -> Option<Self> {
        if start >= end {
            return None;
        }
        char_slice(text, start, end).map(|s| Mention::new(start, end, s))
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// A tweet with its validated, sorted, non-overlapping mentions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedTweet {
    tweet: Tweet,
    mentions: Vec<Mention>,
    provenance: Option<String>,
}

impl AnnotatedTweet {
    /// Validates and sorts `mentions` against `tweet.text`.
    pub fn new(tweet: Tweet, mut mentions: Vec<Mention>, provenance: Option<String>) -> Result<Self> {
        if tweet.id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        mentions.sort_by_key(|m| (m.start, m.end));
        let len = char_len(&tweet.text);
        for m in &mentions {
            validate_mention(&tweet, m, len)?;
        }
        for pair in mentions.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(CorpusError::OverlappingMentions {
                    id: tweet.id.clone(),
                    first_start: pair[0].start,
                    first_end: pair[0].end,
                    second_start: pair[1].start,
                    second_end: pair[1].end,
                });
            }
        }
        Ok(AnnotatedTweet {
            tweet,
            mentions,
            provenance,
        })
    }

    /// An unannotated tweet.
    pub fn unlabeled(tweet: Tweet) -> Result<Self> {
        AnnotatedTweet::new(tweet, Vec::new(), None)
    }

    pub fn tweet(&self) -> &Tweet {
        &self.tweet
    }

    pub fn id(&self) -> &str {
        &self.tweet.id
    }

    pub fn text(&self) -> &str {
        &self.tweet.text
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn with_provenance(mut self, provenance: Option<String>) -> Self {
        self.provenance = provenance;
        self
    }

    pub(crate) fn with_id(mut self, id: String) -> Self {
        self.tweet.id = id;
        self
    }

    pub fn is_positive(&self) -> bool {
        is_positive(self)
    }

    pub fn into_parts(self) -> (Tweet, Vec<Mention>, Option<String>) {
        (self.tweet, self.mentions, self.provenance)
    }
}

fn validate_mention(tweet: &Tweet, m: &Mention, len: usize) -> Result<()> {
    if m.start >= m.end || m.end > len {
        return Err(CorpusError::SpanOutOfBounds {
            id: tweet.id.clone(),
            start: m.start,
            end: m.end,
            len,
        });
    }
    let actual = char_slice(&tweet.text, m.start, m.end).unwrap_or_default();
    if actual != m.surface {
        return Err(CorpusError::SurfaceMismatch {
            id: tweet.id.clone(),
            start: m.start,
            end: m.end,
            annotated: m.surface.clone(),
            actual: actual.to_string(),
        });
    }
    Ok(())
}

/// True iff the tweet carries at least one mention.
pub fn is_positive(t: &AnnotatedTweet) -> bool {
    !t.mentions.is_empty()
}

/// A named collection of annotated tweets with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    name: String,
    tweets: Vec<AnnotatedTweet>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, tweets: Vec<AnnotatedTweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if !seen.insert(t.id()) {
                return Err(CorpusError::DuplicateTweetId(t.id().to_string()));
            }
        }
        Ok(Corpus {
            name: name.into(),
            tweets,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Corpus {
            name: name.into(),
            tweets: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tweets(&self) -> &[AnnotatedTweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedTweet> {
        self.tweets.iter().find(|t| t.id() == id)
    }

    pub fn positives(&self) -> impl Iterator<Item = &AnnotatedTweet> {
        self.tweets.iter().filter(|t| t.is_positive())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn into_tweets(self) -> Vec<AnnotatedTweet> {
        self.tweets
    }

    pub fn stats(&self) -> CorpusStats {
        corpus_stats(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub positive: usize,
    pub negative: usize,
    pub multi_mention: usize,
    /// `positive / total`, or 0 for an empty corpus.
    pub positive_pct: f64,
}

impl CorpusStats {
    /// Positive share in percent rounded to two decimals, e.g. `0.23`.
    pub fn positive_percent(&self) -> f64 {
        (self.positive_pct * 10_000.0).round() / 100.0
    }

    /// Percent form with two decimals, e.g. `"0.23%"`.
    pub fn positive_percent_display(&self) -> String {
        format!("{:.2}%", self.positive_pct * 100.0)
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total={} positive={} negative={} multi_mention={} positive_pct={}",
            self.total,
            self.positive,
            self.negative,
            self.multi_mention,
            self.positive_percent_display()
        )
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let total = corpus.len();
    let positive = corpus.positives().count();
    let multi_mention = corpus.tweets().iter().filter(|t| t.mentions().len() >= 2).count();
    let positive_pct = if total == 0 {
        0.0
    } else {
        positive as f64 / total as f64
    };
    CorpusStats {
        total,
        positive,
        negative: total - positive,
        multi_mention,
        positive_pct,
    }
}
