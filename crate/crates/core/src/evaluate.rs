//! Strict and overlapping span scoring, plus tweet-level classification
//! scores.
//!
//! Span pairs are matched one-to-one by maximum-cardinality bipartite
//! matching, and counts are micro-averaged over tweets unless
//! [`Averaging::Macro`] is requested.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Mention};
use crate::text::{escape_field, unescape_field};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction references unknown tweet id {0:?}")]
    UnknownTweetId(String),
    #[error("{}:{line}: {reason}", path.display())]
    Malformed { path: PathBuf, line: usize, reason: String },
}

/// Predicted spans per tweet id, in original-text coordinates. The surface
/// of a predicted span may be empty when the source did not supply one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionSet {
    spans: BTreeMap<String, Vec<Mention>>,
}

impl PredictionSet {
    /// Sets the spans for `id`, sorted by start.
    pub fn insert(&mut self, id: &str, mut spans: Vec<Mention>) {
        spans.sort_by_key(|m| (m.start, m.end));
        self.spans.insert(id.to_string(), spans);
    }

    pub fn get(&self, id: &str) -> Option<&[Mention]> {
        self.spans.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Mention])> {
        self.spans.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn span_count(&self) -> usize {
        self.spans.values().map(Vec::len).sum()
    }

    /// Gold mentions of `corpus` as a prediction set.
    pub fn from_gold(corpus: &Corpus) -> Self {
        let mut p = PredictionSet::default();
        for t in corpus.tweets() {
            p.insert(t.id(), t.mentions().to_vec());
        }
        p
    }

    /// Parses `tweet_id<TAB>start<TAB>end[<TAB>surface]` rows. Spans of a
    /// tweet must be non-empty and pairwise disjoint.
    pub fn read_tsv(content: &str, path: &Path) -> Result<Self, EvalError> {
        let malformed = |line: usize, reason: String| EvalError::Malformed {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut rows: BTreeMap<String, Vec<(usize, Mention)>> = BTreeMap::new();
        for (i, raw) in content.split('\n').enumerate() {
            let line = i + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 3 && cols.len() != 4 {
                return Err(malformed(line, format!("expected 4 columns, found {}", cols.len())));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| malformed(line, format!("{s:?} is not a non-negative integer")))
            };
            let (start, end) = (num(cols[1])?, num(cols[2])?);
            if start >= end {
                return Err(malformed(line, format!("empty or inverted span [{start}, {end})")));
            }
            let id = unescape_field(cols[0]).map_err(|e| malformed(line, e))?;
            let surface = match cols.get(3) {
                Some(s) => unescape_field(s).map_err(|e| malformed(line, e))?,
                None => String::new(),
            };
            rows.entry(id).or_default().push((line, Mention::new(start, end, surface)));
        }
        let mut set = PredictionSet::default();
        for (id, mut spans) in rows {
            spans.sort_by_key(|(_, m)| (m.start, m.end));
            for pair in spans.windows(2) {
                let (a, b) = (&pair[0].1, &pair[1].1);
                if b.start < a.end {
                    return Err(malformed(
                        pair[1].0,
                        format!(
                            "span [{}, {}) overlaps [{}, {}) for tweet {id:?}",
                            b.start, b.end, a.start, a.end
                        ),
                    ));
                }
            }
            set.insert(&id, spans.into_iter().map(|(_, m)| m).collect());
        }
        Ok(set)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, spans) in &self.spans {
            for m in spans {
                writeln!(w, "{}\t{}\t{}\t{}", escape_field(id), m.start, m.end, escape_field(&m.surface))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    Strict,
    Overlapping,
}

impl MatchMode {
    pub fn compatible(self, gold: (usize, usize), pred: (usize, usize)) -> bool {
        match self {
            MatchMode::Strict => gold == pred,
            MatchMode::Overlapping => gold.0 < pred.1 && pred.0 < gold.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    /// `(gold index, pred index)` pairs of the matching.
    pub pairs: Vec<(usize, usize)>,
}

/// Maximum-cardinality one-to-one matching between `gold` and `pred` on the
/// compatibility graph of `mode` (augmenting paths).
pub fn match_spans(gold: &[(usize, usize)], pred: &[(usize, usize)], mode: MatchMode) -> MatchResult {
    let adjacency: Vec<Vec<usize>> = gold
        .iter()
        .map(|&g| (0..pred.len()).filter(|&j| mode.compatible(g, pred[j])).collect())
        .collect();
    let mut pred_owner: Vec<Option<usize>> = vec![None; pred.len()];

    fn augment(
        g: usize,
        adjacency: &[Vec<usize>],
        visited: &mut [bool],
        pred_owner: &mut [Option<usize>],
    ) -> bool {
        for &p in &adjacency[g] {
            if visited[p] {
                continue;
            }
            visited[p] = true;
            let free = match pred_owner[p] {
                None => true,
                Some(other) => augment(other, adjacency, visited, pred_owner),
            };
            if free {
                pred_owner[p] = Some(g);
                return true;
            }
        }
        false
    }

    for g in 0..gold.len() {
        let mut visited = vec![false; pred.len()];
        augment(g, &adjacency, &mut visited, &mut pred_owner);
    }

    let mut pairs: Vec<(usize, usize)> = pred_owner
        .iter()
        .enumerate()
        .filter_map(|(p, owner)| owner.map(|g| (g, p)))
        .collect();
    pairs.sort_unstable();
    let tp = pairs.len();
    MatchResult {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
        pairs,
    }
}

pub fn match_mentions(gold: &[Mention], pred: &[Mention], mode: MatchMode) -> MatchResult {
    let g: Vec<(usize, usize)> = gold.iter().map(|m| (m.start, m.end)).collect();
    let p: Vec<(usize, usize)> = pred.iter().map(|m| (m.start, m.end)).collect();
    match_spans(&g, &p, mode)
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Scores {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Scores {
            precision,
            recall,
            f1: f1(precision, recall),
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Micro,
    /// Mean of per-tweet precision and recall over tweets with any gold or
    /// predicted span; F1 is taken from those means.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tweets: usize,
    pub gold_mentions: usize,
    pub predicted_mentions: usize,
    pub gold_positive_tweets: usize,
    pub predicted_positive_tweets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus: String,
    pub averaging: Averaging,
    pub strict: Scores,
    pub overlapping: Scores,
    pub tweet_level: Scores,
    pub counts: EvalCounts,
}

impl EvalReport {
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "corpus: {}  tweets: {}  gold mentions: {}  predicted mentions: {}  averaging: {:?}",
            self.corpus,
            self.counts.tweets,
            self.counts.gold_mentions,
            self.counts.predicted_mentions,
            self.averaging
        )?;
        writeln!(
            f,
            "{:<12} {:>9} {:>9} {:>9} {:>7} {:>7} {:>7}",
            "regime", "precision", "recall", "f1", "tp", "fp", "fn"
        )?;
        for (name, s) in [
            ("strict", &self.strict),
            ("overlapping", &self.overlapping),
            ("tweet_level", &self.tweet_level),
        ] {
            writeln!(
                f,
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>7} {:>7} {:>7}",
                name, s.precision, s.recall, s.f1, s.tp, s.fp, s.fn_
            )?;
        }
        Ok(())
    }
}

pub fn evaluate(gold: &Corpus, pred: &PredictionSet) -> Result<EvalReport, EvalError> {
    evaluate_with(gold, pred, Averaging::Micro)
}

pub fn evaluate_with(gold: &Corpus, pred: &PredictionSet, averaging: Averaging) -> Result<EvalReport, EvalError> {
    for (id, _) in pred.iter() {
        if gold.get(id).is_none() {
            return Err(EvalError::UnknownTweetId(id.to_string()));
        }
    }

    let mut strict = (0, 0, 0);
    let mut overlapping = (0, 0, 0);
    let mut tweet = (0, 0, 0);
    let mut macro_sums = [(0.0, 0.0); 2];
    let mut macro_n = 0usize;
    let mut counts = EvalCounts {
        tweets: gold.len(),
        gold_mentions: 0,
        predicted_mentions: 0,
        gold_positive_tweets: 0,
        predicted_positive_tweets: 0,
    };

    for t in gold.tweets() {
        let g = t.mentions();
        let p = pred.get(t.id()).unwrap_or(&[]);
        counts.gold_mentions += g.len();
        counts.predicted_mentions += p.len();

        let s = match_mentions(g, p, MatchMode::Strict);
        let o = match_mentions(g, p, MatchMode::Overlapping);
        for (acc, r) in [(&mut strict, &s), (&mut overlapping, &o)] {
            acc.0 += r.tp;
            acc.1 += r.fp;
            acc.2 += r.fn_;
        }
        if !g.is_empty() || !p.is_empty() {
            macro_n += 1;
            for (sum, r) in macro_sums.iter_mut().zip([&s, &o]) {
                sum.0 += ratio(r.tp, r.tp + r.fp);
                sum.1 += ratio(r.tp, r.tp + r.fn_);
            }
        }

        let (gp, pp) = (!g.is_empty(), !p.is_empty());
        counts.gold_positive_tweets += usize::from(gp);
        counts.predicted_positive_tweets += usize::from(pp);
        match (gp, pp) {
            (true, true) => tweet.0 += 1,
            (false, true) => tweet.1 += 1,
            (true, false) => tweet.2 += 1,
            (false, false) => {}
        }
    }

    let span_scores = |c: (usize, usize, usize), sums: (f64, f64)| match averaging {
        Averaging::Micro => Scores::from_counts(c.0, c.1, c.2),
        Averaging::Macro => {
            let (p, r) = if macro_n == 0 {
                (0.0, 0.0)
            } else {
                (sums.0 / macro_n as f64, sums.1 / macro_n as f64)
            };
            Scores {
                precision: p,
                recall: r,
                f1: f1(p, r),
                tp: c.0,
                fp: c.1,
                fn_: c.2,
            }
        }
    };

    Ok(EvalReport {
        corpus: gold.name().to_string(),
        averaging,
        strict: span_scores(strict, macro_sums[0]),
        overlapping: span_scores(overlapping, macro_sums[1]),
        tweet_level: Scores::from_counts(tweet.0, tweet.1, tweet.2),
        counts,
    })
}
