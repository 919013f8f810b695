//! Dictionary span predictor: case-insensitive, boundary-aware, longest match.

use std::collections::HashMap;

use crate::corpus::{Corpus, Mention};
use crate::evaluate::PredictionSet;
use crate::normalize::{clean_with_id, project_to_original};
use crate::pool::EntityPool;
use crate::text::{char_slice, fold_char};

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<char, usize>,
    terminal: bool,
}

/// Character trie over case-folded pool surfaces.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    nodes: Vec<Node>,
    entries: usize,
}

impl Gazetteer {
    pub fn new<I, S>(surfaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut g = Gazetteer {
            nodes: vec![Node::default()],
            entries: 0,
        };
        for s in surfaces {
            g.insert(s.as_ref());
        }
        g
    }

    pub fn from_pool(pool: &EntityPool) -> Self {
        Gazetteer::new(pool.surfaces())
    }

    fn insert(&mut self, surface: &str) {
        if surface.trim().is_empty() {
            return;
        }
        let mut at = 0;
        for c in surface.chars().map(fold_char) {
            at = match self.nodes[at].children.get(&c) {
                Some(&next) => next,
                None => {
                    self.nodes.push(Node::default());
                    let next = self.nodes.len() - 1;
                    self.nodes[at].children.insert(c, next);
                    next
                }
            };
        }
        if !self.nodes[at].terminal {
            self.nodes[at].terminal = true;
            self.entries += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    pub fn contains(&self, surface: &str) -> bool {
        let mut at = 0;
        for c in surface.chars().map(fold_char) {
            match self.nodes[at].children.get(&c) {
                Some(&next) => at = next,
                None => return false,
            }
        }
        self.nodes[at].terminal
    }

    /// Non-overlapping matches in `text`, sorted by start. Candidates are
    /// chosen longest first, earliest start breaking ties.
    pub fn find(&self, text: &str) -> Vec<(usize, usize)> {
        let chars: Vec<char> = text.chars().collect();
        let folded: Vec<char> = chars.iter().copied().map(fold_char).collect();
        let boundary = |i: usize| i == 0 || i >= chars.len() || !chars[i].is_alphabetic();

        let mut candidates = Vec::new();
        for start in 0..chars.len() {
            if start > 0 && !boundary(start - 1) {
                continue;
            }
            let mut at = 0;
            for (end, c) in folded.iter().enumerate().skip(start) {
                match self.nodes[at].children.get(c) {
                    Some(&next) => at = next,
                    None => break,
                }
                if self.nodes[at].terminal && boundary(end + 1) {
                    candidates.push((start, end + 1));
                }
            }
        }

        candidates.sort_by_key(|&(s, e)| (std::cmp::Reverse(e - s), s));
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for (s, e) in candidates {
            if chosen.iter().all(|&(cs, ce)| e <= cs || ce <= s) {
                chosen.push((s, e));
            }
        }
        chosen.sort_unstable();
        chosen
    }
}

fn spans_to_mentions(text: &str, spans: &[(usize, usize)]) -> Vec<Mention> {
    spans
        .iter()
        .map(|&(s, e)| Mention::new(s, e, char_slice(text, s, e).unwrap_or_default()))
        .collect()
}

/// Matches on each tweet's text as given.
pub fn predict(g: &Gazetteer, corpus: &Corpus) -> PredictionSet {
    let mut out = PredictionSet::default();
    for t in corpus.tweets() {
        let spans = g.find(t.text());
        out.insert(t.id(), spans_to_mentions(t.text(), &spans));
    }
    out
}

/// Matches on the cleaned text, then projects spans back to the original.
pub fn predict_normalized(g: &Gazetteer, corpus: &Corpus) -> PredictionSet {
    let mut out = PredictionSet::default();
    for t in corpus.tweets() {
        let cleaned = clean_with_id(t.id(), t.text());
        let spans: Vec<(usize, usize)> = g
            .find(&cleaned.cleaned_text)
            .into_iter()
            .map(|(s, e)| project_to_original(&cleaned.map, s, e).expect("match lies in cleaned text"))
            .collect();
        out.insert(t.id(), spans_to_mentions(t.text(), &spans));
    }
    out
}
