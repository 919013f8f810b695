//! Offset-preserving tweet cleaning and a whitespace/punctuation tokenizer.
//!
//! Cleaning is a pure filter over code points: characters are removed, never
//! inserted or rewritten, so each survivor keeps a recorded original index.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::corpus::{AnnotatedTweet, Corpus, Mention, Tweet};
use crate::text::{char_len, char_slice};

/// Symbols removed when they stand alone between whitespace or text bounds.
pub const STANDALONE_SYMBOLS: [char; 11] = ['#', '$', '%', '&', '@', '+', '*', '^', '`', '|', '~'];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("span [{start}, {end}) out of bounds for length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("offset map is not strictly increasing at position {0}")]
    NotMonotone(usize),
    #[error("offset map entry {index} exceeds original length {len}")]
    EntryOutOfRange { index: usize, len: usize },
}

/// Maps every cleaned code point to its index in the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    cleaned_to_original: Vec<usize>,
    original_len: usize,
}

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        OffsetMap {
            cleaned_to_original: (0..len).collect(),
            original_len: len,
        }
    }

    /// Validates a map read back from a sidecar file.
    pub fn from_indices(indices: Vec<usize>, original_len: usize) -> Result<Self, NormalizeError> {
        for (i, pair) in indices.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(NormalizeError::NotMonotone(i + 1));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= original_len {
                return Err(NormalizeError::EntryOutOfRange {
                    index: last,
                    len: original_len,
                });
            }
        }
        Ok(OffsetMap {
            cleaned_to_original: indices,
            original_len,
        })
    }

    pub fn len(&self) -> usize {
        self.cleaned_to_original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cleaned_to_original.is_empty()
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.cleaned_to_original
    }

    pub fn is_identity(&self) -> bool {
        self.original_len == self.len() && self.cleaned_to_original.iter().enumerate().all(|(i, &o)| i == o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanedTweet {
    pub source_id: String,
    pub cleaned_text: String,
    pub map: OffsetMap,
}

fn is_standalone(chars: &[char], i: usize) -> bool {
    let left = i == 0 || chars[i - 1].is_whitespace();
    let right = i + 1 == chars.len() || chars[i + 1].is_whitespace();
    left && right
}

/// Cleans `text`: drops every code point at or above U+0080, then drops
/// whitespace-bounded single symbols from [`STANDALONE_SYMBOLS`]. The second
/// rule is evaluated on the output of the first.
pub fn clean_text(text: &str) -> CleanedTweet {
    clean_with_id("", text)
}

pub fn clean_with_id(id: &str, text: &str) -> CleanedTweet {
    let ascii: Vec<(usize, char)> = text.chars().enumerate().filter(|(_, c)| c.is_ascii()).collect();
    let chars: Vec<char> = ascii.iter().map(|&(_, c)| c).collect();

    let mut cleaned = String::with_capacity(chars.len());
    let mut map = Vec::with_capacity(chars.len());
    for (i, &(orig, c)) in ascii.iter().enumerate() {
        if STANDALONE_SYMBOLS.contains(&c) && is_standalone(&chars, i) {
            continue;
        }
        cleaned.push(c);
        map.push(orig);
    }
    CleanedTweet {
        source_id: id.to_string(),
        cleaned_text: cleaned,
        map: OffsetMap {
            cleaned_to_original: map,
            original_len: char_len(text),
        },
    }
}

/// Maps a cleaned-coordinate span to original coordinates.
pub fn project_to_original(map: &OffsetMap, start: usize, end: usize) -> Result<(usize, usize), NormalizeError> {
    if start >= end || end > map.len() {
        return Err(NormalizeError::SpanOutOfBounds {
            start,
            end,
            len: map.len(),
        });
    }
    Ok((map.cleaned_to_original[start], map.cleaned_to_original[end - 1] + 1))
}

/// Outcome of carrying an original span into cleaned coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Every original character survived cleaning.
    Exact(usize, usize),
    /// Some characters were removed; the span covers the survivors.
    Partial(usize, usize),
    /// Nothing survived.
    Empty,
}

impl Projection {
    pub fn span(&self) -> Option<(usize, usize)> {
        match *self {
            Projection::Exact(s, e) | Projection::Partial(s, e) => Some((s, e)),
            Projection::Empty => None,
        }
    }
}

/// Maps an original-coordinate span to the minimal cleaned span covering
/// its surviving characters.
pub fn project_to_cleaned(map: &OffsetMap, start: usize, end: usize) -> Result<Projection, NormalizeError> {
    if start >= end || end > map.original_len {
        return Err(NormalizeError::SpanOutOfBounds {
            start,
            end,
            len: map.original_len,
        });
    }
    let m = &map.cleaned_to_original;
    let first = m.partition_point(|&o| o < start);
    let last = m.partition_point(|&o| o < end);
    Ok(match last - first {
        0 => Projection::Empty,
        n if n == end - start => Projection::Exact(first, last),
        _ => Projection::Partial(first, last),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Maximal non-whitespace runs, with each ASCII punctuation character split
/// into its own token. Offsets are code points into `text`.
pub fn tokenize_str(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let flush = |current: &mut Option<(usize, String)>, tokens: &mut Vec<Token>, end: usize| {
        if let Some((start, text)) = current.take() {
            tokens.push(Token { text, start, end });
        }
    };
    for (i, c) in text.chars().enumerate() {
        if c.is_whitespace() {
            flush(&mut current, &mut tokens, i);
        } else if c.is_ascii_punctuation() {
            flush(&mut current, &mut tokens, i);
            tokens.push(Token {
                text: c.to_string(),
                start: i,
                end: i + 1,
            });
        } else {
            current.get_or_insert_with(|| (i, String::new())).1.push(c);
        }
    }
    flush(&mut current, &mut tokens, char_len(text));
    tokens
}

pub fn tokenize(cleaned: &CleanedTweet) -> Vec<Token> {
    tokenize_str(&cleaned.cleaned_text)
}

/// Writes the `id<TAB>i,j,k` offset sidecar.
pub fn write_offset_sidecar<'a, W: Write>(
    maps: impl IntoIterator<Item = &'a CleanedTweet>,
    mut w: W,
) -> std::io::Result<()> {
    for c in maps {
        let indices: Vec<String> = c.map.as_slice().iter().map(usize::to_string).collect();
        writeln!(w, "{}\t{}", crate::text::escape_field(&c.source_id), indices.join(","))?;
    }
    Ok(())
}

/// Parses an offset sidecar into raw index lists keyed by tweet id.
pub fn read_offset_sidecar(content: &str) -> Result<BTreeMap<String, Vec<usize>>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected id<TAB>indices", i + 1))?;
        let id = crate::text::unescape_field(id).map_err(|e| format!("line {}: {e}", i + 1))?;
        let indices = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|s| s.parse::<usize>().map_err(|_| format!("line {}: bad index {s:?}", i + 1)))
                .collect::<Result<Vec<_>, _>>()?
        };
        out.insert(id, indices);
    }
    Ok(out)
}

/// A corpus carried into cleaned coordinates, with its offset maps.
#[derive(Debug, Clone)]
pub struct NormalizedCorpus {
    pub corpus: Corpus,
    pub cleaned: Vec<CleanedTweet>,
    /// Gold mentions that lost some characters during cleaning.
    pub partial: Vec<(String, Mention)>,
    /// Gold mentions with no surviving characters; these are dropped.
    pub dropped: Vec<(String, Mention)>,
}

/// Cleans every tweet and projects its gold mentions into cleaned space.
pub fn normalize_corpus(corpus: &Corpus) -> NormalizedCorpus {
    let mut tweets = Vec::with_capacity(corpus.len());
    let mut cleaned_all = Vec::with_capacity(corpus.len());
    let mut partial = Vec::new();
    let mut dropped = Vec::new();
    for t in corpus.tweets() {
        let cleaned = clean_with_id(t.id(), t.text());
        let mut mentions = Vec::with_capacity(t.mentions().len());
        for m in t.mentions() {
            let projection = project_to_cleaned(&cleaned.map, m.start, m.end)
                .expect("validated mention is within its tweet");
            match projection {
                Projection::Exact(s, e) | Projection::Partial(s, e) => {
                    if matches!(projection, Projection::Partial(..)) {
                        partial.push((t.id().to_string(), m.clone()));
                    }
                    let surface = char_slice(&cleaned.cleaned_text, s, e).unwrap_or_default();
                    mentions.push(Mention::new(s, e, surface));
                }
                Projection::Empty => dropped.push((t.id().to_string(), m.clone())),
            }
        }
        let tweet = Tweet {
            text: cleaned.cleaned_text.clone(),
            ..t.tweet().clone()
        };
        tweets.push(
            AnnotatedTweet::new(tweet, mentions, t.provenance().map(str::to_string))
                .expect("projected mentions stay sorted and disjoint"),
        );
        cleaned_all.push(cleaned);
    }
    NormalizedCorpus {
        corpus: Corpus::new(corpus.name(), tweets).expect("ids unchanged"),
        cleaned: cleaned_all,
        partial,
        dropped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(indices: &[usize], original_len: usize) -> OffsetMap {
        OffsetMap::from_indices(indices.to_vec(), original_len).unwrap()
    }

    #[test]
    fn removes_emoji() {
        let c = clean_text("I took Tylenol 💊");
        assert_eq!(c.cleaned_text, "I took Tylenol ");
        assert_eq!(c.map.as_slice(), (0..15).collect::<Vec<_>>().as_slice());
        assert_eq!(c.map.original_len(), 16);
    }

    #[test]
    fn removes_standalone_symbol_only() {
        let c = clean_text("price $ high");
        assert_eq!(c.cleaned_text, "price  high");
        assert!(!c.map.as_slice().contains(&6));
        assert_eq!(c.map.len(), 11);

        let c = clean_text("$5 copay");
        assert_eq!(c.cleaned_text, "$5 copay");
        assert!(c.map.is_identity());

        assert_eq!(clean_text("#tylenol @mom ~").cleaned_text, "#tylenol @mom ");
        assert_eq!(clean_text("~").cleaned_text, "");
        assert_eq!(clean_text("a \\ b").cleaned_text, "a \\ b");
    }

    #[test]
    fn symbol_exposed_by_emoji_removal_is_standalone() {
        let c = clean_text("$💊 x");
        assert_eq!(c.cleaned_text, " x");
        assert_eq!(c.map.as_slice(), &[2, 3]);
    }

    #[test]
    fn all_removed_is_empty() {
        let c = clean_text("💊🤰");
        assert_eq!(c.cleaned_text, "");
        assert!(c.map.is_empty());
    }

    #[test]
    fn projects_to_original() {
        let id = OffsetMap::identity(10);
        assert_eq!(project_to_original(&id, 2, 5), Ok((2, 5)));
        let m = map(&[0, 1, 2, 4, 5], 6);
        assert_eq!(project_to_original(&m, 3, 5), Ok((4, 6)));
        assert_eq!(project_to_original(&m, 0, 5), Ok((0, 6)));
        assert!(matches!(
            project_to_original(&m, 4, 6),
            Err(NormalizeError::SpanOutOfBounds { .. })
        ));
        assert!(project_to_original(&m, 2, 2).is_err());
    }

    #[test]
    fn projects_to_cleaned() {
        let id = OffsetMap::identity(10);
        assert_eq!(project_to_cleaned(&id, 2, 5), Ok(Projection::Exact(2, 5)));
        let m = map(&[0, 1, 2, 4, 5], 6);
        assert_eq!(project_to_cleaned(&m, 3, 6), Ok(Projection::Partial(3, 5)));
        assert_eq!(project_to_cleaned(&m, 3, 4), Ok(Projection::Empty));
        let m = map(&[0, 1, 2], 5);
        assert_eq!(project_to_cleaned(&m, 3, 5), Ok(Projection::Empty));
        assert!(project_to_cleaned(&m, 3, 6).is_err());
    }

    #[test]
    fn rejects_bad_maps() {
        assert_eq!(OffsetMap::from_indices(vec![0, 2, 2], 5), Err(NormalizeError::NotMonotone(2)));
        assert!(OffsetMap::from_indices(vec![0, 5], 5).is_err());
    }

    #[test]
    fn tokenizes() {
        let toks = |s: &str| -> Vec<(String, usize, usize)> {
            tokenize_str(s).into_iter().map(|t| (t.text, t.start, t.end)).collect()
        };
        assert_eq!(
            toks("took tylenol."),
            vec![("took".into(), 0, 4), ("tylenol".into(), 5, 12), (".".into(), 12, 13)]
        );
        assert!(toks("").is_empty());
        assert_eq!(toks("a  b"), vec![("a".into(), 0, 1), ("b".into(), 3, 4)]);
        assert_eq!(
            toks("#vitamin-d"),
            vec![("#".into(), 0, 1), ("vitamin".into(), 1, 8), ("-".into(), 8, 9), ("d".into(), 9, 10)]
        );
    }

    #[test]
    fn normalizes_corpus_mentions() {
        let text = "took 💊tylenol today";
        let m = Mention::from_text(text, 5, 13).unwrap();
        let keep = Mention::from_text(text, 14, 19).unwrap();
        let c = Corpus::new(
            "c",
            vec![AnnotatedTweet::new(Tweet::new("t1", text), vec![m, keep], None).unwrap()],
        )
        .unwrap();
        let n = normalize_corpus(&c);
        let t = &n.corpus.tweets()[0];
        assert_eq!(t.text(), "took tylenol today");
        assert_eq!(t.mentions()[0], Mention::new(5, 12, "tylenol"));
        assert_eq!(t.mentions()[1], Mention::new(13, 18, "today"));
        assert_eq!(n.partial.len(), 1);
        assert!(n.dropped.is_empty());
    }

    #[test]
    fn sidecar_roundtrip() {
        let cleaned = vec![clean_with_id("t1", "a💊b"), clean_with_id("t2", "💊")];
        let mut buf = Vec::new();
        write_offset_sidecar(&cleaned, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t1\t0,2\nt2\t\n");
        let back = read_offset_sidecar(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back["t1"], vec![0, 2]);
        assert!(back["t2"].is_empty());
    }
}
