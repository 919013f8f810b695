//! Tweet TSV, annotation TSV and interchange (JSON lines) readers and writers.
//!
//! TSV readers skip blank lines and lines starting with `#`, so artifact files
//! may open with a provenance comment.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnnotatedTweet, Corpus, CorpusError, Mention, Result, Tweet};
use crate::text::{escape_field, unescape_field};

/// One parsed row of a tweet TSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRow {
    pub line: usize,
    pub tweet: Tweet,
    pub provenance: Option<String>,
}

/// One parsed row of an annotation TSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    pub line: usize,
    pub tweet_id: String,
    pub mention: Mention,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Yields `(line_number, content)` for every data line.
fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn optional(field: String) -> Option<String> {
    if field.is_empty() {
        None
    } else {
        Some(field)
    }
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRow(reason.into()).at(path, line)
}

fn unescape(path: &Path, line: usize, field: &str) -> Result<String> {
    unescape_field(field).map_err(|e| malformed(path, line, e))
}

/// Parses `id<TAB>user_id<TAB>created_at<TAB>text[<TAB>provenance]` rows.
pub fn read_tweets_tsv(content: &str, path: &Path) -> Result<Vec<TweetRow>> {
    let mut rows = Vec::new();
    for (line, raw) in data_lines(content) {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 4 && cols.len() != 5 {
            return Err(malformed(
                path,
                line,
                format!("expected 4 or 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = unescape(path, line, cols[0])?;
        if id.is_empty() {
            return Err(CorpusError::EmptyId.at(path, line));
        }
        let tweet = Tweet {
            id,
            user_id: optional(unescape(path, line, cols[1])?),
            created_at: optional(unescape(path, line, cols[2])?),
            text: unescape(path, line, cols[3])?,
        };
        let provenance = match cols.get(4) {
            Some(p) => optional(unescape(path, line, p)?),
            None => None,
        };
        rows.push(TweetRow {
            line,
            tweet,
            provenance,
        });
    }
    Ok(rows)
}

/// Parses `tweet_id<TAB>start<TAB>end<TAB>surface` rows. A missing or empty
/// surface column is allowed here; corpus loading rejects it as a mismatch.
pub fn read_annotations_tsv(content: &str, path: &Path) -> Result<Vec<AnnotationRow>> {
    let mut rows = Vec::new();
    for (line, raw) in data_lines(content) {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 3 && cols.len() != 4 {
            return Err(malformed(
                path,
                line,
                format!("expected 4 tab-separated columns, found {}", cols.len()),
            ));
        }
        let parse = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| malformed(path, line, format!("{what} {s:?} is not a non-negative integer")))
        };
        let start = parse(cols[1], "start")?;
        let end = parse(cols[2], "end")?;
        let surface = match cols.get(3) {
            Some(s) => unescape(path, line, s)?,
            None => String::new(),
        };
        rows.push(AnnotationRow {
            line,
            tweet_id: unescape(path, line, cols[0])?,
            mention: Mention::new(start, end, surface),
        });
    }
    Ok(rows)
}

fn read_file(path: &Path) -> Result<String> {
    let mut s = String::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(io_err(path))?;
    Ok(s)
}

/// Loads a corpus from a tweet TSV and an optional annotation TSV.
pub fn load_corpus(tweets_path: &Path, annotations_path: Option<&Path>, name: &str) -> Result<Corpus> {
    let rows = read_tweets_tsv(&read_file(tweets_path)?, tweets_path)?;

    let mut index: HashMap<String, usize> = HashMap::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if index.insert(row.tweet.id.clone(), i).is_some() {
            return Err(CorpusError::DuplicateTweetId(row.tweet.id.clone()).at(tweets_path, row.line));
        }
    }

    let mut per_tweet: Vec<Vec<AnnotationRow>> = vec![Vec::new(); rows.len()];
    if let Some(ann_path) = annotations_path {
        for ann in read_annotations_tsv(&read_file(ann_path)?, ann_path)? {
            let Some(&i) = index.get(&ann.tweet_id) else {
                return Err(CorpusError::UnknownTweetId(ann.tweet_id).at(ann_path, ann.line));
            };
            per_tweet[i].push(ann);
        }
    }

    let mut tweets = Vec::with_capacity(rows.len());
    for (row, mut anns) in rows.into_iter().zip(per_tweet) {
        anns.sort_by_key(|a| (a.mention.start, a.mention.end, a.line));
        let tweet_line = row.line;
        let result = AnnotatedTweet::new(
            row.tweet,
            anns.iter().map(|a| a.mention.clone()).collect(),
            row.provenance,
        );
        match result {
            Ok(t) => tweets.push(t),
            Err(err) => {
                // Attribute span errors to the offending annotation row.
                let (path, line) = match annotations_path {
                    Some(p) => (p, offending_line(&err, &anns).unwrap_or(tweet_line)),
                    None => (tweets_path, tweet_line),
                };
                return Err(err.at(path, line));
            }
        }
    }
    Corpus::new(name, tweets)
}

fn offending_line(err: &CorpusError, anns: &[AnnotationRow]) -> Option<usize> {
    let (start, end) = match err {
        CorpusError::SpanOutOfBounds { start, end, .. } | CorpusError::SurfaceMismatch { start, end, .. } => {
            (*start, *end)
        }
        CorpusError::OverlappingMentions {
            second_start,
            second_end,
            ..
        } => (*second_start, *second_end),
        _ => return None,
    };
    anns.iter()
        .filter(|a| a.mention.start == start && a.mention.end == end)
        .map(|a| a.line)
        .max()
}

pub fn write_tweets_tsv<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for t in corpus.tweets() {
        let tw = t.tweet();
        write!(
            w,
            "{}\t{}\t{}\t{}",
            escape_field(&tw.id),
            escape_field(tw.user_id.as_deref().unwrap_or("")),
            escape_field(tw.created_at.as_deref().unwrap_or("")),
            escape_field(&tw.text)
        )?;
        if let Some(p) = t.provenance() {
            write!(w, "\t{}", escape_field(p))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_annotations_tsv<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for t in corpus.tweets() {
        for m in t.mentions() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                escape_field(t.id()),
                m.start,
                m.end,
                escape_field(&m.surface)
            )?;
        }
    }
    Ok(())
}

/// Writes both TSV files for `corpus`.
pub fn save_corpus_tsv(corpus: &Corpus, tweets_path: &Path, annotations_path: &Path) -> Result<()> {
    let write = |path: &Path, f: &dyn Fn(&mut BufWriter<fs::File>) -> std::io::Result<()>| -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
        f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
    };
    write(tweets_path, &|w| write_tweets_tsv(corpus, w))?;
    write(annotations_path, &|w| write_annotations_tsv(corpus, w))
}

#[derive(Debug, Serialize, Deserialize)]
struct InterchangeSpan {
    start: usize,
    end: usize,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct InterchangeRecord {
    id: String,
    text: String,
    spans: Vec<InterchangeSpan>,
    label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    created_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

pub fn write_interchange_to<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for t in corpus.tweets() {
        let record = InterchangeRecord {
            id: t.id().to_string(),
            text: t.text().to_string(),
            spans: t
                .mentions()
                .iter()
                .map(|m| InterchangeSpan {
                    start: m.start,
                    end: m.end,
                    text: m.surface.clone(),
                })
                .collect(),
            label: u8::from(t.is_positive()),
            user_id: t.tweet().user_id.clone(),
            created_at: t.tweet().created_at.clone(),
            provenance: t.provenance().map(str::to_string),
        };
        serde_json::to_writer(&mut w, &record)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Writes one interchange record per tweet.
pub fn write_interchange(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
    write_interchange_to(corpus, &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn read_interchange_from<R: BufRead>(reader: R, path: &Path, name: &str) -> Result<Corpus> {
    let mut tweets = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InterchangeRecord =
            serde_json::from_str(&line).map_err(|e| malformed(path, line_no, e.to_string()))?;
        if rec.label > 1 {
            return Err(malformed(path, line_no, format!("label must be 0 or 1, found {}", rec.label)));
        }
        if (rec.label == 1) != !rec.spans.is_empty() {
            return Err(malformed(path, line_no, "label disagrees with spans"));
        }
        let tweet = Tweet {
            id: rec.id,
            user_id: rec.user_id,
            created_at: rec.created_at,
            text: rec.text,
        };
        let mentions = rec
            .spans
            .into_iter()
            .map(|s| Mention::new(s.start, s.end, s.text))
            .collect();
        let t = AnnotatedTweet::new(tweet, mentions, rec.provenance).map_err(|e| e.at(path, line_no))?;
        tweets.push(t);
    }
    Corpus::new(name, tweets)
}

pub fn read_interchange(path: &Path, name: &str) -> Result<Corpus> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    read_interchange_from(BufReader::new(f), path, name)
}
