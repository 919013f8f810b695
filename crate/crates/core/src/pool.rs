//! Medication mention pool, curated term lists and the tweet fetcher interface.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{AnnotatedTweet, Corpus, Mention, Tweet};
use crate::text::{casefold, char_len, escape_field, find_casefolded, unescape_field};

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("entity pool is empty: no input corpus contains a mention")]
    EmptyPool,
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Malformed { path: PathBuf, line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    /// Casing of the first occurrence seen.
    pub surface: String,
    pub sources: BTreeSet<String>,
}

/// Case-folded, deduplicated medication surfaces with provenance.
///
/// Entries are kept ordered by their folded key.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EntityPool {
    entries: BTreeMap<String, PoolEntry>,
}

impl EntityPool {
    /// Adds a surface; blank surfaces are ignored. Returns true if new.
    pub fn insert(&mut self, surface: &str, source: &str) -> bool {
        if surface.trim().is_empty() {
            return false;
        }
        let key = casefold(surface);
        let mut added = false;
        let entry = self.entries.entry(key).or_insert_with(|| {
            added = true;
            PoolEntry {
                surface: surface.to_string(),
                sources: BTreeSet::new(),
            }
        });
        entry.sources.insert(source.to_string());
        added
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &PoolEntry> {
        self.entries.values()
    }

    pub fn get(&self, surface: &str) -> Option<&PoolEntry> {
        self.entries.get(&casefold(surface))
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.get(surface).is_some()
    }

    /// Folded keys in order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Surfaces in key order; indexable for uniform sampling.
    pub fn surfaces(&self) -> Vec<&str> {
        self.entries.values().map(|e| e.surface.as_str()).collect()
    }

    /// Writes `surface<TAB>source,source` lines.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in self.entries() {
            let sources: Vec<&str> = e.sources.iter().map(String::as_str).collect();
            writeln!(w, "{}\t{}", escape_field(&e.surface), sources.join(","))?;
        }
        Ok(())
    }

    /// Reads a pool file. A line with only a surface (a plain term list) is
    /// accepted and attributed to `default_source`.
    pub fn read_tsv(content: &str, path: &Path, default_source: &str) -> Result<Self, PoolError> {
        let mut pool = EntityPool::default();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, sources) = line.split_once('\t').unwrap_or((line, ""));
            let surface = unescape_field(surface).map_err(|reason| PoolError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            })?;
            let sources: Vec<&str> = sources.split(',').filter(|s| !s.is_empty()).collect();
            if sources.is_empty() {
                pool.insert(surface.trim(), default_source);
            }
            for s in sources {
                pool.insert(surface.trim(), s);
            }
        }
        Ok(pool)
    }

    pub fn load(path: &Path) -> Result<Self, PoolError> {
        let content = fs::read_to_string(path).map_err(|source| PoolError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("pool");
        EntityPool::read_tsv(&content, path, name)
    }
}

/// Collects the distinct mention surfaces of `corpora`.
pub fn build_pool<'a>(corpora: impl IntoIterator<Item = &'a Corpus>) -> Result<EntityPool, PoolError> {
    let mut pool = EntityPool::default();
    for corpus in corpora {
        for t in corpus.tweets() {
            for m in t.mentions() {
                pool.insert(&m.surface, corpus.name());
            }
        }
    }
    if pool.is_empty() {
        return Err(PoolError::EmptyPool);
    }
    Ok(pool)
}

/// Case-folded, deduplicated, lexicographically sorted search terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermList {
    terms: Vec<String>,
}

impl TermList {
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = terms
            .into_iter()
            .map(|t| casefold(t.as_ref().trim()))
            .filter(|t| !t.is_empty())
            .collect();
        TermList {
            terms: set.into_iter().collect(),
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Parses a one-term-per-line file, skipping blanks and `#` comments.
    pub fn parse(content: &str) -> Self {
        TermList::from_terms(parse_term_lines(content))
    }

    pub fn load(path: &Path) -> Result<Self, PoolError> {
        Ok(TermList::parse(&read_to_string(path)?))
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in &self.terms {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }
}

fn parse_term_lines(content: &str) -> impl Iterator<Item = &str> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read_to_string(path: &Path) -> Result<String, PoolError> {
    fs::read_to_string(path).map_err(|source| PoolError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Union of pool surfaces and curated term files.
pub fn merge_terms<P: AsRef<Path>>(pool: &EntityPool, curated_files: &[P]) -> Result<TermList, PoolError> {
    let mut contents = Vec::with_capacity(curated_files.len());
    for p in curated_files {
        contents.push(read_to_string(p.as_ref())?);
    }
    let curated = contents.iter().flat_map(|c| parse_term_lines(c));
    Ok(TermList::from_terms(pool.surfaces().into_iter().chain(curated)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchRequest {
    pub term: String,
    pub limit: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("fetch failed for term {term:?}: {reason}")]
pub struct FetchError {
    pub term: String,
    pub reason: String,
}

/// Source of additional tweets for a search term.
pub trait TweetFetcher: Sync {
    fn fetch(&self, request: &FetchRequest) -> Result<Vec<Tweet>, FetchError>;
}

/// Offline fetcher answering from canned tweets keyed by folded term.
#[derive(Debug, Clone, Default)]
pub struct FixtureFetcher {
    canned: BTreeMap<String, Vec<Tweet>>,
    failing: BTreeSet<String>,
}

impl FixtureFetcher {
    pub fn new() -> Self {
        FixtureFetcher::default()
    }

    pub fn with_tweets(mut self, term: &str, tweets: Vec<Tweet>) -> Self {
        self.canned.entry(casefold(term)).or_default().extend(tweets);
        self
    }

    /// Makes every request for `term` fail.
    pub fn failing(mut self, term: &str) -> Self {
        self.failing.insert(casefold(term));
        self
    }

    /// Reads `term<TAB>id<TAB>user_id<TAB>created_at<TAB>text` rows; text is
    /// escaped as in the tweet TSV format.
    pub fn from_tsv(content: &str, path: &Path) -> Result<Self, PoolError> {
        let mut fetcher = FixtureFetcher::new();
        for (i, line) in content.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| PoolError::Malformed {
                path: path.to_path_buf(),
                line: i + 1,
                reason,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(malformed(format!("expected 5 columns, found {}", cols.len())));
            }
            let field = |s: &str| unescape_field(s).map_err(malformed);
            let opt = |s: String| if s.is_empty() { None } else { Some(s) };
            let tweet = Tweet {
                id: field(cols[1])?,
                user_id: opt(field(cols[2])?),
                created_at: opt(field(cols[3])?),
                text: field(cols[4])?,
            };
            if tweet.id.is_empty() {
                return Err(malformed("empty tweet id".into()));
            }
            fetcher = fetcher.with_tweets(&field(cols[0])?, vec![tweet]);
        }
        Ok(fetcher)
    }

    pub fn load(path: &Path) -> Result<Self, PoolError> {
        FixtureFetcher::from_tsv(&read_to_string(path)?, path)
    }
}

impl TweetFetcher for FixtureFetcher {
    fn fetch(&self, request: &FetchRequest) -> Result<Vec<Tweet>, FetchError> {
        let key = casefold(&request.term);
        if self.failing.contains(&key) {
            return Err(FetchError {
                term: request.term.clone(),
                reason: "fixture configured to fail".into(),
            });
        }
        Ok(self
            .canned
            .get(&key)
            .map(|v| v.iter().take(request.limit).cloned().collect())
            .unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchReportRow {
    pub term: String,
    pub requested: usize,
    /// Valid tweets kept for this term, before cross-term deduplication.
    pub returned: usize,
    /// Tweets dropped because their text lacks the term.
    pub invalid: usize,
    pub status: FetchStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FetchReport {
    pub rows: Vec<FetchReportRow>,
}

impl FetchReport {
    pub fn failures(&self) -> impl Iterator<Item = &FetchReportRow> {
        self.rows.iter().filter(|r| r.status != FetchStatus::Ok)
    }

    /// `term<TAB>requested<TAB>returned<TAB>status`
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.rows {
            let status = match &r.status {
                FetchStatus::Ok => "ok".to_string(),
                FetchStatus::Failed(reason) => format!("error: {}", escape_field(reason)),
            };
            writeln!(w, "{}\t{}\t{}\t{}", escape_field(&r.term), r.requested, r.returned, status)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FetchLabeling {
    /// Fetched tweets carry no mentions.
    #[default]
    Unlabeled,
    /// A mention is synthesized at the first match of the query term.
    AssumePositiveOnTermMatch,
}

#[derive(Debug, Clone)]
pub struct FetchOutcome {
    pub corpus: Corpus,
    pub report: FetchReport,
}

/// Queries `client` for every term and merges the valid results.
///
/// Requests may run concurrently; the merged corpus is ordered by term, then
/// tweet id, and deduplicated by id keeping the first occurrence.
pub fn fetch_corpus(
    client: &dyn TweetFetcher,
    terms: &TermList,
    limit_per_term: usize,
    labeling: FetchLabeling,
    name: &str,
) -> FetchOutcome {
    let results: Vec<(FetchReportRow, Vec<Tweet>)> = terms
        .terms()
        .par_iter()
        .map(|term| {
            let request = FetchRequest {
                term: term.clone(),
                limit: limit_per_term,
            };
            match client.fetch(&request) {
                Ok(mut tweets) => {
                    tweets.truncate(limit_per_term);
                    let before = tweets.len();
                    tweets.retain(|t| find_casefolded(&t.text, term).is_some());
                    tweets.sort_by(|a, b| a.id.cmp(&b.id));
                    let row = FetchReportRow {
                        term: term.clone(),
                        requested: limit_per_term,
                        returned: tweets.len(),
                        invalid: before - tweets.len(),
                        status: FetchStatus::Ok,
                    };
                    (row, tweets)
                }
                Err(e) => {
                    log::warn!("{e}");
                    let row = FetchReportRow {
                        term: term.clone(),
                        requested: limit_per_term,
                        returned: 0,
                        invalid: 0,
                        status: FetchStatus::Failed(e.reason),
                    };
                    (row, Vec::new())
                }
            }
        })
        .collect();

    let mut seen = HashSet::new();
    let mut tweets = Vec::new();
    let mut report = FetchReport::default();
    for (row, fetched) in results {
        for tweet in fetched {
            if !seen.insert(tweet.id.clone()) {
                continue;
            }
            let mentions = match labeling {
                FetchLabeling::Unlabeled => Vec::new(),
                FetchLabeling::AssumePositiveOnTermMatch => {
                    let start = find_casefolded(&tweet.text, &row.term).expect("validated above");
                    let end = start + char_len(&row.term);
                    vec![Mention::from_text(&tweet.text, start, end).expect("match within text")]
                }
            };
            let provenance = Some(format!("{name}:term={}", row.term));
            tweets.push(AnnotatedTweet::new(tweet, mentions, provenance).expect("synthesized span is valid"));
        }
        report.rows.push(row);
    }
    FetchOutcome {
        corpus: Corpus::new(name, tweets).expect("deduplicated by id"),
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Mention;

    fn corpus(name: &str, surfaces: &[&str]) -> Corpus {
        let tweets = surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let text = format!("took {s}");
                let m = Mention::from_text(&text, 5, 5 + char_len(s)).unwrap();
                AnnotatedTweet::new(Tweet::new(format!("{name}-{i}"), text), vec![m], None).unwrap()
            })
            .collect();
        Corpus::new(name, tweets).unwrap()
    }

    #[test]
    fn pool_dedupes_case_folded() {
        let a = corpus("a", &["tylenol", "Advil"]);
        let b = corpus("b", &["ADVIL", "zofran"]);
        let pool = build_pool([&a, &b]).unwrap();
        assert_eq!(pool.len(), 3);
        let advil = pool.get("advil").unwrap();
        assert_eq!(advil.surface, "Advil");
        assert_eq!(advil.sources.iter().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn pool_errors_and_sizes() {
        let empty = Corpus::new("e", vec![AnnotatedTweet::unlabeled(Tweet::new("x", "hi")).unwrap()]).unwrap();
        assert!(matches!(build_pool([&empty]), Err(PoolError::EmptyPool)));
        let same = corpus("s", &["advil"; 5]);
        assert_eq!(build_pool([&same]).unwrap().len(), 1);
    }

    #[test]
    fn pool_tsv_roundtrip() {
        let a = corpus("a", &["tylenol", "Vitamin D"]);
        let b = corpus("b", &["vitamin d"]);
        let pool = build_pool([&a, &b]).unwrap();
        let mut buf = Vec::new();
        pool.write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "tylenol\ta\nVitamin D\ta,b\n");
        let back = EntityPool::read_tsv(std::str::from_utf8(&buf).unwrap(), Path::new("p"), "x").unwrap();
        assert_eq!(back, pool);
        let plain = EntityPool::read_tsv("# terms\nadvil\n", Path::new("p"), "curated").unwrap();
        assert!(plain.get("ADVIL").unwrap().sources.contains("curated"));
    }

    #[test]
    fn merges_curated_terms() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("curated.txt");
        fs::write(&f, "# comment\nPrenatal Vitamin\ntylenol\n\n").unwrap();
        let pool = build_pool([&corpus("a", &["tylenol"])]).unwrap();
        let terms = merge_terms(&pool, &[&f]).unwrap();
        assert_eq!(terms.terms(), &["prenatal vitamin", "tylenol"]);

        let none: [&Path; 0] = [];
        let terms = merge_terms(&build_pool([&corpus("a", &["Tylenol", "Advil"])]).unwrap(), &none).unwrap();
        assert_eq!(terms.terms(), &["advil", "tylenol"]);

        let missing = dir.path().join("missing.txt");
        assert!(matches!(merge_terms(&pool, &[missing]), Err(PoolError::Io { .. })));
    }

    fn canned(ids: &[&str], text: &str) -> Vec<Tweet> {
        ids.iter().map(|id| Tweet::new(*id, text)).collect()
    }

    #[test]
    fn fetch_with_fixture_client() {
        let client = FixtureFetcher::new().with_tweets("tylenol", canned(&["a", "b", "c"], "Tylenol works"));
        let out = fetch_corpus(
            &client,
            &TermList::from_terms(["tylenol"]),
            10,
            FetchLabeling::Unlabeled,
            "new",
        );
        assert_eq!(out.corpus.len(), 3);
        assert_eq!(out.report.rows[0].requested, 10);
        assert_eq!(out.report.rows[0].returned, 3);
        assert!(out.corpus.tweets().iter().all(|t| !t.is_positive()));
    }

    #[test]
    fn fetch_filters_dedupes_and_survives_failures() {
        let client = FixtureFetcher::new()
            .with_tweets("advil", canned(&["x"], "advil and tylenol"))
            .with_tweets("advil", canned(&["bad"], "nothing relevant"))
            .with_tweets("tylenol", canned(&["x"], "advil and tylenol"))
            .failing("zofran");
        let terms = TermList::from_terms(["advil", "tylenol", "zofran"]);
        let out = fetch_corpus(&client, &terms, 10, FetchLabeling::AssumePositiveOnTermMatch, "new");
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.report.rows[0].invalid, 1);
        assert_eq!(out.report.failures().count(), 1);
        let t = &out.corpus.tweets()[0];
        assert_eq!(t.mentions(), &[Mention::new(0, 5, "advil")]);

        let mut buf = Vec::new();
        out.report.write_tsv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("advil\t10\t1\tok\n"));
        assert!(s.contains("zofran\t10\t0\terror: "));
    }

    #[test]
    fn fetch_respects_limit() {
        let client = FixtureFetcher::new().with_tweets("advil", canned(&["1", "2", "3", "4"], "advil"));
        let out = fetch_corpus(&client, &TermList::from_terms(["advil"]), 2, FetchLabeling::Unlabeled, "n");
        assert_eq!(out.corpus.len(), 2);
    }

    #[test]
    fn fixture_tsv_parses() {
        let f = FixtureFetcher::from_tsv("tylenol\tt1\tu\t\tneed tylenol\\tnow\n", Path::new("f")).unwrap();
        let got = f
            .fetch(&FetchRequest {
                term: "TYLENOL".into(),
                limit: 5,
            })
            .unwrap();
        assert_eq!(got[0].text, "need tylenol\tnow");
        assert!(FixtureFetcher::from_tsv("a\tb\n", Path::new("f")).is_err());
    }
}
