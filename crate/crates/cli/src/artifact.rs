//! Reading and writing pipeline artifacts with provenance headers.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use medmine_core::corpus::{read_interchange, write_annotations_tsv, write_interchange_to, write_tweets_tsv};
use medmine_core::{load_corpus, Corpus};
use serde::{Deserialize, Serialize};

pub const TOOL: &str = "medmine";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const HEADER_PREFIX: &str = "# medmine ";

/// Metadata recorded at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(subcommand: &str, seed: u64) -> Self {
        Provenance {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            subcommand: subcommand.to_string(),
            seed,
            inputs: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Self {
        self.inputs.push(path.as_ref().display().to_string());
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn header(&self) -> String {
        format!("{HEADER_PREFIX}{}", serde_json::to_string(self).expect("provenance serializes"))
    }

    pub fn parse_header(line: &str) -> Option<Provenance> {
        serde_json::from_str(line.strip_prefix(HEADER_PREFIX)?).ok()
    }
}

/// Path of the provenance sidecar for formats without comments.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".prov");
    PathBuf::from(s)
}

/// Reads the provenance of an artifact from its header line or sidecar.
pub fn read_provenance(path: &Path) -> Result<Provenance> {
    let side = sidecar_path(path);
    let source = if is_jsonl(path) || side.exists() { side } else { path.to_path_buf() };
    let file = File::open(&source).with_context(|| format!("{}: cannot open", source.display()))?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    Provenance::parse_header(first.trim_end())
        .with_context(|| format!("{}:1: missing provenance header", source.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("{}: cannot create", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Writes a comment-capable text artifact: header line, then `body`.
pub fn write_text(path: &Path, prov: &Provenance, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", prov.header())?;
    body(&mut w).with_context(|| format!("{}: write failed", path.display()))?;
    w.flush()?;
    Ok(())
}

/// Writes an artifact whose format forbids comments, plus its `.prov` sidecar.
pub fn write_plain(path: &Path, prov: &Provenance, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).with_context(|| format!("{}: write failed", path.display()))?;
    w.flush()?;
    let mut side = create(&sidecar_path(path))?;
    writeln!(side, "{}", prov.header())?;
    side.flush()?;
    Ok(())
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

/// Strips a known artifact suffix from an output path.
pub fn stem(path: &Path) -> PathBuf {
    let s = path.to_string_lossy();
    for suffix in [".ann.tsv", ".tsv", ".jsonl"] {
        if let Some(rest) = s.strip_suffix(suffix) {
            return PathBuf::from(rest);
        }
    }
    path.to_path_buf()
}

pub fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Paths of a corpus bundle written under `stem`.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub tweets: PathBuf,
    pub annotations: PathBuf,
    pub interchange: PathBuf,
}

impl Bundle {
    pub fn at(stem: &Path) -> Self {
        Bundle {
            tweets: with_suffix(stem, ".tsv"),
            annotations: with_suffix(stem, ".ann.tsv"),
            interchange: with_suffix(stem, ".jsonl"),
        }
    }
}

/// Writes tweets, annotations and interchange views of `corpus`.
pub fn write_bundle(corpus: &Corpus, stem: &Path, prov: &Provenance) -> Result<Bundle> {
    let b = Bundle::at(stem);
    write_text(&b.tweets, prov, |w| write_tweets_tsv(corpus, w))?;
    write_text(&b.annotations, prov, |w| write_annotations_tsv(corpus, w))?;
    write_plain(&b.interchange, prov, |w| write_interchange_to(corpus, w))?;
    Ok(b)
}

/// A corpus argument: `path` or `name=path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSpec {
    pub name: Option<String>,
    pub path: PathBuf,
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("empty input".to_string());
        }
        match s.split_once('=') {
            Some((name, path)) if !name.is_empty() && !name.contains(['/', '\\']) => {
                if path.is_empty() {
                    return Err(format!("{s:?}: missing path after '='"));
                }
                Ok(InputSpec {
                    name: Some(name.to_string()),
                    path: PathBuf::from(path),
                })
            }
            _ => Ok(InputSpec {
                name: None,
                path: PathBuf::from(s),
            }),
        }
    }
}

impl InputSpec {
    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            stem(&self.path)
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".to_string())
        })
    }

    /// The file the corpus is actually read from.
    pub fn primary_path(&self) -> PathBuf {
        let p = &self.path;
        if p.extension().is_some_and(|e| e == "tsv" || e == "jsonl") {
            return p.clone();
        }
        let tsv = with_suffix(p, ".tsv");
        if !tsv.exists() && with_suffix(p, ".jsonl").exists() {
            return with_suffix(p, ".jsonl");
        }
        tsv
    }

    /// Sibling annotation file for a tweet TSV, when present.
    pub fn annotations_path(&self) -> Option<PathBuf> {
        let primary = self.primary_path();
        if is_jsonl(&primary) {
            return None;
        }
        let ann = with_suffix(&stem(&primary), ".ann.tsv");
        (ann.exists() && ann != primary).then_some(ann)
    }

    pub fn load(&self) -> Result<Corpus> {
        let primary = self.primary_path();
        let name = self.name();
        let corpus = if is_jsonl(&primary) {
            read_interchange(&primary, &name)?
        } else {
            load_corpus(&primary, self.annotations_path().as_deref(), &name)?
        };
        log::info!("loaded {} ({} tweets) from {}", name, corpus.len(), primary.display());
        Ok(corpus)
    }
}

pub fn load_all(specs: &[InputSpec]) -> Result<Vec<Corpus>> {
    let corpora: Vec<Corpus> = specs.iter().map(InputSpec::load).collect::<Result<_>>()?;
    let mut seen = std::collections::HashSet::new();
    for c in &corpora {
        if !seen.insert(c.name().to_string()) {
            bail!("corpus name {:?} given twice; use name=path to disambiguate", c.name());
        }
    }
    Ok(corpora)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let p = Provenance::new("mix", 7).input("a.tsv").param("ratio", "8:2");
        let line = p.header();
        assert!(line.starts_with("# medmine {"));
        assert_eq!(Provenance::parse_header(&line), Some(p));
    }

    #[test]
    fn input_spec_forms() {
        let a: InputSpec = "train=data/t.tsv".parse().unwrap();
        assert_eq!(a.name.as_deref(), Some("train"));
        assert_eq!(a.path, PathBuf::from("data/t.tsv"));
        let b: InputSpec = "data/x=y.tsv".parse().unwrap();
        assert_eq!(b.name, None);
        let c: InputSpec = "runs/train.jsonl".parse().unwrap();
        assert_eq!(c.name(), "train");
        assert!("n=".parse::<InputSpec>().is_err());
    }

    #[test]
    fn stems() {
        assert_eq!(stem(Path::new("a/b.ann.tsv")), PathBuf::from("a/b"));
        assert_eq!(stem(Path::new("a/b.tsv")), PathBuf::from("a/b"));
        assert_eq!(stem(Path::new("a/b")), PathBuf::from("a/b"));
        assert_eq!(sidecar_path(Path::new("x.jsonl")), PathBuf::from("x.jsonl.prov"));
    }
}
