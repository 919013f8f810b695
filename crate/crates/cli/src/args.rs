use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medmine_core::{Dedupe, Preset, SplitRatio, Strategy};

use crate::artifact::InputSpec;

#[derive(Debug, Parser)]
#[command(name = "medmine", version, about = "Corpus engineering for medication mentions in tweets")]
pub struct Cli {
    /// Seed for every randomized stage.
    #[arg(long, global = true, env = "MEDMINE_SEED", default_value_t = 42)]
    pub seed: u64,

    /// File of key=value lines supplying defaults for flags not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Maximum number of worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a tweet TSV (plus annotations) and write a corpus bundle.
    Ingest(IngestArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// Clean tweet text and write the cleaned corpus with its offset map.
    Normalize(NormalizeArgs),
    /// Build an entity pool from gold mentions.
    Pool(PoolArgs),
    /// Merge a pool with curated term lists into a query term list.
    Terms(TermsArgs),
    /// Collect tweets for a term list through a fetcher.
    Fetch(FetchArgs),
    /// Apply an augmentation plan to the positive tweets.
    Augment(AugmentArgs),
    /// Merge corpora and split into train and validation sets.
    Mix(MixArgs),
    /// Predict mentions with the gazetteer baseline.
    Baseline(BaselineArgs),
    /// Score predictions against gold annotations.
    Eval(EvalArgs),
    /// Run a recipe chaining every stage.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tweet TSV, corpus stem or interchange file.
    #[arg(long)]
    pub input: InputSpec,
    /// Annotation TSV; defaults to the sibling `.ann.tsv` of the input.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Corpus name recorded in the bundle.
    #[arg(long)]
    pub name: Option<String>,
    /// Output stem.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Record,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "input", required = true)]
    pub inputs: Vec<InputSpec>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(long)]
    pub input: InputSpec,
    /// Output stem; the offset map goes to `<stem>.map.tsv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[arg(long = "input", required = true)]
    pub inputs: Vec<InputSpec>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TermsArgs {
    #[arg(long)]
    pub pool: PathBuf,
    /// Curated term list files, one term per line.
    #[arg(long = "curated")]
    pub curated: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub terms: PathBuf,
    /// Offline fixture: `term<TAB>id<TAB>user_id<TAB>created_at<TAB>text` rows.
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
    #[arg(long, default_value = "fetched")]
    pub name: String,
    /// Synthesize a mention at the first match of the query term.
    #[arg(long)]
    pub assume_positive_on_term_match: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Corpora to augment.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<InputSpec>,
    /// Corpora contributing mentions to the pool without being augmented.
    #[arg(long = "pool-input")]
    pub pool_inputs: Vec<InputSpec>,
    /// Extra pool file merged into the replacement pool.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Corpus names feeding the replacement pool (default: every `--input`).
    #[arg(long = "pool-from", value_delimiter = ',')]
    pub pool_from: Vec<String>,
    /// Strategy of the next plan step; pairs with `--rounds` by position.
    #[arg(long = "strategy", conflicts_with = "preset")]
    pub strategies: Vec<Strategy>,
    #[arg(long = "rounds", conflicts_with = "preset")]
    pub rounds: Vec<u32>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    #[arg(long = "input", required = true)]
    pub inputs: Vec<InputSpec>,
    #[arg(long, default_value_t = Dedupe::ById)]
    pub dedupe: Dedupe,
    #[arg(long, default_value_t = SplitRatio::default())]
    pub ratio: SplitRatio,
    #[arg(long)]
    pub no_stratify: bool,
    /// Output stem; writes `<stem>.train.*` and `<stem>.val.*`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Pool file or plain term list.
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub input: InputSpec,
    /// Match on cleaned text and project spans back.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: InputSpec,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Average per-tweet scores instead of pooling counts.
    #[arg(long = "macro")]
    pub macro_avg: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// TOML recipe; relative paths inside resolve against its directory.
    #[arg(long)]
    pub recipe: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}
