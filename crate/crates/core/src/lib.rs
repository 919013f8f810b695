//! Corpus engineering for medication mention detection in tweets.
//!
//! The crate covers the data side of a mention detector: loading annotated
//! tweets, offset-preserving cleaning, entity pools, span-consistent
//! augmentation, corpus mixing and splitting, a gazetteer baseline, and
//! strict/overlapping span evaluation. All offsets are code-point indices
//! into the original tweet text.

pub mod augment;
pub mod baseline;
pub mod corpus;
pub mod datamix;
pub mod evaluate;
pub mod fixtures;
pub mod normalize;
pub mod pool;
pub mod text;

pub use augment::{
    derive_seed, run_plan, run_plan_detailed, AugmentError, AugmentationPlan, AugmentedTweet, PlanStep, Preset,
    Strategy,
};
pub use baseline::{predict, predict_normalized, Gazetteer};
pub use corpus::{corpus_stats, is_positive, load_corpus, AnnotatedTweet, Corpus, CorpusError, CorpusStats, Mention, Tweet};
pub use datamix::{merge, split, Dedupe, MixRecipe, SplitOutcome, SplitRatio};
pub use evaluate::{evaluate, f1, match_spans, EvalReport, MatchMode, MatchResult, PredictionSet, Scores};
pub use normalize::{clean_text, project_to_cleaned, project_to_original, tokenize, CleanedTweet, OffsetMap, Projection, Token};
pub use pool::{build_pool, fetch_corpus, merge_terms, EntityPool, FixtureFetcher, TermList, TweetFetcher};
