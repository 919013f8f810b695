//! Declarative recipes chaining ingest, normalize, pool, augment, mix,
//! baseline and eval.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use medmine_core::{Dedupe, EvalReport, Preset, SplitRatio};
use serde::Deserialize;

use crate::args::*;
use crate::artifact::InputSpec;
use crate::commands;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Augmented and mixed into train/validation.
    #[default]
    Train,
    /// Contributes mentions to external-scope pools only.
    External,
    /// Held out; scored by the baseline instead of the validation split.
    Test,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    /// Tweet TSV, stem or interchange file.
    pub path: PathBuf,
    pub annotations: Option<PathBuf>,
    #[serde(default)]
    pub role: Role,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSection {
    #[serde(default)]
    pub dedupe: Option<String>,
    #[serde(default)]
    pub ratio: Option<String>,
    #[serde(default = "yes")]
    pub stratify: bool,
}

fn yes() -> bool {
    true
}

impl Default for MixSection {
    fn default() -> Self {
        MixSection {
            dedupe: None,
            ratio: None,
            stratify: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    #[serde(default)]
    pub normalized: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub preset: String,
    #[serde(rename = "corpus")]
    pub corpora: Vec<CorpusEntry>,
    #[serde(default)]
    pub mix: MixSection,
    #[serde(default)]
    pub baseline: BaselineSection,
}

impl Recipe {
    pub fn load(path: &Path) -> Result<Recipe> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
        let mut recipe: Recipe = toml::from_str(&text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(1);
            anyhow::anyhow!("{}:{line}: {}", path.display(), e.message())
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for c in &mut recipe.corpora {
            c.path = base.join(&c.path);
            if let Some(a) = &mut c.annotations {
                *a = base.join(&*a);
            }
        }
        Ok(recipe)
    }
}

/// Artifact locations produced by a run.
#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub pool: PathBuf,
    pub augmented: PathBuf,
    pub train: PathBuf,
    pub val: PathBuf,
    pub predictions: PathBuf,
    pub report: PathBuf,
    pub record: PathBuf,
    pub eval: EvalReport,
}

fn spec(name: &str, path: &Path) -> InputSpec {
    InputSpec {
        name: Some(name.to_string()),
        path: path.to_path_buf(),
    }
}

pub fn run(recipe_path: &Path, out_dir: &Path, seed: u64) -> Result<RunOutputs> {
    let recipe = Recipe::load(recipe_path)?;
    let preset: Preset = recipe
        .preset
        .parse()
        .map_err(|e| anyhow::anyhow!("{}: {e}", recipe_path.display()))?;
    let dedupe: Dedupe = match &recipe.mix.dedupe {
        Some(d) => d.parse().map_err(|e| anyhow::anyhow!("{}: {e}", recipe_path.display()))?,
        None => Dedupe::default(),
    };
    let ratio: SplitRatio = match &recipe.mix.ratio {
        Some(r) => r.parse().map_err(|e| anyhow::anyhow!("{}: {e}", recipe_path.display()))?,
        None => SplitRatio::default(),
    };
    if !recipe.corpora.iter().any(|c| c.role == Role::Train) {
        bail!("{}: recipe needs at least one corpus with role \"train\"", recipe_path.display());
    }

    let mut normalized: Vec<(Role, InputSpec)> = Vec::new();
    for c in &recipe.corpora {
        log::info!("pipeline: ingest {}", c.name);
        let ingested = commands::ingest(
            &IngestArgs {
                input: spec(&c.name, &c.path),
                annotations: c.annotations.clone(),
                name: Some(c.name.clone()),
                out: out_dir.join("ingest").join(&c.name),
            },
            seed,
        )?;
        log::info!("pipeline: normalize {}", c.name);
        let stem = out_dir.join("normalize").join(&c.name);
        commands::normalize(
            &NormalizeArgs {
                input: spec(&c.name, &ingested.tweets),
                out: stem.clone(),
            },
            seed,
        )?;
        normalized.push((c.role, spec(&c.name, &crate::artifact::with_suffix(&stem, ".tsv"))));
    }
    let of_role = |r: Role| -> Vec<InputSpec> {
        normalized.iter().filter(|(role, _)| *role == r).map(|(_, s)| s.clone()).collect()
    };
    let (train, external, test) = (of_role(Role::Train), of_role(Role::External), of_role(Role::Test));

    let pool = out_dir.join("pool.tsv");
    commands::pool(
        &PoolArgs {
            inputs: train.clone(),
            out: pool.clone(),
        },
        seed,
    )?;

    let augmented = out_dir.join("augment");
    let aug_bundle = commands::augment(
        &AugmentArgs {
            inputs: train.clone(),
            pool_inputs: external,
            pool: None,
            pool_from: Vec::new(),
            strategies: Vec::new(),
            rounds: Vec::new(),
            preset: Some(preset),
            out: augmented.clone(),
        },
        seed,
    )?;

    let mut mix_inputs = train.clone();
    mix_inputs.push(spec("augment", &aug_bundle.tweets));
    let mixed = commands::mix(
        &MixArgs {
            inputs: mix_inputs,
            dedupe,
            ratio,
            no_stratify: !recipe.mix.stratify,
            out: out_dir.join("mix"),
        },
        seed,
    )?;

    let target = if test.is_empty() {
        spec("val", &mixed.val.tweets)
    } else if test.len() == 1 {
        test[0].clone()
    } else {
        bail!("{}: at most one corpus may have role \"test\"", recipe_path.display());
    };
    let predictions = out_dir.join("predictions.tsv");
    commands::baseline(
        &BaselineArgs {
            pool: pool.clone(),
            input: target.clone(),
            normalized: recipe.baseline.normalized,
            out: predictions.clone(),
        },
        seed,
    )?;

    let report = out_dir.join("eval.txt");
    commands::eval(
        &EvalArgs {
            gold: target.clone(),
            pred: predictions.clone(),
            format: Format::Text,
            macro_avg: false,
            out: Some(report.clone()),
        },
        seed,
    )?;
    let record = out_dir.join("eval.json");
    let eval = commands::eval(
        &EvalArgs {
            gold: target,
            pred: predictions.clone(),
            format: Format::Record,
            macro_avg: false,
            out: Some(record.clone()),
        },
        seed,
    )?;

    Ok(RunOutputs {
        pool,
        augmented: aug_bundle.tweets,
        train: mixed.train.tweets,
        val: mixed.val.tweets,
        predictions,
        report,
        record,
        eval,
    })
}
