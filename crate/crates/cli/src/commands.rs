use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use medmine_core::augment::PlanStep;
use medmine_core::evaluate::Averaging;
use medmine_core::normalize::{normalize_corpus, write_offset_sidecar};
use medmine_core::pool::{FetchLabeling, PoolError};
use medmine_core::{
    build_pool, evaluate::evaluate_with, fetch_corpus, merge, merge_terms, predict, predict_normalized, run_plan_detailed,
    split, AugmentationPlan, Corpus, EntityPool, EvalReport, FixtureFetcher, Gazetteer, PredictionSet, Strategy,
    TermList,
};

use crate::args::*;
use crate::artifact::{
    load_all, stem, with_suffix, write_bundle, write_plain, write_text, Bundle, InputSpec, Provenance,
};

fn provenance_for(subcommand: &str, seed: u64, specs: &[&InputSpec]) -> Provenance {
    let mut p = Provenance::new(subcommand, seed);
    for s in specs {
        p = p.input(s.primary_path());
        if let Some(ann) = s.annotations_path() {
            p = p.input(ann);
        }
    }
    p
}

pub fn ingest(args: &IngestArgs, seed: u64) -> Result<Bundle> {
    let name = args.name.clone().unwrap_or_else(|| args.input.name());
    let spec = InputSpec {
        name: Some(name.clone()),
        path: args.input.path.clone(),
    };
    let corpus = match &args.annotations {
        Some(ann) => medmine_core::load_corpus(&spec.primary_path(), Some(ann), &name)?,
        None => spec.load()?,
    };
    let mut prov = provenance_for("ingest", seed, &[&spec]);
    if let Some(ann) = &args.annotations {
        prov = prov.input(ann);
    }
    let bundle = write_bundle(&corpus, &stem(&args.out), &prov)?;
    println!("{}\t{}", corpus.name(), corpus.stats());
    Ok(bundle)
}

fn stats_record(c: &Corpus) -> serde_json::Value {
    let s = c.stats();
    serde_json::json!({
        "corpus": c.name(),
        "total": s.total,
        "positive": s.positive,
        "negative": s.negative,
        "multi_mention": s.multi_mention,
        "positive_pct": s.positive_pct,
        "positive_percent": s.positive_percent(),
        "positive_percent_display": s.positive_percent_display(),
    })
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let corpora = load_all(&args.inputs)?;
    let mut out = std::io::stdout().lock();
    match args.format {
        Format::Record => {
            for c in &corpora {
                writeln!(out, "{}", stats_record(c))?;
            }
        }
        Format::Text => {
            writeln!(
                out,
                "{:<20} {:>8} {:>8} {:>8} {:>13} {:>9}",
                "corpus", "total", "positive", "negative", "multi_mention", "positive"
            )?;
            for c in &corpora {
                let s = c.stats();
                writeln!(
                    out,
                    "{:<20} {:>8} {:>8} {:>8} {:>13} {:>9}",
                    c.name(),
                    s.total,
                    s.positive,
                    s.negative,
                    s.multi_mention,
                    s.positive_percent_display()
                )?;
            }
        }
    }
    Ok(())
}

pub fn normalize(args: &NormalizeArgs, seed: u64) -> Result<Bundle> {
    let corpus = args.input.load()?;
    let normalized = normalize_corpus(&corpus);
    for (id, m) in &normalized.partial {
        log::warn!("{id}: mention [{}, {}) {:?} lost characters during cleaning", m.start, m.end, m.surface);
    }
    for (id, m) in &normalized.dropped {
        log::warn!("{id}: mention [{}, {}) {:?} removed entirely by cleaning", m.start, m.end, m.surface);
    }
    let prov = provenance_for("normalize", seed, &[&args.input]);
    let out = stem(&args.out);
    let bundle = write_bundle(&normalized.corpus, &out, &prov)?;
    write_text(&with_suffix(&out, ".map.tsv"), &prov, |w| write_offset_sidecar(&normalized.cleaned, w))?;
    let changed = normalized.cleaned.iter().filter(|c| !c.map.is_identity()).count();
    println!(
        "{}\ttweets={} changed={} partial_mentions={} dropped_mentions={}",
        corpus.name(),
        corpus.len(),
        changed,
        normalized.partial.len(),
        normalized.dropped.len()
    );
    Ok(bundle)
}

fn write_pool(path: &Path, pool: &EntityPool, prov: &Provenance) -> Result<()> {
    write_text(path, prov, |w| pool.write_tsv(w))
}

pub fn pool(args: &PoolArgs, seed: u64) -> Result<()> {
    let corpora = load_all(&args.inputs)?;
    let pool = build_pool(&corpora)?;
    let specs: Vec<&InputSpec> = args.inputs.iter().collect();
    write_pool(&args.out, &pool, &provenance_for("pool", seed, &specs))?;
    println!("pool entries={}", pool.len());
    Ok(())
}

pub fn terms(args: &TermsArgs, seed: u64) -> Result<()> {
    let pool = EntityPool::load(&args.pool)?;
    let terms = merge_terms(&pool, &args.curated)?;
    let mut prov = Provenance::new("terms", seed).input(&args.pool);
    for c in &args.curated {
        prov = prov.input(c);
    }
    write_text(&args.out, &prov, |w| terms.write(w))?;
    println!("terms={}", terms.len());
    Ok(())
}

pub fn fetch(args: &FetchArgs, seed: u64) -> Result<()> {
    let terms = TermList::load(&args.terms)?;
    let client = FixtureFetcher::load(&args.fixture)?;
    let labeling = if args.assume_positive_on_term_match {
        FetchLabeling::AssumePositiveOnTermMatch
    } else {
        FetchLabeling::Unlabeled
    };
    let outcome = fetch_corpus(&client, &terms, args.limit, labeling, &args.name);
    let prov = Provenance::new("fetch", seed)
        .input(&args.terms)
        .input(&args.fixture)
        .param("limit", args.limit)
        .param("labeling", format!("{labeling:?}"));
    write_bundle(&outcome.corpus, &stem(&args.out), &prov)?;
    if let Some(report) = &args.report {
        write_text(report, &prov, |w| outcome.report.write_tsv(w))?;
    }
    for row in outcome.report.failures() {
        log::warn!("fetch failed for {:?}: {:?}", row.term, row.status);
    }
    println!(
        "fetched tweets={} terms={} failures={}",
        outcome.corpus.len(),
        terms.len(),
        outcome.report.failures().count()
    );
    Ok(())
}

fn add_pool(into: &mut EntityPool, from: &EntityPool) {
    for e in from.entries() {
        for s in &e.sources {
            into.insert(&e.surface, s);
        }
    }
}

fn pool_of(corpora: &[&Corpus], file: Option<&EntityPool>) -> Result<EntityPool, PoolError> {
    let mut pool = match build_pool(corpora.iter().copied()) {
        Ok(p) => p,
        Err(PoolError::EmptyPool) if file.is_some() => EntityPool::default(),
        Err(e) => return Err(e),
    };
    if let Some(f) = file {
        add_pool(&mut pool, f);
    }
    if pool.is_empty() {
        return Err(PoolError::EmptyPool);
    }
    Ok(pool)
}

pub fn augment(args: &AugmentArgs, seed: u64) -> Result<Bundle> {
    let inputs = load_all(&args.inputs)?;
    let externals = load_all(&args.pool_inputs)?;
    let pool_file = args.pool.as_deref().map(EntityPool::load).transpose()?;

    let needs_pool = match args.preset {
        Some(_) => true,
        None => args.strategies.contains(&Strategy::EntityReplace),
    };

    let plan = match args.preset {
        Some(preset) => {
            let base: Vec<&Corpus> = inputs.iter().collect();
            let base_pool = Arc::new(pool_of(&base, pool_file.as_ref())?);
            let extended = if externals.is_empty() {
                None
            } else {
                let all: Vec<&Corpus> = inputs.iter().chain(&externals).collect();
                Some(Arc::new(pool_of(&all, pool_file.as_ref())?))
            };
            if preset.needs_external_pool() && extended.is_none() {
                bail!("preset {preset} draws replacements from external corpora; pass them with --pool-input");
            }
            preset.plan(base_pool, extended, seed)?
        }
        None => {
            if args.strategies.is_empty() {
                bail!("no plan given: pass --preset or at least one --strategy");
            }
            if args.rounds.len() > args.strategies.len() {
                bail!("{} --rounds values for {} --strategy values", args.rounds.len(), args.strategies.len());
            }
            let pool = if needs_pool {
                let names: Vec<String> = if args.pool_from.is_empty() {
                    inputs.iter().map(|c| c.name().to_string()).collect()
                } else {
                    args.pool_from.clone()
                };
                let mut chosen = Vec::new();
                for n in &names {
                    let c = inputs
                        .iter()
                        .chain(&externals)
                        .find(|c| c.name() == n)
                        .ok_or_else(|| anyhow!("--pool-from names unknown corpus {n:?}"))?;
                    chosen.push(c);
                }
                Some(Arc::new(pool_of(&chosen, pool_file.as_ref())?))
            } else {
                None
            };
            let steps = args
                .strategies
                .iter()
                .enumerate()
                .map(|(i, &strategy)| PlanStep {
                    strategy,
                    rounds: args.rounds.get(i).copied().unwrap_or(1),
                    pool: (strategy == Strategy::EntityReplace).then(|| pool.clone()).flatten(),
                })
                .collect();
            AugmentationPlan::new(steps, seed)
        }
    };

    let mut tweets = Vec::new();
    let mut skipped = 0;
    for c in &inputs {
        let outcome = run_plan_detailed(c, &plan)?;
        for (id, round) in &outcome.skipped {
            log::info!("{}: word drop round {round} skipped for {id}", c.name());
        }
        skipped += outcome.skipped.len();
        tweets.extend(outcome.corpus.into_tweets());
    }
    let out = stem(&args.out);
    let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "augmented".into());
    let corpus = Corpus::new(name, tweets).context("augmented ids collide across inputs")?;

    let specs: Vec<&InputSpec> = args.inputs.iter().chain(&args.pool_inputs).collect();
    let mut prov = provenance_for("augment", seed, &specs).param("plan", plan.describe());
    if let Some(p) = &args.pool {
        prov = prov.input(p);
    }
    if let Some(preset) = args.preset {
        prov = prov.param("preset", preset);
    }
    let bundle = write_bundle(&corpus, &out, &prov)?;
    println!("augmented tweets={} plan={} skipped={}", corpus.len(), plan.describe(), skipped);
    Ok(bundle)
}

pub struct MixOutput {
    pub train: Bundle,
    pub val: Bundle,
}

pub fn mix(args: &MixArgs, seed: u64) -> Result<MixOutput> {
    let corpora = load_all(&args.inputs)?;
    let refs: Vec<&Corpus> = corpora.iter().collect();
    let out = stem(&args.out);
    let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mixed".into());
    let merged = merge(&refs, args.dedupe, &name);
    let outcome = split(&merged, args.ratio, !args.no_stratify, seed);
    for w in &outcome.warnings {
        log::warn!("{w}");
    }
    let specs: Vec<&InputSpec> = args.inputs.iter().collect();
    let prov = provenance_for("mix", seed, &specs)
        .param("dedupe", args.dedupe)
        .param("ratio", args.ratio)
        .param("stratify", !args.no_stratify);
    let train = write_bundle(&outcome.train, &with_suffix(&out, ".train"), &prov.clone().param("part", "train"))?;
    let val = write_bundle(&outcome.val, &with_suffix(&out, ".val"), &prov.param("part", "val"))?;
    let dropped = corpora.iter().map(Corpus::len).sum::<usize>() - merged.len();
    println!("merged tweets={} duplicates_dropped={dropped}", merged.len());
    println!("{}\t{}", outcome.train.name(), outcome.train.stats());
    println!("{}\t{}", outcome.val.name(), outcome.val.stats());
    Ok(MixOutput { train, val })
}

pub fn baseline(args: &BaselineArgs, seed: u64) -> Result<()> {
    let pool = EntityPool::load(&args.pool)?;
    let gazetteer = Gazetteer::from_pool(&pool);
    let corpus = args.input.load()?;
    let pred = if args.normalized {
        predict_normalized(&gazetteer, &corpus)
    } else {
        predict(&gazetteer, &corpus)
    };
    let prov = Provenance::new("baseline", seed)
        .input(&args.pool)
        .input(args.input.primary_path())
        .param("normalized", args.normalized);
    write_text(&args.out, &prov, |w| pred.write_tsv(w))?;
    println!("predicted mentions={} tweets={}", pred.span_count(), corpus.len());
    Ok(())
}

pub fn eval(args: &EvalArgs, seed: u64) -> Result<EvalReport> {
    let gold = args.gold.load()?;
    let content =
        std::fs::read_to_string(&args.pred).with_context(|| format!("{}: cannot read", args.pred.display()))?;
    let pred = PredictionSet::read_tsv(&content, &args.pred)?;
    let averaging = if args.macro_avg { Averaging::Macro } else { Averaging::Micro };
    let report = evaluate_with(&gold, &pred, averaging)
        .with_context(|| format!("{}: predictions do not fit gold corpus {}", args.pred.display(), gold.name()))?;
    let rendered = match args.format {
        Format::Text => report.to_table(),
        Format::Record => format!("{}\n", report.to_record()),
    };
    print!("{rendered}");
    if let Some(out) = &args.out {
        let prov = provenance_for("eval", seed, &[&args.gold])
            .input(&args.pred)
            .param("averaging", format!("{averaging:?}").to_lowercase());
        match args.format {
            Format::Text => write_text(out, &prov, |w| w.write_all(rendered.as_bytes()))?,
            Format::Record => write_plain(out, &prov, |w| w.write_all(rendered.as_bytes()))?,
        }
    }
    Ok(report)
}

pub fn pipeline(args: &PipelineArgs, seed: u64) -> Result<()> {
    crate::pipeline::run(&args.recipe, &args.out_dir, seed).map(|_| ())
}
