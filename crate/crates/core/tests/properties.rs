use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use medmine_core::augment::{
    augment_random_string, augment_replace_entity, augment_word_drop, rng_from_seed, run_plan_detailed,
    AugmentationPlan, PlanStep, WordDrop,
};
use medmine_core::corpus::{
    load_corpus, read_interchange_from, save_corpus_tsv, write_interchange_to, AnnotatedTweet, Corpus, Mention,
    Tweet,
};
use medmine_core::datamix::{merge, split, Dedupe, SplitRatio};
use medmine_core::evaluate::{evaluate, match_spans, MatchMode, PredictionSet};
use medmine_core::normalize::{clean_text, project_to_cleaned, project_to_original, Projection};
use medmine_core::pool::{build_pool, EntityPool, TermList};
use medmine_core::text::{casefold, char_slice};
use medmine_core::{predict, Gazetteer};
use proptest::prelude::*;

fn tweet_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        4 => "[a-zA-Z]{1,8}",
        2 => Just(" ".to_string()),
        1 => Just("\t".to_string()),
        1 => Just("\n".to_string()),
        1 => Just("\"".to_string()),
        1 => Just("\\".to_string()),
        1 => Just("💊".to_string()),
        1 => Just("🤰🏽".to_string()),
        1 => "[#$%&@+*^`|~.,!?]",
        1 => "\\PC",
    ];
    prop::collection::vec(piece, 0..20).prop_map(|v| v.concat())
}

/// A tweet with mentions carved out of word-like runs of its text.
fn annotated_tweet(id: String) -> impl Strategy<Value = AnnotatedTweet> {
    (tweet_text(), prop::collection::vec(any::<prop::sample::Index>(), 0..3)).prop_map(move |(text, picks)| {
        let chars: Vec<char> = text.chars().collect();
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for pick in picks {
            if chars.is_empty() {
                break;
            }
            let s = pick.index(chars.len());
            let e = (s + 1 + pick.index(4)).min(chars.len());
            if spans.iter().all(|&(a, b)| e <= a || b <= s) {
                spans.push((s, e));
            }
        }
        let mentions = spans
            .into_iter()
            .map(|(s, e)| Mention::from_text(&text, s, e).unwrap())
            .collect();
        AnnotatedTweet::new(Tweet::new(id.clone(), text.clone()), mentions, None).unwrap()
    })
}

fn corpus_strategy(max: usize) -> impl Strategy<Value = Corpus> {
    (1..max).prop_flat_map(|n| {
        (0..n)
            .map(|i| annotated_tweet(format!("t{i}")))
            .collect::<Vec<_>>()
            .prop_map(|tweets| Corpus::new("fuzz", tweets).unwrap())
    })
}

fn positive_tweet() -> impl Strategy<Value = AnnotatedTweet> {
    annotated_tweet("p".into()).prop_filter("needs a mention", |t| t.is_positive())
}

fn residue(t: &AnnotatedTweet) -> String {
    let chars: Vec<char> = t.text().chars().collect();
    let mut out = String::new();
    let mut cursor = 0;
    for m in t.mentions() {
        out.extend(&chars[cursor..m.start]);
        out.push('\u{0}');
        cursor = m.end;
    }
    out.extend(&chars[cursor..]);
    out
}

fn assert_span_integrity(t: &AnnotatedTweet) {
    for m in t.mentions() {
        assert_eq!(char_slice(t.text(), m.start, m.end), Some(m.surface.as_str()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tsv_and_interchange_roundtrip(corpus in corpus_strategy(40)) {
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("t.tsv");
        let ap = dir.path().join("a.tsv");
        save_corpus_tsv(&corpus, &tp, &ap).unwrap();
        prop_assert_eq!(&load_corpus(&tp, Some(&ap), "fuzz").unwrap(), &corpus);

        let mut buf = Vec::new();
        write_interchange_to(&corpus, &mut buf).unwrap();
        prop_assert_eq!(&read_interchange_from(&buf[..], Path::new("mem"), "fuzz").unwrap(), &corpus);
    }

    #[test]
    fn stats_are_consistent(corpus in corpus_strategy(40)) {
        let s = corpus.stats();
        prop_assert_eq!(s.total, s.positive + s.negative);
        prop_assert!(s.multi_mention <= s.positive);
    }

    #[test]
    fn cleaning_is_faithful_monotone_and_idempotent(text in tweet_text()) {
        let original: Vec<char> = text.chars().collect();
        let c = clean_text(&text);
        let cleaned: Vec<char> = c.cleaned_text.chars().collect();
        prop_assert_eq!(cleaned.len(), c.map.len());
        for (i, &o) in c.map.as_slice().iter().enumerate() {
            prop_assert_eq!(original[o], cleaned[i]);
        }
        prop_assert!(c.map.as_slice().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(c.cleaned_text.is_ascii());

        let again = clean_text(&c.cleaned_text);
        prop_assert_eq!(&again.cleaned_text, &c.cleaned_text);
        prop_assert!(again.map.is_identity());
    }

    #[test]
    fn projection_roundtrip(text in tweet_text(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let c = clean_text(&text);
        prop_assume!(!c.map.is_empty());
        let (mut s, mut e) = (a.index(c.map.len()), b.index(c.map.len()));
        if s > e { std::mem::swap(&mut s, &mut e); }
        let e = e + 1;
        let (os, oe) = project_to_original(&c.map, s, e).unwrap();
        let straddles_removed = oe - os != e - s;
        match project_to_cleaned(&c.map, os, oe).unwrap() {
            Projection::Exact(cs, ce) => {
                prop_assert!(!straddles_removed);
                prop_assert_eq!((cs, ce), (s, e));
            }
            // A removed character between two survivors makes the original
            // span lose characters, so the same span comes back as Partial.
            Projection::Partial(cs, ce) => {
                prop_assert!(straddles_removed);
                prop_assert_eq!((cs, ce), (s, e));
            }
            Projection::Empty => prop_assert!(false, "non-empty span projected to Empty"),
        }
    }

    #[test]
    fn replacement_preserves_residue(t in positive_tweet(), seed in any::<u64>()) {
        let pool = {
            let mut p = EntityPool::default();
            for s in ["tylenol", "Vitamin D", "zofran", "fish oil"] { p.insert(s, "x"); }
            p
        };
        let out = augment_replace_entity(&t, &pool, &mut rng_from_seed(seed)).unwrap();
        assert_span_integrity(&out);
        prop_assert_eq!(residue(&out), residue(&t));
        prop_assert!(out.mentions().iter().all(|m| pool.contains(&m.surface)));

        let out = augment_random_string(&t, &mut rng_from_seed(seed)).unwrap();
        assert_span_integrity(&out);
        prop_assert_eq!(residue(&out), residue(&t));
        prop_assert_eq!(out.mentions().len(), t.mentions().len());
    }

    #[test]
    fn word_drop_keeps_mentions(t in positive_tweet(), seed in any::<u64>()) {
        match augment_word_drop(&t, &mut rng_from_seed(seed)).unwrap() {
            WordDrop::Dropped(out) => {
                assert_span_integrity(&out);
                let before: Vec<&str> = t.mentions().iter().map(|m| m.surface.as_str()).collect();
                let after: Vec<&str> = out.mentions().iter().map(|m| m.surface.as_str()).collect();
                prop_assert_eq!(before, after);
                prop_assert!(out.text().chars().count() < t.text().chars().count());
            }
            WordDrop::Skipped => {}
        }
    }

    #[test]
    fn plan_cardinality(corpus in corpus_strategy(30), rounds in 1u32..4, seed in any::<u64>()) {
        let positives = corpus.positives().count();
        let pool = match build_pool([&corpus]) { Ok(p) => Arc::new(p), Err(_) => return Ok(()) };
        let plan = AugmentationPlan::new(
            vec![PlanStep::replace(rounds, pool), PlanStep::random_string(1), PlanStep::word_drop(1)],
            seed,
        );
        let out = run_plan_detailed(&corpus, &plan).unwrap();
        prop_assert_eq!(out.corpus.len() + out.skipped.len(), positives * (rounds as usize + 2));
        for t in out.corpus.tweets() {
            prop_assert!(t.is_positive());
            assert_span_integrity(t);
        }
    }

    #[test]
    fn pool_is_order_independent(a in corpus_strategy(15), b in corpus_strategy(15)) {
        let b = b.renamed("other");
        let (Ok(p1), Ok(p2)) = (build_pool([&a, &b]), build_pool([&b, &a])) else { return Ok(()) };
        let key = |p: &EntityPool| p.keys().map(str::to_string).zip(p.entries().map(|e| e.sources.clone())).collect::<Vec<_>>();
        prop_assert_eq!(key(&p1), key(&p2));
    }

    #[test]
    fn term_list_ignores_case_and_duplicates(terms in prop::collection::vec("[a-zA-Z ]{1,10}", 0..20)) {
        let once = TermList::from_terms(&terms);
        let doubled: Vec<String> = terms.iter().chain(terms.iter().map(|t| t.to_uppercase()).collect::<Vec<_>>().iter()).cloned().collect();
        prop_assert_eq!(&TermList::from_terms(&doubled), &once);
        prop_assert!(once.terms().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn split_partitions_and_stratifies(corpus in corpus_strategy(60), seed in any::<u64>()) {
        let out = split(&corpus, SplitRatio::default(), true, seed);
        let mut ids: Vec<&str> = out.train.tweets().iter().chain(out.val.tweets()).map(|t| t.id()).collect();
        ids.sort();
        let mut expected: Vec<&str> = corpus.tweets().iter().map(|t| t.id()).collect();
        expected.sort();
        prop_assert_eq!(ids, expected);
        if !out.val.is_empty() {
            let vf = out.val.positives().count() as f64 / out.val.len() as f64;
            let cf = corpus.positives().count() as f64 / corpus.len() as f64;
            prop_assert!((vf - cf).abs() <= 1.0 / out.val.len() as f64 + 1e-12);
        }
    }

    #[test]
    fn merge_by_id_is_idempotent(corpus in corpus_strategy(30)) {
        let once = merge(&[&corpus], Dedupe::ById, "m");
        let twice = merge(&[&corpus, &corpus], Dedupe::ById, "m");
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn matching_bounds(gold in spans(), pred in spans()) {
        let s = match_spans(&gold, &pred, MatchMode::Strict);
        let o = match_spans(&gold, &pred, MatchMode::Overlapping);
        prop_assert!(o.tp >= s.tp);
        prop_assert!(o.tp <= gold.len().min(pred.len()));
        for r in [&s, &o] {
            prop_assert_eq!(r.tp, r.pairs.len());
            let gs: BTreeSet<usize> = r.pairs.iter().map(|p| p.0).collect();
            let ps: BTreeSet<usize> = r.pairs.iter().map(|p| p.1).collect();
            prop_assert_eq!(gs.len(), r.tp);
            prop_assert_eq!(ps.len(), r.tp);
        }
    }

    #[test]
    fn swapping_gold_and_pred_swaps_precision_and_recall(corpus in corpus_strategy(20), other in corpus_strategy(20)) {
        // Use `other`'s spans, clipped to each gold text, as predictions.
        let mut pred = PredictionSet::default();
        let mut swapped_tweets = Vec::new();
        for (t, o) in corpus.tweets().iter().zip(other.tweets().iter().cycle()) {
            let len = t.text().chars().count();
            let ms: Vec<Mention> = o.mentions().iter().filter(|m| m.end <= len).map(|m| Mention::from_text(t.text(), m.start, m.end).unwrap()).collect();
            pred.insert(t.id(), ms.clone());
            swapped_tweets.push(AnnotatedTweet::new(t.tweet().clone(), ms, None).unwrap());
        }
        let swapped_gold = Corpus::new("s", swapped_tweets).unwrap();
        let a = evaluate(&corpus, &pred).unwrap();
        let b = evaluate(&swapped_gold, &PredictionSet::from_gold(&corpus)).unwrap();
        for (x, y) in [(a.strict, b.strict), (a.overlapping, b.overlapping), (a.tweet_level, b.tweet_level)] {
            prop_assert_eq!(x.precision, y.recall);
            prop_assert_eq!(x.recall, y.precision);
        }
    }

    #[test]
    fn gazetteer_spans_are_entries(text in tweet_text()) {
        let entries = ["a", "ab", "tylenol", "b c"];
        let g = Gazetteer::new(entries);
        let spans = g.find(&text);
        for w in spans.windows(2) {
            prop_assert!(w[0].1 <= w[1].0);
        }
        for (s, e) in spans {
            let slice = casefold(char_slice(&text, s, e).unwrap());
            prop_assert!(entries.iter().any(|x| casefold(x) == slice));
        }
    }
}

fn spans() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..30, 1usize..6), 0..7).prop_map(|raw| {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (s, l) in raw {
            let span = (s, s + l);
            if out.iter().all(|&(a, b)| span.1 <= a || b <= span.0) {
                out.push(span);
            }
        }
        out.sort_unstable();
        out
    })
}

#[test]
fn gazetteer_saturated_corpus_scores_perfectly() {
    let corpus = medmine_core::fixtures::CorpusSpec::new("g", 400, 60, 10, 11).build();
    let g = Gazetteer::from_pool(&build_pool([&corpus]).unwrap());
    let report = evaluate(&corpus, &predict(&g, &corpus)).unwrap();
    assert_eq!(report.strict.f1, 1.0);
    assert_eq!(report.tweet_level.f1, 1.0);
}
