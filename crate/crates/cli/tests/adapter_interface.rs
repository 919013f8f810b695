//! The file handoff consumed by an external model: cleaned interchange plus
//! offset sidecar in, prediction TSV in original coordinates out.

mod common;

use std::fs;

use common::*;
use medmine_core::corpus::read_interchange;
use medmine_core::fixtures::CorpusSpec;
use medmine_core::normalize::read_offset_sidecar;
use medmine_core::{project_to_original, Mention, OffsetMap, PredictionSet};

#[test]
fn cleaned_predictions_project_back_to_original_gold() {
    let dir = tempfile::tempdir().unwrap();
    let original = CorpusSpec::new("emoji", 400, 120, 15, 21).build();
    assert!(original.tweets().iter().any(|t| !t.text().is_ascii()), "fixture should carry emoji");
    let raw = save(&original, dir.path(), "raw");

    let stem = dir.path().join("clean");
    assert_ok(&medmine(&["normalize", "--input", &p(&raw), "--out", &p(&stem)]));

    let cleaned = read_interchange(&dir.path().join("clean.jsonl"), "clean").unwrap();
    let maps = read_offset_sidecar(&fs::read_to_string(dir.path().join("clean.map.tsv")).unwrap()).unwrap();
    assert_eq!(maps.len(), original.len());

    // A model that tags exactly the gold spans in cleaned coordinates.
    let mut pred = PredictionSet::default();
    for t in cleaned.tweets() {
        let source = original.get(t.id()).unwrap();
        let map = OffsetMap::from_indices(maps[t.id()].clone(), source.text().chars().count()).unwrap();
        let spans = t
            .mentions()
            .iter()
            .map(|m| {
                let (s, e) = project_to_original(&map, m.start, m.end).unwrap();
                Mention::new(s, e, m.surface.clone())
            })
            .collect();
        pred.insert(t.id(), spans);
    }
    let pred_path = dir.path().join("pred.tsv");
    let mut buf = Vec::new();
    pred.write_tsv(&mut buf).unwrap();
    fs::write(&pred_path, buf).unwrap();

    let o = medmine(&["eval", "--gold", &p(&raw), "--pred", &p(&pred_path), "--format", "record"]);
    assert_ok(&o);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["strict"]["f1"], 1.0);
    assert_eq!(v["tweet_level"]["f1"], 1.0);
}

#[test]
fn empty_prediction_file_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let c = CorpusSpec::new("e", 20, 5, 0, 2).build();
    let gold = save(&c, dir.path(), "g");
    let pred = dir.path().join("empty.tsv");
    fs::write(&pred, "").unwrap();
    let o = medmine(&["eval", "--gold", &p(&gold), "--pred", &p(&pred), "--format", "record"]);
    assert_ok(&o);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["strict"]["precision"], 0.0);
    assert_eq!(v["strict"]["recall"], 0.0);
    assert_eq!(v["strict"]["fn"], 5);
}

#[test]
fn interchange_records_have_required_fields() {
    let dir = tempfile::tempdir().unwrap();
    let c = CorpusSpec::new("r", 30, 10, 2, 5).build();
    let raw = save(&c, dir.path(), "raw");
    let stem = dir.path().join("b");
    assert_ok(&medmine(&["ingest", "--input", &p(&raw), "--out", &p(&stem)]));
    let text = fs::read_to_string(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 30);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let spans = v["spans"].as_array().unwrap();
        assert!(v["id"].is_string() && v["text"].is_string());
        assert_eq!(v["label"], if spans.is_empty() { 0 } else { 1 });
        for s in spans {
            assert!(s["start"].is_u64() && s["end"].is_u64() && s["text"].is_string());
        }
    }
    assert!(fs::read_to_string(dir.path().join("b.jsonl.prov")).unwrap().starts_with("# medmine "));
}
