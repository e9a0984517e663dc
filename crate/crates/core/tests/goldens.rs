//! Committed fixture artifacts must equal what the offline pipeline
//! produces today. Run with `UNIACT_BLESS=1` to rewrite them.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde_json::json;
use uniact_core::catalog::{preprocess, Catalog};
use uniact_core::eval::{evaluate, EvalOptions};
use uniact_core::fed::{CurationRules, FedStore, TemplateSeed};
use uniact_core::fixtures;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn bless() -> bool {
    std::env::var_os("UNIACT_BLESS").is_some()
}

fn check(name: &str, committed: &str, fresh: &str) {
    if bless() {
        fs::write(fixture_dir().join(name), fresh).unwrap();
        return;
    }
    assert!(committed == fresh, "{name} is stale; rerun with UNIACT_BLESS=1");
}

fn manifest() -> String {
    let mut apps = BTreeMap::new();
    for name in fixtures::APP_NAMES {
        let spec = fixtures::app_spec(name).unwrap();
        let pre = preprocess(&spec, &TemplateSeed, &CurationRules::default());
        apps.insert(
            name,
            json!({
                "controls": spec.len(),
                "act_nodes": pre.act.len(),
                "max_depth": pre.act.max_depth(),
                "pairs": pre.pairs.len(),
                "fed_examples": pre.kept.len(),
            }),
        );
    }
    let mut s = serde_json::to_string_pretty(&json!({ "apps": apps })).unwrap();
    s.push('\n');
    s
}

#[test]
fn act_and_fed_fixtures_are_current() {
    for (i, name) in fixtures::APP_NAMES.iter().enumerate() {
        let spec = fixtures::app_spec(name).unwrap();
        let pre = preprocess(&spec, &TemplateSeed, &CurationRules::default());
        assert!(pre.generation.failures.is_empty());
        check(&format!("{name}.act.json"), fixtures::ACTS[i].1, &pre.act.to_json());
        check(
            &format!("{name}.fed.jsonl"),
            fixtures::FEDS[i].1,
            &FedStore::new(pre.kept).to_jsonl(),
        );
    }
}

#[test]
fn manifest_is_current() {
    check("manifest.json", fixtures::MANIFEST, &manifest());
}

#[test]
fn paraphrase_report_is_current() {
    let corpus = fixtures::paraphrase_corpus().unwrap();
    let report = evaluate(&corpus, &Catalog::bundled().unwrap(), &EvalOptions::default()).unwrap();
    check("paraphrase.report.json", fixtures::PARAPHRASE_REPORT, &report.to_json());
}
