//! Bundled fixture applications, their committed few-shot datasets, and
//! the paraphrase evaluation corpus.

use crate::app_model::{load_app_spec, AppSpec, SpecError};
use crate::eval::{parse_corpus, AnnotatedCommand, EvalError};
use crate::fed::{FedError, FedStore};

pub const APP_NAMES: [&str; 3] = ["wordpad", "notepad", "explorer"];

pub const APP_SPECS: [(&str, &str); 3] = [
    ("wordpad", include_str!("../fixtures/wordpad.app.json")),
    ("notepad", include_str!("../fixtures/notepad.app.json")),
    ("explorer", include_str!("../fixtures/explorer.app.json")),
];

pub const ACTS: [(&str, &str); 3] = [
    ("wordpad", include_str!("../fixtures/wordpad.act.json")),
    ("notepad", include_str!("../fixtures/notepad.act.json")),
    ("explorer", include_str!("../fixtures/explorer.act.json")),
];

pub const FEDS: [(&str, &str); 3] = [
    ("wordpad", include_str!("../fixtures/wordpad.fed.jsonl")),
    ("notepad", include_str!("../fixtures/notepad.fed.jsonl")),
    ("explorer", include_str!("../fixtures/explorer.fed.jsonl")),
];

/// Per-app counts recorded when the fixtures were generated.
pub const MANIFEST: &str = include_str!("../fixtures/manifest.json");

pub const PARAPHRASE_CORPUS: &str = include_str!("../fixtures/paraphrase.corpus.jsonl");

/// Report produced by the offline pipeline on the paraphrase corpus.
pub const PARAPHRASE_REPORT: &str = include_str!("../fixtures/paraphrase.report.json");

fn lookup<'a>(table: &'a [(&str, &str)], name: &str) -> Option<&'a str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn app_spec(name: &str) -> Result<AppSpec, SpecError> {
    let text = lookup(&APP_SPECS, name).unwrap_or("");
    load_app_spec(text)
}

pub fn act_json(name: &str) -> Option<&'static str> {
    lookup(&ACTS, name)
}

pub fn fed(name: &str) -> Result<FedStore, FedError> {
    FedStore::parse_jsonl(lookup(&FEDS, name).unwrap_or(""))
}

pub fn paraphrase_corpus() -> Result<Vec<AnnotatedCommand>, EvalError> {
    parse_corpus(PARAPHRASE_CORPUS)
}
