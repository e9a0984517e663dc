//! Pair-level accuracy of the resolver over an annotated command corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::pairgen::none_sentinel;
use crate::resolver::{resolve, Resolution, ResolverConfig, ResolverProvider, UnresolvedReason};

pub const COMPOSITE_TAG: &str = "composite";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedCommand {
    pub nlc: String,
    pub ce: String,
    #[serde(with = "none_sentinel")]
    pub value: Option<String>,
    pub app: String,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

impl AnnotatedCommand {
    pub fn is_composite(&self) -> bool {
        self.tags.contains(COMPOSITE_TAG)
    }

    pub fn gold(&self) -> String {
        format!(
            "({}, {})",
            self.ce,
            self.value.as_deref().unwrap_or(none_sentinel::NONE)
        )
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no app named `{0}` is loaded")]
    MissingApp(String),
    #[error("corpus line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn parse_corpus(text: &str) -> Result<Vec<AnnotatedCommand>, EvalError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| EvalError::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Count an ambiguous answer as correct when its top candidate is gold.
    pub lenient_ambiguous: bool,
    pub config: ResolverConfig,
    pub provider: ResolverProvider,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AppTally {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub nlc: String,
    pub app: String,
    pub gold: String,
    pub got: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub nlc: String,
    pub app: String,
    pub gold: String,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub lenient_ambiguous: bool,
    pub per_app: BTreeMap<String, AppTally>,
    pub composite_total: usize,
    pub composite_detected: usize,
    pub rows: Vec<EvalRow>,
    pub failures: Vec<Failure>,
}

/// Short rendering of a resolution for report rows.
pub fn summarize(resolution: &Resolution) -> String {
    match resolution {
        Resolution::Resolved(c) => c.pair.to_string(),
        Resolution::Ambiguous(cs) => {
            let parts: Vec<String> = cs.iter().map(|c| c.pair.to_string()).collect();
            format!("ambiguous[{}]", parts.join(" | "))
        }
        Resolution::Unresolved(reason) => format!("unresolved:{reason}"),
    }
}

pub fn judge(command: &AnnotatedCommand, resolution: &Resolution, lenient_ambiguous: bool) -> bool {
    if command.is_composite() {
        return *resolution == Resolution::Unresolved(UnresolvedReason::CompositeCommand);
    }
    let is_gold = |c: &crate::resolver::Candidate| c.pair.same_names(&command.ce, command.value.as_deref());
    match resolution {
        Resolution::Resolved(c) => is_gold(c),
        Resolution::Ambiguous(cs) => lenient_ambiguous && cs.first().is_some_and(is_gold),
        Resolution::Unresolved(_) => false,
    }
}

/// Scores `corpus` using `run` to resolve each command.
pub fn evaluate_with<F>(
    corpus: &[AnnotatedCommand],
    lenient_ambiguous: bool,
    mut run: F,
) -> Result<EvalReport, EvalError>
where
    F: FnMut(&AnnotatedCommand) -> Result<Resolution, EvalError>,
{
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut per_app: BTreeMap<String, AppTally> = BTreeMap::new();
    let mut rows = Vec::with_capacity(corpus.len());
    let mut failures = Vec::new();
    let mut correct = 0;
    let mut composite_total = 0;
    let mut composite_detected = 0;
    for command in corpus {
        let resolution = run(command)?;
        let ok = judge(command, &resolution, lenient_ambiguous);
        if command.is_composite() {
            composite_total += 1;
        }
        if resolution == Resolution::Unresolved(UnresolvedReason::CompositeCommand) {
            composite_detected += 1;
        }
        let tally = per_app.entry(command.app.clone()).or_default();
        tally.total += 1;
        if ok {
            tally.correct += 1;
            correct += 1;
        }
        rows.push(EvalRow {
            nlc: command.nlc.clone(),
            app: command.app.clone(),
            gold: if command.is_composite() {
                "unresolved:CompositeCommand".into()
            } else {
                command.gold()
            },
            got: summarize(&resolution),
            correct: ok,
        });
        if !ok {
            failures.push(Failure {
                nlc: command.nlc.clone(),
                app: command.app.clone(),
                gold: command.gold(),
                resolution,
            });
        }
    }
    for tally in per_app.values_mut() {
        tally.accuracy = tally.correct as f64 / tally.total as f64;
    }
    Ok(EvalReport {
        total: corpus.len(),
        correct,
        accuracy: correct as f64 / corpus.len() as f64,
        lenient_ambiguous,
        per_app,
        composite_total,
        composite_detected,
        rows,
        failures,
    })
}

pub fn evaluate(
    corpus: &[AnnotatedCommand],
    catalog: &Catalog,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    for command in corpus {
        if catalog.app(&command.app).is_err() {
            return Err(EvalError::MissingApp(command.app.clone()));
        }
    }
    evaluate_with(corpus, options.lenient_ambiguous, |command| {
        let app = catalog
            .app(&command.app)
            .map_err(|_| EvalError::MissingApp(command.app.clone()))?;
        Ok(resolve(
            &command.nlc,
            &app.index,
            &app.pairs,
            &options.provider,
            &options.config,
        ))
    })
}

/// Gold pairs that the app does not offer (composite commands excepted).
pub fn unknown_gold<'a>(corpus: &'a [AnnotatedCommand], catalog: &Catalog) -> Vec<&'a AnnotatedCommand> {
    corpus
        .iter()
        .filter(|c| !c.is_composite())
        .filter(|c| match catalog.app(&c.app) {
            Ok(app) => !app.pairs.iter().any(|p| p.same_names(&c.ce, c.value.as_deref())),
            Err(_) => true,
        })
        .collect()
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table followed by totals.
    pub fn to_table(&self) -> String {
        let headers = ["#", "ok", "app", "command", "gold", "got"];
        let body: Vec<[String; 6]> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                [
                    (i + 1).to_string(),
                    if r.correct { "yes" } else { "NO" }.to_string(),
                    r.app.clone(),
                    r.nlc.clone(),
                    r.gold.clone(),
                    r.got.clone(),
                ]
            })
            .collect();
        let mut widths = headers.map(|h| h.chars().count());
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let line = |cells: &[String], out: &mut String| {
            let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&headers.map(String::from), &mut out);
        for row in &body {
            line(row, &mut out);
        }
        let _ = writeln!(out);
        for (app, t) in &self.per_app {
            let _ = writeln!(out, "{app}: {}/{} = {:.4}", t.correct, t.total, t.accuracy);
        }
        let _ = writeln!(
            out,
            "composite detected: {} (tagged: {})",
            self.composite_detected, self.composite_total
        );
        let mode = if self.lenient_ambiguous { "lenient" } else { "strict" };
        let _ = writeln!(
            out,
            "accuracy ({mode}): {}/{} = {:.4}",
            self.correct, self.total, self.accuracy
        );
        out
    }
}
