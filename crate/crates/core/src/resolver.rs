//! Turns a natural-language command into a `<control, value>` pair.
//!
//! Two providers sit behind [`resolve`]: a deterministic offline scorer and
//! a remote completion model prompted with retrieved few-shot examples.
//! Both share composite-command refusal and the rule that choices are only
//! offered to the user when the top answers genuinely differ.

use std::collections::HashSet;
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fed::FewShotExample;
use crate::lexicon;
use crate::pairgen::CEValuePair;
use crate::provider::CompletionClient;
use crate::retrieval::{RetrievalIndex, Scored, DEFAULT_K};
use crate::text;

pub const DEFAULT_ALPHA: f64 = 0.6;
pub const DEFAULT_BETA: f64 = 0.4;
pub const DEFAULT_ACCEPT: f64 = 0.35;
pub const DEFAULT_GAP: f64 = 0.08;
pub const DEFAULT_MAX_CANDIDATES: usize = 4;
/// Fraction of a control name's content words a clause must mention for the
/// clause to count as addressing that control.
pub const DEFAULT_COMPOSITE_COVERAGE: f64 = 1.0;
/// Replies requested from a remote provider.
pub const REMOTE_REPLIES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolverConfig {
    /// Weight of example similarity.
    pub alpha: f64,
    /// Weight of direct word overlap with the pair.
    pub beta: f64,
    pub accept: f64,
    pub gap: f64,
    pub max_candidates: usize,
    pub k: usize,
    pub composite_coverage: f64,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            accept: DEFAULT_ACCEPT,
            gap: DEFAULT_GAP,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            k: DEFAULT_K,
            composite_coverage: DEFAULT_COMPOSITE_COVERAGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    #[serde(flatten)]
    pub pair: CEValuePair,
    pub score: f64,
    /// Positions of supporting few-shot examples in the index.
    #[serde(default)]
    pub evidence: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnresolvedReason {
    CompositeCommand,
    NoMatch,
    ProviderError,
}

impl fmt::Display for UnresolvedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnresolvedReason::CompositeCommand => "CompositeCommand",
            UnresolvedReason::NoMatch => "NoMatch",
            UnresolvedReason::ProviderError => "ProviderError",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Resolved(Candidate),
    Ambiguous(Vec<Candidate>),
    Unresolved(UnresolvedReason),
}

impl Resolution {
    pub fn top(&self) -> Option<&Candidate> {
        match self {
            Resolution::Resolved(c) => Some(c),
            Resolution::Ambiguous(cs) => cs.first(),
            Resolution::Unresolved(_) => None,
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, Resolution::Resolved(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("no few-shot examples to build a prompt from")]
    EmptyShots,
}

/// Rendered generation prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub text: String,
}

/// Few-shot examples in rank order, then the user's command.
pub fn assemble_prompt(nlc: &str, shots: &[FewShotExample]) -> Result<PromptBundle, PromptError> {
    if shots.is_empty() {
        return Err(PromptError::EmptyShots);
    }
    let mut text = String::from("Comment: Relevant Few-shot guiding example\n\n");
    for shot in shots {
        text.push_str(&format!(
            "Command: {}\nResponse: ({}, {})\n\n",
            shot.nlc.trim(),
            shot.ce,
            shot.value_str()
        ));
    }
    text.push_str("Comment: User request\n\n");
    text.push_str(&format!("User: {}\n", nlc.trim()));
    Ok(PromptBundle { text })
}

/// Pulls `(ce, value)` out of a reply line such as
/// `Response: (Margins, Narrow)`.
pub fn parse_response_line(line: &str) -> Option<(String, Option<String>)> {
    let line = line.trim();
    let line = line.strip_prefix("Response:").unwrap_or(line).trim();
    let inner = line.strip_prefix('(')?.strip_suffix(')')?;
    let (ce, value) = inner.split_once(',')?;
    let ce = ce.trim();
    let value = value.trim();
    if ce.is_empty() || value.is_empty() {
        return None;
    }
    let value = (!value.eq_ignore_ascii_case("none")).then(|| value.to_string());
    Some((ce.to_string(), value))
}

#[derive(Clone, Default)]
pub enum ResolverProvider {
    #[default]
    Offline,
    Remote(Arc<dyn CompletionClient>),
}

impl fmt::Debug for ResolverProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolverProvider::Offline => f.write_str("Offline"),
            ResolverProvider::Remote(_) => f.write_str("Remote"),
        }
    }
}

/// Query words with weights: literal content stems at 1, lexicon
/// expansions at their table weight.
#[derive(Debug, Clone, Default)]
struct WeightedQuery {
    words: Vec<(String, f64)>,
}

impl WeightedQuery {
    fn new(nlc: &str) -> Self {
        let mut words: Vec<(String, f64)> = Vec::new();
        for token in text::tokens(nlc) {
            if text::is_stopword(&token) {
                continue;
            }
            push_max(&mut words, text::stem(&token), 1.0);
            for (exp, w) in lexicon::expansions(&token) {
                push_max(&mut words, exp.to_string(), *w);
            }
        }
        WeightedQuery { words }
    }

    /// Best weight with which this query mentions `stem`.
    fn mention(&self, stem: &str) -> f64 {
        self.words
            .iter()
            .filter(|(w, _)| text::stems_match(w, stem))
            .map(|(_, weight)| *weight)
            .fold(0.0, f64::max)
    }

    /// Weighted share of `label`'s content words the query mentions.
    fn coverage(&self, label: &str) -> f64 {
        let mut targets = text::content_stems(label);
        if targets.is_empty() {
            targets = text::stems(label);
        }
        targets.dedup();
        if targets.is_empty() {
            return 0.0;
        }
        targets.iter().map(|t| self.mention(t)).sum::<f64>() / targets.len() as f64
    }

    /// Literal query words that name something in `vocabulary`.
    fn anchored(&self, vocabulary: &[String]) -> Vec<&str> {
        self.words
            .iter()
            .filter(|(w, weight)| *weight >= 1.0 && vocabulary.iter().any(|v| text::stems_match(w, v)))
            .map(|(w, _)| w.as_str())
            .collect()
    }

    /// Label overlap: the mean of how much of the label the query covers
    /// and how many of the query's `anchored` words the label explains.
    /// Without anchored words only the first half is defined.
    fn overlap(&self, label: &str, anchored: &[&str]) -> f64 {
        let recall = self.coverage(label);
        if anchored.is_empty() {
            return recall;
        }
        let targets = text::stems(label);
        let explained = anchored
            .iter()
            .filter(|a| targets.iter().any(|t| text::stems_match(a, t)))
            .count();
        (recall + explained as f64 / anchored.len() as f64) / 2.0
    }

    fn expansion_text(&self) -> String {
        self.words
            .iter()
            .filter(|(_, w)| *w < 1.0)
            .map(|(s, _)| s.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn push_max(words: &mut Vec<(String, f64)>, word: String, weight: f64) {
    match words.iter_mut().find(|(w, _)| *w == word) {
        Some(entry) => entry.1 = entry.1.max(weight),
        None => words.push((word, weight)),
    }
}

/// Splits on "and", "then" and commas.
fn clauses(nlc: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    for word in nlc.split_whitespace() {
        let bare = word.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
        if text::COORDINATORS.contains(&bare.as_str()) {
            out.push(String::new());
            continue;
        }
        let current = out.last_mut().expect("at least one clause");
        current.push(' ');
        current.push_str(word);
        if word.ends_with(',') {
            out.push(String::new());
        }
    }
    out.into_iter().filter(|c| !c.trim().is_empty()).collect()
}

/// A command is composite when two different clauses each fully name a
/// different control.
pub fn is_composite(nlc: &str, pairs: &[CEValuePair], coverage: f64) -> bool {
    let parts = clauses(nlc);
    if parts.len() < 2 {
        return false;
    }
    let mut names: Vec<String> = pairs.iter().map(|p| p.ce.to_lowercase()).collect();
    names.sort();
    names.dedup();
    let per_clause: Vec<HashSet<&str>> = parts
        .iter()
        .map(|clause| {
            let q = WeightedQuery::new(clause);
            names
                .iter()
                .filter(|name| q.coverage(name) >= coverage)
                .map(String::as_str)
                .collect()
        })
        .collect();
    for (i, a) in per_clause.iter().enumerate() {
        for b in &per_clause[i + 1..] {
            if a.iter().any(|x| b.iter().any(|y| x != y)) {
                return true;
            }
        }
    }
    false
}

/// Every pair scored, best first; ties keep pair order.
pub fn score_pairs(
    nlc: &str,
    index: &RetrievalIndex,
    pairs: &[CEValuePair],
    config: &ResolverConfig,
) -> Vec<Candidate> {
    let query = WeightedQuery::new(nlc);
    let expanded = format!("{} {}", nlc, query.expansion_text());
    let qvec = index.embed(&expanded);
    let sims: Vec<f64> = index.vectors().iter().map(|v| qvec.cosine(v)).collect();
    let vocabulary: Vec<String> = pairs.iter().flat_map(|p| text::content_stems(&label_of(p))).collect();
    let anchored = query.anchored(&vocabulary);

    let mut scored: Vec<(usize, Candidate)> = pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let mut support: Vec<(usize, f64)> = index
                .examples()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.matches_pair(pair))
                .map(|(pos, _)| (pos, sims[pos]))
                .collect();
            support.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let similarity = support.first().map(|s| s.1).unwrap_or(0.0);
            let overlap = query.overlap(&label_of(pair), &anchored);
            let score = config.alpha * similarity + config.beta * overlap;
            let evidence = support.iter().filter(|s| s.1 > 0.0).take(3).map(|s| s.0).collect();
            (
                i,
                Candidate {
                    pair: pair.clone(),
                    score,
                    evidence,
                },
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(_, c)| c).collect()
}

fn label_of(pair: &CEValuePair) -> String {
    format!("{} {}", pair.ce, pair.value.as_deref().unwrap_or(""))
}

fn decide(ranked: Vec<Candidate>, config: &ResolverConfig) -> Resolution {
    let mut distinct: Vec<Candidate> = Vec::new();
    for c in ranked {
        if !distinct
            .iter()
            .any(|d| d.pair.same_names(&c.pair.ce, c.pair.value.as_deref()))
        {
            distinct.push(c);
        }
    }
    let Some(top) = distinct.first() else {
        return Resolution::Unresolved(UnresolvedReason::NoMatch);
    };
    if top.score < config.accept {
        return Resolution::Unresolved(UnresolvedReason::NoMatch);
    }
    let top_score = top.score;
    let contenders: Vec<Candidate> = distinct
        .into_iter()
        .take_while(|c| top_score - c.score < config.gap)
        .take(config.max_candidates.max(1))
        .collect();
    if contenders.len() >= 2 {
        Resolution::Ambiguous(contenders)
    } else {
        Resolution::Resolved(contenders.into_iter().next().expect("top candidate"))
    }
}

fn resolve_offline(nlc: &str, index: &RetrievalIndex, pairs: &[CEValuePair], config: &ResolverConfig) -> Resolution {
    decide(score_pairs(nlc, index, pairs, config), config)
}

fn resolve_remote(
    nlc: &str,
    index: &RetrievalIndex,
    pairs: &[CEValuePair],
    client: &dyn CompletionClient,
    config: &ResolverConfig,
) -> Resolution {
    let shots: Vec<FewShotExample> = match index.top_k(nlc, config.k.max(1)) {
        Ok(hits) => hits.into_iter().map(|h: Scored| h.example).collect(),
        Err(_) => return Resolution::Unresolved(UnresolvedReason::NoMatch),
    };
    let Ok(prompt) = assemble_prompt(nlc, &shots) else {
        return Resolution::Unresolved(UnresolvedReason::NoMatch);
    };
    let replies = match client.complete(&prompt.text, REMOTE_REPLIES) {
        Ok(r) => r,
        Err(e) => {
            tracing::warn!(error = %e, "remote resolver failed");
            return Resolution::Unresolved(UnresolvedReason::ProviderError);
        }
    };
    // (pair, votes) in order of first appearance
    let mut tally: Vec<(CEValuePair, usize)> = Vec::new();
    let mut total = 0usize;
    for reply in &replies {
        let Some((ce, value)) = reply.lines().find_map(parse_response_line) else {
            continue;
        };
        let Some(pair) = pairs.iter().find(|p| p.same_names(&ce, value.as_deref())) else {
            tracing::debug!(%ce, "remote reply names an unknown pair; dropped");
            continue;
        };
        total += 1;
        match tally.iter_mut().find(|(p, _)| p == pair) {
            Some(entry) => entry.1 += 1,
            None => tally.push((pair.clone(), 1)),
        }
    }
    if tally.is_empty() {
        return Resolution::Unresolved(UnresolvedReason::NoMatch);
    }
    // stable: equal votes keep first-appearance order
    tally.sort_by_key(|t| std::cmp::Reverse(t.1));
    let mut candidates: Vec<Candidate> = tally
        .into_iter()
        .map(|(pair, votes)| Candidate {
            evidence: index
                .examples()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.matches_pair(&pair))
                .map(|(i, _)| i)
                .take(3)
                .collect(),
            pair,
            score: votes as f64 / total as f64,
        })
        .collect();
    if candidates.len() == 1 {
        return Resolution::Resolved(candidates.remove(0));
    }
    candidates.truncate(config.max_candidates.max(2));
    Resolution::Ambiguous(candidates)
}

/// Total over all inputs: failures come back as `Unresolved`.
pub fn resolve(
    nlc: &str,
    index: &RetrievalIndex,
    pairs: &[CEValuePair],
    provider: &ResolverProvider,
    config: &ResolverConfig,
) -> Resolution {
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        if nlc.trim().is_empty() || text::tokens(nlc).is_empty() || pairs.is_empty() {
            return Resolution::Unresolved(UnresolvedReason::NoMatch);
        }
        if is_composite(nlc, pairs, config.composite_coverage) {
            return Resolution::Unresolved(UnresolvedReason::CompositeCommand);
        }
        match provider {
            ResolverProvider::Offline => resolve_offline(nlc, index, pairs, config),
            ResolverProvider::Remote(client) => resolve_remote(nlc, index, pairs, client.as_ref(), config),
        }
    }));
    outcome.unwrap_or_else(|_| {
        tracing::error!("resolver panicked");
        Resolution::Unresolved(UnresolvedReason::ProviderError)
    })
}
