//! Few-shot example dataset: one natural-language command per
//! `<control, value>` pair, produced by a seed generator, curated, and
//! stored as line-delimited JSON.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::act::Act;
use crate::app_model::ControlKind;
use crate::pairgen::{none_sentinel, CEValuePair};
use crate::provider::{CompletionClient, ProviderError};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Template,
    Remote,
    Handcrafted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FewShotExample {
    pub nlc: String,
    pub ce: String,
    #[serde(with = "none_sentinel")]
    pub value: Option<String>,
    pub app: String,
    pub source: Source,
}

impl FewShotExample {
    pub fn value_str(&self) -> &str {
        self.value.as_deref().unwrap_or(none_sentinel::NONE)
    }

    pub fn matches_pair(&self, pair: &CEValuePair) -> bool {
        pair.same_names(&self.ce, self.value.as_deref())
    }

    fn handcrafted(app: &str, ce: &str, value: Option<&str>, nlc: &str) -> Self {
        FewShotExample {
            nlc: nlc.into(),
            ce: ce.into(),
            value: value.map(Into::into),
            app: app.into(),
            source: Source::Handcrafted,
        }
    }
}

impl fmt::Display for FewShotExample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => ({}, {})", self.nlc, self.ce, self.value_str())
    }
}

/// The cross-application guiding set given to every seed request: four
/// general examples plus two per bundled application.
pub fn guiding_examples() -> Vec<FewShotExample> {
    vec![
        FewShotExample::handcrafted("File Explorer", "new item", Some("folder"), "Create a new folder."),
        FewShotExample::handcrafted("Wordpad", "strikethrough", None, "Strike the selected text."),
        FewShotExample::handcrafted(
            "Zoom",
            "start a new meeting with video off",
            None,
            "Start a new meeting without the video.",
        ),
        FewShotExample::handcrafted("Notepad", "edit", Some("cut"), "cut the selected text"),
        FewShotExample::handcrafted("wordpad", "Margins", Some("Narrow"), "Change the Margin to Narrow."),
        FewShotExample::handcrafted("wordpad", "Grow Font", None, "Make the font bigger."),
        FewShotExample::handcrafted("notepad", "Word Wrap", None, "Wrap long lines of text."),
        FewShotExample::handcrafted("notepad", "Select All", None, "Select all the text."),
        FewShotExample::handcrafted("explorer", "Sort by", Some("Date"), "Sort the files by date."),
        FewShotExample::handcrafted("explorer", "Hidden Items", None, "Show hidden items."),
    ]
}

/// What a seed generator is asked to phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedRequest {
    pub pair: CEValuePair,
    pub kind: ControlKind,
}

pub trait SeedGenerator: Send + Sync {
    fn source(&self) -> Source;

    fn generate(
        &self,
        request: &SeedRequest,
        app_name: &str,
        guiding: &[FewShotExample],
    ) -> Result<String, ProviderError>;
}

/// Formatting toggles phrased as "<verb> the selected text".
const FORMAT_VERBS: &[(&str, &str)] = &[
    ("bold", "Bold"),
    ("italic", "Italicize"),
    ("underline", "Underline"),
    ("strikethrough", "Strike"),
    ("subscript", "Subscript"),
    ("superscript", "Superscript"),
];

/// Editing commands phrased as "<verb> the selection".
const EDIT_VERBS: &[&str] = &["cut", "copy", "delete"];

/// Deterministic offline seed generator.
#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateSeed;

impl TemplateSeed {
    pub fn phrase(request: &SeedRequest, guiding: &[FewShotExample]) -> String {
        let pair = &request.pair;
        if let Some(shot) = guiding.iter().find(|g| g.matches_pair(pair)) {
            return shot.nlc.clone();
        }
        if let Some(value) = &pair.value {
            return format!("Change the {} to {}.", pair.ce, value);
        }
        let key = pair.ce.to_lowercase();
        if let Some((_, verb)) = FORMAT_VERBS.iter().find(|(name, _)| *name == key) {
            return format!("{verb} the selected text.");
        }
        if request.kind != ControlKind::Toggle && EDIT_VERBS.contains(&key.as_str()) {
            return format!("{} the selection.", sentence_case(&pair.ce));
        }
        match request.kind {
            ControlKind::Toggle => format!("Activate {}.", pair.ce),
            _ => format!("{}.", sentence_case(&pair.ce)),
        }
    }
}

impl SeedGenerator for TemplateSeed {
    fn source(&self) -> Source {
        Source::Template
    }

    fn generate(
        &self,
        request: &SeedRequest,
        _app_name: &str,
        guiding: &[FewShotExample],
    ) -> Result<String, ProviderError> {
        Ok(Self::phrase(request, guiding))
    }
}

fn sentence_case(s: &str) -> String {
    let lower = s.to_lowercase();
    let mut chars = lower.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Renders the seed prompt: guiding examples, then the pair to phrase.
pub fn render_seed_prompt(guiding: &[FewShotExample], app_name: &str, pair: &CEValuePair) -> String {
    let mut out = String::from("Comment: Diverse Applications Few-shot guiding examples\n\n");
    for shot in guiding {
        out.push_str(&format!(
            "App: {}\nControl-Value pair: ({}, {})\nResponse: {}\n\n",
            shot.app,
            shot.ce,
            shot.value_str(),
            shot.nlc
        ));
    }
    out.push_str("Comment: Generating more examples\n\n");
    out.push_str(&format!("App: {app_name}\nControl-Value pair: {pair}\n\n"));
    out.push_str("Comment: LLM-generated output\n\nResponse:");
    out
}

/// Seed generator backed by a remote completion provider.
pub struct RemoteSeed<C> {
    client: C,
}

impl<C: CompletionClient> RemoteSeed<C> {
    pub fn new(client: C) -> Self {
        RemoteSeed { client }
    }
}

/// First non-empty line of a completion, minus any `Response:` label.
pub fn parse_seed_reply(reply: &str) -> Option<String> {
    let line = reply.lines().map(str::trim).find(|l| !l.is_empty())?;
    let line = line.strip_prefix("Response:").unwrap_or(line).trim();
    (!line.is_empty()).then(|| line.to_string())
}

impl<C: CompletionClient> SeedGenerator for RemoteSeed<C> {
    fn source(&self) -> Source {
        Source::Remote
    }

    fn generate(
        &self,
        request: &SeedRequest,
        app_name: &str,
        guiding: &[FewShotExample],
    ) -> Result<String, ProviderError> {
        let prompt = render_seed_prompt(guiding, app_name, &request.pair);
        let replies = self.client.complete(&prompt, 1)?;
        replies
            .first()
            .and_then(|r| parse_seed_reply(r))
            .ok_or_else(|| ProviderError::Reply("empty seed reply".into()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct FedGeneration {
    pub examples: Vec<FewShotExample>,
    pub failures: Vec<(CEValuePair, ProviderError)>,
}

/// One example per pair, in pair order. Provider failures are collected
/// per pair instead of aborting the run.
pub fn generate_fed(act: &Act, pairs: &[CEValuePair], generator: &dyn SeedGenerator) -> FedGeneration {
    let guiding = guiding_examples();
    let mut out = FedGeneration::default();
    for pair in pairs {
        let kind = act
            .node(&pair.ce_control_id)
            .map(|n| n.kind)
            .unwrap_or(ControlKind::Button);
        let request = SeedRequest {
            pair: pair.clone(),
            kind,
        };
        match generator.generate(&request, &act.app_name, &guiding) {
            Ok(nlc) => out.examples.push(FewShotExample {
                nlc,
                ce: pair.ce.clone(),
                value: pair.value.clone(),
                app: act.app_name.clone(),
                source: generator.source(),
            }),
            Err(e) => out.failures.push((pair.clone(), e)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurationRule {
    /// R1: the command is blank.
    EmptyCommand,
    /// R2: the control name is a placeholder.
    PlaceholderControl,
    /// R3: the command shares no content word with the control or value.
    NoLexicalOverlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discarded {
    pub example: FewShotExample,
    pub rule: CurationRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationReport {
    pub kept: usize,
    pub discarded: Vec<Discarded>,
}

#[derive(Debug, Clone)]
pub struct CurationRules {
    pub placeholder_denylist: Vec<String>,
}

impl Default for CurationRules {
    fn default() -> Self {
        CurationRules {
            placeholder_denylist: vec!["coming soon".into()],
        }
    }
}

impl CurationRules {
    pub fn check(&self, example: &FewShotExample) -> Option<CurationRule> {
        if example.nlc.trim().is_empty() {
            return Some(CurationRule::EmptyCommand);
        }
        let ce = example.ce.trim().to_lowercase();
        if self.placeholder_denylist.iter().any(|p| p.to_lowercase() == ce) {
            return Some(CurationRule::PlaceholderControl);
        }
        let label = format!("{} {}", example.ce, example.value.as_deref().unwrap_or(""));
        let mut targets = text::content_stems(&label);
        if targets.is_empty() {
            targets = text::stems(&label);
        }
        let words = text::content_stems(&example.nlc);
        let overlap = words.iter().any(|w| targets.iter().any(|t| text::stems_match(w, t)));
        if !overlap {
            return Some(CurationRule::NoLexicalOverlap);
        }
        None
    }
}

pub fn curate(examples: Vec<FewShotExample>, rules: &CurationRules) -> (Vec<FewShotExample>, CurationReport) {
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for example in examples {
        match rules.check(&example) {
            None => kept.push(example),
            Some(rule) => discarded.push(Discarded { example, rule }),
        }
    }
    let report = CurationReport {
        kept: kept.len(),
        discarded,
    };
    (kept, report)
}

#[derive(Debug, Error)]
pub enum FedError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading few-shot dataset: {0}")]
    Io(#[from] std::io::Error),
}

/// Loaded few-shot dataset, immutable after load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FedStore {
    examples: Vec<FewShotExample>,
}

impl FedStore {
    pub fn new(examples: Vec<FewShotExample>) -> Self {
        FedStore { examples }
    }

    pub fn examples(&self) -> &[FewShotExample] {
        &self.examples
    }

    pub fn into_examples(self) -> Vec<FewShotExample> {
        self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn for_app(&self, app: &str) -> Vec<FewShotExample> {
        self.examples.iter().filter(|e| e.app == app).cloned().collect()
    }

    pub fn counts_by_app(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.examples {
            *counts.entry(e.app.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.examples {
            out.push_str(&serde_json::to_string(e).expect("example serializes"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<FedStore, FedError> {
        let mut examples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                return Err(FedError::Parse {
                    line: line_no,
                    message: "blank line".into(),
                });
            }
            let example: FewShotExample = serde_json::from_str(line).map_err(|e| FedError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let problem = if example.nlc.trim().is_empty() {
                Some("empty nlc")
            } else if example.ce.trim().is_empty() {
                Some("empty ce")
            } else if example.app.trim().is_empty() {
                Some("empty app")
            } else {
                None
            };
            if let Some(message) = problem {
                return Err(FedError::Parse {
                    line: line_no,
                    message: message.into(),
                });
            }
            examples.push(example);
        }
        Ok(FedStore { examples })
    }

    pub fn save(&self, path: &Path) -> Result<(), FedError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FedStore, FedError> {
        FedStore::parse_jsonl(&fs::read_to_string(path)?)
    }

    /// Examples whose `(ce, value)` is not among `pairs`.
    pub fn unmatched<'a>(&'a self, pairs: &[CEValuePair]) -> Vec<&'a FewShotExample> {
        self.examples
            .iter()
            .filter(|e| !pairs.iter().any(|p| e.matches_pair(p)))
            .collect()
    }
}
