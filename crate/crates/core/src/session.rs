//! One user's running application plus the command loop around it:
//! resolve, disambiguate, execute. Also the JSON shapes the HTTP service
//! and its clients exchange.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::act::StepSequence;
use crate::app_model::{AppState, StepError};
use crate::catalog::AppBundle;
use crate::pairgen::CEValuePair;
use crate::relay::{self, ExecutionStatus, MessageTemplates, StateDiff};
use crate::resolver::{resolve, Candidate, Resolution, ResolverConfig, ResolverProvider, UnresolvedReason};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("no app named `{0}`")]
    UnknownApp(String),
    #[error("no session with id `{0}`")]
    UnknownSession(String),
    #[error("a choice between candidates is pending; answer it first")]
    PendingChoice,
    #[error("no choice is pending")]
    NoPending,
    #[error("candidate {index} out of range (0..{len})")]
    IndexOutOfRange { index: usize, len: usize },
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::UnknownApp(_) => "UnknownApp",
            SessionError::UnknownSession(_) => "UnknownSession",
            SessionError::PendingChoice => "PendingChoice",
            SessionError::NoPending => "NoPending",
            SessionError::IndexOutOfRange { .. } => "IndexOutOfRange",
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            error: self.to_string(),
            code: self.code().to_string(),
        }
    }
}

/// Error payload of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CommandOutcome {
    Executed {
        pair: CEValuePair,
        steps: StepSequence,
        message: String,
        state_diff: StateDiff,
    },
    Ambiguous {
        candidates: Vec<Candidate>,
        message: String,
    },
    Unresolved {
        reason: UnresolvedReason,
        message: String,
    },
    /// Resolution succeeded but a step could not be applied; state is unchanged.
    Failed {
        pair: CEValuePair,
        steps: StepSequence,
        message: String,
        step_index: usize,
        error: StepError,
    },
}

impl CommandOutcome {
    pub fn message(&self) -> &str {
        match self {
            CommandOutcome::Executed { message, .. }
            | CommandOutcome::Ambiguous { message, .. }
            | CommandOutcome::Unresolved { message, .. }
            | CommandOutcome::Failed { message, .. } => message,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CommandOutcome::Executed { .. } => "executed",
            CommandOutcome::Ambiguous { .. } => "ambiguous",
            CommandOutcome::Unresolved { .. } => "unresolved",
            CommandOutcome::Failed { .. } => "failed",
        }
    }
}

pub fn unresolved_message(reason: UnresolvedReason) -> &'static str {
    match reason {
        UnresolvedReason::CompositeCommand => "That looks like several instructions. Please issue them one at a time.",
        UnresolvedReason::NoMatch => "Sorry, I could not match that to a control. Please rephrase the command.",
        UnresolvedReason::ProviderError => "The interpreter is unavailable right now. Please re-issue the command.",
    }
}

pub fn ambiguous_message(candidates: &[Candidate]) -> String {
    let options: Vec<String> = candidates.iter().map(|c| c.pair.to_string()).collect();
    format!("Did you mean one of: {}?", options.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptInput {
    Command { nlc: String },
    Choice { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub input: TranscriptInput,
    /// Absent for choices, which reuse the pending resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
    pub outcome: CommandOutcome,
}

/// A visible control and the visible controls it revealed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlView {
    pub id: String,
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ControlView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub app: String,
    pub focused: Option<String>,
    pub assigned_values: BTreeMap<String, String>,
    pub tree: Vec<ControlView>,
}

impl StateView {
    pub fn of(state: &AppState) -> Self {
        let spec = state.spec();
        let mut seen = BTreeSet::new();
        let mut tree = Vec::new();
        for control in spec.launch_order() {
            if state.is_visible(&control.id) && seen.insert(control.id.clone()) {
                tree.push(view_of(state, &control.id, &mut seen));
            }
        }
        StateView {
            app: spec.app_name.clone(),
            focused: state.focused().map(str::to_string),
            assigned_values: state.assigned_values().clone(),
            tree,
        }
    }

    /// Names of every visible control, depth first.
    pub fn visible_names(&self) -> Vec<String> {
        fn walk(views: &[ControlView], out: &mut Vec<String>) {
            for v in views {
                out.push(v.name.clone());
                walk(&v.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.tree, &mut out);
        out
    }
}

fn view_of(state: &AppState, id: &str, seen: &mut BTreeSet<String>) -> ControlView {
    let control = state.spec().control(id).expect("visible ids come from the spec");
    let mut children = Vec::new();
    for child in &control.reveals {
        if state.is_visible(child) && seen.insert(child.clone()) {
            children.push(view_of(state, child, seen));
        }
    }
    ControlView {
        id: control.id.clone(),
        name: control.name.clone(),
        kind: control.kind.as_str().to_string(),
        value: state.value_of(&control.id).map(str::to_string),
        children,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub app: String,
    /// Names of the controls visible right after launch.
    pub visible: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppSummary {
    pub name: String,
    pub controls: usize,
    pub pairs: usize,
    pub examples: usize,
}

impl AppSummary {
    pub fn of(bundle: &AppBundle) -> Self {
        AppSummary {
            name: bundle.name().to_string(),
            controls: bundle.spec.len(),
            pairs: bundle.pairs.len(),
            examples: bundle.index.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    pub app: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitCommand {
    pub nlc: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChooseCandidate {
    pub index: usize,
}

/// Resolver settings shared by every session of a process.
#[derive(Debug, Clone, Default)]
pub struct Runtime {
    pub provider: ResolverProvider,
    pub config: ResolverConfig,
    pub templates: MessageTemplates,
}

#[derive(Debug)]
pub struct Session {
    id: String,
    app: Arc<AppBundle>,
    state: AppState,
    pending: Option<Vec<Candidate>>,
    transcript: Vec<TranscriptEntry>,
}

impl Session {
    pub fn new(id: impl Into<String>, app: Arc<AppBundle>) -> Self {
        let state = app.new_state();
        Session {
            id: id.into(),
            app,
            state,
            pending: None,
            transcript: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn app(&self) -> &Arc<AppBundle> {
        &self.app
    }

    pub fn state(&self) -> &AppState {
        &self.state
    }

    pub fn pending(&self) -> Option<&[Candidate]> {
        self.pending.as_deref()
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            id: self.id.clone(),
            app: self.app.name().to_string(),
            visible: StateView::of(&self.state).visible_names(),
        }
    }

    pub fn view(&self) -> StateView {
        StateView::of(&self.state)
    }

    pub fn resolve(&self, nlc: &str, runtime: &Runtime) -> Resolution {
        resolve(
            nlc,
            &self.app.index,
            &self.app.pairs,
            &runtime.provider,
            &runtime.config,
        )
    }

    pub fn submit(&mut self, nlc: &str, runtime: &Runtime) -> Result<CommandOutcome, SessionError> {
        if self.pending.is_some() {
            return Err(SessionError::PendingChoice);
        }
        let resolution = self.resolve(nlc, runtime);
        let outcome = match &resolution {
            Resolution::Resolved(c) => self.run(&c.pair, &runtime.templates),
            Resolution::Ambiguous(cs) => {
                self.pending = Some(cs.clone());
                CommandOutcome::Ambiguous {
                    candidates: cs.clone(),
                    message: ambiguous_message(cs),
                }
            }
            Resolution::Unresolved(reason) => CommandOutcome::Unresolved {
                reason: *reason,
                message: unresolved_message(*reason).to_string(),
            },
        };
        self.transcript.push(TranscriptEntry {
            input: TranscriptInput::Command { nlc: nlc.to_string() },
            resolution: Some(resolution),
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }

    pub fn choose(&mut self, index: usize, runtime: &Runtime) -> Result<CommandOutcome, SessionError> {
        let Some(candidates) = &self.pending else {
            return Err(SessionError::NoPending);
        };
        let Some(chosen) = candidates.get(index) else {
            return Err(SessionError::IndexOutOfRange {
                index,
                len: candidates.len(),
            });
        };
        let pair = chosen.pair.clone();
        self.pending = None;
        let outcome = self.run(&pair, &runtime.templates);
        self.transcript.push(TranscriptEntry {
            input: TranscriptInput::Choice { index },
            resolution: None,
            outcome: outcome.clone(),
        });
        Ok(outcome)
    }

    fn run(&mut self, pair: &CEValuePair, templates: &MessageTemplates) -> CommandOutcome {
        let seq = match relay::plan(&self.app.act, pair) {
            Ok(seq) => seq,
            Err(_) => {
                // Pairs come from the same tree, so this only trips on a
                // hand-edited remote reply that slipped through.
                return CommandOutcome::Failed {
                    pair: pair.clone(),
                    steps: StepSequence::default(),
                    message: templates.render(pair, false),
                    step_index: 0,
                    error: StepError::UnknownTarget(pair.ce_control_id.clone()),
                };
            }
        };
        let report = relay::execute(&mut self.state, &seq, pair, templates);
        match report.status {
            ExecutionStatus::Success => CommandOutcome::Executed {
                pair: pair.clone(),
                steps: report.steps_executed,
                message: report.message,
                state_diff: report.state_diff,
            },
            ExecutionStatus::Failed { step_index, error } => CommandOutcome::Failed {
                pair: pair.clone(),
                steps: report.steps_executed,
                message: report.message,
                step_index,
                error,
            },
        }
    }
}
