//! Action relay: plans the screen-reader steps for a resolved pair and runs
//! them against a session's application state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::act::{Act, ActError, StepSequence};
use crate::app_model::{AppState, StepError};
use crate::pairgen::CEValuePair;

/// Steps that reach the pair's target: the value option when there is one,
/// otherwise the control itself.
pub fn plan(act: &Act, pair: &CEValuePair) -> Result<StepSequence, ActError> {
    let target = pair.value_control_id.as_deref().unwrap_or(&pair.ce_control_id);
    act.path_to(target).cloned()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExecutionStatus {
    Success,
    Failed { step_index: usize, error: StepError },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDiff {
    pub newly_visible: Vec<String>,
    pub assigned: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub status: ExecutionStatus,
    pub steps_executed: StepSequence,
    pub message: String,
    pub state_diff: StateDiff,
}

impl ExecutionReport {
    pub fn succeeded(&self) -> bool {
        self.status == ExecutionStatus::Success
    }
}

/// User-facing confirmation templates. `{ce}` and `{value}` are substituted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MessageTemplates {
    pub value_success: String,
    pub none_success: String,
    pub failure: String,
}

impl Default for MessageTemplates {
    fn default() -> Self {
        MessageTemplates {
            value_success: "{ce} updated {value}".into(),
            none_success: "{ce} activated".into(),
            failure: "Could not complete '{ce}'. Please re-issue the command.".into(),
        }
    }
}

impl MessageTemplates {
    pub fn render(&self, pair: &CEValuePair, succeeded: bool) -> String {
        let template = match (succeeded, &pair.value) {
            (false, _) => &self.failure,
            (true, Some(_)) => &self.value_success,
            (true, None) => &self.none_success,
        };
        template.replace("{ce}", &pair.ce).replace("{value}", pair.value_str())
    }
}

/// Applies `seq` in order. On the first failing step the state is rolled
/// back to what it was before the call.
pub fn execute(
    state: &mut AppState,
    seq: &StepSequence,
    pair: &CEValuePair,
    templates: &MessageTemplates,
) -> ExecutionReport {
    let snapshot = state.snapshot();
    let mut diff = StateDiff::default();
    for (i, step) in seq.steps().iter().enumerate() {
        match state.apply_step(step) {
            Ok(outcome) => {
                diff.newly_visible.extend(outcome.revealed);
                if let Some((container, value)) = outcome.assigned {
                    diff.assigned.insert(container, value);
                }
            }
            Err(error) => {
                state.restore(snapshot);
                return ExecutionReport {
                    status: ExecutionStatus::Failed { step_index: i, error },
                    steps_executed: StepSequence(seq.steps()[..i].to_vec()),
                    message: templates.render(pair, false),
                    state_diff: StateDiff::default(),
                };
            }
        }
    }
    ExecutionReport {
        status: ExecutionStatus::Success,
        steps_executed: seq.clone(),
        message: templates.render(pair, true),
        state_diff: diff,
    }
}
