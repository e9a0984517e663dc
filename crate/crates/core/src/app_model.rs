//! Declarative simulated applications and the state machine that stands in
//! for an OS accessibility layer.
//!
//! An [`AppSpec`] lists every control an application has, which controls are
//! visible at launch, and which controls each control reveals when actuated.
//! An [`AppState`] tracks what is currently visible, focused and assigned.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Button,
    Toggle,
    Tab,
    Menu,
    MenuItem,
    Dropdown,
    ListItem,
    Group,
    Editbox,
}

impl ControlKind {
    /// Dropdowns and menus are the only kinds that can hold a value.
    pub fn holds_value(self) -> bool {
        matches!(self, ControlKind::Dropdown | ControlKind::Menu)
    }

    /// The verb recorded on the step that actuates a control of this kind.
    pub fn actuation_verb(self) -> StepVerb {
        match self {
            ControlKind::Tab
            | ControlKind::Menu
            | ControlKind::Dropdown
            | ControlKind::Group
            | ControlKind::Editbox => StepVerb::Click,
            ControlKind::ListItem | ControlKind::MenuItem => StepVerb::Select,
            ControlKind::Button | ControlKind::Toggle => StepVerb::Activate,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::Button => "button",
            ControlKind::Toggle => "toggle",
            ControlKind::Tab => "tab",
            ControlKind::Menu => "menu",
            ControlKind::MenuItem => "menu_item",
            ControlKind::Dropdown => "dropdown",
            ControlKind::ListItem => "list_item",
            ControlKind::Group => "group",
            ControlKind::Editbox => "editbox",
        }
    }
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub id: String,
    pub name: String,
    pub kind: ControlKind,
    #[serde(default)]
    pub visible_initially: bool,
    #[serde(default)]
    pub reveals: Vec<String>,
    #[serde(default)]
    pub selectable_value: bool,
}

/// Raw document shape; validated into an [`AppSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AppSpecDocument {
    app_name: String,
    roots: Vec<String>,
    controls: Vec<ControlSpec>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed app spec: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid app spec: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("duplicate control id `{0}`")]
    DuplicateId(String),
    #[error("control `{from}` reveals unknown control `{missing}`")]
    DanglingReveal { from: String, missing: String },
    #[error("root `{0}` is not a control")]
    UnknownRoot(String),
    #[error("root `{0}` is not visible initially")]
    HiddenRoot(String),
    #[error("reveal cycle through `{0}`")]
    RevealCycle(String),
    #[error("selectable control `{0}` has no dropdown or menu ancestor")]
    OrphanValue(String),
}

/// A validated simulated application. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppSpec {
    pub app_name: String,
    pub roots: Vec<String>,
    pub controls: Vec<ControlSpec>,
    index: HashMap<String, usize>,
    // parents[i] = indices of controls whose `reveals` list contains control i, in spec order
    parents: Vec<Vec<usize>>,
}

impl AppSpec {
    pub fn new(
        app_name: impl Into<String>,
        roots: Vec<String>,
        controls: Vec<ControlSpec>,
    ) -> Result<Self, ValidationError> {
        let mut index = HashMap::with_capacity(controls.len());
        for (i, c) in controls.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(ValidationError::DuplicateId(c.id.clone()));
            }
        }
        let mut parents = vec![Vec::new(); controls.len()];
        for (i, c) in controls.iter().enumerate() {
            for child in &c.reveals {
                let Some(&j) = index.get(child) else {
                    return Err(ValidationError::DanglingReveal {
                        from: c.id.clone(),
                        missing: child.clone(),
                    });
                };
                if !parents[j].contains(&i) {
                    parents[j].push(i);
                }
            }
        }
        for root in &roots {
            match index.get(root) {
                None => return Err(ValidationError::UnknownRoot(root.clone())),
                Some(&i) if !controls[i].visible_initially => return Err(ValidationError::HiddenRoot(root.clone())),
                Some(_) => {}
            }
        }
        let spec = AppSpec {
            app_name: app_name.into(),
            roots,
            controls,
            index,
            parents,
        };
        spec.check_acyclic()?;
        for (i, c) in spec.controls.iter().enumerate() {
            if c.selectable_value && spec.nearest_value_holder(i).is_none() {
                return Err(ValidationError::OrphanValue(c.id.clone()));
            }
        }
        Ok(spec)
    }

    fn check_acyclic(&self) -> Result<(), ValidationError> {
        // Kahn's algorithm; whatever is left over sits on a cycle.
        let n = self.controls.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for child in &self.controls[i].reveals {
                let j = self.index[child];
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        if seen == n {
            return Ok(());
        }
        let stuck = (0..n).find(|&i| indegree[i] > 0).expect("cycle member");
        Err(ValidationError::RevealCycle(self.controls[stuck].id.clone()))
    }

    pub fn control(&self, id: &str) -> Option<&ControlSpec> {
        self.index.get(id).map(|&i| &self.controls[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    /// Controls visible at launch: the roots first, then any other
    /// `visible_initially` control in spec order.
    pub fn launch_order(&self) -> Vec<&ControlSpec> {
        let mut out: Vec<&ControlSpec> = self.roots.iter().map(|r| &self.controls[self.index[r]]).collect();
        for c in &self.controls {
            if c.visible_initially && !self.roots.contains(&c.id) {
                out.push(c);
            }
        }
        out
    }

    /// Nearest dropdown/menu ancestor by reveal distance; ties go to the
    /// ancestor that comes first in spec order.
    fn nearest_value_holder(&self, i: usize) -> Option<usize> {
        let mut frontier = self.parents[i].clone();
        let mut seen: BTreeSet<usize> = frontier.iter().copied().collect();
        while !frontier.is_empty() {
            frontier.sort_unstable();
            if let Some(&hit) = frontier.iter().find(|&&p| self.controls[p].kind.holds_value()) {
                return Some(hit);
            }
            let mut next = Vec::new();
            for p in frontier {
                for &gp in &self.parents[p] {
                    if seen.insert(gp) {
                        next.push(gp);
                    }
                }
            }
            frontier = next;
        }
        None
    }

    /// Id of the container that receives this control's name as its value.
    pub fn value_container_of(&self, id: &str) -> Option<&str> {
        let i = self.position(id)?;
        if !self.controls[i].selectable_value {
            return None;
        }
        self.nearest_value_holder(i).map(|p| self.controls[p].id.as_str())
    }

    pub fn to_json(&self) -> String {
        let doc = AppSpecDocument {
            app_name: self.app_name.clone(),
            roots: self.roots.clone(),
            controls: self.controls.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("spec serializes")
    }
}

pub fn load_app_spec(source: &str) -> Result<AppSpec, SpecError> {
    let doc: AppSpecDocument = serde_json::from_str(source)?;
    Ok(AppSpec::new(doc.app_name, doc.roots, doc.controls)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepVerb {
    Select,
    Click,
    Activate,
}

impl fmt::Display for StepVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepVerb::Select => "Select",
            StepVerb::Click => "Click",
            StepVerb::Activate => "Activate",
        })
    }
}

/// One screen-reader action. All verbs actuate the target when applied;
/// the verb is kept for display.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub verb: StepVerb,
    pub target_name: String,
    pub target_id: String,
}

impl Step {
    pub fn actuate(control: &ControlSpec) -> Self {
        Step {
            verb: control.kind.actuation_verb(),
            target_name: control.name.clone(),
            target_id: control.id.clone(),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.verb, self.target_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id")]
pub enum StepError {
    #[error("control `{0}` exists but is not visible")]
    TargetNotVisible(String),
    #[error("no control with id `{0}`")]
    UnknownTarget(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// Ids that became visible, in `reveals` order.
    pub revealed: Vec<String>,
    /// `(container id, value)` when the step assigned a value.
    pub assigned: Option<(String, String)>,
}

/// Mutable runtime state of one simulated application instance.
#[derive(Debug, Clone)]
pub struct AppState {
    spec: Arc<AppSpec>,
    visible: BTreeSet<String>,
    focused: Option<String>,
    assigned_values: BTreeMap<String, String>,
    log: Vec<Step>,
}

/// Serializable view of an [`AppState`], used for snapshots and equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub app_name: String,
    pub visible: BTreeSet<String>,
    pub focused: Option<String>,
    pub assigned_values: BTreeMap<String, String>,
    pub snapshot_log: Vec<Step>,
}

impl AppState {
    pub fn new(spec: Arc<AppSpec>) -> Self {
        let visible = spec
            .controls
            .iter()
            .filter(|c| c.visible_initially)
            .map(|c| c.id.clone())
            .collect();
        AppState {
            spec,
            visible,
            focused: None,
            assigned_values: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn spec(&self) -> &Arc<AppSpec> {
        &self.spec
    }

    pub fn is_visible(&self, id: &str) -> bool {
        self.visible.contains(id)
    }

    pub fn visible(&self) -> &BTreeSet<String> {
        &self.visible
    }

    pub fn focused(&self) -> Option<&str> {
        self.focused.as_deref()
    }

    pub fn assigned_values(&self) -> &BTreeMap<String, String> {
        &self.assigned_values
    }

    pub fn value_of(&self, container_id: &str) -> Option<&str> {
        self.assigned_values.get(container_id).map(String::as_str)
    }

    pub fn log(&self) -> &[Step] {
        &self.log
    }

    /// Applies one step atomically: either every effect lands or none does.
    pub fn apply_step(&mut self, step: &Step) -> Result<StepOutcome, StepError> {
        let Some(control) = self.spec.control(&step.target_id) else {
            return Err(StepError::UnknownTarget(step.target_id.clone()));
        };
        if !self.visible.contains(&control.id) {
            return Err(StepError::TargetNotVisible(control.id.clone()));
        }
        let mut outcome = StepOutcome::default();
        for child in &control.reveals {
            if self.visible.insert(child.clone()) {
                outcome.revealed.push(child.clone());
            }
        }
        if let Some(container) = self.spec.value_container_of(&control.id) {
            self.assigned_values.insert(container.to_string(), control.name.clone());
            outcome.assigned = Some((container.to_string(), control.name.clone()));
        }
        self.focused = Some(control.id.clone());
        self.log.push(step.clone());
        Ok(outcome)
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            app_name: self.spec.app_name.clone(),
            visible: self.visible.clone(),
            focused: self.focused.clone(),
            assigned_values: self.assigned_values.clone(),
            snapshot_log: self.log.clone(),
        }
    }

    /// Restores the mutable parts of a snapshot taken from this state.
    pub fn restore(&mut self, snapshot: StateSnapshot) {
        debug_assert_eq!(snapshot.app_name, self.spec.app_name);
        self.visible = snapshot.visible;
        self.focused = snapshot.focused;
        self.assigned_values = snapshot.assigned_values;
        self.log = snapshot.snapshot_log;
    }
}
