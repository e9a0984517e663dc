//! Application Control Tree: controls as nodes, actuation steps as edges,
//! and the full step sequence from the application window stored on every
//! node so it can be replayed later.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::app_model::{ControlKind, Step};

pub const ACT_FORMAT: &str = "act/1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepSequence(pub Vec<Step>);

impl StepSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn extended(&self, step: Step) -> StepSequence {
        let mut steps = self.0.clone();
        steps.push(step);
        StepSequence(steps)
    }

    pub fn last(&self) -> Option<&Step> {
        self.0.last()
    }

    /// Human-readable rendering, e.g. `Click Layout -> Click Margins`.
    pub fn describe(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActEdge {
    pub step: Step,
    pub node: ActNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActNode {
    pub control_id: String,
    pub name: String,
    pub kind: ControlKind,
    /// Whether actuating this control assigns its name to a container.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub selectable: bool,
    pub depth: usize,
    pub path: StepSequence,
    #[serde(default)]
    pub children: Vec<ActEdge>,
}

impl ActNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn child_nodes(&self) -> impl Iterator<Item = &ActNode> {
        self.children.iter().map(|e| &e.node)
    }
}

/// The tree below a synthetic application-window root. The root itself has
/// no control; its children are the controls visible at launch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Act {
    pub format: String,
    pub app_name: String,
    pub children: Vec<ActEdge>,
}

#[derive(Debug, Error)]
pub enum ActError {
    #[error("no control `{0}` in the control tree")]
    UnknownControl(String),
    #[error("malformed control tree: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported control tree format `{0}` (expected `{ACT_FORMAT}`)")]
    SchemaVersion(String),
    #[error("inconsistent control tree at `{0}`: {1}")]
    Inconsistent(String, &'static str),
}

impl Act {
    pub fn empty(app_name: impl Into<String>) -> Self {
        Act {
            format: ACT_FORMAT.to_string(),
            app_name: app_name.into(),
            children: Vec::new(),
        }
    }

    /// Every node in breadth-first order (the synthetic root excluded).
    pub fn nodes(&self) -> Vec<&ActNode> {
        let mut out = Vec::new();
        let mut queue: VecDeque<&ActNode> = self.children.iter().map(|e| &e.node).collect();
        while let Some(node) = queue.pop_front() {
            out.push(node);
            queue.extend(node.child_nodes());
        }
        out
    }

    /// Nodes paired with their parent (None for depth-1 nodes), breadth-first.
    pub fn nodes_with_parent(&self) -> Vec<(Option<&ActNode>, &ActNode)> {
        let mut out = Vec::new();
        let mut queue: VecDeque<(Option<&ActNode>, &ActNode)> = self.children.iter().map(|e| (None, &e.node)).collect();
        while let Some((parent, node)) = queue.pop_front() {
            out.push((parent, node));
            queue.extend(node.child_nodes().map(|c| (Some(node), c)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node(&self, control_id: &str) -> Option<&ActNode> {
        self.nodes().into_iter().find(|n| n.control_id == control_id)
    }

    pub fn path_to(&self, control_id: &str) -> Result<&StepSequence, ActError> {
        self.node(control_id)
            .map(|n| &n.path)
            .ok_or_else(|| ActError::UnknownControl(control_id.to_string()))
    }

    /// Case-insensitive exact-name matches in breadth-first order.
    pub fn find_by_name(&self, name: &str) -> Vec<&ActNode> {
        let wanted = name.to_lowercase();
        self.nodes()
            .into_iter()
            .filter(|n| n.name.to_lowercase() == wanted)
            .collect()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes().iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Canonical pretty JSON; stable for a given tree.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("act serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Act, ActError> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format != ACT_FORMAT {
            return Err(ActError::SchemaVersion(header.format));
        }
        let act: Act = serde_json::from_str(text)?;
        act.check()?;
        Ok(act)
    }

    /// Verifies depth and path bookkeeping on every edge.
    pub fn check(&self) -> Result<(), ActError> {
        fn walk(edges: &[ActEdge], depth: usize, prefix: &StepSequence) -> Result<(), ActError> {
            for edge in edges {
                let node = &edge.node;
                if node.depth != depth {
                    return Err(ActError::Inconsistent(node.control_id.clone(), "depth"));
                }
                if node.path != prefix.extended(edge.step.clone()) {
                    return Err(ActError::Inconsistent(node.control_id.clone(), "path"));
                }
                if edge.step.target_id != node.control_id {
                    return Err(ActError::Inconsistent(node.control_id.clone(), "edge target"));
                }
                walk(&node.children, depth + 1, &node.path)?;
            }
            Ok(())
        }
        walk(&self.children, 1, &StepSequence::default())
    }
}
