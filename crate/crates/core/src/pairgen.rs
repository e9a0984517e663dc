//! Derives every `<control, value>` pair an application offers.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::act::{Act, ActNode};
use crate::app_model::ControlKind;

/// Serde adapter mapping `None` to the literal `"none"` and back.
pub mod none_sentinel {
    use serde::{Deserialize, Deserializer, Serializer};

    pub const NONE: &str = "none";

    pub fn serialize<S: Serializer>(value: &Option<String>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(value.as_deref().unwrap_or(NONE))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
        let raw = String::deserialize(d)?;
        Ok(if raw.eq_ignore_ascii_case(NONE) {
            None
        } else {
            Some(raw)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CEValuePair {
    pub ce: String,
    #[serde(with = "none_sentinel")]
    pub value: Option<String>,
    #[serde(rename = "ce_id")]
    pub ce_control_id: String,
    #[serde(rename = "value_id", default, skip_serializing_if = "Option::is_none")]
    pub value_control_id: Option<String>,
}

impl CEValuePair {
    pub fn value_str(&self) -> &str {
        self.value.as_deref().unwrap_or(none_sentinel::NONE)
    }

    /// Case-insensitive comparison on names only.
    pub fn same_names(&self, ce: &str, value: Option<&str>) -> bool {
        self.ce.eq_ignore_ascii_case(ce)
            && match (&self.value, value) {
                (None, None) => true,
                (Some(a), Some(b)) => a.eq_ignore_ascii_case(b),
                _ => false,
            }
    }
}

impl fmt::Display for CEValuePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ce, self.value_str())
    }
}

/// A dropdown or menu whose children are all selectable leaves.
pub fn is_value_container(node: &ActNode) -> bool {
    node.kind.holds_value() && !node.children.is_empty() && node.child_nodes().all(|c| c.selectable && c.is_leaf())
}

/// Kinds that stand for a user intent on their own. Tabs, groups and
/// non-container menus/dropdowns only lead somewhere.
pub fn is_actionable(kind: ControlKind) -> bool {
    matches!(
        kind,
        ControlKind::Button
            | ControlKind::Toggle
            | ControlKind::MenuItem
            | ControlKind::ListItem
            | ControlKind::Editbox
    )
}

pub fn generate_pairs(act: &Act) -> Vec<CEValuePair> {
    let mut out = Vec::new();
    let mut seen: HashSet<(String, Option<String>)> = HashSet::new();
    for (parent, node) in act.nodes_with_parent() {
        if is_value_container(node) {
            for child in node.child_nodes() {
                if seen.insert((node.control_id.clone(), Some(child.name.clone()))) {
                    out.push(CEValuePair {
                        ce: node.name.clone(),
                        value: Some(child.name.clone()),
                        ce_control_id: node.control_id.clone(),
                        value_control_id: Some(child.control_id.clone()),
                    });
                }
            }
            continue;
        }
        let is_value_leaf = parent.is_some_and(is_value_container);
        if is_value_leaf || !is_actionable(node.kind) {
            continue;
        }
        if seen.insert((node.control_id.clone(), None)) {
            out.push(CEValuePair {
                ce: node.name.clone(),
                value: None,
                ce_control_id: node.control_id.clone(),
                value_control_id: None,
            });
        }
    }
    out
}

pub fn pairs_to_json(pairs: &[CEValuePair]) -> String {
    let mut s = serde_json::to_string_pretty(pairs).expect("pairs serialize");
    s.push('\n');
    s
}
