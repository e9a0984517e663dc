//! Breadth-first exploration of a simulated application.
//!
//! The crawler drives a single [`AppState`]: every discovered control is
//! actuated exactly once, and whatever that actuation newly reveals becomes
//! its children. Visibility only ever grows, so a control that is queued is
//! still visible when its turn comes and no path needs replaying mid-crawl.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::act::{Act, ActEdge, ActNode, StepSequence};
use crate::app_model::{AppSpec, AppState, Step};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlReport {
    pub nodes_discovered: usize,
    pub max_depth: usize,
    pub steps_simulated: usize,
    pub unreachable_ids: Vec<String>,
}

struct Pending {
    id: String,
    depth: usize,
    path: StepSequence,
    parent: Option<usize>,
}

pub fn crawl(spec: &AppSpec) -> (Act, CrawlReport) {
    let spec_arc = Arc::new(spec.clone());
    let mut state = AppState::new(spec_arc);

    // Flat arena of discovered nodes; assembled into a tree at the end.
    let mut arena: Vec<(ActNode, Step, Option<usize>)> = Vec::new();
    let mut visited: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<Pending> = VecDeque::new();

    for control in spec.launch_order() {
        if visited.insert(control.id.clone()) {
            queue.push_back(Pending {
                id: control.id.clone(),
                depth: 1,
                path: StepSequence::default(),
                parent: None,
            });
        }
    }

    let mut steps_simulated = 0;
    while let Some(item) = queue.pop_front() {
        let control = spec.control(&item.id).expect("queued ids come from the spec");
        let step = Step::actuate(control);
        let path = item.path.extended(step.clone());
        let outcome = state
            .apply_step(&step)
            .expect("queued controls are visible: visibility is monotone");
        steps_simulated += 1;

        let slot = arena.len();
        arena.push((
            ActNode {
                control_id: control.id.clone(),
                name: control.name.clone(),
                kind: control.kind,
                selectable: control.selectable_value,
                depth: item.depth,
                path: path.clone(),
                children: Vec::new(),
            },
            step,
            item.parent,
        ));

        for child in outcome.revealed {
            if visited.insert(child.clone()) {
                queue.push_back(Pending {
                    id: child,
                    depth: item.depth + 1,
                    path: path.clone(),
                    parent: Some(slot),
                });
            }
        }
    }

    let unreachable_ids = spec
        .controls
        .iter()
        .filter(|c| !visited.contains(&c.id))
        .map(|c| c.id.clone())
        .collect();

    let max_depth = arena.iter().map(|(n, _, _)| n.depth).max().unwrap_or(0);
    let report = CrawlReport {
        nodes_discovered: arena.len(),
        max_depth,
        steps_simulated,
        unreachable_ids,
    };
    (assemble(&spec.app_name, arena), report)
}

// Children always sit after their parent in the arena, so folding from the
// back attaches each finished subtree to its parent.
fn assemble(app_name: &str, arena: Vec<(ActNode, Step, Option<usize>)>) -> Act {
    let mut children: HashMap<Option<usize>, Vec<ActEdge>> = HashMap::new();
    let mut slots: Vec<Option<(ActNode, Step, Option<usize>)>> = arena.into_iter().map(Some).collect();
    for i in (0..slots.len()).rev() {
        let (mut node, step, parent) = slots[i].take().expect("each slot taken once");
        if let Some(mut kids) = children.remove(&Some(i)) {
            kids.reverse();
            node.children = kids;
        }
        children.entry(parent).or_default().push(ActEdge { step, node });
    }
    let mut top = children.remove(&None).unwrap_or_default();
    top.reverse();
    Act {
        children: top,
        ..Act::empty(app_name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app_model::{ControlKind, ControlSpec};
    use crate::fixtures;

    fn control(id: &str, kind: ControlKind, visible: bool, reveals: &[&str]) -> ControlSpec {
        ControlSpec {
            id: id.into(),
            name: id.into(),
            kind,
            visible_initially: visible,
            reveals: reveals.iter().map(|s| s.to_string()).collect(),
            selectable_value: false,
        }
    }

    #[test]
    fn flat_spec_gives_depth_one_nodes() {
        let spec = AppSpec::new(
            "flat",
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                control("a", ControlKind::Button, true, &[]),
                control("b", ControlKind::Button, true, &[]),
                control("c", ControlKind::Button, true, &[]),
            ],
        )
        .unwrap();
        let (act, report) = crawl(&spec);
        assert_eq!(act.children.len(), 3);
        assert!(act.nodes().iter().all(|n| n.depth == 1 && n.is_leaf()));
        assert_eq!(report.nodes_discovered, 3);
        assert_eq!(report.max_depth, 1);
        assert!(report.unreachable_ids.is_empty());
    }

    #[test]
    fn wordpad_narrow_hangs_under_margins() {
        let (act, report) = crawl(&fixtures::app_spec("wordpad").unwrap());
        let layout = act.node("layout").unwrap();
        let margins = layout.child_nodes().find(|n| n.control_id == "margins").unwrap();
        let narrow = margins.child_nodes().find(|n| n.name == "Narrow").unwrap();
        assert_eq!(narrow.depth, 3);
        assert_eq!(report.steps_simulated, report.nodes_discovered);
    }

    #[test]
    fn first_discovery_wins_for_shared_children() {
        let spec = AppSpec::new(
            "shared",
            vec!["m1".into(), "m2".into()],
            vec![
                control("m1", ControlKind::Menu, true, &["paste"]),
                control("m2", ControlKind::Menu, true, &["paste"]),
                control("paste", ControlKind::MenuItem, false, &[]),
                control("ghost", ControlKind::Button, false, &[]),
            ],
        )
        .unwrap();
        let (act, report) = crawl(&spec);
        assert_eq!(act.path_to("paste").unwrap().describe(), ["Click m1", "Select paste"]);
        assert_eq!(report.unreachable_ids, ["ghost"]);
        assert_eq!(report.nodes_discovered + report.unreachable_ids.len(), spec.len());
    }

    #[test]
    fn crawling_twice_is_identical() {
        let spec = fixtures::app_spec("notepad").unwrap();
        assert_eq!(crawl(&spec), crawl(&spec));
    }

    #[test]
    fn launch_visible_non_roots_are_crawled_too() {
        let spec = AppSpec::new(
            "extra",
            vec!["a".into()],
            vec![
                control("b", ControlKind::Button, true, &[]),
                control("a", ControlKind::Button, true, &[]),
            ],
        )
        .unwrap();
        let (act, _) = crawl(&spec);
        let ids: Vec<_> = act.nodes().iter().map(|n| n.control_id.clone()).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
