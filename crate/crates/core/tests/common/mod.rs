#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uniact_core::app_model::{AppSpec, ControlKind, ControlSpec};
use uniact_core::fed::FewShotExample;

const KINDS: [ControlKind; 10] = [
    ControlKind::Tab,
    ControlKind::Menu,
    ControlKind::Dropdown,
    ControlKind::Group,
    ControlKind::Button,
    ControlKind::Toggle,
    ControlKind::ListItem,
    ControlKind::MenuItem,
    ControlKind::Editbox,
    ControlKind::Button,
];

/// A random valid spec. Controls only reveal later controls, so the reveal
/// graph is acyclic; it may share children and leave some unreachable.
pub fn random_spec(seed: u64, max_controls: usize) -> AppSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_controls.max(1));
    let mut controls: Vec<ControlSpec> = (0..n)
        .map(|i| ControlSpec {
            id: format!("c{i}"),
            name: format!("Control {i}"),
            kind: *KINDS.choose(&mut rng).unwrap(),
            visible_initially: i == 0 || rng.random_bool(0.08),
            reveals: Vec::new(),
            selectable_value: false,
        })
        .collect();
    for i in 0..n.saturating_sub(1) {
        let fanout = rng.random_range(0..=4usize);
        let mut kids = BTreeSet::new();
        for _ in 0..fanout {
            // mostly near successors, so trees get some depth
            let hi = (i + 1 + 12).min(n);
            let j = if rng.random_bool(0.85) {
                rng.random_range(i + 1..hi)
            } else {
                rng.random_range(i + 1..n)
            };
            kids.insert(j);
        }
        controls[i].reveals = kids.into_iter().map(|j| format!("c{j}")).collect();
    }
    let holders: BTreeSet<usize> = (0..n)
        .filter(|&i| controls[i].kind.holds_value())
        .flat_map(|i| {
            controls[i]
                .reveals
                .iter()
                .map(|r| r[1..].parse::<usize>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect();
    for i in holders {
        if controls[i].kind == ControlKind::ListItem {
            controls[i].selectable_value = true;
        }
    }
    let roots: Vec<String> = controls
        .iter()
        .filter(|c| c.visible_initially)
        .map(|c| c.id.clone())
        .collect();
    AppSpec::new(format!("random{seed}"), roots, controls).expect("generator emits valid specs")
}

/// Independent reachability: breadth-first closure of `reveals` from the
/// initially visible controls.
pub fn reachable(spec: &AppSpec) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&ControlSpec> = spec.controls.iter().filter(|c| c.visible_initially).collect();
    while let Some(c) = queue.pop_front() {
        if !seen.insert(c.id.clone()) {
            continue;
        }
        for r in &c.reveals {
            queue.push_back(spec.control(r).unwrap());
        }
    }
    seen
}

/// Pair count straight from a spec in which every control has at most
/// one revealer: a dropdown or menu whose reveals are all selectable
/// leaves contributes one pair per option; any other button, toggle,
/// menu item, list item or edit box contributes one.
pub fn pair_count_law(spec: &AppSpec) -> usize {
    let is_container = |c: &ControlSpec| {
        c.kind.holds_value()
            && !c.reveals.is_empty()
            && c.reveals.iter().all(|r| {
                let k = spec.control(r).unwrap();
                k.selectable_value && k.reveals.is_empty()
            })
    };
    let mut option_ids = BTreeSet::new();
    let mut count = 0;
    for c in &spec.controls {
        if is_container(c) {
            count += c.reveals.len();
            option_ids.extend(c.reveals.iter().cloned());
        }
    }
    count
        + spec
            .controls
            .iter()
            .filter(|c| !option_ids.contains(&c.id) && !is_container(c))
            .filter(|c| {
                matches!(
                    c.kind,
                    ControlKind::Button
                        | ControlKind::Toggle
                        | ControlKind::MenuItem
                        | ControlKind::ListItem
                        | ControlKind::Editbox
                )
            })
            .count()
}

/// Random few-shot examples drawn from a small vocabulary so that ties and
/// shared terms are common.
pub fn random_examples(seed: u64, n: usize) -> Vec<FewShotExample> {
    let words = [
        "change", "font", "size", "margin", "narrow", "bold", "text", "select", "all", "page", "zoom", "in", "the",
        "copy", "paste", "new", "folder", "sort", "by", "date",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = rng.random_range(1..=6);
            let nlc: Vec<&str> = (0..len).map(|_| *words.choose(&mut rng).unwrap()).collect();
            FewShotExample {
                nlc: nlc.join(" "),
                ce: format!("ce{}", i % 7),
                value: None,
                app: "random".into(),
                source: uniact_core::fed::Source::Template,
            }
        })
        .collect()
}

pub fn random_query(rng: &mut ChaCha8Rng, vocabulary: &[String]) -> String {
    let len = rng.random_range(0..=7);
    let extra = ["zzz", "quokka", "the", "a"];
    (0..len)
        .map(|_| {
            if rng.random_bool(0.8) && !vocabulary.is_empty() {
                vocabulary.choose(rng).unwrap().clone()
            } else {
                extra.choose(rng).unwrap().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
