//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uniact_core::app_model::AppState;
use uniact_core::catalog::{preprocess, AppBundle, Catalog};
use uniact_core::crawler::crawl;
use uniact_core::eval::{evaluate, AnnotatedCommand, EvalOptions};
use uniact_core::fed::{CurationRules, FedStore, TemplateSeed};
use uniact_core::fixtures;
use uniact_core::pairgen::{generate_pairs, pairs_to_json};
use uniact_core::relay::{self, MessageTemplates};
use uniact_core::resolver::{resolve, Resolution, ResolverConfig, ResolverProvider, UnresolvedReason};
use uniact_core::retrieval::{RetrievalIndex, DEFAULT_K};

const CRAWL_SPECS: u64 = 200;
const CRAWL_MAX_CONTROLS: usize = 300;
const CRAWL_BUDGET: Duration = Duration::from_secs(10);
const REPLAY_SPECS: u64 = 50;
const REPLAY_BUDGET: Duration = Duration::from_secs(5);
const RETRIEVAL_QUERIES: usize = 100;
const ECHO_BUDGET: Duration = Duration::from_secs(2);
const PARAPHRASE_FLOOR: f64 = 0.78;
const COMPOSITE_COMMANDS: usize = 6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("crawl matches reachability oracle", crawl_oracle),
        ("recorded paths replay to their nodes", path_replay),
        ("pair counts follow the count law and manifest", pair_law),
        ("top-k equals exhaustive scan", retrieval_oracle),
        ("few-shot commands resolve to their own pairs", echo_accuracy),
        ("paraphrase corpus accuracy and golden report", paraphrase),
        ("ambiguous and composite commands", ambiguity),
        ("every pair plans and executes", end_to_end),
        ("pipeline output is byte-identical across runs", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", 9 - failed, 9);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn within(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    if took > budget {
        return Err(format!("took {took:?}, budget {budget:?}"));
    }
    Ok(took)
}

fn crawl_oracle() -> Outcome {
    let start = Instant::now();
    for seed in 0..CRAWL_SPECS {
        let spec = common::random_spec(seed, CRAWL_MAX_CONTROLS);
        let (act, _) = crawl(&spec);
        let found: BTreeSet<String> = act.nodes().iter().map(|n| n.control_id.clone()).collect();
        if found != common::reachable(&spec) {
            return Err(format!("seed {seed}: discovered set differs from oracle"));
        }
    }
    let took = within(start, CRAWL_BUDGET)?;
    Ok(format!("{CRAWL_SPECS} specs in {took:.2?}"))
}

fn path_replay() -> Outcome {
    let start = Instant::now();
    let mut specs: Vec<_> = fixtures::APP_NAMES
        .iter()
        .map(|n| fixtures::app_spec(n).unwrap())
        .collect();
    specs.extend((0..REPLAY_SPECS).map(|seed| common::random_spec(1_000 + seed, 120)));
    let mut nodes = 0;
    for spec in specs {
        let spec = Arc::new(spec);
        let (act, _) = crawl(&spec);
        for node in act.nodes() {
            let mut state = AppState::new(spec.clone());
            for step in node.path.steps() {
                state
                    .apply_step(step)
                    .map_err(|e| format!("{}: {}: {e}", spec.app_name, node.control_id))?;
            }
            if !state.is_visible(&node.control_id) || state.focused() != Some(node.control_id.as_str()) {
                return Err(format!(
                    "{}: {} not visible and focused",
                    spec.app_name, node.control_id
                ));
            }
            nodes += 1;
        }
    }
    let took = within(start, REPLAY_BUDGET)?;
    Ok(format!("{nodes} nodes, 100% replayed in {took:.2?}"))
}

fn pair_law() -> Outcome {
    let manifest: serde_json::Value = serde_json::from_str(fixtures::MANIFEST).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for name in fixtures::APP_NAMES {
        let spec = fixtures::app_spec(name).unwrap();
        let pairs = generate_pairs(&crawl(&spec).0);
        let law = common::pair_count_law(&spec);
        let committed = manifest["apps"][name]["pairs"].as_u64().unwrap_or(0) as usize;
        if pairs.len() != law || law != committed {
            return Err(format!(
                "{name}: generated {} law {law} manifest {committed}",
                pairs.len()
            ));
        }
        counts.push(format!("{name}={law}"));
    }
    let wordpad = generate_pairs(&crawl(&fixtures::app_spec("wordpad").unwrap()).0);
    let editing: Vec<String> = wordpad
        .iter()
        .filter(|p| p.ce == "Editing")
        .map(|p| p.to_string())
        .collect();
    if editing != ["(Editing, Editing)", "(Editing, Reviewing)", "(Editing, Viewing)"] {
        return Err(format!("Editing pairs: {editing:?}"));
    }
    let bold: Vec<String> = wordpad
        .iter()
        .filter(|p| p.ce == "Bold")
        .map(|p| p.to_string())
        .collect();
    if bold != ["(Bold, none)"] {
        return Err(format!("Bold pairs: {bold:?}"));
    }
    Ok(format!("{}; Editing x3, (Bold, none)", counts.join(" ")))
}

/// Dense recomputation of the TF-IDF weights, independent of the sparse
/// implementation: shared vocabulary, explicit idf, explicit normalization.
fn dense_embedding(index: &RetrievalIndex, text: &str, vocab: &[String]) -> Vec<f64> {
    let docs: Vec<BTreeSet<String>> = index
        .examples()
        .iter()
        .map(|e| uniact_core::retrieval::terms(&e.nlc).into_iter().collect())
        .collect();
    let n = docs.len() as f64;
    let terms = uniact_core::retrieval::terms(text);
    let mut v: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let tf = terms.iter().filter(|x| *x == t).count() as f64;
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            tf * (((n + 1.0) / (df + 1.0)).ln() + 1.0)
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

fn retrieval_oracle() -> Outcome {
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (i, name) in fixtures::APP_NAMES.iter().enumerate() {
        let index = &catalog.app(name).unwrap().index;
        let words: Vec<String> = index
            .examples()
            .iter()
            .flat_map(|e| e.nlc.split_whitespace().map(|w| w.trim_matches('.').to_lowercase()))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for _ in 0..RETRIEVAL_QUERIES {
            let query = common::random_query(&mut rng, &words);
            for k in [DEFAULT_K, index.len()] {
                let got: Vec<usize> = index.top_k(&query, k).unwrap().iter().map(|s| s.position).collect();
                let want = full_scan(index, &query, k);
                if got != want {
                    return Err(format!("{name}: query {query:?} k={k}: {got:?} != {want:?}"));
                }
            }
            // the sparse vectors agree with a from-scratch dense computation
            let q = index.embed(&query);
            let mut vocab: BTreeSet<String> = q.weights().keys().cloned().collect();
            for v in index.vectors() {
                vocab.extend(v.weights().keys().cloned());
            }
            let vocab: Vec<String> = vocab.into_iter().collect();
            let dq = dense_embedding(index, &query, &vocab);
            for (pos, e) in index.examples().iter().enumerate() {
                let de = dense_embedding(index, &e.nlc, &vocab);
                let dense: f64 = dq.iter().zip(&de).map(|(a, b)| a * b).sum::<f64>().clamp(0.0, 1.0);
                let sparse = q.cosine(&index.vectors()[pos]);
                if (dense - sparse).abs() > 1e-9 {
                    return Err(format!("{name}: cosine mismatch at {pos}: {dense} vs {sparse}"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} queries, exact ranking"))
}

fn full_scan(index: &RetrievalIndex, query: &str, k: usize) -> Vec<usize> {
    let q = index.embed(query);
    let mut all: Vec<(f64, usize)> = index
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| (q.cosine(v), i))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, i)| i).collect()
}

fn echo_accuracy() -> Outcome {
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let corpus: Vec<AnnotatedCommand> = fixtures::APP_NAMES
        .iter()
        .flat_map(|n| fixtures::fed(n).unwrap().into_examples())
        .map(|e| AnnotatedCommand {
            nlc: e.nlc,
            ce: e.ce,
            value: e.value,
            app: e.app,
            tags: BTreeSet::new(),
        })
        .collect();
    let report = evaluate(&corpus, &catalog, &EvalOptions::default()).map_err(|e| e.to_string())?;
    let took = within(start, ECHO_BUDGET)?;
    if report.correct != report.total {
        let misses: Vec<String> = report.failures.iter().map(|f| f.nlc.clone()).collect();
        return Err(format!("{}/{}: {misses:?}", report.correct, report.total));
    }
    Ok(format!("{}/{} = 1.00 in {took:.2?}", report.correct, report.total))
}

fn paraphrase() -> Outcome {
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let corpus = fixtures::paraphrase_corpus().map_err(|e| e.to_string())?;
    if corpus.len() != 60 {
        return Err(format!("corpus has {} commands", corpus.len()));
    }
    let report = evaluate(&corpus, &catalog, &EvalOptions::default()).map_err(|e| e.to_string())?;
    if report.accuracy < PARAPHRASE_FLOOR {
        return Err(format!("accuracy {:.4} < {PARAPHRASE_FLOOR}", report.accuracy));
    }
    if report.to_json() != fixtures::PARAPHRASE_REPORT {
        return Err("report differs from the committed golden".into());
    }
    Ok(format!(
        "{}/{} = {:.4} (floor {PARAPHRASE_FLOOR}), golden matches",
        report.correct, report.total, report.accuracy
    ))
}

fn ambiguity() -> Outcome {
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let cfg = ResolverConfig::default();
    let run = |app: &str, nlc: &str| {
        let b = catalog.app(app).unwrap();
        resolve(nlc, &b.index, &b.pairs, &ResolverProvider::Offline, &cfg)
    };
    let erase = run("notepad", "erase the highlighted text");
    let Resolution::Ambiguous(cs) = &erase else {
        return Err(format!("erase: {erase:?}"));
    };
    let names: Vec<String> = cs.iter().map(|c| c.pair.to_string()).collect();
    if names != ["(Delete, none)", "(Cut, none)"] {
        return Err(format!("erase candidates {names:?}"));
    }
    let corpus = fixtures::paraphrase_corpus().map_err(|e| e.to_string())?;
    let composite: Vec<&AnnotatedCommand> = corpus.iter().filter(|c| c.is_composite()).collect();
    if composite.len() != COMPOSITE_COMMANDS {
        return Err(format!("{} composite commands in corpus", composite.len()));
    }
    for c in &composite {
        let r = run(&c.app, &c.nlc);
        if r != Resolution::Unresolved(UnresolvedReason::CompositeCommand) {
            return Err(format!("{:?}: {r:?}", c.nlc));
        }
    }
    Ok(format!(
        "erase -> [Delete, Cut]; {COMPOSITE_COMMANDS}/{COMPOSITE_COMMANDS} composite refused"
    ))
}

fn end_to_end() -> Outcome {
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let templates = MessageTemplates::default();
    let mut total = 0;
    for app in catalog.apps() {
        for pair in &app.pairs {
            check_pair(app, pair, &templates)?;
            total += 1;
        }
    }
    Ok(format!("{total}/{total} pairs"))
}

fn check_pair(app: &AppBundle, pair: &uniact_core::CEValuePair, templates: &MessageTemplates) -> Result<(), String> {
    let mut state = app.new_state();
    let seq = relay::plan(&app.act, pair).map_err(|e| format!("{pair}: {e}"))?;
    let report = relay::execute(&mut state, &seq, pair, templates);
    if !report.succeeded() {
        return Err(format!("{}: {pair}: {:?}", app.name(), report.status));
    }
    if let Some(value) = &pair.value {
        if state.value_of(&pair.ce_control_id) != Some(value.as_str()) {
            return Err(format!("{}: {pair}: value not assigned", app.name()));
        }
    }
    Ok(())
}

/// crawl -> pairs -> seed -> curate -> eval, writing every artifact.
fn pipeline(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut catalog = Catalog::default();
    for name in fixtures::APP_NAMES {
        let spec = fixtures::app_spec(name).unwrap();
        let pre = preprocess(&spec, &TemplateSeed, &CurationRules::default());
        fs::write(dir.join(format!("{name}.act.json")), pre.act.to_json()).unwrap();
        fs::write(dir.join(format!("{name}.pairs.json")), pairs_to_json(&pre.pairs)).unwrap();
        let fed = FedStore::new(pre.kept);
        fed.save(&dir.join(format!("{name}.fed.jsonl"))).unwrap();
        catalog.insert(AppBundle::build(spec, fed.examples()));
    }
    let corpus = fixtures::paraphrase_corpus().unwrap();
    let report = evaluate(&corpus, &catalog, &EvalOptions::default()).unwrap();
    fs::write(dir.join("report.json"), report.to_json()).unwrap();
    fs::write(dir.join("report.txt"), report.to_table()).unwrap();
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().to_string(),
            fs::read(entry.path()).unwrap(),
        );
    }
    out
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    if first != second {
        let differing: Vec<&String> = first.keys().filter(|k| first.get(*k) != second.get(*k)).collect();
        return Err(format!("differing artifacts: {differing:?}"));
    }
    for (i, name) in fixtures::APP_NAMES.iter().enumerate() {
        if first[&format!("{name}.fed.jsonl")] != fixtures::FEDS[i].1.as_bytes() {
            return Err(format!("{name}.fed.jsonl differs from the committed dataset"));
        }
    }
    Ok(format!("{} artifacts identical", first.len()))
}
