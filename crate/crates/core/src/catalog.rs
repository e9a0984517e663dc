//! Preprocessed applications ready for runtime use.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::act::Act;
use crate::app_model::{load_app_spec, AppSpec, AppState, SpecError};
use crate::crawler::{crawl, CrawlReport};
use crate::fed::{
    self, CurationReport, CurationRules, FedError, FedGeneration, FedStore, FewShotExample, SeedGenerator,
};
use crate::fixtures;
use crate::pairgen::{generate_pairs, CEValuePair};
use crate::retrieval::RetrievalIndex;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{app}: {source}")]
    Spec { app: String, source: SpecError },
    #[error("{app}: {source}")]
    Fed { app: String, source: FedError },
    #[error("no app named `{0}`")]
    UnknownApp(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Everything the offline preprocessing stage produces for one app.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub act: Act,
    pub crawl_report: CrawlReport,
    pub pairs: Vec<CEValuePair>,
    pub generation: FedGeneration,
    pub kept: Vec<FewShotExample>,
    pub curation: CurationReport,
}

/// crawl -> pairs -> seed -> curate.
pub fn preprocess(spec: &AppSpec, generator: &dyn SeedGenerator, rules: &CurationRules) -> Preprocessed {
    let (act, crawl_report) = crawl(spec);
    let pairs = generate_pairs(&act);
    let generation = fed::generate_fed(&act, &pairs, generator);
    let (kept, curation) = fed::curate(generation.examples.clone(), rules);
    Preprocessed {
        act,
        crawl_report,
        pairs,
        generation,
        kept,
        curation,
    }
}

/// One application's spec, control tree, pairs, few-shot examples and
/// retrieval index. Immutable and shared between sessions.
#[derive(Debug)]
pub struct AppBundle {
    pub spec: Arc<AppSpec>,
    pub act: Act,
    pub pairs: Vec<CEValuePair>,
    pub index: RetrievalIndex,
}

impl AppBundle {
    /// Builds the runtime view from a spec and its stored examples. Only
    /// examples tagged with this app are indexed.
    pub fn build(spec: AppSpec, examples: &[FewShotExample]) -> Self {
        let (act, _) = crawl(&spec);
        let pairs = generate_pairs(&act);
        let own: Vec<FewShotExample> = examples.iter().filter(|e| e.app == spec.app_name).cloned().collect();
        AppBundle {
            spec: Arc::new(spec),
            act,
            pairs,
            index: RetrievalIndex::build(own),
        }
    }

    pub fn name(&self) -> &str {
        &self.spec.app_name
    }

    pub fn new_state(&self) -> AppState {
        AppState::new(self.spec.clone())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    apps: BTreeMap<String, Arc<AppBundle>>,
}

impl Catalog {
    /// The three bundled fixture applications with their committed datasets.
    pub fn bundled() -> Result<Self, CatalogError> {
        let mut catalog = Catalog::default();
        for name in fixtures::APP_NAMES {
            let spec = fixtures::app_spec(name).map_err(|source| CatalogError::Spec {
                app: name.to_string(),
                source,
            })?;
            let fed = fixtures::fed(name).map_err(|source| CatalogError::Fed {
                app: name.to_string(),
                source,
            })?;
            catalog.insert(AppBundle::build(spec, fed.examples()));
        }
        Ok(catalog)
    }

    /// Loads every `<name>.app.json` in `dir`, pairing it with
    /// `<name>.fed.jsonl` when present.
    pub fn load_dir(dir: &Path) -> Result<Self, CatalogError> {
        let mut catalog = Catalog::default();
        let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let file_name = entry.file_name().to_string_lossy().to_string();
            let Some(stem) = file_name.strip_suffix(".app.json") else {
                continue;
            };
            let spec = load_app_spec(&fs::read_to_string(entry.path())?).map_err(|source| CatalogError::Spec {
                app: stem.to_string(),
                source,
            })?;
            let fed_path = dir.join(format!("{stem}.fed.jsonl"));
            let fed = if fed_path.exists() {
                FedStore::load(&fed_path).map_err(|source| CatalogError::Fed {
                    app: stem.to_string(),
                    source,
                })?
            } else {
                FedStore::default()
            };
            catalog.insert(AppBundle::build(spec, fed.examples()));
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, bundle: AppBundle) {
        self.apps.insert(bundle.name().to_string(), Arc::new(bundle));
    }

    pub fn app(&self, name: &str) -> Result<&Arc<AppBundle>, CatalogError> {
        self.apps
            .get(name)
            .ok_or_else(|| CatalogError::UnknownApp(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.apps.keys().map(String::as_str)
    }

    pub fn apps(&self) -> impl Iterator<Item = &Arc<AppBundle>> {
        self.apps.values()
    }
}
