//! Simulated desktop applications driven by natural-language commands.
//!
//! The offline stage crawls an application's control tree, enumerates the
//! `<control, value>` pairs it offers and seeds a few-shot dataset for each.
//! At runtime a command is matched against that dataset, resolved to a pair,
//! and the pair's path through the tree is replayed against a live state.

pub mod act;
pub mod app_model;
pub mod catalog;
pub mod crawler;
pub mod eval;
pub mod fed;
pub mod fixtures;
pub mod lexicon;
pub mod pairgen;
pub mod provider;
pub mod relay;
pub mod resolver;
pub mod retrieval;
pub mod session;
pub mod text;

pub use act::{Act, ActNode, StepSequence};
pub use app_model::{AppSpec, AppState, ControlKind, ControlSpec, Step, StepVerb};
pub use catalog::{AppBundle, Catalog, CatalogError};
pub use pairgen::CEValuePair;
pub use resolver::{resolve, Candidate, Resolution, ResolverConfig, ResolverProvider, UnresolvedReason};
