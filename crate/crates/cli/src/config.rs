use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use uniact_core::provider::{provider_from_env, ProviderKind};
use uniact_core::relay::MessageTemplates;
use uniact_core::resolver::ResolverConfig;

use crate::CliError;

/// Settings read from `--config`. Every field is optional; flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub provider: Option<ProviderKind>,
    pub apps_dir: Option<PathBuf>,
    pub server: Option<String>,
    pub resolver: ResolverConfig,
    pub messages: MessageTemplates,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::new("Config", format!("{}: {}", path.display(), e.message())))
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub provider: Option<ProviderKind>,
    pub k: Option<usize>,
    pub accept: Option<f64>,
    pub gap: Option<f64>,
    pub apps_dir: Option<PathBuf>,
    pub server: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub provider: ProviderKind,
    pub apps_dir: Option<PathBuf>,
    pub server: Option<String>,
    pub resolver: ResolverConfig,
    pub messages: MessageTemplates,
}

impl CliConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self, CliError> {
        let provider = match flags.provider.or(file.provider) {
            Some(p) => p,
            None => provider_from_env().map_err(CliError::provider)?,
        };
        let mut resolver = file.resolver;
        if let Some(k) = flags.k {
            resolver.k = k;
        }
        if let Some(accept) = flags.accept {
            resolver.accept = accept;
        }
        if let Some(gap) = flags.gap {
            resolver.gap = gap;
        }
        if resolver.k == 0 {
            return Err(CliError::new("Config", "k must be at least 1"));
        }
        Ok(CliConfig {
            provider,
            apps_dir: flags.apps_dir.or(file.apps_dir),
            server: flags.server.or(file.server),
            resolver,
            messages: file.messages,
        })
    }
}
