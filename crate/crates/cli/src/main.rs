mod config;
mod repl;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use uniact_client::{Client, ClientError};
use uniact_core::act::{Act, ActError};
use uniact_core::app_model::{load_app_spec, SpecError};
use uniact_core::catalog::{Catalog, CatalogError};
use uniact_core::crawler::crawl;
use uniact_core::eval::{evaluate, parse_corpus, unknown_gold, EvalError, EvalOptions};
use uniact_core::fed::{self, CurationRules, FedError, FedStore, RemoteSeed, SeedGenerator, TemplateSeed};
use uniact_core::pairgen::{generate_pairs, pairs_to_json};
use uniact_core::provider::{HttpCompletion, ProviderError, ProviderKind};
use uniact_core::resolver::{Resolution, ResolverProvider};
use uniact_core::session::{Runtime, Session, SessionError};
use uniact_service::ServiceConfig;

use crate::config::{CliConfig, FileConfig, Overrides};

#[derive(Debug, Parser)]
#[command(
    name = "uniact",
    version,
    about = "Drive simulated desktop applications with natural-language commands"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// offline (deterministic, default) or remote (UNIACT_REMOTE_URL)
    #[arg(long, global = true)]
    provider: Option<ProviderKind>,
    /// Few-shot examples retrieved per command
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Minimum score for a resolution to be accepted
    #[arg(long, global = true)]
    accept: Option<f64>,
    /// Score distance within which candidates count as ambiguous
    #[arg(long, global = true)]
    gap: Option<f64>,
    /// TOML file with defaults; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Load `<name>.app.json` / `<name>.fed.jsonl` from here instead of the bundled apps
    #[arg(long, global = true)]
    apps_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Explore an app spec and write its control tree
    Crawl {
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List every <control, value> pair of a control tree
    Pairs {
        act: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate one few-shot command per pair
    Seed {
        act: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Drop unusable few-shot examples
    Curate {
        fed: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Resolve one command and print the resolution as JSON
    Resolve {
        app: String,
        nlc: String,
        /// Ask a running service instead of resolving in-process
        #[arg(long)]
        server: Option<String>,
    },
    /// Interactive command loop against one app
    Repl {
        app: String,
        #[arg(long)]
        server: Option<String>,
    },
    /// Score an annotated command corpus
    Eval {
        corpus: PathBuf,
        /// Count an ambiguous answer as correct when its first candidate is
        #[arg(long)]
        lenient_ambiguous: bool,
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Exit 1 when accuracy falls below this
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
    /// Run the HTTP session service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Browser origin allowed by CORS; any when omitted
        #[arg(long)]
        cors_origin: Option<String>,
        /// Minutes before an untouched session is dropped
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
    },
}

/// Domain failure, reported as one JSON line on stderr with exit code 1.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::new("Io", format!("{}: {e}", path.display()))
    }

    pub fn provider(e: ProviderError) -> Self {
        CliError::new("Provider", e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", json!({ "error": self.message, "code": self.code }))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new("Io", e.to_string())
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::new("Spec", e.to_string())
    }
}

impl From<ActError> for CliError {
    fn from(e: ActError) -> Self {
        CliError::new("Act", e.to_string())
    }
}

impl From<FedError> for CliError {
    fn from(e: FedError) -> Self {
        CliError::new("Fed", e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::new("Eval", e.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::UnknownApp(_) => CliError::new("UnknownApp", e.to_string()),
            other => CliError::new("Catalog", other.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        match &e {
            ClientError::Api { body, .. } => CliError::new(
                match body.code.as_str() {
                    "UnknownApp" => "UnknownApp",
                    "UnknownSession" => "UnknownSession",
                    _ => "Service",
                },
                body.error.clone(),
            ),
            ClientError::Transport(_) => CliError::new("Transport", e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes to `output`, or stdout when absent.
fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_act(path: &Path) -> Result<Act, CliError> {
    Ok(Act::from_json(&read(path)?)?)
}

fn catalog(cfg: &CliConfig) -> Result<Catalog, CliError> {
    Ok(match &cfg.apps_dir {
        Some(dir) => Catalog::load_dir(dir)?,
        None => Catalog::bundled()?,
    })
}

fn resolver_provider(kind: ProviderKind) -> Result<ResolverProvider, CliError> {
    Ok(match kind {
        ProviderKind::Offline => ResolverProvider::Offline,
        ProviderKind::Remote => {
            ResolverProvider::Remote(Arc::new(HttpCompletion::from_env().map_err(CliError::provider)?))
        }
    })
}

fn runtime(cfg: &CliConfig) -> Result<Runtime, CliError> {
    Ok(Runtime {
        provider: resolver_provider(cfg.provider)?,
        config: cfg.resolver.clone(),
        templates: cfg.messages.clone(),
    })
}

fn tokio_runtime() -> Result<tokio::runtime::Runtime, CliError> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let server_flag = match &cli.command {
        Command::Resolve { server, .. } | Command::Repl { server, .. } => server.clone(),
        _ => None,
    };
    let cfg = CliConfig::resolve(
        file,
        Overrides {
            provider: cli.global.provider,
            k: cli.global.k,
            accept: cli.global.accept,
            gap: cli.global.gap,
            apps_dir: cli.global.apps_dir.clone(),
            server: server_flag,
        },
    )?;

    match cli.command {
        Command::Crawl { spec, output } => {
            let spec = load_app_spec(&read(&spec)?)?;
            let (act, report) = crawl(&spec);
            emit(output.as_deref(), &act.to_json())?;
            eprintln!("{}", serde_json::to_string(&report).expect("report serializes"));
        }
        Command::Pairs { act, output } => {
            let act = load_act(&act)?;
            emit(output.as_deref(), &pairs_to_json(&generate_pairs(&act)))?;
        }
        Command::Seed { act, output } => {
            let act = load_act(&act)?;
            let pairs = generate_pairs(&act);
            let generator: Box<dyn SeedGenerator> = match cfg.provider {
                ProviderKind::Offline => Box::new(TemplateSeed),
                ProviderKind::Remote => {
                    Box::new(RemoteSeed::new(HttpCompletion::from_env().map_err(CliError::provider)?))
                }
            };
            let generation = fed::generate_fed(&act, &pairs, generator.as_ref());
            for (pair, err) in &generation.failures {
                eprintln!("{}", json!({ "pair": pair.to_string(), "error": err.to_string() }));
            }
            emit(output.as_deref(), &FedStore::new(generation.examples).to_jsonl())?;
        }
        Command::Curate { fed, output } => {
            let store = FedStore::parse_jsonl(&read(&fed)?)?;
            let (kept, report) = fed::curate(store.into_examples(), &CurationRules::default());
            emit(output.as_deref(), &FedStore::new(kept).to_jsonl())?;
            eprintln!("{}", serde_json::to_string(&report).expect("report serializes"));
        }
        Command::Resolve { app, nlc, .. } => {
            let resolution = match &cfg.server {
                Some(url) => tokio_runtime()?.block_on(Client::new(url.clone()).resolve(&app, &nlc))?,
                None => {
                    let catalog = catalog(&cfg)?;
                    let bundle = catalog.app(&app)?;
                    let rt = runtime(&cfg)?;
                    uniact_core::resolve(&nlc, &bundle.index, &bundle.pairs, &rt.provider, &rt.config)
                }
            };
            println!("{}", serde_json::to_string(&resolution).expect("resolution serializes"));
            if let Resolution::Unresolved(_) = resolution {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Repl { app, .. } => {
            let stdin = io::stdin().lock();
            let stdout = io::stdout().lock();
            match &cfg.server {
                Some(url) => {
                    let rt = tokio_runtime()?;
                    let client = Client::new(url.clone());
                    let summary = rt.block_on(client.create_session(&app))?;
                    let mut backend = repl::Remote {
                        rt,
                        client,
                        session: summary.id,
                    };
                    repl::run(&app, &mut backend, stdin, stdout)?;
                }
                None => {
                    let catalog = catalog(&cfg)?;
                    let bundle = catalog.app(&app)?.clone();
                    let mut backend = repl::Local {
                        session: Session::new("repl", bundle),
                        runtime: runtime(&cfg)?,
                    };
                    repl::run(&app, &mut backend, stdin, stdout)?;
                }
            }
        }
        Command::Eval {
            corpus,
            lenient_ambiguous,
            json,
            output,
            min_accuracy,
        } => {
            let corpus = parse_corpus(&read(&corpus)?)?;
            let catalog = catalog(&cfg)?;
            for c in unknown_gold(&corpus, &catalog) {
                eprintln!(
                    "{}",
                    json!({ "warning": "gold pair not offered by app", "app": c.app, "gold": c.gold() })
                );
            }
            let options = EvalOptions {
                lenient_ambiguous,
                config: cfg.resolver.clone(),
                provider: resolver_provider(cfg.provider)?,
            };
            let report = evaluate(&corpus, &catalog, &options)?;
            let text = if json { report.to_json() } else { report.to_table() };
            emit(output.as_deref(), &text)?;
            if min_accuracy.is_some_and(|floor| report.accuracy < floor) {
                return Err(CliError::new(
                    "BelowFloor",
                    format!(
                        "accuracy {:.4} below {}",
                        report.accuracy,
                        min_accuracy.unwrap_or_default()
                    ),
                ));
            }
        }
        Command::Serve {
            port,
            bind,
            cors_origin,
            idle_minutes,
        } => {
            tracing_subscriber::fmt().with_writer(io::stderr).init();
            let catalog = catalog(&cfg)?;
            let runtime = runtime(&cfg)?;
            let config = ServiceConfig {
                bind: SocketAddr::new(bind, port),
                idle_timeout: Duration::from_secs(idle_minutes.max(1) * 60),
                cors_origin,
            };
            tokio_runtime()?.block_on(uniact_service::serve(config, catalog, runtime))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
