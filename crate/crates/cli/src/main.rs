//! `olac`: operator front end.
//!
//! Exit status is 0 on success, 1 when the work itself fails (invalid
//! records, failed harvests, rejected queries) and 2 when the environment
//! does (unreadable files, bad configuration, ports in use, corrupt
//! stores). Data goes to stdout, logs to stderr.

mod config;

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use olac::catalog::api::{self, SearchSummary};
use olac::catalog::CatalogError;
use olac::harvest::{HarvestError, HttpTransport};
use olac::model::{has_errors, Diagnostic};
use olac::oai::{server, RepoError, Repository, RepositoryConfig};
use olac::xml::XmlError;
use olac::{
    validate_record, Catalog, ElementName, HarvestMode, HarvestReport, Harvester, HarvesterConfig, Query, VocabId,
    VocabularyRegistry,
};
use tokio::net::TcpListener;

use config::CliConfig;

#[derive(Parser)]
#[command(
    name = "olac",
    version,
    about = "Language-resource metadata: providers, harvesting and a union catalog"
)]
struct Cli {
    /// Configuration file (key = value lines).
    #[arg(long, global = true, env = "OLAC_CONFIG")]
    config: Option<PathBuf>,
    /// Union catalog directory.
    #[arg(long, global = true)]
    catalog_dir: Option<PathBuf>,
    /// Directory of *.vocab files replacing the built-in vocabularies.
    #[arg(long, global = true)]
    vocab_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check record documents; prints one line per diagnostic.
    Validate {
        /// Record documents (XML)
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Manage and serve a data-provider repository.
    Provider {
        #[command(subcommand)]
        command: ProviderCommand,
    },
    /// Harvest one provider (registering it on first use) or all of them.
    Harvest(HarvestArgs),
    /// Search the union catalog. Clauses are `element:code|text|any:value`.
    Query(QueryArgs),
    /// Union catalog server.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
    /// Inspect controlled vocabularies.
    Vocab {
        #[command(subcommand)]
        command: VocabCommand,
    },
}

#[derive(Subcommand)]
enum ProviderCommand {
    /// Create an empty repository directory.
    Init {
        dir: PathBuf,
        #[arg(long)]
        archive_id: String,
        #[arg(long)]
        name: String,
    },
    /// Add or replace items from record documents. Identifiers default to
    /// oai:<archive>:<file stem>.
    Add {
        dir: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Identifier to use (only with a single file).
        #[arg(long)]
        id: Option<String>,
    },
    /// Replace an item by a tombstone.
    Delete { dir: PathBuf, identifier: String },
    /// Answer harvesting requests over HTTP.
    Serve {
        dir: PathBuf,
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        page_size: Option<usize>,
        /// Base URL announced by Identify; defaults to http://<bound address>/.
        #[arg(long)]
        base_url: Option<String>,
    },
}

#[derive(Args)]
struct HarvestArgs {
    /// Provider base URL.
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    url: Option<String>,
    /// Harvest every registered provider.
    #[arg(long)]
    all: bool,
    /// Re-list everything and drop entries the provider no longer has
    #[arg(long, conflicts_with = "incremental")]
    full: bool,
    /// Only items changed since the last successful harvest (the default)
    #[arg(long)]
    incremental: bool,
    /// Print the reports as JSON
    #[arg(long)]
    json: bool,
    /// Providers harvested at once
    #[arg(long)]
    parallelism: Option<usize>,
    /// Attempts per page before a harvest fails
    #[arg(long)]
    retries: Option<u32>,
}

#[derive(Args)]
struct QueryArgs {
    /// Clauses, all of which must hold (the left side of a join).
    #[arg(required = true)]
    clauses: Vec<String>,
    /// Join on this coded element.
    #[arg(long, requires = "right")]
    join: Option<String>,
    /// Clause for the right side of a join; repeatable.
    #[arg(long)]
    right: Vec<String>,
    /// Print search summaries as JSON
    #[arg(long)]
    json: bool,
    /// Label language for --json language labels.
    #[arg(long, default_value = "en")]
    display: String,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Serve the JSON API (and the web UI bundle with --ui-dir).
    Serve {
        #[arg(long)]
        listen: Option<String>,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Fold the operation log into the snapshot.
    Compact,
}

#[derive(Subcommand)]
enum VocabCommand {
    /// List vocabularies, or the terms of one.
    List { id: Option<String> },
}

enum Failure {
    Domain(String),
    Env(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Env(_) => 2,
        }
    }
}

type Outcome = Result<(), Failure>;

fn env<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Env(e.to_string())
}

fn catalog_failure(e: CatalogError) -> Failure {
    match e {
        CatalogError::Io { .. } | CatalogError::Corrupt { .. } => Failure::Env(e.to_string()),
        other => Failure::Domain(other.to_string()),
    }
}

fn repo_failure(e: RepoError) -> Failure {
    match e {
        RepoError::Io { .. } | RepoError::Corrupt { .. } | RepoError::AlreadyExists(_) => Failure::Env(e.to_string()),
        other => Failure::Domain(other.to_string()),
    }
}

struct Context {
    config: CliConfig,
    registry: Arc<VocabularyRegistry>,
}

impl Context {
    fn catalog(&self) -> Result<Arc<Catalog>, Failure> {
        Catalog::open(&self.config.catalog_dir, self.registry.clone())
            .map(Arc::new)
            .map_err(|e| Failure::Env(e.to_string()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env("OLAC_LOG").unwrap_or_else(|_| "info".into()))
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Domain(m) | Failure::Env(m) if !m.is_empty() => eprintln!("olac: {m}"),
                _ => {}
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut config = match &cli.config {
        Some(path) => CliConfig::load(path).map_err(Failure::Env)?,
        None => CliConfig::default(),
    };
    if let Some(dir) = cli.catalog_dir {
        config.catalog_dir = dir;
    }
    if let Some(dir) = cli.vocab_dir {
        config.vocab_dir = Some(dir);
    }
    let registry = match &config.vocab_dir {
        Some(dir) => VocabularyRegistry::load_dir(dir).map_err(env)?,
        None => VocabularyRegistry::builtin(),
    };
    let ctx = Context {
        config,
        registry: Arc::new(registry),
    };
    match cli.command {
        Command::Validate { files } => validate(&ctx, &files),
        Command::Provider { command } => provider(&ctx, command),
        Command::Harvest(args) => harvest(&ctx, args),
        Command::Query(args) => query(&ctx, args),
        Command::Catalog { command } => catalog(&ctx, command),
        Command::Vocab { command } => vocab(&ctx, command),
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(env)
}

// ---- validate ------------------------------------------------------------

fn check_file(ctx: &Context, path: &Path) -> Result<(Option<olac::MetadataRecord>, Vec<Diagnostic>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Env(format!("{}: {e}", path.display())))?;
    Ok(match olac::parse_record(&bytes) {
        Ok(outcome) => {
            let mut diagnostics = outcome.diagnostics;
            diagnostics.extend(validate_record(&outcome.record, &ctx.registry));
            (Some(outcome.record), diagnostics)
        }
        Err(XmlError::InvalidRecord(diagnostics)) => (None, diagnostics),
        Err(e) => (None, vec![e.to_diagnostic()]),
    })
}

fn validate(ctx: &Context, files: &[PathBuf]) -> Outcome {
    let mut failed = false;
    let mut unreadable = None;
    for path in files {
        match check_file(ctx, path) {
            Ok((_, diagnostics)) => {
                for d in &diagnostics {
                    println!("{}: {d}", path.display());
                }
                let errors = diagnostics.iter().filter(|d| d.is_error()).count();
                println!(
                    "{}: {}",
                    path.display(),
                    if errors == 0 {
                        "ok".to_string()
                    } else {
                        format!("{errors} error(s)")
                    }
                );
                failed |= errors > 0;
            }
            Err(Failure::Env(m)) | Err(Failure::Domain(m)) => {
                eprintln!("olac: {m}");
                unreadable.get_or_insert(m);
            }
        }
    }
    if unreadable.is_some() {
        return Err(Failure::Env(String::new()));
    }
    if failed {
        return Err(Failure::Domain(String::new()));
    }
    Ok(())
}

// ---- provider ------------------------------------------------------------

fn provider(ctx: &Context, command: ProviderCommand) -> Outcome {
    match command {
        ProviderCommand::Init { dir, archive_id, name } => {
            Repository::create(&dir, RepositoryConfig::new(archive_id, name), ctx.registry.clone())
                .map_err(repo_failure)?;
            println!("initialised {}", dir.display());
            Ok(())
        }
        ProviderCommand::Add { dir, files, id } => {
            if id.is_some() && files.len() > 1 {
                return Err(Failure::Domain("--id needs exactly one file".into()));
            }
            let repo = open_repo(ctx, &dir, "", None)?;
            let archive = repo.config().archive_id.clone();
            for path in &files {
                let (record, diagnostics) = check_file(ctx, path)?;
                let record = match record {
                    Some(r) if !has_errors(&diagnostics) => r,
                    _ => {
                        for d in diagnostics.iter().filter(|d| d.is_error()) {
                            eprintln!("{}: {d}", path.display());
                        }
                        return Err(Failure::Domain(format!("{} is not a valid record", path.display())));
                    }
                };
                let identifier = match &id {
                    Some(id) => id.clone(),
                    None => {
                        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                        format!("oai:{archive}:{stem}")
                    }
                };
                let stamp = repo.put(&identifier, record).map_err(repo_failure)?;
                println!("{identifier}\t{}", olac::clock::format_datestamp(&stamp));
            }
            Ok(())
        }
        ProviderCommand::Delete { dir, identifier } => {
            let repo = open_repo(ctx, &dir, "", None)?;
            let stamp = repo.delete(&identifier).map_err(repo_failure)?;
            println!("{identifier}\t{}\tdeleted", olac::clock::format_datestamp(&stamp));
            Ok(())
        }
        ProviderCommand::Serve {
            dir,
            listen,
            page_size,
            base_url,
        } => {
            let listen = listen.unwrap_or_else(|| ctx.config.listen_address.clone());
            runtime()?.block_on(async {
                let listener = TcpListener::bind(&listen)
                    .await
                    .map_err(|e| Failure::Env(format!("cannot listen on {listen}: {e}")))?;
                let addr = listener.local_addr().map_err(env)?;
                let base_url = base_url.unwrap_or_else(|| format!("http://{addr}/"));
                let repo = open_repo(ctx, &dir, &base_url, page_size)?;
                eprintln!(
                    "olac: provider {} ({} items) listening on {base_url}",
                    repo.config().archive_id,
                    repo.live_count()
                );
                server::serve_provider(Arc::new(repo), listener).await.map_err(env)
            })
        }
    }
}

fn open_repo(ctx: &Context, dir: &Path, base_url: &str, page_size: Option<usize>) -> Result<Repository, Failure> {
    Repository::open(
        dir,
        base_url,
        page_size.unwrap_or(ctx.config.page_size),
        ctx.registry.clone(),
    )
    .map_err(|e| Failure::Env(e.to_string()))
}

// ---- harvest -------------------------------------------------------------

fn harvest(ctx: &Context, args: HarvestArgs) -> Outcome {
    let catalog = ctx.catalog()?;
    let config = HarvesterConfig {
        parallelism: args.parallelism.unwrap_or(ctx.config.parallelism).max(1),
        retry_attempts: args.retries.unwrap_or(ctx.config.retries),
        retry_backoff: Duration::from_millis(ctx.config.retry_backoff_ms),
    };
    let transport = HttpTransport::new(Duration::from_secs(ctx.config.page_timeout_secs.max(1)));
    let harvester = Harvester::new(catalog, transport, config);
    let mode = if args.full {
        HarvestMode::Full
    } else {
        HarvestMode::Incremental
    };
    let reports = runtime()?.block_on(async {
        match &args.url {
            None => harvester.harvest_all(mode).await,
            Some(url) => {
                let known = harvester
                    .providers()
                    .into_iter()
                    .find(|p| p.provider.base_url == *url)
                    .map(|p| p.provider.archive_id);
                let id = match known {
                    Some(id) => id,
                    None => harvester.register_provider(url).await?.archive_id,
                };
                harvester.harvest(&id, mode).await.map(|r| vec![r])
            }
        }
    });
    let reports = reports.map_err(|e| match e {
        HarvestError::Catalog(c) => catalog_failure(c),
        other => Failure::Domain(other.to_string()),
    })?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports).map_err(env)?);
    } else {
        print_reports(&reports);
    }
    if reports.iter().all(HarvestReport::is_complete) {
        Ok(())
    } else {
        Err(Failure::Domain(String::new()))
    }
}

fn print_reports(reports: &[HarvestReport]) {
    println!(
        "{:<12} {:<9} {:>6} {:>8} {:>8} {:>9} {:>6}  error",
        "provider", "outcome", "added", "updated", "deleted", "rejected", "pages"
    );
    for r in reports {
        println!(
            "{:<12} {:<9} {:>6} {:>8} {:>8} {:>9} {:>6}  {}",
            r.provider_id,
            if r.is_complete() { "complete" } else { "failed" },
            r.added,
            r.updated,
            r.deleted,
            r.rejected,
            r.pages,
            r.error.as_deref().unwrap_or("")
        );
    }
}

// ---- query ---------------------------------------------------------------

fn query(ctx: &Context, args: QueryArgs) -> Outcome {
    let catalog = ctx.catalog()?;
    let left = Query::parse(&args.clauses).map_err(catalog_failure)?;
    match &args.join {
        None => {
            let hits = catalog.search_hits(&left).map_err(catalog_failure)?;
            let summaries: Vec<SearchSummary> = hits
                .into_iter()
                .map(|h| api::summarize(&catalog, &h.entry, h.matched_codes, &args.display))
                .collect();
            if args.json {
                println!("{}", serde_json::to_string_pretty(&summaries).map_err(env)?);
            } else {
                for s in &summaries {
                    println!("{}\t{}", s.identifier, s.title.as_deref().unwrap_or(""));
                }
            }
        }
        Some(on) => {
            let on: ElementName = on
                .parse()
                .map_err(|_| Failure::Domain(format!("unknown element {on:?}")))?;
            let right = Query::parse(&args.right).map_err(catalog_failure)?;
            let pairs = catalog.join_query(&left, &right, on).map_err(catalog_failure)?;
            if args.json {
                let rows: Vec<serde_json::Value> = pairs
                    .iter()
                    .map(|(l, r)| {
                        serde_json::json!({
                            "left": api::summarize(&catalog, l, Vec::new(), &args.display),
                            "right": api::summarize(&catalog, r, Vec::new(), &args.display),
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows).map_err(env)?);
            } else {
                for (l, r) in &pairs {
                    println!("{}\t{}", l.identifier, r.identifier);
                }
            }
        }
    }
    Ok(())
}

// ---- catalog -------------------------------------------------------------

fn catalog(ctx: &Context, command: CatalogCommand) -> Outcome {
    let catalog = ctx.catalog()?;
    match command {
        CatalogCommand::Compact => catalog.compact().map_err(catalog_failure),
        CatalogCommand::Serve { listen, ui_dir } => {
            let listen = listen.unwrap_or_else(|| ctx.config.listen_address.clone());
            runtime()?.block_on(async {
                let listener = TcpListener::bind(&listen)
                    .await
                    .map_err(|e| Failure::Env(format!("cannot listen on {listen}: {e}")))?;
                let addr = listener.local_addr().map_err(env)?;
                eprintln!("olac: catalog ({} entries) listening on http://{addr}/", catalog.len());
                api::serve_catalog(catalog, listener, ui_dir).await.map_err(env)
            })
        }
    }
}

// ---- vocab ---------------------------------------------------------------

fn vocab(ctx: &Context, command: VocabCommand) -> Outcome {
    let VocabCommand::List { id } = command;
    match id {
        None => {
            for v in VocabId::ALL {
                let vocab = ctx.registry.vocabulary(v);
                println!(
                    "{}\t{} terms\t{}",
                    v.as_str(),
                    vocab.len(),
                    if vocab.is_open() { "open" } else { "closed" }
                );
            }
        }
        Some(id) => {
            let id: VocabId = id
                .parse()
                .map_err(|e: olac::vocab::VocabError| Failure::Domain(e.to_string()))?;
            for term in ctx.registry.vocabulary(id).terms() {
                let flag = if term.is_ambiguous() { "\tambiguous" } else { "" };
                println!("{}\t{}{flag}", term.code(), term.en_label());
            }
        }
    }
    Ok(())
}
