//! `memq` command line.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use tracing::{info, Level};

use memq_core::eval::{aggregate_report, read_log, ComparisonOutcome, EngineKind, SessionRecord};
use memq_core::miner::WindowOrder;
use memq_core::EngineConfig;
use memq_service::http::{router, AppState};
use memq_service::{build_gateway, BackendKind, QueryResponse, Service, SessionBook};

#[derive(Parser)]
#[command(name = "memq", version, about = "Ask questions about your photos, screenshots and videos")]
struct Cli {
    /// Store snapshot, created on first ingest.
    #[arg(long, global = true, default_value = "memq.db")]
    db: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Scripted)]
    backend: BackendKind,
    /// Fixture directory for the scripted backend.
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// JSON engine configuration; unset keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a corpus directory holding manifest.jsonl.
    Ingest { corpus: PathBuf },
    /// Structure, index and mine the ingested memories.
    Augment {
        #[arg(long, value_enum, default_value_t = Order::Forward)]
        order: Order,
    },
    /// Answer one question.
    Query {
        query: String,
        #[arg(long, default_value = "augmented")]
        engine: EngineKind,
        #[arg(long)]
        json: bool,
        /// Time the question is asked at (RFC 3339); defaults to now.
        #[arg(long)]
        ref_time: Option<DateTime<Utc>>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Seed for blinding compare sessions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Session log for finalized comparisons.
        #[arg(long, default_value = "sessions.jsonl")]
        log: PathBuf,
    },
    /// Read a comparison session log.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Write the planted test corpus, its fixtures and ground truth.
    GenCorpus { out: PathBuf },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// One line per finalized session with the unblinded outcome.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Per-category accuracy, completeness and win rates.
    Report {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
    Json,
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => Level::WARN,
        1 => Level::INFO,
        2 => Level::DEBUG,
        _ => Level::TRACE,
    };
    tracing_subscriber::fmt()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<EngineConfig>, Box<dyn std::error::Error>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("reading {}: {e}", path.display()))?;
    Ok(Some(serde_json::from_str(&text)?))
}

fn open_service(cli: &Cli) -> Result<Service, Box<dyn std::error::Error>> {
    let config = load_config(cli.config.as_deref())?;
    let dim = config
        .as_ref()
        .map(|c| c.embedding_dim)
        .unwrap_or(EngineConfig::default().embedding_dim);
    let gateway = build_gateway(cli.backend, cli.fixtures.as_deref(), dim)?;
    Ok(Service::open(gateway, Some(cli.db.clone()), config)?)
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Ingest { corpus } => {
            let summary = open_service(&cli)?.ingest(corpus)?;
            println!(
                "ingested {} memories from {} ({} near-duplicates merged)",
                summary.memories, summary.corpus_root, summary.merged
            );
        }
        Command::Augment { order } => {
            let order = match order {
                Order::Forward => WindowOrder::Forward,
                Order::Reverse => WindowOrder::Reverse,
            };
            let r = open_service(&cli)?.augment(order)?;
            println!(
                "structured {} memories over {} windows: {} contexts, {} knowledge entries ({} candidates dropped)",
                r.structured, r.windows, r.contexts, r.knowledge, r.dropped_candidates
            );
        }
        Command::Query {
            query,
            engine,
            json,
            ref_time,
        } => {
            let response = open_service(&cli)?.query(*engine, query, *ref_time)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&response)?);
            } else {
                print_answer(&response);
            }
        }
        Command::Serve {
            port,
            host,
            seed,
            log,
        } => {
            // The remote backend's blocking client must exist before the
            // async runtime starts.
            let service = Arc::new(open_service(&cli)?);
            let sessions = SessionBook::open(log, *seed)?;
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(AppState::new(service, sessions), addr))?;
        }
        Command::Eval { command } => match command {
            EvalCommand::Replay { log } => replay(&read_log(log)?),
            EvalCommand::Report { log, format } => {
                let report = aggregate_report(&read_log(log)?);
                match format {
                    ReportFormat::Text => print!("{}", report.to_text()),
                    ReportFormat::Csv => print!("{}", report.to_csv()),
                    ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
                }
            }
        },
        Command::GenCorpus { out } => {
            let truth = memq_planted::generate(out)?;
            println!(
                "wrote {} memories, {} events and {} queries to {}",
                truth.memory_count,
                truth.events.len(),
                truth.queries.len(),
                out.display()
            );
        }
    }
    Ok(())
}

async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on {}", listener.local_addr()?);
    eprintln!("memq listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn print_answer(r: &QueryResponse) {
    println!("{}", r.answer);
    if !r.explanation.is_empty() {
        println!("\n{}", r.explanation);
    }
    if !r.references.is_empty() {
        println!();
        for m in &r.references {
            println!(
                "  {}  {}  {}{}",
                m.memory_id,
                m.capture_time.to_rfc3339_opts(SecondsFormat::Secs, true),
                m.caption,
                m.location.as_deref().map(|l| format!(" ({l})")).unwrap_or_default()
            );
        }
    }
}

fn replay(records: &[SessionRecord]) {
    for r in records {
        let aug = r.rating_of(EngineKind::Augmented);
        let base = r.rating_of(EngineKind::Baseline);
        println!(
            "{}  {:<17}  augmented {}/{}  baseline {}/{}  {:<13}  {}",
            r.session_id,
            r.category.map(|c| c.as_str()).unwrap_or("other"),
            aug.upa(),
            aug.upc(),
            base.upa(),
            base.upc(),
            match r.outcome() {
                ComparisonOutcome::AWins => "augmented won",
                ComparisonOutcome::BWins => "baseline won",
                ComparisonOutcome::Tie => "tie",
                ComparisonOutcome::BothBad => "both bad",
            },
            r.query
        );
    }
    let overall = aggregate_report(records).rows.pop().expect("overall row");
    println!(
        "{} sessions; accuracy augmented {:.3}, baseline {:.3}",
        overall.sessions, overall.augmented.accuracy, overall.baseline.accuracy
    );
}
