//! Command-line front end.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::dedup::DedupConfig;
use crate::ingest::{reason_at, replay, serve, Engine, ReplayError};
use crate::ontology::TimeOfDay;
use crate::rdf::{parse_data, serialize, Literal, Term, TripleStore, Variable};
use crate::sparql::{evaluate, format_results, parse_query, OutputMode, QueryError, ResultTable};
use crate::tracegen::{gen_trace, manifest_path, write_trace, Noise, TraceParams};

pub const DEFAULT_PORT: u16 = 7878;

#[derive(Debug, Parser)]
#[command(
    name = "homectx",
    version,
    about = "Smart-home context store and reasoner"
)]
pub struct Cli {
    /// Turtle data file loaded before the command runs; repeatable.
    #[arg(long = "data", global = true, value_name = "FILE")]
    pub data: Vec<PathBuf>,
    /// TOML file of threshold overrides, e.g. `temperature = 0.2`.
    #[arg(long, global = true, value_name = "FILE")]
    pub thresholds: Option<PathBuf>,
    #[arg(long, global = true, default_value = "table", value_name = "table|tsv")]
    pub output: OutputMode,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a query over the loaded data.
    Query {
        /// Query text, or a path to a file holding it.
        query: String,
    },
    /// Print the appliance commands for a time of day.
    Reason {
        #[arg(value_name = "HHMMSS")]
        time: TimeOfDay,
    },
    /// Feed a trace file through the ingest pipeline and print statistics.
    Replay { trace: PathBuf },
    /// Accept sensor connections until interrupted.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Write the store as Turtle here on shutdown.
        #[arg(long, value_name = "FILE")]
        save: Option<PathBuf>,
    },
    /// Generate a synthetic trace and its manifest.
    GenTrace(GenTraceArgs),
    /// Validate data files and print them in canonical form.
    Load { files: Vec<PathBuf> },
}

#[derive(Debug, Args)]
pub struct GenTraceArgs {
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub streams: usize,
    /// Seconds covered, at most 86400.
    #[arg(long, default_value_t = 3600)]
    pub duration: u32,
    /// Seconds between readings of one stream.
    #[arg(long, default_value_t = 1)]
    pub period: u32,
    #[arg(long, default_value_t = 20)]
    pub events: usize,
    /// Restrict events to offsets that are multiples of this many seconds.
    #[arg(long, default_value_t = 1)]
    pub event_grid: u32,
    #[arg(long, default_value_t = Noise::default().temperature)]
    pub noise_temperature: f64,
    #[arg(long, default_value_t = Noise::default().humidity)]
    pub noise_humidity: f64,
    #[arg(long, default_value_t = Noise::default().illumination)]
    pub noise_illumination: f64,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn failed(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

fn load_store(files: &[PathBuf]) -> Result<TripleStore, CliError> {
    let mut store = TripleStore::new();
    for f in files {
        let text = std::fs::read_to_string(f)
            .map_err(|e| CliError::failed(format!("{}: {e}", f.display())))?;
        let triples =
            parse_data(&text).map_err(|e| CliError::failed(format!("{}:{e}", f.display())))?;
        store.extend(triples);
    }
    Ok(store)
}

fn load_config(path: Option<&Path>) -> Result<DedupConfig, CliError> {
    let Some(path) = path else {
        return Ok(DedupConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::failed(format!("{}: {e}", path.display())))?;
    DedupConfig::from_overrides(&text)
        .map_err(|e| CliError::failed(format!("{}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::failed(format!("stdout: {e}")))
}

fn table(cols: &[&str], rows: Vec<Vec<Term>>) -> ResultTable {
    ResultTable {
        header: cols
            .iter()
            .map(|c| Variable::new(c).expect("valid column name"))
            .collect(),
        rows,
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Query { ref query } => {
            let store = load_store(&cli.data)?;
            let (source, text) = match std::fs::read_to_string(query) {
                Ok(text) => (query.clone(), text),
                Err(_) if !Path::new(query).exists() => ("query".to_owned(), query.clone()),
                Err(e) => return Err(CliError::failed(format!("{query}: {e}"))),
            };
            let q = parse_query(&text).map_err(|e| CliError {
                code: if matches!(e, QueryError::UnboundVariable { .. }) {
                    2
                } else {
                    1
                },
                message: format!("{source}:{e}"),
            })?;
            print(&format_results(&evaluate(&store, &q), cli.output))
        }
        Command::Reason { time } => {
            let store = load_store(&cli.data)?;
            let cmds = reason_at(&store, time).map_err(|e| CliError::failed(e.to_string()))?;
            let rows = cmds
                .into_iter()
                .map(|c| {
                    vec![
                        Term::Iri(c.appliance),
                        Term::Literal(Literal::boolean(c.state)),
                        Term::Iri(c.person),
                        Term::Iri(c.activity),
                        Term::Literal(
                            Literal::positive_integer(c.priority).expect("priority is positive"),
                        ),
                    ]
                })
                .collect();
            let rt = table(
                &["appliance", "state", "person", "activity", "priority"],
                rows,
            );
            print(&format_results(&rt, cli.output))
        }
        Command::Replay { ref trace } => {
            let store = load_store(&cli.data)?;
            let cfg = load_config(cli.thresholds.as_deref())?;
            let report = replay(trace, store, cfg).map_err(|e| match e {
                ReplayError::Io { .. } => CliError::failed(e.to_string()),
                ReplayError::Line { .. } => CliError::failed(format!("{}:{e}", trace.display())),
            })?;
            let s = report.stats;
            let stat = |name: &str, v: f64| {
                vec![
                    Term::Literal(Literal::string(name)),
                    Term::Literal(Literal::double(v).expect("finite")),
                ]
            };
            let rows = vec![
                stat("input_count", s.input_count as f64),
                stat("stored_count", s.stored_count as f64),
                stat("reduction_factor", s.reduction_factor),
                stat("commands_emitted", s.commands_emitted as f64),
            ];
            print(&format_results(
                &table(&["stat", "value"], rows),
                cli.output,
            ))
        }
        Command::Serve { ref host, ref save } => {
            let store = load_store(&cli.data)?;
            let cfg = load_config(cli.thresholds.as_deref())?;
            run_server(host, cli.port, store, cfg, save.as_deref())
        }
        Command::GenTrace(ref a) => {
            let cfg = load_config(cli.thresholds.as_deref())?;
            let params = TraceParams {
                streams: a.streams,
                duration: a.duration,
                period: a.period,
                events: a.events,
                event_grid: a.event_grid,
                noise: Noise {
                    temperature: a.noise_temperature,
                    humidity: a.noise_humidity,
                    illumination: a.noise_illumination,
                },
                ..TraceParams::default()
            };
            let trace = gen_trace(&params, cli.seed, &cfg).map_err(|e| CliError {
                code: 2,
                message: e.to_string(),
            })?;
            write_trace(&a.out, &trace)
                .map_err(|e| CliError::failed(format!("{}: {e}", a.out.display())))?;
            log::info!(
                "wrote {} lines to {} and {}",
                trace.lines.len(),
                a.out.display(),
                manifest_path(&a.out).display()
            );
            Ok(())
        }
        Command::Load { ref files } => {
            let all: Vec<PathBuf> = cli.data.iter().chain(files).cloned().collect();
            print(&serialize(&load_store(&all)?))
        }
    }
}

fn run_server(
    host: &str,
    port: u16,
    store: TripleStore,
    cfg: DedupConfig,
    save: Option<&Path>,
) -> Result<(), CliError> {
    let rt =
        tokio::runtime::Runtime::new().map_err(|e| CliError::failed(format!("runtime: {e}")))?;
    let engine = Arc::new(Engine::new(store, cfg));
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::failed(format!("bind {host}:{port}: {e}")))?;
        let addr: SocketAddr = listener
            .local_addr()
            .map_err(|e| CliError::failed(e.to_string()))?;
        print(&format!("listening on {addr}\n"))?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        };
        serve(listener, Arc::clone(&engine), shutdown)
            .await
            .map_err(|e| CliError::failed(e.to_string()))
    })?;
    if let Some(path) = save {
        std::fs::write(path, serialize(&engine.snapshot()))
            .map_err(|e| CliError::failed(format!("{}: {e}", path.display())))?;
    }
    let s = engine.stats();
    log::info!(
        "{} readings received, {} stored",
        s.input_count,
        s.stored_count
    );
    Ok(())
}
