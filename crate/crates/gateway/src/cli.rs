//! The `greenbasket` command line: the server plus catalog and behaviour-model tools.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use greenbasket_core::behavior::{
    apply_transform, compare, load_matrix, load_transform, stationary, BehaviorState, ChainError,
    MatrixFileError, StationaryConfig, StationaryDistribution, TransitionMatrix,
};
use greenbasket_core::catalog::{ingest_path, IngestError};
use greenbasket_core::clock::SystemClock;

use crate::config::{self, ConfigError, ServeConfig, ServeFlags};
use crate::AppState;

/// Process exit statuses. Each failure class has its own value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 2,
    Io = 3,
    Parse = 4,
    Invalid = 5,
    ChainStructure = 6,
    NotConverged = 7,
    Config = 8,
    Server = 9,
    Rejected = 10,
}

#[derive(Debug, Parser)]
#[command(name = "greenbasket", version, about = "Sustainable shopping assistant server and tools")]
pub struct Cli {
    /// Machine-readable JSON on stdout instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Parse a catalog document and report accepted and rejected rows.
    IngestCatalog {
        path: PathBuf,
        /// Also write the accepted products as a catalog snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// Fail when any row is rejected.
        #[arg(long)]
        strict: bool,
    },
    /// Check a transition matrix file.
    ValidateMatrix { path: PathBuf },
    /// Apply a transform file to a matrix file and print the result.
    ApplyTransform {
        matrix: PathBuf,
        transform: PathBuf,
    },
    /// Long-run state probabilities of a matrix file.
    Stationary {
        matrix: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Stationary distributions before and after a transform, with the adoption states marked.
    CompareAdoption {
        baseline: PathBuf,
        transform: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub gamify_config: Option<PathBuf>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Bearer token file.
    #[arg(long)]
    pub users: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = StationaryConfig::default().tolerance)]
    pub tolerance: f64,
    #[arg(long, default_value_t = StationaryConfig::default().max_iterations)]
    pub max_iterations: usize,
}

impl SolverArgs {
    fn config(&self) -> StationaryConfig {
        StationaryConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

/// A failure with its diagnostic code and exit status.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub code: String,
    pub message: String,
    pub detail: Option<serde_json::Value>,
}

impl Failure {
    fn new(exit: Exit, code: &str, message: impl Into<String>) -> Self {
        Self {
            exit,
            code: code.into(),
            message: message.into(),
            detail: None,
        }
    }
}

impl From<MatrixFileError> for Failure {
    fn from(e: MatrixFileError) -> Self {
        let message = e.to_string();
        match e {
            MatrixFileError::Io { .. } => Failure::new(Exit::Io, "io_error", message),
            MatrixFileError::Parse { .. } => Failure::new(Exit::Parse, "parse_error", message),
            MatrixFileError::Invalid(report) => Failure {
                detail: serde_json::to_value(&report.violations).ok(),
                ..Failure::new(Exit::Invalid, "matrix_invalid", message)
            },
        }
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        let exit = match e {
            ChainError::ChainReducible { .. } | ChainError::ChainPeriodic { .. } => Exit::ChainStructure,
            ChainError::NotConverged { .. } => Exit::NotConverged,
            ChainError::BadTolerance(_) => Exit::Usage,
        };
        Failure {
            detail: serde_json::to_value(&e).ok(),
            ..Failure::new(exit, e.code(), e.to_string())
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => Failure::new(Exit::Io, "io_error", e.to_string()),
            _ => Failure::new(Exit::Parse, "catalog_malformed", e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(Exit::Config, e.code(), format!("configuration error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { Exit::Usage as i32 } else { Exit::Ok as i32 };
        }
    };
    let json = cli.json;
    match dispatch(cli, out) {
        Ok(()) => Exit::Ok as i32,
        Err(f) => {
            let _ = writeln!(err, "error[{}]: {}", f.code, f.message);
            if json {
                let body = json!({
                    "error": { "code": f.code, "message": f.message, "detail": f.detail, "exit_status": f.exit as i32 }
                });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&body).unwrap_or_default());
            }
            f.exit as i32
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Serve(args) => serve(args),
        Command::IngestCatalog { path, snapshot, strict } => ingest(&path, snapshot, strict, json, out),
        Command::ValidateMatrix { path } => {
            let (name, matrix) = load_matrix(&path)?;
            let structure = greenbasket_core::behavior::check_structure(&matrix);
            emit(
                out,
                json,
                &json!({
                    "name": name,
                    "states": matrix.len(),
                    "valid": true,
                    "ergodic": structure.is_ok(),
                    "structure": structure.as_ref().err(),
                }),
                || {
                    let mut text = format!("{name}: valid row-stochastic matrix over {} states\n", matrix.len());
                    match &structure {
                        Ok(()) => text.push_str("irreducible and aperiodic\n"),
                        Err(e) => text.push_str(&format!("note [{}]: {e}\n", e.code())),
                    }
                    text
                },
            )
        }
        Command::ApplyTransform { matrix, transform } => {
            let (name, base) = load_matrix(&matrix)?;
            let t = load_transform(&transform)?;
            let result = apply_transform(&base, &t).map_err(MatrixFileError::Invalid)?;
            let new_name = format!("{name}+{}", t.name);
            emit(
                out,
                json,
                &json!({ "name": new_name, "labels": result.labels(), "rows": result.rows(), "overridden": t.row_overrides.keys().collect::<Vec<_>>() }),
                || matrix_toml(&new_name, &result),
            )
        }
        Command::Stationary { matrix, solver } => {
            let (name, m) = load_matrix(&matrix)?;
            let pi = stationary(&m, solver.config())?;
            emit(out, json, &json!({ "name": name, "distribution": pi }), || {
                distribution_table(&name, &pi)
            })
        }
        Command::CompareAdoption {
            baseline,
            transform,
            solver,
        } => compare_adoption(&baseline, &transform, solver.config(), json, out),
    }
}

fn emit(
    out: &mut dyn Write,
    json: bool,
    value: &impl Serialize,
    text: impl FnOnce() -> String,
) -> Outcome {
    let rendered = if json {
        serde_json::to_string_pretty(value).map_err(|e| Failure::new(Exit::Io, "io_error", e.to_string()))? + "\n"
    } else {
        text()
    };
    out.write_all(rendered.as_bytes())
        .map_err(|e| Failure::new(Exit::Io, "io_error", e.to_string()))
}

fn ingest(
    path: &std::path::Path,
    snapshot: Option<PathBuf>,
    strict: bool,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let (catalog, report) = ingest_path(path)?;
    if let Some(snap) = &snapshot {
        catalog
            .save_snapshot(snap)
            .map_err(|e| Failure::new(Exit::Io, "io_error", e.to_string()))?;
    }
    emit(out, json, &report, || {
        let mut text = format!("accepted {}\nrejected {}\n", report.accepted, report.rejected.len());
        for r in &report.rejected {
            text.push_str(&format!(
                "  line {}{}: {}\n",
                r.line,
                r.code.as_deref().map(|c| format!(" (code {c})")).unwrap_or_default(),
                r.reason
            ));
        }
        text
    })?;
    if strict && !report.rejected.is_empty() {
        return Err(Failure::new(
            Exit::Rejected,
            "catalog_rows_rejected",
            format!("{} rows rejected", report.rejected.len()),
        ));
    }
    Ok(())
}

/// Before/after occupancy per state, grouped by macro-state, with the four
/// adoption states marked.
#[derive(Debug, Serialize)]
struct AdoptionDocument {
    baseline: String,
    transform: String,
    states: Vec<AdoptionRow>,
    watched: Vec<greenbasket_core::behavior::WatchedState>,
    all_watched_increased: bool,
    iterations: [usize; 2],
}

#[derive(Debug, Serialize)]
struct AdoptionRow {
    state: String,
    macro_state: Option<String>,
    description: Option<String>,
    before: f64,
    after: f64,
    delta: f64,
    watched: bool,
}

fn compare_adoption(
    baseline: &std::path::Path,
    transform: &std::path::Path,
    config: StationaryConfig,
    json: bool,
    out: &mut dyn Write,
) -> Outcome {
    let (name, base) = load_matrix(baseline)?;
    let t = load_transform(transform)?;
    let adopted = apply_transform(&base, &t).map_err(MatrixFileError::Invalid)?;
    let before = stationary(&base, config)?;
    let after = stationary(&adopted, config)?;
    let watch: Vec<&str> = BehaviorState::ADOPTION_WATCH.iter().map(|s| s.label()).collect();
    let report = compare(&before, &after, &watch)
        .map_err(|e| Failure::new(Exit::Invalid, "compare_failed", e.to_string()))?;
    let doc = AdoptionDocument {
        baseline: name,
        transform: t.name.clone(),
        states: report
            .states
            .iter()
            .map(|d| {
                let state: Option<BehaviorState> = d.state.parse().ok();
                AdoptionRow {
                    state: d.state.clone(),
                    macro_state: state.map(|s| format!("{:?}", s.macro_state())),
                    description: state.map(|s| s.description().to_string()),
                    before: d.before,
                    after: d.after,
                    delta: d.delta,
                    watched: watch.contains(&d.state.as_str()),
                }
            })
            .collect(),
        all_watched_increased: report.all_watched_increased(),
        watched: report.watched.clone(),
        iterations: [before.iterations_used, after.iterations_used],
    };
    emit(out, json, &doc, || {
        let mut text = format!("{} vs {} + {}\n", doc.baseline, doc.baseline, doc.transform);
        text.push_str(&format!(
            "{:<5} {:<21} {:>10} {:>10} {:>11}\n",
            "state", "macro", "before", "after", "delta"
        ));
        for r in &doc.states {
            text.push_str(&format!(
                "{:<5} {:<21} {:>10.6} {:>10.6} {:>+11.6}{}\n",
                r.state,
                r.macro_state.as_deref().unwrap_or("-"),
                r.before,
                r.after,
                r.delta,
                if r.watched { "  *" } else { "" }
            ));
        }
        for w in &doc.watched {
            text.push_str(&format!(
                "{} {}\n",
                w.state,
                if w.increased { "increased" } else { "did not increase" }
            ));
        }
        text
    })
}

fn distribution_table(name: &str, pi: &StationaryDistribution) -> String {
    let mut text = format!(
        "{name}: converged in {} iterations, residual {:.3e}\n",
        pi.iterations_used, pi.residual
    );
    for (label, p) in pi.labels.iter().zip(&pi.probabilities) {
        text.push_str(&format!("{label:<5} {p:.8}\n"));
    }
    text
}

/// The matrix in the same format the matrix loader reads.
fn matrix_toml(name: &str, m: &TransitionMatrix) -> String {
    let mut text = format!("name = {:?}\nlabels = [", name);
    text.push_str(
        &m.labels()
            .iter()
            .map(|l| format!("{l:?}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    text.push_str("]\nrows = [\n");
    for (label, row) in m.labels().iter().zip(m.rows()) {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        text.push_str(&format!("  [{}], # {label}\n", cells.join(", ")));
    }
    text.push_str("]\n");
    text
}

fn serve(args: ServeArgs) -> Outcome {
    let flags = ServeFlags {
        port: args.port,
        catalog: args.catalog,
        references: args.references,
        gamify_config: args.gamify_config,
        data_dir: args.data_dir,
        users: args.users,
    };
    let config = ServeConfig::resolve(flags, |k| std::env::var(k).ok())?;
    let clock: Arc<dyn greenbasket_core::clock::Clock> = Arc::new(SystemClock);
    let loaded = config::load(&config, clock.clone())?;
    tracing::info!(
        products = loaded.keeper.catalog().len(),
        port = config.port,
        "starting server"
    );
    let state = AppState::new(loaded.keeper, loaded.sessions, clock);
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::new(Exit::Server, "server_error", e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port))
            .await
            .map_err(|e| Failure::new(Exit::Server, "server_bind_failed", format!("port {}: {e}", config.port)))?;
        axum::serve(listener, crate::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::new(Exit::Server, "server_error", e.to_string()))
    })
}
