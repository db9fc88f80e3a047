//! `paql`: evaluate package queries from the shell, or serve the HTTP API.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use paql_core::catalog::{load_csv, Relation};
use paql_core::evaluator::{filter_base, objective_value};
use paql_core::local_search::{local_search, LocalSearchConfig};
use paql_core::pruning::{bounds_for, pruned_space_size};
use paql_core::solver::{brute_force_oracle, solve_formula, to_lp_format, translate_disjuncts};
use paql_core::{parse, validate, Error, SolveOutcome, SolveStatus, SolverConfig, ValidatedQuery};
use paql_server::{AppState, ServerConfig};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_ABORTED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_QUERY: u8 = 66;

#[derive(Parser)]
#[command(name = "paql", version, about = "Package queries over CSV relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a query and print the outcome.
    Eval {
        #[arg(long, value_name = "FILE.csv")]
        data: PathBuf,
        #[arg(long, value_name = "FILE.paql")]
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Ilp)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "MS")]
        timeout_ms: Option<u64>,
        /// Write the integer program in LP format (one file per disjunct).
        #[arg(long, value_name = "FILE")]
        dump_lp: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the cardinality bounds implied by the query.
    Bounds {
        #[arg(long, value_name = "FILE.csv")]
        data: PathBuf,
        #[arg(long, value_name = "FILE.paql")]
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "PAQL_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        /// Every *.csv here is loaded as a dataset named after the file stem.
        #[arg(long, value_name = "DIR")]
        data_dir: Option<PathBuf>,
        /// Allowed CORS origin (any origin when omitted).
        #[arg(long)]
        cors_origin: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub(crate) enum Method {
    Ilp,
    Local,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn from_error(code: u8, source: &Path, e: &Error) -> Self {
        let at = e
            .position()
            .map(|p| format!(" at {}:{p}", source.display()))
            .unwrap_or_default();
        Failure::new(code, format!("{}{at}: {e}", e.code()))
    }
}

fn read(path: &Path, code: u8) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(code, format!("{}: {e}", path.display())))
}

/// Reads the query and loads the CSV under the relation name the query uses.
fn load(data: &Path, query: &Path) -> Result<(Relation, ValidatedQuery), Failure> {
    let text = read(query, EXIT_QUERY)?;
    let ast = parse(&text).map_err(|e| Failure::from_error(EXIT_QUERY, query, &e))?;
    let csv = read(data, EXIT_DATA)?;
    let rel = load_csv(&ast.relation_name, csv.as_bytes())
        .map_err(|e| Failure::from_error(EXIT_DATA, data, &e))?;
    let q = validate(&ast, rel.schema()).map_err(|e| Failure::from_error(EXIT_QUERY, query, &e))?;
    Ok((rel, q))
}

fn lp_paths(base: &Path, count: usize) -> Vec<PathBuf> {
    if count == 1 {
        return vec![base.to_path_buf()];
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("lp");
    (0..count)
        .map(|i| base.with_file_name(format!("{stem}.{i}.{ext}")))
        .collect()
}

fn brute(query: &ValidatedQuery, rel: &Relation) -> Result<SolveOutcome, Error> {
    let all = brute_force_oracle(query, rel, None)?;
    let mut out = SolveOutcome {
        status: SolveStatus::Infeasible,
        package: None,
        objective_value: None,
        stats: Default::default(),
    };
    out.stats.iterations = all.len() as u64;
    if let Some((package, _)) = all.into_iter().next() {
        out.status = if query.objective().is_some() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Feasible
        };
        out.objective_value = objective_value(&package, query, rel);
        out.package = Some(package);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn eval(
    data: &Path,
    query_path: &Path,
    method: Method,
    seed: u64,
    timeout_ms: Option<u64>,
    dump_lp: Option<&Path>,
    format: Format,
) -> Result<u8, Failure> {
    let (rel, query) = load(data, query_path)?;
    let config = SolverConfig {
        seed,
        timeout: timeout_ms.map(Duration::from_millis),
        ..Default::default()
    };
    let bounds = bounds_for(&query, &rel);
    if let Some(path) = dump_lp {
        let models = translate_disjuncts(&query, &rel, &bounds, config.dnf_limit)
            .map_err(|e| Failure::from_error(EXIT_QUERY, query_path, &e))?;
        for (model, p) in models.iter().zip(lp_paths(path, models.len())) {
            fs::write(&p, to_lp_format(model))
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", p.display())))?;
        }
    }
    let outcome = match method {
        Method::Ilp => solve_formula(&query, &rel, &config),
        Method::Local => Ok(local_search(
            &query,
            &rel,
            &LocalSearchConfig {
                seed,
                ..Default::default()
            },
        )),
        Method::Brute => brute(&query, &rel),
    }
    .map_err(|e| Failure::from_error(EXIT_QUERY, query_path, &e))?;

    let text = match format {
        Format::Json => output::outcome_json(method, &outcome, &bounds, &rel),
        Format::Table => output::outcome_table(&outcome, &bounds, &rel),
    };
    println!("{text}");
    Ok(match outcome.status {
        SolveStatus::Optimal | SolveStatus::Feasible => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Aborted => EXIT_ABORTED,
    })
}

fn bounds(data: &Path, query_path: &Path, format: Format) -> Result<u8, Failure> {
    let (rel, query) = load(data, query_path)?;
    let b = bounds_for(&query, &rel);
    let n = filter_base(&rel, query.base()).len() as u64;
    let space = if query.ast().repeat.is_none() {
        pruned_space_size(n, &b).ok()
    } else {
        None
    };
    let text = match format {
        Format::Json => output::bounds_json(&b, n, space.as_ref()),
        Format::Table => output::bounds_table(&b, n, space.as_ref()),
    };
    println!("{text}");
    Ok(0)
}

fn serve(addr: &str, data_dir: Option<&Path>, cors_origin: Option<String>, timeout_ms: u64) -> Result<u8, Failure> {
    let state = Arc::new(AppState::new(ServerConfig {
        solve_timeout: Duration::from_millis(timeout_ms),
        cors_origin,
        ..Default::default()
    }));
    if let Some(dir) = data_dir {
        let names = state.load_dir(dir).map_err(|m| Failure::new(EXIT_DATA, m))?;
        eprintln!("loaded {} dataset(s): {}", names.len(), names.join(", "));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map(|a| a.to_string()).unwrap_or_default();
        eprintln!("listening on http://{local}");
        paql_server::serve(listener, state)
            .await
            .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
        Ok(0)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Eval {
            data,
            query,
            method,
            seed,
            timeout_ms,
            dump_lp,
            format,
        } => eval(&data, &query, method, seed, timeout_ms, dump_lp.as_deref(), format),
        Command::Bounds {
            data,
            query,
            format,
        } => bounds(&data, &query, format),
        Command::Serve {
            addr,
            data_dir,
            cors_origin,
            timeout_ms,
        } => serve(&addr, data_dir.as_deref(), cors_origin, timeout_ms),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
