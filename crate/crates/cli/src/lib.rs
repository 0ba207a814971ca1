//! Commands behind the `ntccrt` binary. Each command writes to the given
//! streams and returns the process exit code.

mod bench;
mod repl;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ntccrt::dsl::{self, Diagnostic, ModelAst};
use ntccrt::engine::{run, EngineConfig, EngineError, Trace};
use ntccrt::events::{EventError, EventStream};
use ntccrt::models;
use ntccrt::oracle::{FactorOracle, OracleError};

pub use bench::{bench, BenchStats, LATENCY_BUDGET_MS};
pub use repl::repl;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STATIC: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Units run when neither `--units` nor an input file says otherwise.
pub const DEFAULT_UNITS: u64 = 10;

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: io::Error },
    Invalid { label: String, diagnostics: Vec<Diagnostic> },
    Events { path: PathBuf, source: EventError },
    Oracle(OracleError),
    Runtime(EngineError),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => EXIT_RUNTIME,
            _ => EXIT_STATIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Invalid { label, diagnostics } => {
                for (i, d) in diagnostics.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{label}:{}:{}: {}: {}", d.line, d.column, d.code.as_str(), d.message)?;
                }
                Ok(())
            }
            CliError::Events { path, source } => write!(f, "{}:{source}", path.display()),
            CliError::Oracle(e) => write!(f, "{e}"),
            CliError::Runtime(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// A model argument is a path to a `.ntcc` file or the name of a builtin
/// model. Files win when both exist.
pub fn read_model(arg: &str) -> Result<(String, String), CliError> {
    let path = Path::new(arg);
    if path.exists() || models::source(arg).is_none() {
        let src = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        return Ok((arg.to_string(), src));
    }
    let src = models::source(arg).expect("checked above");
    Ok((format!("models/{arg}.ntcc"), src.to_string()))
}

pub fn load_model(arg: &str) -> Result<ModelAst, CliError> {
    let (label, src) = read_model(arg)?;
    dsl::load(&src).map_err(|diagnostics| CliError::Invalid { label, diagnostics })
}

pub fn load_events(path: Option<&Path>) -> Result<EventStream, CliError> {
    let Some(path) = path else {
        return Ok(EventStream::new());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EventStream::from_jsonl(&text).map_err(|source| CliError::Events {
        path: path.to_path_buf(),
        source,
    })
}

pub fn default_units(events: &EventStream) -> u64 {
    events.last_unit().unwrap_or(DEFAULT_UNITS)
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub model: String,
    pub input: Option<PathBuf>,
    pub units: Option<u64>,
    pub trace: Option<PathBuf>,
    pub config: EngineConfig,
}

fn write_trace(trace: &Trace, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = trace.to_jsonl();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn report(err: CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {err}");
    err.exit_code()
}

pub fn cmd_run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = (|| {
        let model = load_model(&args.model)?;
        let events = load_events(args.input.as_deref())?;
        let units = args.units.unwrap_or_else(|| default_units(&events));
        let outcome = run(&model, &events, units, args.config.clone());
        write_trace(&outcome.trace, args.trace.as_deref(), stdout)?;
        match outcome.error {
            Some(e) => Err(CliError::Runtime(e)),
            None => Ok(()),
        }
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report(e, stderr),
    }
}

pub fn cmd_check(model: &str, json: bool, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match load_model(model) {
        Ok(_) => {
            if json {
                let _ = writeln!(stdout, "[]");
            } else {
                let _ = writeln!(stdout, "{model}: ok");
            }
            EXIT_OK
        }
        Err(CliError::Invalid { label, diagnostics }) if json => {
            let _ = label;
            let text = serde_json::to_string(&diagnostics).expect("diagnostics serialize");
            let _ = writeln!(stdout, "{text}");
            EXIT_STATIC
        }
        Err(CliError::Io { path, source }) if json => {
            let value = serde_json::json!([{
                "code": "FileError",
                "message": format!("{}: {source}", path.display()),
            }]);
            let _ = writeln!(stdout, "{value}");
            EXIT_STATIC
        }
        Err(e) => report(e, stderr),
    }
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub model: String,
    pub input: Option<PathBuf>,
    pub units: u64,
    pub json: bool,
    pub config: EngineConfig,
}

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = (|| {
        let model = load_model(&args.model)?;
        let events = load_events(args.input.as_deref())?;
        bench(&model, &events, args.units, args.config.clone()).map_err(CliError::Runtime)
    })();
    match result {
        Ok((stats, _)) => {
            let _ = if args.json {
                writeln!(stdout, "{}", serde_json::to_string(&stats).expect("stats serialize"))
            } else {
                write!(stdout, "{stats}")
            };
            if stats.within_budget() {
                EXIT_OK
            } else {
                let _ = writeln!(
                    stderr,
                    "mean latency {:.3} ms exceeds {LATENCY_BUDGET_MS} ms",
                    stats.mean_ms
                );
                EXIT_RUNTIME
            }
        }
        Err(e) => report(e, stderr),
    }
}

/// Symbols learned by `oracle.add` in a trace, in order.
pub fn learned_symbols(trace: &Trace) -> Vec<i64> {
    trace
        .records
        .iter()
        .flat_map(|r| r.natives.iter())
        .filter(|n| n.name == dsl::ORACLE_ADD)
        .flat_map(|n| n.args.iter().copied())
        .collect()
}

#[derive(Debug, Clone)]
pub struct OracleDumpArgs {
    pub symbols: Vec<i64>,
    pub from_trace: Option<PathBuf>,
    pub alphabet: (i64, i64),
    pub json: bool,
}

pub fn cmd_oracle_dump(args: &OracleDumpArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = (|| {
        let mut symbols = args.symbols.clone();
        if let Some(path) = &args.from_trace {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let trace = Trace::from_jsonl(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            symbols.extend(learned_symbols(&trace));
        }
        let (lo, hi) = args.alphabet;
        FactorOracle::from_sequence(lo, hi, &symbols).map_err(CliError::Oracle)
    })();
    let fo = match result {
        Ok(fo) => fo,
        Err(e) => return report(e, stderr),
    };
    for s in fo.dump() {
        let _ = if args.json {
            writeln!(stdout, "{}", serde_json::to_value(&s).expect("dump serializes"))
        } else {
            let out: Vec<String> = s.outgoing.iter().map(|(k, v)| format!("{k}->{v}")).collect();
            writeln!(stdout, "{} {} {}", s.state, s.suffix, out.join(" "))
        };
    }
    EXIT_OK
}

/// Parses `lo..hi`.
pub fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo = lo.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<i64>().map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}
