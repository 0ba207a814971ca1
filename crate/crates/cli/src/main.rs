use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ntccrt::engine::{EngineConfig, StarPolicy};
use ntccrt_cli::{
    cmd_bench, cmd_check, cmd_oracle_dump, cmd_run, load_model, parse_range, repl, BenchArgs,
    OracleDumpArgs, RunArgs, EXIT_STATIC,
};

#[derive(Parser)]
#[command(name = "ntccrt", version, about = "Run ntcc models over discrete time-units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EngineOpts {
    /// Seed for sum choices and star delays.
    #[arg(long, env = "NTCCRT_SEED", default_value_t = 0)]
    seed: u64,
    /// fixed:K, geometric:P or schedule:K1,K2,...
    #[arg(long, default_value = "geometric:0.5")]
    star_policy: StarPolicy,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model and write its trace as JSON Lines.
    Run {
        /// Model file, or a builtin name (chord, factorial, ccfomi, filters, stress).
        model: String,
        /// Environment input, one {"unit": n, "tells": [...]} object per line.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Number of time-units; defaults to the input's last unit, else 10.
        #[arg(long)]
        units: Option<u64>,
        /// Trace output file; standard output when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record inconsistent units and keep going.
        #[arg(long)]
        continue_on_fail: bool,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Interactive session: one line of tells per time-unit.
    Repl {
        model: String,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Time each unit and compare the mean with the 30 ms budget.
    Bench {
        model: String,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 300)]
        units: u64,
        /// Print the statistics as one JSON object.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        engine: EngineOpts,
    },
    /// Parse and validate a model.
    Check {
        model: String,
        /// List diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Factor Oracle utilities.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Print the states of the oracle learned from a symbol sequence.
    Dump {
        /// Symbols to learn, in order.
        #[arg(allow_negative_numbers = true, value_delimiter = ',')]
        symbols: Vec<i64>,
        /// Also learn the oracle.add symbols recorded in a trace.
        #[arg(long)]
        from_trace: Option<PathBuf>,
        #[arg(long, default_value = "0..127", value_parser = parse_range)]
        alphabet: (i64, i64),
        #[arg(long)]
        json: bool,
    },
}

fn config(opts: EngineOpts, continue_on_fail: bool) -> EngineConfig {
    EngineConfig {
        seed: opts.seed,
        star_policy: opts.star_policy,
        continue_on_fail,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let code = match cli.command {
        Command::Run {
            model,
            input,
            units,
            trace,
            continue_on_fail,
            engine,
        } => cmd_run(
            &RunArgs {
                model,
                input,
                units,
                trace,
                config: config(engine, continue_on_fail),
            },
            &mut out,
            &mut err,
        ),
        Command::Repl { model, engine } => match load_model(&model) {
            Ok(ast) => {
                let stdin = io::stdin();
                match repl(&ast, config(engine, true), stdin.lock(), &mut out) {
                    Ok(()) => 0,
                    Err(e) => {
                        let _ = writeln!(err, "error: {e}");
                        EXIT_STATIC
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                e.exit_code()
            }
        },
        Command::Bench {
            model,
            input,
            units,
            json,
            engine,
        } => cmd_bench(
            &BenchArgs {
                model,
                input,
                units,
                json,
                config: config(engine, false),
            },
            &mut out,
            &mut err,
        ),
        Command::Check { model, json } => cmd_check(&model, json, &mut out, &mut err),
        Command::Oracle {
            command:
                OracleCommand::Dump {
                    symbols,
                    from_trace,
                    alphabet,
                    json,
                },
        } => cmd_oracle_dump(
            &OracleDumpArgs {
                symbols,
                from_trace,
                alphabet,
                json,
            },
            &mut out,
            &mut err,
        ),
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
