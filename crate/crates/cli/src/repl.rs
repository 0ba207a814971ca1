//! Line-driven session: each line holds the environment's tells for one
//! time-unit, separated by commas. A blank line is an empty store.

use std::io::{self, BufRead, Write};

use ntccrt::dsl::{parse_cond_list, ModelAst};
use ntccrt::engine::{Engine, EngineConfig, OutValue, UnitStatus};

fn show(v: &OutValue) -> String {
    match v {
        OutValue::Int(i) => i.to_string(),
        OutValue::Set(items) => {
            let parts: Vec<String> = items.iter().map(i64::to_string).collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

/// Runs a session until end of input or `:quit`. Lines that do not parse,
/// or that mention unknown names, are rejected without consuming a unit.
/// Inconsistent units are reported and the session goes on.
pub fn repl<R: BufRead, W: Write>(
    model: &ModelAst,
    mut config: EngineConfig,
    input: R,
    out: &mut W,
) -> io::Result<()> {
    config.continue_on_fail = true;
    let mut engine = match Engine::new(model, config) {
        Ok(e) => e,
        Err(e) => return writeln!(out, "error: {e}"),
    };
    let mut lines = input.lines();
    loop {
        write!(out, "unit {}> ", engine.unit() + 1)?;
        out.flush()?;
        let Some(line) = lines.next() else {
            writeln!(out)?;
            return Ok(());
        };
        let line = line?;
        let line = line.trim();
        if line == ":quit" || line == ":q" {
            return Ok(());
        }
        let conds = match parse_cond_list(line) {
            Ok(c) => c,
            Err(e) => {
                writeln!(out, "error: column {}: expected {}, found {}", e.column, e.expected, e.found)?;
                continue;
            }
        };
        if let Err(e) = engine.check_env(&conds) {
            writeln!(out, "error: {e}")?;
            continue;
        }
        let tells: Vec<(String, _)> = conds.into_iter().map(|c| (c.to_string(), c)).collect();
        match engine.run_time_unit(&tells) {
            Ok(rec) => {
                if rec.status == UnitStatus::Failed {
                    writeln!(out, "  inconsistent store; unit {} discarded", rec.unit)?;
                } else if rec.outputs.is_empty() {
                    writeln!(out, "  (no outputs)")?;
                }
                if rec.status == UnitStatus::Ok {
                    for (k, v) in &rec.outputs {
                        writeln!(out, "  {k} = {}", show(v))?;
                    }
                }
            }
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
}
