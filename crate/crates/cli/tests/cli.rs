use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ntccrt::engine::{run, EngineConfig, Trace, UnitStatus};
use ntccrt::events::EventStream;
use ntccrt::models::load_builtin;
use ntccrt_cli::{bench, repl, EXIT_OK, EXIT_RUNTIME, EXIT_STATIC};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn ntccrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntccrt"))
        .args(args)
        .current_dir(root())
        .env_remove("NTCCRT_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_chord_writes_trace_to_stdout() {
    let o = ntccrt(&["run", "models/chord.ntcc", "--units", "3"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let t = Trace::from_jsonl(&stdout(&o)).unwrap();
    let ps: Vec<_> = t.records.iter().map(|r| r.output("pitch")).collect();
    assert_eq!(ps, [Some(60), Some(64), Some(67)]);
}

#[test]
fn builtin_names_resolve() {
    let o = ntccrt(&["run", "chord", "--units", "1"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(stdout(&o).contains("\"pitch\":60"));
}

#[test]
fn units_default_to_last_input_unit() {
    let o = ntccrt(&["run", "factorial", "--input", "models/inputs/factorial.jsonl"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let t = Trace::from_jsonl(&stdout(&o)).unwrap();
    assert_eq!(t.len(), 5);
    assert_eq!(t.records[4].output("fact"), Some(120));
}

#[test]
fn inconsistent_input_exits_2_with_unit() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.jsonl");
    std::fs::write(
        &input,
        "{\"unit\":1,\"tells\":[\"input[1] = 1\"]}\n{\"unit\":3,\"tells\":[\"end[1] = 1\",\"end[1] = 0\"]}\n",
    )
    .unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = ntccrt(&[
        "run",
        "filters",
        "--input",
        input.to_str().unwrap(),
        "--units",
        "5",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_RUNTIME));
    assert!(stderr(&o).contains("unit 3"), "{}", stderr(&o));
    let t = Trace::from_jsonl(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t.len(), 3);
    assert_eq!(t.records[2].status, UnitStatus::Failed);

    let o = ntccrt(&[
        "run",
        "filters",
        "--input",
        input.to_str().unwrap(),
        "--units",
        "5",
        "--continue-on-fail",
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(Trace::from_jsonl(&stdout(&o)).unwrap().len(), 5);
}

#[test]
fn seed_comes_from_environment() {
    let args = ["run", "ccfomi", "--input", "models/inputs/ccfomi_player.jsonl", "--units", "40"];
    let with_flag = ntccrt(&[&args[..], &["--seed", "9"]].concat());
    let with_env = Command::new(env!("CARGO_BIN_EXE_ntccrt"))
        .args(args)
        .current_dir(root())
        .env("NTCCRT_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn bad_star_policy_is_a_usage_error() {
    let o = ntccrt(&["run", "chord", "--star-policy", "uniform:2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("star policy"));
}

#[test]
fn check_reports_codes() {
    let o = ntccrt(&["check", "models/ccfomi.ntcc"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));

    let o = ntccrt(&["check", "models/negative/unguarded_recursion.ntcc", "--json"]);
    assert_eq!(o.status.code(), Some(EXIT_STATIC));
    let diags: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(diags[0]["code"], "RecursionNotGuarded");
    assert_eq!(diags[0]["definition"], "LOOP");

    let o = ntccrt(&["check", "models/negative/parse_error.ntcc"]);
    assert_eq!(o.status.code(), Some(EXIT_STATIC));
    assert!(stderr(&o).contains("models/negative/parse_error.ntcc:3:"), "{}", stderr(&o));

    let o = ntccrt(&["check", "models/missing.ntcc", "--json"]);
    assert_eq!(o.status.code(), Some(EXIT_STATIC));
    assert!(stdout(&o).contains("FileError"));
}

#[test]
fn bench_reports_stats() {
    let o = ntccrt(&["bench", "chord", "--units", "3", "--json"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let stats: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats["units"], 3);
    assert!(stats["mean_ms"].as_f64().unwrap() < 30.0);
}

#[test]
fn bench_trace_matches_run() {
    let m = load_builtin("filters").unwrap();
    let mut ev = EventStream::new();
    ev.push(1, "input[2] = 1").unwrap();
    ev.push(4, "end[2] = 1").unwrap();
    let (stats, trace) = bench(&m, &ev, 8, EngineConfig::with_seed(3)).unwrap();
    assert_eq!(stats.units, 8);
    assert_eq!(stats.processes, trace.records.iter().map(|r| r.processes).collect::<Vec<_>>());
    assert_eq!(run(&m, &ev, 8, EngineConfig::with_seed(3)).trace, trace);
}

#[test]
fn oracle_dump_text_and_json() {
    let o = ntccrt(&["oracle", "dump", "0,1,1", "--alphabet", "0..1"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert_eq!(stdout(&o), "0 -1 0->1 1->2\n1 0 1->2\n2 0 1->3\n3 2 \n");
    let o = ntccrt(&["oracle", "dump", "5", "--json"]);
    assert_eq!(stdout(&o), "{\"outgoing\":{\"5\":1},\"state\":0,\"suffix\":-1}\n{\"outgoing\":{},\"state\":1,\"suffix\":0}\n");
    let o = ntccrt(&["oracle", "dump", "300"]);
    assert_eq!(o.status.code(), Some(EXIT_STATIC));
}

#[test]
fn oracle_dump_from_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let o = ntccrt(&[
        "run",
        "ccfomi",
        "--input",
        "models/inputs/ccfomi_player.jsonl",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let o = ntccrt(&["oracle", "dump", "--from-trace", trace.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 21);
}

fn session(model: &str, input: &str) -> String {
    let m = load_builtin(model).unwrap();
    let mut out = Vec::new();
    repl(&m, EngineConfig::with_seed(1), Cursor::new(input), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn repl_chord_blank_lines() {
    let out = session("chord", "\n\n\n\n");
    assert_eq!(
        out,
        "unit 1>   pitch = 60\nunit 2>   pitch = 64\nunit 3>   pitch = 67\nunit 4>   (no outputs)\nunit 5> \n"
    );
}

#[test]
fn repl_rejects_garbage_without_consuming_a_unit() {
    let out = session("chord", "garbage\nvolume = 3\n\n:quit\n\n");
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("unit 1> error:"), "{out}");
    assert!(lines[1].starts_with("unit 1> error:") && lines[1].contains("volume"), "{out}");
    assert_eq!(lines[2], "unit 1>   pitch = 60");
    assert_eq!(lines.len(), 4);
}

#[test]
fn repl_ccfomi_learns_then_improvises() {
    let notes = [60, 62, 64, 60, 62, 64];
    let mut script = String::new();
    for (i, n) in notes.iter().enumerate() {
        script.push_str(&format!("note={n}, go>={}\n", i + 1));
    }
    script.push_str("\n\n\n");
    let out = session("ccfomi", &script);
    let first = out.lines().position(|l| l.contains("out_note")).expect(&out);
    assert!(first >= 4, "{out}");
    assert!(out.lines().nth(first).unwrap().starts_with("unit 5>"), "{out}");
}

#[test]
fn repl_reports_inconsistent_unit_and_continues() {
    let out = session("chord", "\npitch = 1\n\n\n");
    assert!(out.contains("unit 2>   inconsistent store; unit 2"), "{out}");
    assert!(out.contains("unit 3>   pitch = 64"), "{out}");
    assert!(out.contains("unit 4>   pitch = 67"), "{out}");
}

// ----- golden traces --------------------------------------------------------

fn golden(name: &str, model: &str, input: Option<&str>, units: u64, seed: u64) {
    let m = load_builtin(model).unwrap();
    let ev = match input {
        Some(p) => EventStream::from_jsonl(&std::fs::read_to_string(root().join(p)).unwrap()).unwrap(),
        None => EventStream::new(),
    };
    let out = run(&m, &ev, units, EngineConfig::with_seed(seed));
    assert!(out.error.is_none());
    let text = out.trace.to_jsonl();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/{name}.jsonl"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("{} missing; rerun with UPDATE_GOLDEN=1", path.display()));
    assert!(want == text, "{name} differs from {}", path.display());
}

#[test]
fn golden_chord() {
    golden("chord_seed0", "chord", None, 4, 0);
}

#[test]
fn golden_factorial() {
    golden("factorial_seed0", "factorial", Some("models/inputs/factorial.jsonl"), 5, 0);
}

#[test]
fn golden_ccfomi() {
    golden("ccfomi_seed7", "ccfomi", Some("models/inputs/ccfomi_player.jsonl"), 30, 7);
}

#[test]
fn golden_filters() {
    golden("filters_seed3", "filters", Some("crates/cli/tests/golden/filters_input.jsonl"), 30, 3);
}
