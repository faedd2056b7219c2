use nrc_core::{typecheck_closed, Type};
use nrc_corpus::{corpus_signature, fixture, generate_corpus, CorpusSpec, Shape};
use nrc_semantics::KValue;
use nrcq::oracle::has_nested_collection;
use nrcq::*;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command as Proc;

fn builtin(query: Option<&str>, options: RunOptions) -> Workspace {
    let paths = Paths { query: query.map(PathBuf::from), ..Paths::default() };
    load_workspace(&paths, options).unwrap()
}

fn run(query: &str, command: Command, options: RunOptions) -> CommandOutput {
    run_command(&builtin(Some(query), options), command)
}

fn json_rows(out: &str) -> Vec<Value> {
    out.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

/// Writes the fixture files into a fresh directory.
fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in fixture::FILES {
        std::fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn load_from(dir: &Path, query: Option<&str>) -> Result<Workspace, StageError> {
    let paths = Paths { data: Some(dir.to_path_buf()), query: query.map(|q| dir.join(q)), ..Paths::default() };
    load_workspace(&paths, RunOptions::default())
}

#[test]
fn fixture_has_a_duplicated_prescription() {
    let ws = builtin(None, RunOptions::default());
    let pres = &ws.store["Pres"];
    let rec = KValue::record([("cid".to_string(), KValue::int(1)), ("did".to_string(), KValue::int(1))]);
    assert_eq!(pres.get(&rec), Some(&2));
    assert_eq!(pres.values().sum::<u64>(), 4);
}

#[test]
fn fixture_directory_matches_builtin() {
    let dir = fixture_dir();
    let ws = load_from(dir.path(), Some("q0.nrc")).unwrap();
    let b = builtin(Some("q0.nrc"), RunOptions::default());
    assert_eq!(ws.store, b.store);
    assert_eq!(ws.signature, b.signature);
    assert_eq!(run_command(&ws, Command::Run), run_command(&b, Command::Run));
}

#[test]
fn wrong_arity_row_names_the_row() {
    let dir = fixture_dir();
    std::fs::write(dir.path().join("Drug.csv"), "did,drug\n1,adderall\n2\n").unwrap();
    let e = load_from(dir.path(), None).unwrap_err();
    assert_eq!(e.stage, "data");
    assert!(e.message.contains("Drug") && e.message.contains("row 2"), "{}", e);
}

#[test]
fn empty_table_file_is_an_empty_bag() {
    let dir = fixture_dir();
    std::fs::write(dir.path().join("Drug.csv"), "").unwrap();
    std::fs::write(dir.path().join("all.nrc"), "for (d <- Drug) [d]").unwrap();
    let ws = load_from(dir.path(), Some("all.nrc")).unwrap();
    assert!(ws.store["Drug"].is_empty());
    let out = run_command(&ws, Command::Run);
    assert_eq!((out.code, out.stdout.as_str()), (0, ""));
}

#[test]
fn field_level_diagnostics() {
    let dir = fixture_dir();
    std::fs::write(dir.path().join("Cand.csv"), "cid,name\nx,DJT\n").unwrap();
    let e = load_from(dir.path(), None).unwrap_err();
    assert!(e.message.contains("cid") && e.message.contains("Int"), "{}", e);

    let dir = fixture_dir();
    std::fs::write(dir.path().join("Cand.csv"), "cid,nam\n1,DJT\n").unwrap();
    let e = load_from(dir.path(), None).unwrap_err();
    assert!(e.message.contains("nam"), "{}", e);

    let dir = fixture_dir();
    std::fs::write(dir.path().join("Extra.csv"), "a\n1\n").unwrap();
    let e = load_from(dir.path(), None).unwrap_err();
    assert!(e.message.contains("Extra"), "{}", e);

    let dir = fixture_dir();
    std::fs::remove_file(dir.path().join("Pres.csv")).unwrap();
    assert!(load_from(dir.path(), None).unwrap_err().message.contains("Pres"));
}

#[test]
fn json_table_files_load() {
    let dir = fixture_dir();
    std::fs::remove_file(dir.path().join("Drug.csv")).unwrap();
    std::fs::write(
        dir.path().join("Drug.json"),
        r#"[{"did":1,"drug":"adderall"},{"did":2,"drug":"hydrochloroquine"},{"did":3,"drug":"caffeine"}]"#,
    )
    .unwrap();
    assert_eq!(load_from(dir.path(), None).unwrap().store, fixture::store());
}

#[test]
fn run_q0_reports_the_duplicate() {
    let out = run("examples/q0.nrc", Command::Run, RunOptions::default());
    assert_eq!(out.code, 0, "{}", out.stderr);
    let rows = json_rows(&out.stdout);
    assert!(rows.contains(&json!({"name": "DJT", "drug": "adderall", "__count": 2})));
    assert_eq!(rows.len(), 3);
}

#[test]
fn engines_agree_on_fixture_queries() {
    for q in ["q0.nrc", "q1.nrc", "q2.nrc"] {
        let eval = run(q, Command::Run, RunOptions::default());
        for opts in [
            RunOptions { engine: EngineArg::Sqlexec, ..RunOptions::default() },
            RunOptions { engine: EngineArg::Sqlexec, keep_lateral: true, ..RunOptions::default() },
            RunOptions { nested: true, ..RunOptions::default() },
            RunOptions { nested: true, engine: EngineArg::Sqlexec, ..RunOptions::default() },
        ] {
            let out = run(q, Command::Run, opts.clone());
            assert_eq!(out.code, 0, "{} {:?}: {}", q, opts, out.stderr);
            assert_eq!(out.stdout, eval.stdout, "{} {:?}", q, opts);
        }
    }
}

#[test]
fn run_q1_has_one_row_per_candidate_drug() {
    let out = run("q1.nrc", Command::Run, RunOptions { engine: EngineArg::Sqlexec, ..RunOptions::default() });
    let rows = json_rows(&out.stdout);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["__count"] == 1));
}

#[test]
fn run_nested_q2() {
    let out = run("q2.nrc", Command::Run, RunOptions { nested: true, ..RunOptions::default() });
    let rows = json_rows(&out.stdout);
    assert!(rows.contains(&json!({"name": "DJT", "drugs": ["adderall", "hydrochloroquine"], "__count": 1})));
    assert!(rows.contains(&json!({"name": "ABC", "drugs": [], "__count": 1})));
}

// Frozen after checking that executing it reproduces eval(Q1).
const Q1_SQL: &str = "SELECT c.name AS name, p_g2.out AS drug FROM Cand AS c, \
(SELECT DISTINCT c2.cid AS k1_cid, c2.name AS k1_name, d.drug AS out \
FROM (SELECT DISTINCT * FROM Cand) AS c2, (SELECT DISTINCT * FROM Pres) AS p, (SELECT DISTINCT * FROM Drug) AS d \
WHERE ((c2.cid = p.cid) AND (p.did = d.did))) AS p_g2 \
WHERE ((p_g2.k1_cid = c.cid) AND (p_g2.k1_name = c.name))\n";

#[test]
fn sql_q1_is_lateral_free() {
    let out = run("examples/q1.nrc", Command::Sql, RunOptions::default());
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(!out.stdout.contains("LATERAL"));
    assert_eq!(out.stdout, Q1_SQL);
}

#[test]
fn sql_q1_keep_lateral() {
    let out = run(
        "q1.nrc",
        Command::Sql,
        RunOptions { keep_lateral: true, dialect: DialectArg::Postgres, ..RunOptions::default() },
    );
    assert!(out.stdout.contains("LATERAL (SELECT DISTINCT"), "{}", out.stdout);
    let out = run(
        "q1.nrc",
        Command::Sql,
        RunOptions { keep_lateral: true, dialect: DialectArg::Sqlite, ..RunOptions::default() },
    );
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("sql:") && out.stderr.contains("LATERAL"), "{}", out.stderr);
}

#[test]
fn sql_rejects_nested_results() {
    let out = run("q2.nrc", Command::Sql, RunOptions::default());
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("shred"), "{}", out.stderr);
}

#[test]
fn check_reports_types_and_errors() {
    let out = run("q2.nrc", Command::Check, RunOptions::default());
    assert_eq!((out.code, out.stdout.as_str()), (0, "[(drugs: {String}, name: String)]\n"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nrc");
    std::fs::write(&bad, "for (c <- Cand) [c.cid + c.name]").unwrap();
    let ws = load_workspace(&Paths { query: Some(bad), ..Paths::default() }, RunOptions::default()).unwrap();
    let out = run_command(&ws, Command::Check);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("error: typecheck:"), "{}", out.stderr);

    std::fs::write(dir.path().join("bad.nrc"), "for (c <- ").unwrap();
    let ws =
        load_workspace(&Paths { query: Some(dir.path().join("bad.nrc")), ..Paths::default() }, RunOptions::default())
            .unwrap();
    assert!(run_command(&ws, Command::Check).stderr.starts_with("error: parse:"));
}

#[test]
fn normalize_and_trace() {
    let out = run("q1.nrc", Command::Normalize, RunOptions { trace: true, ..RunOptions::default() });
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("for (c <- Cand, d <- promote(forset"), "{}", out.stdout);
    let steps: Vec<&str> = out.stderr.lines().collect();
    assert!(!steps.is_empty());
    assert!(steps.last().unwrap().ends_with(out.stdout.trim_end()));
    assert!(run("q1.nrc", Command::Normalize, RunOptions::default()).stderr.is_empty());
}

#[test]
fn delateralize_output() {
    let out = run("q1.nrc", Command::Delateralize, RunOptions { trace: true, ..RunOptions::default() });
    assert!(out.stderr.ends_with("metric: 1 -> 0\n"), "{}", out.stderr);
    let kept = run("q1.nrc", Command::Delateralize, RunOptions { keep_lateral: true, ..RunOptions::default() });
    assert_eq!(kept.stdout, run("q1.nrc", Command::Normalize, RunOptions::default()).stdout);
}

#[test]
fn shred_prints_entries_and_sql() {
    let out = run("q2.nrc", Command::Shred, RunOptions::default());
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "query: phi1 @ ()");
    for prefix in [
        "phi2: graph",
        "phi2 (flat): ",
        "phi2 (sql): SELECT DISTINCT",
        "phi1: graph",
        "phi1 (flat): ",
        "phi1 (sql): SELECT",
    ] {
        assert!(lines.iter().any(|l| l.starts_with(prefix)), "missing {}", prefix);
    }
}

#[test]
fn commands_are_deterministic() {
    for q in ["q0.nrc", "q1.nrc", "q2.nrc"] {
        for c in [Command::Check, Command::Normalize, Command::Delateralize, Command::Sql, Command::Shred, Command::Run]
        {
            let opts = RunOptions { trace: true, ..RunOptions::default() };
            assert_eq!(run(q, c, opts.clone()), run(q, c, opts), "{} {:?}", q, c);
        }
    }
}

#[test]
fn missing_inputs() {
    let e = load_workspace(&Paths { query: Some("nope.nrc".into()), ..Paths::default() }, RunOptions::default())
        .unwrap_err();
    assert_eq!(e.stage, "query");
    let out = run_command(&builtin(None, RunOptions::default()), Command::Run);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("no query file"));
}

#[test]
fn corpus_test_passes_on_a_small_corpus() {
    let ws = builtin(None, RunOptions { seed: 5, count: 40, ..RunOptions::default() });
    let out = run_command(&ws, Command::CorpusTest);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(out.stdout.lines().filter(|l| l.starts_with("ok")).count(), 4);
}

#[test]
fn binary_exit_codes_and_budget() {
    let bin = env!("CARGO_BIN_EXE_nrcq");
    let ok = Proc::new(bin).args(["run", "q0.nrc"]).output().unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains(r#""__count":2"#));

    let starved = Proc::new(bin).args(["normalize", "q1.nrc"]).env("NRCQ_STEP_BUDGET", "1").output().unwrap();
    assert_eq!(starved.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&starved.stderr).contains("normalize: step budget"));

    let usage = Proc::new(bin).args(["frobnicate"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn nested_predicate_matches_the_corpus_shape() {
    let sig = corpus_signature();
    let spec = CorpusSpec { seed: 1, count: 50, shape: Shape::Nested, ..CorpusSpec::default() };
    let nested = generate_corpus(&spec)
        .iter()
        .filter(|t| typecheck_closed(t, &sig).is_ok_and(|ty: Type| has_nested_collection(&ty)))
        .count();
    assert!(nested >= 25, "{}", nested);
}
