//! `nrcq`: command-line front end over the query pipeline.

pub mod oracle;

use clap::{Parser, ValueEnum};
use nrc_core::{parse, pretty, typecheck_closed, Ctx, Fresh, ParseError, Signature, Term, Type};
use nrc_corpus::fixture;
use nrc_delateral::delateralize_with;
use nrc_normalize::{normalize_with, Options};
use nrc_semantics::{eval, json_lines, load_dir, Env, KValue, Store};
use nrc_shred::{compile_flat, shred_closed, shred_pipeline, Engine};
use nrc_sql::{decode, exec_sql, flatten_records, print_sql, to_sql, Dialect};
use oracle::{has_nested_collection, run_stage, stage_spec, Stage};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    Normalize,
    Delateralize,
    Sql,
    Shred,
    Run,
    CorpusTest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum DialectArg {
    #[default]
    Generic,
    Sqlite,
    Postgres,
}

impl From<DialectArg> for Dialect {
    fn from(d: DialectArg) -> Dialect {
        match d {
            DialectArg::Generic => Dialect::Generic,
            DialectArg::Sqlite => Dialect::Sqlite,
            DialectArg::Postgres => Dialect::Postgres,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    #[default]
    Eval,
    Sqlexec,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "nrcq", version, about = "Normalize, delateralize, shred and run nested relational queries")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Query file. Names of the built-in fixture queries (q0.nrc, q1.nrc,
    /// q2.nrc) resolve to the fixture when no such file exists.
    pub file: Option<PathBuf>,
    /// Schema JSON. Defaults to `<data>/schema.json`, or the built-in fixture.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Directory of `<Table>.csv` or `<Table>.json` files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub dialect: DialectArg,
    #[arg(long, value_enum, default_value_t)]
    pub engine: EngineArg,
    /// Corpus seed for `corpus-test`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corpus size per stage for `corpus-test`.
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    /// Print rewrite steps to standard error.
    #[arg(long)]
    pub trace: bool,
    /// Skip delateralization, so SQL may contain LATERAL.
    #[arg(long)]
    pub keep_lateral: bool,
    /// Run through shredding and stitching.
    #[arg(long)]
    pub nested: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub dialect: DialectArg,
    pub engine: EngineArg,
    pub keep_lateral: bool,
    pub trace: bool,
    pub nested: bool,
    pub seed: u64,
    pub count: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Paths {
    pub schema: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub query: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    pub paths: Paths,
    pub signature: Signature,
    pub store: Store,
    /// Query source text, if a query file was given.
    pub query: Option<String>,
    pub options: RunOptions,
}

/// A failure tagged with the pipeline stage that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

fn fail<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> StageError {
    move |e| StageError { stage, message: e.to_string() }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Cli {
    pub fn paths(&self) -> Paths {
        Paths { schema: self.schema.clone(), data: self.data.clone(), query: self.file.clone() }
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            dialect: self.dialect,
            engine: self.engine,
            keep_lateral: self.keep_lateral,
            trace: self.trace,
            nested: self.nested,
            seed: self.seed,
            count: self.count,
        }
    }
}

fn read(path: &Path, stage: &'static str) -> Result<String, StageError> {
    std::fs::read_to_string(path).map_err(|e| StageError { stage, message: format!("{}: {}", path.display(), e) })
}

fn fixture_file(path: &Path) -> Option<&'static str> {
    let name = path.file_name()?.to_str()?;
    fixture::FILES.iter().find(|(f, _)| *f == name && f.ends_with(".nrc")).map(|(_, text)| *text)
}

/// Loads and validates the schema, table data and query source.
pub fn load_workspace(paths: &Paths, options: RunOptions) -> Result<Workspace, StageError> {
    let schema_path = paths.schema.clone().or_else(|| {
        let p = paths.data.as_ref()?.join("schema.json");
        p.exists().then_some(p)
    });
    let signature = match (&schema_path, &paths.data) {
        (Some(p), _) => Signature::from_json(&read(p, "schema")?).map_err(fail("schema"))?,
        (None, None) => fixture::signature(),
        (None, Some(d)) => {
            return Err(StageError {
                stage: "schema",
                message: format!("no --schema given and {} has no schema.json", d.display()),
            })
        }
    };
    let store = match (&paths.data, &schema_path) {
        (Some(d), _) => {
            check_table_files(&signature, d)?;
            load_dir(&signature, d).map_err(fail("data"))?
        }
        (None, None) => fixture::store(),
        (None, Some(_)) => signature.tables.keys().map(|t| (t.clone(), BTreeMap::new())).collect(),
    };
    let query = match &paths.query {
        None => None,
        Some(p) if p.exists() => Some(read(p, "query")?),
        Some(p) => Some(
            fixture_file(p)
                .filter(|_| schema_path.is_none() && paths.data.is_none())
                .map(str::to_string)
                .ok_or_else(|| StageError { stage: "query", message: format!("{}: no such file", p.display()) })?,
        ),
    };
    Ok(Workspace { paths: paths.clone(), signature, store, query, options })
}

/// Table files in the data directory must be declared in the schema.
fn check_table_files(sig: &Signature, dir: &Path) -> Result<(), StageError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| StageError { stage: "data", message: format!("{}: {}", dir.display(), e) })?;
    let mut unknown: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            let ext = p.extension()?.to_str()?;
            let stem = p.file_stem()?.to_str()?.to_string();
            (ext == "csv" || (ext == "json" && stem != "schema")).then_some(stem)
        })
        .filter(|t| !sig.tables.contains_key(t))
        .collect();
    unknown.sort();
    match unknown.first() {
        None => Ok(()),
        Some(t) => Err(StageError { stage: "data", message: format!("{}: table file not declared in the schema", t) }),
    }
}

/// Runs `command` and collects its output. Never panics on user input.
pub fn run_command(ws: &Workspace, command: Command) -> CommandOutput {
    let mut err = String::new();
    match dispatch(ws, command, &mut err) {
        Ok((code, out)) => CommandOutput { code, stdout: out, stderr: err },
        Err(e) => {
            err.push_str(&format!("error: {}\n", e));
            CommandOutput { code: 1, stdout: String::new(), stderr: err }
        }
    }
}

/// Parses arguments, loads the workspace and runs the command.
pub fn run_cli(cli: &Cli) -> CommandOutput {
    match load_workspace(&cli.paths(), cli.options()) {
        Ok(ws) => run_command(&ws, cli.command),
        Err(e) => CommandOutput { code: 1, stdout: String::new(), stderr: format!("error: {}\n", e) },
    }
}

fn dispatch(ws: &Workspace, command: Command, err: &mut String) -> Result<(i32, String), StageError> {
    if command == Command::CorpusTest {
        return Ok(corpus_test(&ws.options));
    }
    let sig = &ws.signature;
    let t = ws.parse()?;
    let ty = typecheck_closed(&t, sig).map_err(fail("typecheck"))?;
    let out = match command {
        Command::Check => format!("{}\n", ty),
        Command::Normalize => format!("{}\n", pretty(&ws.normalize(&t, err)?)),
        Command::Delateralize => {
            let n = ws.normalize(&t, err)?;
            format!("{}\n", pretty(&ws.delateralize(&n, err)?))
        }
        Command::Sql => {
            if has_nested_collection(&ty) {
                return Err(StageError {
                    stage: "sql",
                    message: format!("result type {} has nested collections; use `nrcq shred`", ty),
                });
            }
            format!("{}\n", ws.sql_text(&t, err)?)
        }
        Command::Shred => ws.shred_report(&t)?,
        Command::Run => lines(&ws.run(&t, &ty, err)?),
        Command::CorpusTest => unreachable!(),
    };
    Ok((0, out))
}

fn lines(v: &KValue) -> String {
    json_lines(v).into_iter().map(|l| l + "\n").collect()
}

impl Workspace {
    pub fn parse(&self) -> Result<Term, StageError> {
        let src = self
            .query
            .as_deref()
            .ok_or_else(|| StageError { stage: "query", message: "no query file given".into() })?;
        parse(src, &self.signature).map_err(|e| {
            let stage = if matches!(e, ParseError::Type { .. }) { "typecheck" } else { "parse" };
            StageError { stage, message: e.to_string() }
        })
    }

    fn normalize(&self, t: &Term, err: &mut String) -> Result<Term, StageError> {
        let opts = Options { trace: self.options.trace, ..Options::default() };
        let out = normalize_with(t, &Ctx::new(), &self.signature, &opts, &mut Fresh::avoiding(t))
            .map_err(fail("normalize"))?;
        for (i, s) in out.trace.iter().enumerate() {
            err.push_str(&format!("{:>4} {}: {}\n", i + 1, s.rule, pretty(&s.result)));
        }
        Ok(out.term)
    }

    /// Identity under `--keep-lateral`.
    fn delateralize(&self, n: &Term, err: &mut String) -> Result<Term, StageError> {
        if self.options.keep_lateral {
            return Ok(n.clone());
        }
        let out = delateralize_with(n, &self.signature, &Options::default(), &mut Fresh::avoiding(n))
            .map_err(fail("delateralize"))?;
        if self.options.trace {
            let ms: Vec<String> = out.metrics.iter().map(|m| m.to_string()).collect();
            err.push_str(&format!("metric: {}\n", ms.join(" -> ")));
        }
        Ok(out.term)
    }

    /// Flat query (nested records allowed) compiled to SQL text.
    fn sql_text(&self, t: &Term, err: &mut String) -> Result<String, StageError> {
        let (flat, _) = flatten_records(t, &self.signature).map_err(fail("sql"))?;
        let n = self.normalize(&flat, err)?;
        let d = self.delateralize(&n, err)?;
        let q = to_sql(&d, &self.signature).map_err(fail("sql"))?;
        print_sql(&q, self.options.dialect.into()).map_err(fail("sql"))
    }

    fn run(&self, t: &Term, ty: &Type, err: &mut String) -> Result<KValue, StageError> {
        let flat = ty.elem().is_some_and(|e| e.is_record_tree());
        let engine = match self.options.engine {
            EngineArg::Eval => Engine::Eval,
            EngineArg::Sqlexec => Engine::Sql,
        };
        if self.options.nested || (engine == Engine::Sql && !flat) {
            return shred_pipeline(t, &self.signature, &self.store, engine).map_err(fail("shred"));
        }
        if engine == Engine::Eval {
            return eval(t, &Env::new(self.store.clone())).map_err(fail("eval"));
        }
        let sig = &self.signature;
        let (f, shape) = flatten_records(t, sig).map_err(fail("sql"))?;
        let fty = typecheck_closed(&f, sig).map_err(fail("typecheck"))?;
        let n = self.normalize(&f, err)?;
        let d = self.delateralize(&n, err)?;
        let q = to_sql(&d, sig).map_err(fail("sql"))?;
        let rows = exec_sql(&q, &self.store).and_then(|r| decode(&r, &fty)).map_err(fail("exec"))?;
        shape.decode(&rows).map_err(fail("exec"))
    }

    fn shred_report(&self, t: &Term) -> Result<String, StageError> {
        let sig = &self.signature;
        let s = shred_closed(t, sig).map_err(fail("shred"))?;
        let mut out = format!("query: {}\nquery (flat): {}\n", pretty(&s.term), pretty(&s.flat_term));
        for (phi, flat) in &s.flat_env {
            let entry = s
                .env
                .lookup(phi)
                .ok_or_else(|| StageError { stage: "shred", message: format!("no entry for {}", phi) })?;
            out.push_str(&format!("{}: {}\n{} (flat): {}\n", phi, pretty(entry), phi, pretty(flat)));
            let compiled = if self.options.keep_lateral {
                nrc_normalize::normalize(flat, sig).map_err(fail("normalize"))?
            } else {
                compile_flat(flat, sig).map_err(fail("shred"))?
            };
            let q = to_sql(&compiled, sig).map_err(fail("sql"))?;
            out.push_str(&format!(
                "{} (sql): {}\n",
                phi,
                print_sql(&q, self.options.dialect.into()).map_err(fail("sql"))?
            ));
        }
        Ok(out)
    }
}

/// Runs every stage's cross-oracle check. Exit 1 on the first counterexample.
fn corpus_test(opts: &RunOptions) -> (i32, String) {
    let mut out = String::new();
    for stage in Stage::ALL {
        let r = run_stage(stage, &stage_spec(stage, opts.seed, opts.count));
        match &r.failure {
            None => out.push_str(&format!("ok   {:<14} {} terms checked\n", stage.name(), r.checked)),
            Some(c) => {
                out.push_str(&format!("FAIL {:<14} after {} terms\n{}\n", stage.name(), r.checked, c));
                return (1, out);
            }
        }
    }
    (0, out)
}
