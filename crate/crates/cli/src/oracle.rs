//! Cross-oracle checks over generated corpora, shared by `corpus-test` and
//! the acceptance suite.

use nrc_core::{pretty, typecheck_closed, Fresh, Signature, Term, Type};
use nrc_corpus::{corpus_signature, generate_corpus, generate_store, shrink, CorpusSpec, Shape};
use nrc_delateral::{delateralize_with, metric, occurrences};
use nrc_normalize::{is_normal_form, normalize, Options};
use nrc_semantics::{eval, Env, KValue, Store};
use nrc_shred::{shred_closed, shred_pipeline, substitute_env, typecheck_env, Engine};
use nrc_sql::{decode, exec_sql, print_sql, to_sql, Dialect};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Normalizer,
    Delateralizer,
    Sql,
    Shredder,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Normalizer, Stage::Delateralizer, Stage::Sql, Stage::Shredder];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Normalizer => "normalizer",
            Stage::Delateralizer => "delateralizer",
            Stage::Sql => "sql-backend",
            Stage::Shredder => "shredder",
        }
    }

    /// The corpus shape each stage is exercised on.
    pub fn shape(self) -> Shape {
        match self {
            Stage::Normalizer => Shape::Any,
            Stage::Delateralizer | Stage::Sql => Shape::Flat,
            Stage::Shredder => Shape::Nested,
        }
    }

    /// Whether `ty` is in the stage's domain.
    pub fn applies(self, ty: &Type) -> bool {
        match self {
            Stage::Normalizer => true,
            Stage::Delateralizer | Stage::Sql => ty.is_flat_collection(),
            Stage::Shredder => has_nested_collection(ty),
        }
    }

    /// A description of how `t` breaks the stage's invariants, if it does.
    pub fn violation(self, t: &Term, store_seed: u64) -> Option<String> {
        let sig = corpus_signature();
        let ty = typecheck_closed(t, &sig).ok()?;
        if !self.applies(&ty) {
            return None;
        }
        let store = generate_store(store_seed, 3, 4);
        let expected = eval(t, &Env::new(store.clone())).ok()?;
        match self {
            Stage::Normalizer => normalizer(t, &sig, &store, &expected),
            Stage::Delateralizer => delateralizer(t, &sig, &store, &expected),
            Stage::Sql => sql(t, &sig, &ty, &store, &expected),
            Stage::Shredder => shredder(t, &sig, &store, &expected),
        }
    }
}

pub fn has_nested_collection(ty: &Type) -> bool {
    match ty {
        Type::Set(e) | Type::Bag(e) => e.has_collection(),
        Type::Record(fs) => fs.iter().any(|(_, t)| t.has_collection()),
        _ => false,
    }
}

fn normalizer(t: &Term, sig: &Signature, store: &Store, expected: &KValue) -> Option<String> {
    let n = match normalize(t, sig) {
        Ok(n) => n,
        Err(e) => return Some(format!("normalize failed: {}", e)),
    };
    match eval(&n, &Env::new(store.clone())) {
        Ok(v) if v == *expected => {}
        other => return Some(format!("normal form {} evaluates to {:?}, expected {}", pretty(&n), other, expected)),
    }
    if let Err(e) = is_normal_form(&n, sig) {
        return Some(format!("output is not a normal form: {}", e));
    }
    match normalize(&n, sig) {
        Ok(n2) if nrc_core::alpha_eq(&n, &n2) => None,
        Ok(n2) => Some(format!("not idempotent: {} became {}", pretty(&n), pretty(&n2))),
        Err(e) => Some(format!("renormalizing failed: {}", e)),
    }
}

fn delateralizer(t: &Term, sig: &Signature, store: &Store, expected: &KValue) -> Option<String> {
    let n = normalize(t, sig).ok()?;
    let out = match delateralize_with(&n, sig, &Options::default(), &mut Fresh::avoiding(&n)) {
        Ok(o) => o,
        Err(e) => return Some(format!("delateralize failed: {}", e)),
    };
    if !out.metrics.windows(2).all(|w| w[1] < w[0]) || out.metrics.last() != Some(&0) {
        return Some(format!("metrics {:?} do not decrease to 0", out.metrics));
    }
    if metric(&out.term) != 0 || !occurrences(&out.term).is_empty() {
        return Some(format!("lateral occurrences remain in {}", pretty(&out.term)));
    }
    match eval(&out.term, &Env::new(store.clone())) {
        Ok(v) if v == *expected => None,
        other => Some(format!("delateralized term evaluates to {:?}, expected {}", other, expected)),
    }
}

fn sql(t: &Term, sig: &Signature, ty: &Type, store: &Store, expected: &KValue) -> Option<String> {
    let n = normalize(t, sig).ok()?;
    let d = match nrc_delateral::delateralize(&n, sig) {
        Ok(d) => d,
        Err(e) => return Some(format!("delateralize failed: {}", e)),
    };
    for (mode, u) in [("delateralized", &d), ("keep-lateral", &n)] {
        let q = match to_sql(u, sig) {
            Ok(q) => q,
            Err(e) => return Some(format!("{}: to_sql failed: {}", mode, e)),
        };
        if mode == "delateralized" && q.has_lateral() {
            return Some("LATERAL remains after delateralization".into());
        }
        if let Err(e) = print_sql(&q, Dialect::Postgres) {
            return Some(format!("{}: printing failed: {}", mode, e));
        }
        match exec_sql(&q, store).and_then(|rows| decode(&rows, ty)) {
            Ok(v) if v == *expected => {}
            Ok(v) => return Some(format!("{}: SQL gives {}, eval gives {}", mode, v, expected)),
            Err(e) => return Some(format!("{}: execution failed: {}", mode, e)),
        }
    }
    None
}

fn shredder(t: &Term, sig: &Signature, store: &Store, expected: &KValue) -> Option<String> {
    let s = match shred_closed(t, sig) {
        Ok(s) => s,
        Err(e) => return Some(format!("shredding failed: {}", e)),
    };
    if let Err(e) = typecheck_env(&s.env, sig) {
        return Some(format!("ill-typed environment: {}", e));
    }
    for (phi, f) in &s.flat_env {
        match typecheck_closed(f, sig) {
            Ok(ty) if ty.is_flat_collection() => {}
            other => return Some(format!("{} flattens to a non-flat query: {:?}", phi, other)),
        }
    }
    match eval(&substitute_env(&s.term, &s.env), &Env::new(store.clone())) {
        Ok(v) if v == *expected => {}
        other => return Some(format!("shredded term evaluates to {:?}, expected {}", other, expected)),
    }
    for engine in [Engine::Eval, Engine::Sql] {
        match shred_pipeline(t, sig, store, engine) {
            Ok(v) if v == *expected => {}
            Ok(v) => return Some(format!("{:?} engine: stitched {}, eval gives {}", engine, v, expected)),
            Err(e) => return Some(format!("{:?} engine: {}", engine, e)),
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub index: usize,
    pub term: Term,
    pub minimized: Term,
    pub message: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "term #{}: {}", self.index, pretty(&self.term))?;
        writeln!(f, "minimized: {}", pretty(&self.minimized))?;
        write!(f, "{}", self.message)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub stage: Stage,
    /// Terms in the stage's domain.
    pub checked: usize,
    pub failure: Option<Counterexample>,
}

/// Runs one stage over a corpus, stopping at the first counterexample.
pub fn run_stage(stage: Stage, spec: &CorpusSpec) -> Report {
    let sig = corpus_signature();
    let mut checked = 0;
    for (i, t) in generate_corpus(spec).into_iter().enumerate() {
        let seed = spec.seed.wrapping_add(i as u64);
        if typecheck_closed(&t, &sig).is_ok_and(|ty| stage.applies(&ty)) {
            checked += 1;
        }
        if let Some(_msg) = stage.violation(&t, seed) {
            let minimized = shrink(&t, &sig, &mut |c| stage.violation(c, seed).is_some());
            let message = stage.violation(&minimized, seed).unwrap_or(_msg);
            return Report { stage, checked, failure: Some(Counterexample { index: i, term: t, minimized, message }) };
        }
    }
    Report { stage, checked, failure: None }
}

/// The corpus for `stage` with the given seed and size.
pub fn stage_spec(stage: Stage, seed: u64, count: usize) -> CorpusSpec {
    CorpusSpec { seed, count, shape: stage.shape(), ..CorpusSpec::default() }
}
