//! Shredding of nested-result queries into flat queries plus stitching.

pub mod env;
pub mod flatten;
pub mod shred;
pub mod stitch;

pub use env::{typecheck_env, EnvError, ShreddingEnv};
pub use flatten::{flatten, IndexLayout, KeyColumn};
pub use shred::{application, shred, GraphNames};
pub use stitch::{build_value_set, compile_flat, flatten_env, run_flat, stitch, Engine, ShreddedValueSet};

use nrc_core::subst::subst_map;
use nrc_core::{typecheck_closed, Fresh, Signature, Term, Type, TypeError};
use nrc_semantics::{KValue, Store};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum ShredError {
    #[error("not in normal form: {0}")]
    NotNormal(String),
    #[error("graph variable {0} is already defined")]
    Fresh(String),
    #[error("unexpected term shape: {0}")]
    Shape(String),
    #[error("unknown graph variable {0}")]
    MissingGraph(String),
    #[error("stitching failed: {0}")]
    Stitch(String),
    #[error("{0}")]
    Pipeline(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Sql(#[from] nrc_sql::SqlError),
}

/// Every intermediate product of shredding a closed query.
#[derive(Clone, Debug)]
pub struct Shredded {
    pub ty: Type,
    pub normalized: Term,
    pub term: Term,
    pub env: ShreddingEnv,
    pub layout: IndexLayout,
    pub flat_term: Term,
    pub flat_env: Vec<(String, Term)>,
}

/// Normalizes, shreds and flattens a closed query.
pub fn shred_closed(t: &Term, sig: &Signature) -> Result<Shredded, ShredError> {
    let ty = typecheck_closed(t, sig)?;
    let normalized = nrc_normalize::normalize(t, sig).map_err(|e| ShredError::Pipeline(format!("normalize: {}", e)))?;
    let (term, env) = shred(&ShreddingEnv::new(), &Vec::new(), &normalized, sig)?;
    let (layout, flat_env) = flatten_env(&env, sig)?;
    let flat_term = flatten(&term, &layout, sig)?;
    Ok(Shredded { ty, normalized, term, env, layout, flat_term, flat_env })
}

/// `M̆Ψ`: graph variables replaced by their definitions, innermost first.
pub fn substitute_env(t: &Term, env: &ShreddingEnv) -> Term {
    let mut fresh = Fresh::avoiding(t);
    let mut defs: BTreeMap<String, Term> = BTreeMap::new();
    for (phi, body) in env.entries() {
        let closed = subst_map(body, &defs, &mut fresh);
        defs.insert(phi.clone(), closed);
    }
    subst_map(t, &defs, &mut fresh)
}

/// Evaluates a closed nested query by shredding, running each flat query
/// with `engine`, and stitching.
pub fn shred_pipeline(t: &Term, sig: &Signature, store: &Store, engine: Engine) -> Result<KValue, ShredError> {
    let s = shred_closed(t, sig)?;
    let xi = build_value_set(&s.env, sig, store, engine)?;
    let root = run_flat(&Term::BagSingleton(Box::new(s.flat_term.clone())), sig, store, engine)?;
    let top = match root.entries().as_deref() {
        Some([(v, 1)]) => (*v).clone(),
        _ => return Err(ShredError::Stitch(format!("root query returned {}", root))),
    };
    stitch(&xi, &top, &s.ty)
}
