//! Shredded value sets and the stitching of nested results.

use crate::env::ShreddingEnv;
use crate::flatten::{flatten, IndexLayout, KEY, TAG};
use crate::ShredError;
use nrc_core::records::SEP;
use nrc_core::{typecheck_closed, Signature, Term, Type};
use nrc_delateral::graphs::OUT_PREFIX;
use nrc_semantics::{eval, Env, KValue, Store};
use std::collections::BTreeMap;

/// Which evaluator computes the flat queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// The reference semantics.
    #[default]
    Eval,
    /// Translation to SQL followed by the SQL executor.
    Sql,
}

/// `Ξ`: the rows of every graph, keyed by graph variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShreddedValueSet {
    pub layout: IndexLayout,
    pub values: BTreeMap<String, KValue>,
}

/// Normalizes and delateralizes a closed flat query.
pub fn compile_flat(t: &Term, sig: &Signature) -> Result<Term, ShredError> {
    let n = nrc_normalize::normalize(t, sig).map_err(|e| ShredError::Pipeline(format!("normalize: {}", e)))?;
    nrc_delateral::delateralize(&n, sig).map_err(|e| ShredError::Pipeline(format!("delateralize: {}", e)))
}

/// Runs a closed query whose elements are record trees of base values.
pub fn run_flat(t: &Term, sig: &Signature, store: &Store, engine: Engine) -> Result<KValue, ShredError> {
    let (flat, shape) = nrc_sql::flatten_records(t, sig)?;
    let q = compile_flat(&flat, sig)?;
    let rows = match engine {
        Engine::Eval => eval(&q, &Env::new(store.clone())).map_err(|e| ShredError::Pipeline(format!("eval: {}", e)))?,
        Engine::Sql => {
            let ty = typecheck_closed(&flat, sig)?;
            let sql = nrc_sql::to_sql(&q, sig)?;
            nrc_sql::decode(&nrc_sql::exec_sql(&sql, store)?, &ty)?
        }
    };
    Ok(shape.decode(&rows)?)
}

/// Flattens every entry of `env`, in order.
pub fn flatten_env(env: &ShreddingEnv, sig: &Signature) -> Result<(IndexLayout, Vec<(String, Term)>), ShredError> {
    let layout = IndexLayout::from_env(env, sig)?;
    let mut out = Vec::with_capacity(env.len());
    for (phi, t) in env.entries() {
        out.push((phi.clone(), flatten(t, &layout, sig)?));
    }
    Ok((layout, out))
}

/// `Ξ` for `env` over `store`.
pub fn build_value_set(
    env: &ShreddingEnv,
    sig: &Signature,
    store: &Store,
    engine: Engine,
) -> Result<ShreddedValueSet, ShredError> {
    let (layout, entries) = flatten_env(env, sig)?;
    let mut values = BTreeMap::new();
    for (phi, t) in entries {
        let ty = typecheck_closed(&t, sig)?;
        if !ty.is_flat_collection() {
            return Err(ShredError::Shape(format!("flattened {} has type {}", phi, ty)));
        }
        values.insert(phi, run_flat(&t, sig, store, engine)?);
    }
    Ok(ShreddedValueSet { layout, values })
}

fn join(prefix: &str, l: &str) -> String {
    if prefix.is_empty() {
        l.to_string()
    } else {
        format!("{}{}{}", prefix, SEP, l)
    }
}

/// Reads a value of the record tree type `ty` from the columns of a flat row.
fn read_tree(row: &KValue, ty: &Type, prefix: &str) -> Result<KValue, ShredError> {
    match ty {
        Type::Record(fs) => {
            let mut out = Vec::with_capacity(fs.len());
            for (l, t) in fs {
                out.push((l.clone(), read_tree(row, t, &join(prefix, l))?));
            }
            Ok(KValue::record(out))
        }
        _ => row
            .field(prefix)
            .cloned()
            .ok_or_else(|| ShredError::Stitch(format!("row {} has no column {}", row, prefix))),
    }
}

/// Rebuilds the nested value of type `ty` from its flattened form `v`.
pub fn stitch(xi: &ShreddedValueSet, v: &KValue, ty: &Type) -> Result<KValue, ShredError> {
    match ty {
        Type::Base(_) => Ok(v.clone()),
        Type::Record(fs) => {
            let mut out = Vec::with_capacity(fs.len());
            for (l, t) in fs {
                let f = v.field(l).ok_or_else(|| ShredError::Stitch(format!("{} has no field {}", v, l)))?;
                out.push((l.clone(), stitch(xi, f, t)?));
            }
            Ok(KValue::record(out))
        }
        Type::Set(e) | Type::Bag(e) => {
            let bad = || ShredError::Stitch(format!("{} is not an index", v));
            let Some(KValue::Base(nrc_core::Base::Str(phi))) = v.field(TAG) else { return Err(bad()) };
            let key = v.field(KEY).ok_or_else(bad)?;
            let rows = xi.values.get(phi).ok_or_else(|| ShredError::MissingGraph(phi.clone()))?;
            let cols = xi.layout.key_columns(phi).ok_or_else(|| ShredError::MissingGraph(phi.clone()))?;
            let mut want = Vec::with_capacity(cols.len());
            for c in &cols {
                want.push(key.field(&c.index).ok_or_else(bad)?);
            }
            let out_ty = xi.layout.flat_type(e);
            let mut acc = Vec::new();
            for (p, n) in
                rows.entries().ok_or_else(|| ShredError::Stitch(format!("rows of {} are not a collection", phi)))?
            {
                if cols.iter().zip(&want).all(|(c, w)| p.field(&c.row) == Some(*w)) {
                    let out = read_tree(p, &out_ty, OUT_PREFIX)?;
                    acc.push((stitch(xi, &out, e)?, n));
                }
            }
            Ok(match ty {
                Type::Set(_) => KValue::set_of(acc.into_iter().map(|(v, _)| v)),
                _ => KValue::bag_of(acc),
            })
        }
        _ => Err(ShredError::Stitch(format!("cannot stitch at type {}", ty))),
    }
}
