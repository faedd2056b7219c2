//! Interpreter for the emitted SQL subset, used as an independent oracle.

use crate::ast::*;
use crate::SqlError;
use nrc_core::Type;
use nrc_semantics::{apply_prim, KValue, Store};
use std::collections::BTreeMap;

/// A relation: column names (unknown for an empty base table) and counted rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub columns: Option<Vec<String>>,
    pub rows: BTreeMap<Vec<KValue>, u64>,
}

impl Relation {
    fn empty(columns: Option<Vec<String>>) -> Relation {
        Relation { columns, rows: BTreeMap::new() }
    }

    fn add(&mut self, row: Vec<KValue>, n: u64) {
        if n > 0 {
            *self.rows.entry(row).or_insert(0) += n;
        }
    }

    fn record(&self, row: &[KValue]) -> KValue {
        let cols = self.columns.as_deref().unwrap_or(&[]);
        KValue::record(cols.iter().cloned().zip(row.iter().cloned()))
    }

    /// The rows as a bag of flat records.
    pub fn to_bag(&self) -> KValue {
        KValue::bag_of(self.rows.iter().map(|(r, n)| (self.record(r), *n)))
    }
}

/// Runs `q` against `store`, returning a bag of flat records.
pub fn exec_sql(q: &SqlQuery, store: &Store) -> Result<KValue, SqlError> {
    Ok(exec_relation(q, store)?.to_bag())
}

pub fn exec_relation(q: &SqlQuery, store: &Store) -> Result<Relation, SqlError> {
    Exec { store }.query(q, &mut Vec::new())
}

/// Turns a bag of flat rows back into a value of collection type `ty`.
/// A base element type reads the single value column; a set type forces
/// multiplicities to one.
pub fn decode(rows: &KValue, ty: &Type) -> Result<KValue, SqlError> {
    let (elem, set) = match ty {
        Type::Set(e) => (&**e, true),
        Type::Bag(e) => (&**e, false),
        _ => return Err(SqlError::NotFlat(ty.to_string())),
    };
    let entries = rows.entries().ok_or_else(|| SqlError::Exec("result is not a collection".into()))?;
    let mut out = Vec::new();
    for (r, n) in entries {
        let v = if elem.is_base() {
            r.field(crate::translate::VALUE_COLUMN)
                .cloned()
                .ok_or_else(|| SqlError::UnknownColumn(crate::translate::VALUE_COLUMN.into()))?
        } else {
            r.clone()
        };
        out.push((v, n));
    }
    Ok(if set { KValue::set_of(out.into_iter().map(|(v, _)| v)) } else { KValue::bag_of(out) })
}

struct Exec<'a> {
    store: &'a Store,
}

/// Alias bindings visible to an expression, innermost last.
type Scope = Vec<(String, KValue)>;

impl Exec<'_> {
    fn query(&self, q: &SqlQuery, env: &mut Scope) -> Result<Relation, SqlError> {
        match q {
            SqlQuery::Select(s) => self.select(s, env),
            SqlQuery::Union { all, left, right } => {
                let (mut l, r) = self.operands(left, right, env)?;
                for (row, n) in r.rows {
                    l.add(row, n);
                }
                if !all {
                    l.rows.values_mut().for_each(|n| *n = 1);
                }
                Ok(l)
            }
            SqlQuery::ExceptAll(left, right) => {
                let (l, r) = self.operands(left, right, env)?;
                let mut out = Relation::empty(l.columns.clone());
                for (row, n) in l.rows {
                    let m = r.rows.get(&row).copied().unwrap_or(0);
                    out.add(row, n.saturating_sub(m));
                }
                Ok(out)
            }
        }
    }

    fn operands(&self, a: &SqlQuery, b: &SqlQuery, env: &mut Scope) -> Result<(Relation, Relation), SqlError> {
        let mut l = self.query(a, env)?;
        let r = self.query(b, env)?;
        match (&l.columns, &r.columns) {
            (Some(x), Some(y)) if x != y => {
                return Err(SqlError::Arity { left: x.clone(), right: y.clone() });
            }
            (None, Some(y)) => l.columns = Some(y.clone()),
            _ => {}
        }
        Ok((l, r))
    }

    fn source(&self, f: &FromItem, env: &mut Scope) -> Result<Relation, SqlError> {
        match &f.source {
            Source::Table(t) => {
                let rows = self.store.get(t).ok_or_else(|| SqlError::UnknownTable(t.clone()))?;
                let mut columns = None;
                let mut rel = BTreeMap::new();
                for (r, n) in rows {
                    let KValue::Record(fs) = r else {
                        return Err(SqlError::Exec(format!("table {} holds a non-record row", t)));
                    };
                    columns.get_or_insert_with(|| fs.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
                    rel.insert(fs.iter().map(|(_, v)| v.clone()).collect(), *n);
                }
                Ok(Relation { columns, rows: rel })
            }
            Source::Query(q) => self.query(q, env),
        }
    }

    fn select(&self, s: &Select, env: &mut Scope) -> Result<Relation, SqlError> {
        let outer = env.len();
        // Non-lateral items see only the enclosing scope, so evaluate them once.
        let mut fixed = Vec::new();
        for f in &s.from {
            fixed.push(if f.lateral { None } else { Some(self.source(f, env)?) });
        }
        let mut out = None;
        let mut result = Relation::empty(None);
        self.product(s, &fixed, 0, 1, env, &mut result, &mut out)?;
        env.truncate(outer);
        result.columns = Some(match &s.projection {
            Projection::Columns(cs) => cs.iter().map(|(_, c)| c.clone()).collect(),
            Projection::Star => match out {
                Some(cols) => cols,
                None => return Ok(Relation { columns: None, rows: result.rows }),
            },
        });
        if s.distinct {
            result.rows.values_mut().for_each(|n| *n = 1);
        }
        Ok(result)
    }

    #[allow(clippy::too_many_arguments)]
    fn product(
        &self,
        s: &Select,
        fixed: &[Option<Relation>],
        i: usize,
        mult: u64,
        env: &mut Scope,
        result: &mut Relation,
        star_cols: &mut Option<Vec<String>>,
    ) -> Result<(), SqlError> {
        if i == s.from.len() {
            if let Some(w) = &s.where_ {
                let keep = self.expr(w, env)?.as_bool().ok_or_else(|| SqlError::Exec("WHERE is not boolean".into()))?;
                if !keep {
                    return Ok(());
                }
            }
            let row = match &s.projection {
                Projection::Columns(cs) => {
                    let mut row = Vec::with_capacity(cs.len());
                    for (e, _) in cs {
                        row.push(self.expr(e, env)?);
                    }
                    row
                }
                Projection::Star => {
                    if s.from.len() != 1 {
                        return Err(SqlError::Exec("* needs exactly one FROM item".into()));
                    }
                    let Some((_, KValue::Record(fs))) = env.last() else {
                        return Err(SqlError::Exec("* over a non-record row".into()));
                    };
                    if star_cols.is_none() {
                        *star_cols = Some(fs.iter().map(|(l, _)| l.clone()).collect());
                    }
                    fs.iter().map(|(_, v)| v.clone()).collect()
                }
            };
            result.add(row, mult);
            return Ok(());
        }
        let f = &s.from[i];
        let owned;
        let rel = match &fixed[i] {
            Some(r) => r,
            None => {
                owned = self.source(f, env)?;
                &owned
            }
        };
        for (row, n) in &rel.rows {
            env.push((f.alias.clone(), rel.record(row)));
            let r = self.product(s, fixed, i + 1, mult.saturating_mul(*n), env, result, star_cols);
            env.pop();
            r?;
        }
        Ok(())
    }

    fn expr(&self, e: &SqlExpr, env: &mut Scope) -> Result<KValue, SqlError> {
        match e {
            SqlExpr::Column(a, c) => {
                let (_, row) =
                    env.iter().rev().find(|(x, _)| x == a).ok_or_else(|| SqlError::UnknownAlias(a.clone()))?;
                row.field(c).cloned().ok_or_else(|| SqlError::UnknownColumn(format!("{}.{}", a, c)))
            }
            SqlExpr::Lit(b) => Ok(KValue::Base(b.clone())),
            SqlExpr::Null => Err(SqlError::Exec("NULL reached in a non-empty result".into())),
            SqlExpr::Prim(c, args) => {
                let mut vs = Vec::with_capacity(args.len());
                for a in args {
                    vs.push(self.expr(a, env)?);
                }
                apply_prim(c, &vs).map_err(|e| SqlError::Exec(e.to_string()))
            }
            SqlExpr::NotExists(q) => Ok(KValue::bool(self.query(q, env)?.rows.is_empty())),
        }
    }
}
