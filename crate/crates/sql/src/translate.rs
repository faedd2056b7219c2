//! Normal forms of flat collection type to SQL.

use crate::ast::*;
use crate::SqlError;
use nrc_core::subst::free_vars;
use nrc_core::term::{Gens, Term};
use nrc_core::{typecheck_closed, Signature, Type};
use nrc_normalize::is_normal_form;
use std::collections::BTreeSet;

/// Column holding the value of a collection of base-typed elements.
pub const VALUE_COLUMN: &str = "v";

/// Output columns for an element type: record labels, or [`VALUE_COLUMN`].
pub fn columns(elem: &Type) -> Vec<String> {
    match elem {
        Type::Record(fs) => fs.iter().map(|(l, _)| l.clone()).collect(),
        _ => vec![VALUE_COLUMN.to_string()],
    }
}

pub fn to_sql(t: &Term, sig: &Signature) -> Result<SqlQuery, SqlError> {
    let ty = typecheck_closed(t, sig).map_err(|e| SqlError::NotNormal(e.to_string()))?;
    if !ty.is_flat_collection() {
        return Err(SqlError::NotFlat(ty.to_string()));
    }
    is_normal_form(t, sig).map_err(|e| SqlError::NotNormal(e.to_string()))?;
    Translator::default().query(t)
}

#[derive(Default)]
struct Translator {
    /// Variable to alias, innermost last.
    scope: Vec<(String, String)>,
    used: BTreeSet<String>,
}

impl Translator {
    fn alias(&mut self, base: &str) -> String {
        let mut a = base.to_string();
        let mut n = 1;
        while self.used.contains(&a) {
            n += 1;
            a = format!("{}{}", base, n);
        }
        self.used.insert(a.clone());
        a
    }

    fn lookup(&self, x: &str) -> Result<&str, SqlError> {
        self.scope
            .iter()
            .rev()
            .find(|(v, _)| v == x)
            .map(|(_, a)| a.as_str())
            .ok_or_else(|| SqlError::NotNormal(format!("unbound variable {}", x)))
    }

    fn query(&mut self, t: &Term) -> Result<SqlQuery, SqlError> {
        match t {
            Term::SetUnion(a, b) | Term::BagUnion(a, b) => Ok(SqlQuery::Union {
                all: matches!(t, Term::BagUnion(..)),
                left: Box::new(self.query(a)?),
                right: Box::new(self.query(b)?),
            }),
            Term::EmptySet(e) | Term::EmptyBag(e) => Ok(SqlQuery::Select(Select {
                distinct: false,
                projection: Projection::Columns(columns(e).into_iter().map(|c| (SqlExpr::Null, c)).collect()),
                from: Vec::new(),
                where_: Some(SqlExpr::Prim("==".into(), vec![int(1), int(0)])),
            })),
            Term::SetComp(h, gens) | Term::BagComp(h, gens) => self.select(h, gens, matches!(t, Term::SetComp(..))),
            Term::SetSingleton(_) | Term::WhereSet(..) => self.select(t, &Vec::new(), true),
            Term::BagSingleton(_) | Term::WhereBag(..) => self.select(t, &Vec::new(), false),
            _ => Err(SqlError::NotNormal(format!("not a query: {}", t))),
        }
    }

    fn select(&mut self, head: &Term, gens: &Gens, distinct: bool) -> Result<SqlQuery, SqlError> {
        let n = self.scope.len();
        let mut from = Vec::new();
        let mut earlier = BTreeSet::new();
        for (x, g) in gens {
            let lateral = free_vars(g).iter().any(|v| earlier.contains(v));
            let source = self.source(g)?;
            let alias = self.alias(x);
            from.push(FromItem { lateral, source, alias: alias.clone() });
            self.scope.push((x.clone(), alias));
            earlier.insert(x.clone());
        }
        let (single, guard) = match head {
            Term::WhereSet(s, c) | Term::WhereBag(s, c) => (&**s, Some(&**c)),
            _ => (head, None),
        };
        let elem = match single {
            Term::SetSingleton(e) | Term::BagSingleton(e) => e,
            _ => return Err(SqlError::NotNormal(format!("comprehension head is not a singleton: {}", head))),
        };
        let projection = match &**elem {
            Term::Record(fs) => {
                let mut cols = Vec::new();
                for (l, e) in fs {
                    cols.push((self.expr(e)?, l.clone()));
                }
                Projection::Columns(cols)
            }
            e => Projection::Columns(vec![(self.expr(e)?, VALUE_COLUMN.to_string())]),
        };
        let where_ = match guard {
            Some(c) if !c.is_true() => Some(self.expr(c)?),
            _ => None,
        };
        self.scope.truncate(n);
        Ok(SqlQuery::Select(Select { distinct, projection, from, where_ }))
    }

    fn source(&mut self, g: &Term) -> Result<Source, SqlError> {
        Ok(match g {
            Term::Table(t) => Source::Table(t.clone()),
            Term::Dedup(inner) => match &**inner {
                Term::Table(t) => Source::Query(Box::new(distinct_star(Source::Table(t.clone()), t.clone()))),
                Term::BagDiff(a, b) => {
                    let diff = SqlQuery::ExceptAll(Box::new(self.query(a)?), Box::new(self.query(b)?));
                    let r = self.alias("r");
                    Source::Query(Box::new(distinct_star(Source::Query(Box::new(diff)), r)))
                }
                _ => return Err(SqlError::NotNormal(format!("generator {}", g))),
            },
            Term::Promote(q) => Source::Query(Box::new(self.query(q)?)),
            Term::BagDiff(a, b) => {
                Source::Query(Box::new(SqlQuery::ExceptAll(Box::new(self.query(a)?), Box::new(self.query(b)?))))
            }
            _ => return Err(SqlError::NotNormal(format!("generator {}", g))),
        })
    }

    fn expr(&mut self, t: &Term) -> Result<SqlExpr, SqlError> {
        Ok(match t {
            Term::Var(x) => SqlExpr::Column(self.lookup(x)?.to_string(), VALUE_COLUMN.to_string()),
            Term::Proj(v, l) => match &**v {
                Term::Var(x) => SqlExpr::Column(self.lookup(x)?.to_string(), l.clone()),
                _ => return Err(SqlError::NotNormal(format!("projection from {}", v))),
            },
            Term::Const(b) => SqlExpr::Lit(b.clone()),
            Term::Prim(c, args) => {
                let mut a2 = Vec::new();
                for a in args {
                    a2.push(self.expr(a)?);
                }
                SqlExpr::Prim(c.clone(), a2)
            }
            Term::EmptySetTest(q) | Term::EmptyBagTest(q) => SqlExpr::NotExists(Box::new(self.query(q)?)),
            _ => return Err(SqlError::NotNormal(format!("not a base term: {}", t))),
        })
    }
}

fn int(n: i64) -> SqlExpr {
    SqlExpr::Lit(nrc_core::Base::Int(n))
}

fn distinct_star(source: Source, alias: String) -> SqlQuery {
    SqlQuery::Select(Select {
        distinct: true,
        projection: Projection::Star,
        from: vec![FromItem { lateral: false, source, alias }],
        where_: None,
    })
}
