//! The SQL subset emitted by the translation.

use nrc_core::Base;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqlQuery {
    Select(Select),
    Union { all: bool, left: Box<SqlQuery>, right: Box<SqlQuery> },
    ExceptAll(Box<SqlQuery>, Box<SqlQuery>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Select {
    pub distinct: bool,
    pub projection: Projection,
    pub from: Vec<FromItem>,
    pub where_: Option<SqlExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Projection {
    /// `*` over a single `FROM` item.
    Star,
    /// `expr AS column`, in column order. Empty for unit rows.
    Columns(Vec<(SqlExpr, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FromItem {
    pub lateral: bool,
    pub source: Source,
    pub alias: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Table(String),
    Query(Box<SqlQuery>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SqlExpr {
    Column(String, String),
    Lit(Base),
    /// Only in the projection of an always-empty `SELECT`.
    Null,
    /// A primitive by its calculus name (`==`, `and`, `^^`, ...).
    Prim(String, Vec<SqlExpr>),
    NotExists(Box<SqlQuery>),
}

impl SqlQuery {
    /// Output column names, when statically known.
    pub fn columns(&self) -> Option<Vec<String>> {
        match self {
            SqlQuery::Select(s) => match &s.projection {
                Projection::Columns(cs) => Some(cs.iter().map(|(_, c)| c.clone()).collect()),
                Projection::Star => match s.from.as_slice() {
                    [FromItem { source: Source::Query(q), .. }] => q.columns(),
                    _ => None,
                },
            },
            SqlQuery::Union { left, .. } | SqlQuery::ExceptAll(left, _) => left.columns(),
        }
    }

    /// Whether any `FROM` item, at any depth, is marked lateral.
    pub fn has_lateral(&self) -> bool {
        match self {
            SqlQuery::Select(s) => {
                s.from.iter().any(|f| f.lateral || matches!(&f.source, Source::Query(q) if q.has_lateral()))
                    || s.projection_exprs().any(|e| e.has_lateral())
                    || s.where_.as_ref().is_some_and(|e| e.has_lateral())
            }
            SqlQuery::Union { left, right, .. } | SqlQuery::ExceptAll(left, right) => {
                left.has_lateral() || right.has_lateral()
            }
        }
    }
}

impl Select {
    pub fn projection_exprs(&self) -> impl Iterator<Item = &SqlExpr> {
        let cols: &[(SqlExpr, String)] = match &self.projection {
            Projection::Columns(cs) => cs,
            Projection::Star => &[],
        };
        cols.iter().map(|(e, _)| e)
    }
}

impl SqlExpr {
    fn has_lateral(&self) -> bool {
        match self {
            SqlExpr::Prim(_, args) => args.iter().any(|a| a.has_lateral()),
            SqlExpr::NotExists(q) => q.has_lateral(),
            _ => false,
        }
    }
}
