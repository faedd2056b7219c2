//! Deterministic SQL text.

use crate::ast::*;
use crate::SqlError;
use nrc_core::Base;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Dialect {
    #[default]
    Generic,
    Sqlite,
    Postgres,
}

impl Dialect {
    pub fn name(self) -> &'static str {
        match self {
            Dialect::Generic => "generic",
            Dialect::Sqlite => "sqlite",
            Dialect::Postgres => "postgres",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;
    fn from_str(s: &str) -> Result<Dialect, String> {
        match s {
            "generic" => Ok(Dialect::Generic),
            "sqlite" => Ok(Dialect::Sqlite),
            "postgres" => Ok(Dialect::Postgres),
            _ => Err(format!("unknown dialect {:?} (expected generic, sqlite or postgres)", s)),
        }
    }
}

/// Column printed for unit rows, since SQL has no zero-column `SELECT`.
pub const UNIT_COLUMN: &str = "unit";

pub fn print_sql(q: &SqlQuery, dialect: Dialect) -> Result<String, SqlError> {
    let mut p = Printer { dialect, out: String::new() };
    p.query(q)?;
    Ok(p.out)
}

struct Printer {
    dialect: Dialect,
    out: String,
}

const RESERVED: &[&str] = &[
    "all",
    "and",
    "as",
    "by",
    "case",
    "cross",
    "distinct",
    "else",
    "end",
    "except",
    "exists",
    "false",
    "from",
    "group",
    "having",
    "in",
    "inner",
    "intersect",
    "is",
    "join",
    "lateral",
    "left",
    "limit",
    "not",
    "null",
    "on",
    "or",
    "order",
    "outer",
    "right",
    "select",
    "table",
    "then",
    "true",
    "union",
    "using",
    "values",
    "when",
    "where",
    "with",
];

/// Identifier, double-quoted unless it is a plain lower-case name.
pub fn ident(s: &str) -> String {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s.to_ascii_lowercase().as_str());
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

impl Printer {
    fn unsupported(&self, construct: &str) -> SqlError {
        SqlError::Dialect { dialect: self.dialect.name().to_string(), construct: construct.to_string() }
    }

    fn query(&mut self, q: &SqlQuery) -> Result<(), SqlError> {
        match q {
            SqlQuery::Select(s) => self.select(s),
            SqlQuery::Union { all, left, right } => {
                self.operand(left)?;
                self.out.push_str(if *all { " UNION ALL " } else { " UNION " });
                self.operand(right)
            }
            SqlQuery::ExceptAll(left, right) => {
                if self.dialect == Dialect::Sqlite {
                    return Err(self.unsupported("EXCEPT ALL"));
                }
                self.operand(left)?;
                self.out.push_str(" EXCEPT ALL ");
                self.operand(right)
            }
        }
    }

    fn operand(&mut self, q: &SqlQuery) -> Result<(), SqlError> {
        if self.dialect == Dialect::Sqlite {
            self.out.push_str("SELECT * FROM (");
            self.query(q)?;
            self.out.push(')');
        } else {
            self.out.push('(');
            self.query(q)?;
            self.out.push(')');
        }
        Ok(())
    }

    fn select(&mut self, s: &Select) -> Result<(), SqlError> {
        self.out.push_str(if s.distinct { "SELECT DISTINCT " } else { "SELECT " });
        match &s.projection {
            Projection::Star => self.out.push('*'),
            Projection::Columns(cs) if cs.is_empty() => {
                self.out.push_str("1 AS ");
                self.out.push_str(UNIT_COLUMN);
            }
            Projection::Columns(cs) => {
                for (i, (e, c)) in cs.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(e)?;
                    self.out.push_str(" AS ");
                    self.out.push_str(&ident(c));
                }
            }
        }
        if !s.from.is_empty() {
            self.out.push_str(" FROM ");
            for (i, f) in s.from.iter().enumerate() {
                if i > 0 {
                    self.out.push_str(", ");
                }
                self.source_item(f)?;
            }
        }
        if let Some(w) = &s.where_ {
            self.out.push_str(" WHERE ");
            self.expr(w)?;
        }
        Ok(())
    }

    fn source_item(&mut self, f: &FromItem) -> Result<(), SqlError> {
        match &f.source {
            Source::Table(t) => {
                self.out.push_str(&ident(t));
                if *t != f.alias {
                    self.out.push_str(" AS ");
                    self.out.push_str(&ident(&f.alias));
                }
            }
            Source::Query(q) => {
                if f.lateral {
                    if self.dialect == Dialect::Sqlite {
                        return Err(self.unsupported("LATERAL"));
                    }
                    self.out.push_str("LATERAL ");
                }
                self.out.push('(');
                self.query(q)?;
                self.out.push_str(") AS ");
                self.out.push_str(&ident(&f.alias));
            }
        }
        Ok(())
    }

    fn lit(&mut self, b: &Base) {
        match (b, self.dialect) {
            (Base::Int(i), _) => self.out.push_str(&i.to_string()),
            (Base::Str(s), _) => {
                self.out.push('\'');
                self.out.push_str(&s.replace('\'', "''"));
                self.out.push('\'');
            }
            (Base::Bool(b), Dialect::Postgres) => self.out.push_str(if *b { "TRUE" } else { "FALSE" }),
            (Base::Bool(b), Dialect::Sqlite) => self.out.push_str(if *b { "1" } else { "0" }),
            (Base::Bool(b), Dialect::Generic) => self.out.push_str(if *b { "(1=1)" } else { "(1=0)" }),
        }
    }

    fn expr(&mut self, e: &SqlExpr) -> Result<(), SqlError> {
        match e {
            SqlExpr::Column(a, c) => {
                self.out.push_str(&ident(a));
                self.out.push('.');
                self.out.push_str(&ident(c));
            }
            SqlExpr::Lit(b) => self.lit(b),
            SqlExpr::Null => self.out.push_str("NULL"),
            SqlExpr::NotExists(q) => {
                self.out.push_str("NOT EXISTS (");
                self.query(q)?;
                self.out.push(')');
            }
            SqlExpr::Prim(c, args) => match (c.as_str(), args.as_slice()) {
                ("not", [a]) => {
                    self.out.push_str("(NOT ");
                    self.expr(a)?;
                    self.out.push(')');
                }
                (op, [a, b]) => {
                    let sym = infix(op).ok_or_else(|| self.unsupported(&format!("primitive {}", op)))?;
                    self.out.push('(');
                    self.expr(a)?;
                    self.out.push(' ');
                    self.out.push_str(sym);
                    self.out.push(' ');
                    self.expr(b)?;
                    self.out.push(')');
                }
                _ => return Err(self.unsupported(&format!("primitive {}/{}", c, args.len()))),
            },
        }
        Ok(())
    }
}

fn infix(op: &str) -> Option<&'static str> {
    Some(match op {
        "==" => "=",
        "<>" => "<>",
        "<" => "<",
        "<=" => "<=",
        ">" => ">",
        ">=" => ">=",
        "and" => "AND",
        "or" => "OR",
        "+" => "+",
        "-" => "-",
        "*" => "*",
        "^^" => "||",
        _ => return None,
    })
}
