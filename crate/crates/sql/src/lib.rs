//! SQL backend: translation of flat normal forms, printing, record
//! flattening, and an executor for the emitted subset.

pub mod ast;
pub mod exec;
pub mod flatten;
pub mod print;
pub mod translate;

pub use ast::{FromItem, Projection, Select, Source, SqlExpr, SqlQuery};
pub use exec::{decode, exec_relation, exec_sql, Relation};
pub use flatten::{flatten_records, RecordShape};
pub use print::{print_sql, Dialect};
pub use translate::{to_sql, VALUE_COLUMN};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlError {
    #[error("not a flat collection query: {0}")]
    NotFlat(String),
    #[error("not in normal form: {0}")]
    NotNormal(String),
    #[error("the {dialect} dialect cannot express {construct}; run the delateralizer first or pick another dialect")]
    Dialect { dialect: String, construct: String },
    #[error("flattened column {0} is produced by two different paths")]
    Collision(String),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown alias {0}")]
    UnknownAlias(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("set operation over different columns: {left:?} vs {right:?}")]
    Arity { left: Vec<String>, right: Vec<String> },
    #[error("execution error: {0}")]
    Exec(String),
}
