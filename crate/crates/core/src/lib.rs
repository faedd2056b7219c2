//! Core calculus: types, terms, the type checker, and the surface syntax.

pub mod fresh;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod records;
pub mod sig;
pub mod subst;
pub mod term;
pub mod typecheck;
pub mod types;

pub use fresh::Fresh;
pub use parser::{parse, parse_in, parse_type, ParseError};
pub use pretty::pretty;
pub use sig::{PrimType, SchemaError, Signature};
pub use subst::{alpha_eq, free_vars, subst};
pub use term::{Base, Gens, Term};
pub use typecheck::{typecheck, typecheck_closed, Ctx, TypeError};
pub use types::{BaseType, Type};
