use crate::eval::{eval, Env, EvalError};
use nrc_core::{typecheck, Ctx, Signature, Term, TypeError};

#[derive(Debug, thiserror::Error)]
pub enum EquivError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("terms have different types {0} and {1}")]
    TypeMismatch(String, String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Semantic equality of two terms of the same type under `env`.
pub fn equiv(t1: &Term, t2: &Term, ctx: &Ctx, sig: &Signature, env: &Env) -> Result<bool, EquivError> {
    let a = typecheck(ctx, t1, sig)?;
    let b = typecheck(ctx, t2, sig)?;
    if a != b {
        return Err(EquivError::TypeMismatch(a.to_string(), b.to_string()));
    }
    Ok(eval(t1, env)? == eval(t2, env)?)
}
