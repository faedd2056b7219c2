//! Rewriting to nested relational normal form.

mod nf;
mod rules;
pub mod shape;

pub use nf::{generators, is_normal_form, is_normal_form_in, NfTag, NormalForm, NotNormal};

use nrc_core::{typecheck, Ctx, Fresh, Signature, Term, TypeError};

pub const DEFAULT_STEP_BUDGET: usize = 100_000;
pub const BUDGET_ENV: &str = "NRCQ_STEP_BUDGET";

#[derive(Debug, thiserror::Error)]
pub enum NormalizeError {
    #[error("step budget of {budget} rewrites exceeded")]
    BudgetExceeded { budget: usize, last: Term },
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Clone, Debug)]
pub struct Options {
    pub budget: usize,
    pub trace: bool,
}

impl Default for Options {
    /// Budget from `NRCQ_STEP_BUDGET` when set.
    fn default() -> Options {
        let budget = std::env::var(BUDGET_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_STEP_BUDGET);
        Options { budget, trace: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: &'static str,
    pub result: Term,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub term: Term,
    pub steps: usize,
    pub trace: Vec<TraceStep>,
}

/// One rewrite at the leftmost-outermost redex, with the rule's name, or
/// `None` when `t` is normal.
pub fn rewrite_step(
    t: &Term,
    ctx: &Ctx,
    sig: &Signature,
    fresh: &mut Fresh,
) -> Result<Option<(&'static str, Term)>, TypeError> {
    fresh.reserve(t);
    rules::Rewriter { sig, fresh }.step(t, ctx)
}

pub fn normalize(t: &Term, sig: &Signature) -> Result<Term, NormalizeError> {
    let mut fresh = Fresh::avoiding(t);
    Ok(normalize_with(t, &Ctx::new(), sig, &Options::default(), &mut fresh)?.term)
}

pub fn normalize_with(
    t: &Term,
    ctx: &Ctx,
    sig: &Signature,
    opts: &Options,
    fresh: &mut Fresh,
) -> Result<Outcome, NormalizeError> {
    typecheck(ctx, t, sig)?;
    fresh.reserve(t);
    let mut cur = t.clone();
    let mut trace = Vec::new();
    let mut steps = 0;
    let mut rw = rules::Rewriter { sig, fresh };
    while let Some((rule, next)) = rw.step(&cur, ctx)? {
        steps += 1;
        if steps > opts.budget {
            return Err(NormalizeError::BudgetExceeded { budget: opts.budget, last: cur });
        }
        if opts.trace {
            trace.push(TraceStep { rule, result: next.clone() });
        }
        cur = next;
    }
    Ok(Outcome { term: cur, steps, trace })
}
