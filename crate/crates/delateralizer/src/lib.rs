//! Elimination of lateral variable references from normalized queries.

pub mod graphs;
pub mod lateral;

pub use graphs::{eliminate_graphs, graph_free_type, row_type};
pub use lateral::{is_lateral_shape, metric, occurrences, LateralReport, Occurrence};

use nrc_core::term::{Gens, Term};
use nrc_core::{Ctx, Fresh, Signature, TypeError};
use nrc_normalize::{is_normal_form, normalize_with, NormalizeError, NotNormal, Options};

#[derive(Debug, thiserror::Error)]
pub enum DelateralizeError {
    #[error("not in normal form: {0}")]
    NotNormal(#[from] NotNormal),
    #[error("no lateral occurrence to eliminate")]
    NoOccurrence,
    #[error("metric did not decrease ({before} before, {after} after) on {term}")]
    NotDecreasing { before: usize, after: usize, term: Term },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

pub fn lateral_report(t: &Term, sig: &Signature) -> Result<LateralReport, DelateralizeError> {
    is_normal_form(t, sig)?;
    Ok(LateralReport { occurrences: occurrences(t), metric: metric(t) })
}

/// Rewrites the first outermost lateral generator `y <- G` of some
/// comprehension into a graph application over the last earlier binder `x`
/// that `G` mentions. The result contains graph constructs.
///
/// Commuting `y <- G` next to `x <- N` and back is the identity here: `G`
/// mentions no binder after `x`, and the rewritten source only adds `x` and
/// the free variables of `N`, so the rewrite is applied in place.
pub fn delateralize_step(t: &Term) -> Result<Term, DelateralizeError> {
    step(t).ok_or(DelateralizeError::NoOccurrence)
}

fn step(t: &Term) -> Option<Term> {
    match t {
        Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
            let set = matches!(t, Term::SetComp(..));
            let rebuild =
                |h: Term, g: Gens| if set { Term::SetComp(Box::new(h), g) } else { Term::BagComp(Box::new(h), g) };
            for i in 0..gens.len() {
                if let Some(x) = lateral::lateral_binders(gens, i).pop() {
                    let j = gens.iter().position(|(b, _)| *b == x).unwrap();
                    let mut g2 = gens.clone();
                    g2[i].1 = rewrite(&gens[i].1, &x, &gens[j].1, set);
                    return Some(rebuild((**h).clone(), g2));
                }
                if let Some(s) = step(&gens[i].1) {
                    let mut g2 = gens.clone();
                    g2[i].1 = s;
                    return Some(rebuild((**h).clone(), g2));
                }
            }
            step(h).map(|h2| rebuild(h2, gens.clone()))
        }
        _ => {
            let mut done = false;
            let r = t.map_children(&mut |c| {
                if done {
                    return c.clone();
                }
                match step(c) {
                    Some(c2) => {
                        done = true;
                        c2
                    }
                    None => c.clone(),
                }
            });
            done.then_some(r)
        }
    }
}

/// The three generator rewrites; `n` is the source of `x`.
fn rewrite(g: &Term, x: &str, n: &Term, in_set: bool) -> Term {
    let dom = |src: Term| vec![(x.to_string(), src)];
    let xs = vec![Term::Var(x.to_string())];
    let dn = || if in_set { n.clone() } else { Term::Dedup(Box::new(n.clone())) };
    match g {
        Term::Promote(p) => Term::GraphApp(Box::new(Term::Promote(Box::new(Term::GraphSet(dom(dn()), p.clone())))), xs),
        Term::BagDiff(p1, p2) => Term::GraphApp(
            Box::new(Term::BagDiff(
                Box::new(Term::GraphBag(dom(dn()), p1.clone())),
                Box::new(Term::GraphBag(dom(dn()), p2.clone())),
            )),
            xs,
        ),
        Term::Dedup(d) => match &**d {
            Term::BagDiff(p1, p2) => Term::GraphApp(
                Box::new(Term::Dedup(Box::new(Term::BagDiff(
                    Box::new(Term::GraphBag(dom(dn()), p1.clone())),
                    Box::new(Term::GraphBag(dom(dn()), p2.clone())),
                )))),
                xs,
            ),
            _ => unreachable!("not a lateral shape"),
        },
        _ => unreachable!("not a lateral shape"),
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub term: Term,
    /// Metric before each iteration, ending with the final 0.
    pub metrics: Vec<usize>,
}

pub fn delateralize(t: &Term, sig: &Signature) -> Result<Term, DelateralizeError> {
    let mut fresh = Fresh::avoiding(t);
    Ok(delateralize_with(t, sig, &Options::default(), &mut fresh)?.term)
}

/// Step, eliminate graphs and renormalize until no lateral occurrence is left.
pub fn delateralize_with(
    t: &Term,
    sig: &Signature,
    opts: &Options,
    fresh: &mut Fresh,
) -> Result<Outcome, DelateralizeError> {
    is_normal_form(t, sig)?;
    let mut cur = t.clone();
    let mut metrics = vec![metric(&cur)];
    while *metrics.last().unwrap() > 0 {
        let before = *metrics.last().unwrap();
        let stepped = delateralize_step(&cur)?;
        let plain = eliminate_graphs(&stepped, &Ctx::new(), sig, fresh)?;
        let next = normalize_with(&plain, &Ctx::new(), sig, opts, fresh)?.term;
        let after = metric(&next);
        if after >= before {
            return Err(DelateralizeError::NotDecreasing { before, after, term: next });
        }
        metrics.push(after);
        cur = next;
    }
    Ok(Outcome { term: cur, metrics })
}
