//! Lateral occurrences and the termination metric.

use nrc_core::subst::free_vars;
use nrc_core::term::{Gens, Term};
use std::collections::BTreeSet;

/// A generator `y <- source` whose source mentions `binder`, bound by an
/// earlier generator of the same comprehension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    /// Child-index path of the comprehension.
    pub path: Vec<usize>,
    /// Index of the offending generator in the comprehension.
    pub index: usize,
    pub binder: String,
    pub generator: String,
    pub source: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LateralReport {
    pub occurrences: Vec<Occurrence>,
    pub metric: usize,
}

/// Generator shapes that need LATERAL when they mention earlier binders:
/// `ι(P)`, `P1 - P2` and `δ(P1 - P2)`.
pub fn is_lateral_shape(g: &Term) -> bool {
    match g {
        Term::Promote(_) | Term::BagDiff(..) => true,
        Term::Dedup(m) => matches!(**m, Term::BagDiff(..)),
        _ => false,
    }
}

/// Earlier binders of `gens[..i]` free in the source of `gens[i]`, in
/// binding order.
pub fn lateral_binders(gens: &Gens, i: usize) -> Vec<String> {
    let (_, g) = &gens[i];
    if !is_lateral_shape(g) {
        return Vec::new();
    }
    let fv = free_vars(g);
    gens[..i].iter().map(|(x, _)| x.clone()).filter(|x| fv.contains(x)).collect()
}

pub fn occurrences(t: &Term) -> Vec<Occurrence> {
    let mut out = Vec::new();
    scan(t, &mut Vec::new(), &mut out);
    out
}

fn scan(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Occurrence>) {
    if let Term::SetComp(_, gens) | Term::BagComp(_, gens) = t {
        for i in 0..gens.len() {
            for x in lateral_binders(gens, i) {
                out.push(Occurrence {
                    path: path.clone(),
                    index: i,
                    binder: x,
                    generator: gens[i].0.clone(),
                    source: gens[i].1.clone(),
                });
            }
        }
    }
    let mut k = 0;
    t.for_each_child(&mut |c| {
        path.push(k);
        scan(c, path, out);
        path.pop();
        k += 1;
    });
}

/// Sum over every `ι(M)` and `M - N` of the number of its free variables,
/// plus the metric of the operands. Arguments of emptiness tests are
/// separate subqueries: variables bound outside them are parameters and not
/// counted.
pub fn metric(t: &Term) -> usize {
    m(t, &mut Vec::new(), &BTreeSet::new())
}

fn counted(ts: &[&Term], params: &BTreeSet<String>) -> usize {
    let mut fv = BTreeSet::new();
    for t in ts {
        fv.extend(free_vars(t));
    }
    fv.difference(params).count()
}

fn m(t: &Term, scope: &mut Vec<String>, params: &BTreeSet<String>) -> usize {
    match t {
        Term::BagDiff(a, b) => m(a, scope, params) + m(b, scope, params) + counted(&[a, b], params),
        Term::Promote(a) => m(a, scope, params) + counted(&[a], params),
        Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
            let n = scope.len();
            let mut sum = 0;
            for (x, g) in gens {
                sum += m(g, scope, params);
                scope.push(x.clone());
            }
            sum += m(h, scope, params);
            scope.truncate(n);
            sum
        }
        Term::EmptySetTest(a) | Term::EmptyBagTest(a) => {
            let mut inner = params.clone();
            inner.extend(scope.iter().cloned());
            m(a, &mut Vec::new(), &inner)
        }
        _ => {
            let mut sum = 0;
            t.for_each_child(&mut |c| sum += m(c, scope, params));
            sum
        }
    }
}
