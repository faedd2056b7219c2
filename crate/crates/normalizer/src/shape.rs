//! Set/bag-generic views of terms, so each rule is written once.

use nrc_core::subst::{free_vars, subst};
use nrc_core::term::{Gens, Term};
use nrc_core::{Fresh, Type};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Set,
    Bag,
}

pub fn comp(k: Kind, head: Term, gens: Gens) -> Term {
    match k {
        Kind::Set => Term::SetComp(Box::new(head), gens),
        Kind::Bag => Term::BagComp(Box::new(head), gens),
    }
}

pub fn union(k: Kind, a: Term, b: Term) -> Term {
    match k {
        Kind::Set => Term::SetUnion(Box::new(a), Box::new(b)),
        Kind::Bag => Term::BagUnion(Box::new(a), Box::new(b)),
    }
}

pub fn empty(k: Kind, elem: Type) -> Term {
    match k {
        Kind::Set => Term::EmptySet(elem),
        Kind::Bag => Term::EmptyBag(elem),
    }
}

pub fn sing(k: Kind, e: Term) -> Term {
    match k {
        Kind::Set => Term::SetSingleton(Box::new(e)),
        Kind::Bag => Term::BagSingleton(Box::new(e)),
    }
}

pub fn where_(k: Kind, body: Term, cond: Term) -> Term {
    match k {
        Kind::Set => Term::WhereSet(Box::new(body), Box::new(cond)),
        Kind::Bag => Term::WhereBag(Box::new(body), Box::new(cond)),
    }
}

pub fn empty_test(k: Kind, e: Term) -> Term {
    match k {
        Kind::Set => Term::EmptySetTest(Box::new(e)),
        Kind::Bag => Term::EmptyBagTest(Box::new(e)),
    }
}

pub fn as_comp(t: &Term) -> Option<(Kind, &Term, &Gens)> {
    match t {
        Term::SetComp(h, g) => Some((Kind::Set, h, g)),
        Term::BagComp(h, g) => Some((Kind::Bag, h, g)),
        _ => None,
    }
}

pub fn as_union(t: &Term) -> Option<(Kind, &Term, &Term)> {
    match t {
        Term::SetUnion(a, b) => Some((Kind::Set, a, b)),
        Term::BagUnion(a, b) => Some((Kind::Bag, a, b)),
        _ => None,
    }
}

pub fn as_where(t: &Term) -> Option<(Kind, &Term, &Term)> {
    match t {
        Term::WhereSet(a, c) => Some((Kind::Set, a, c)),
        Term::WhereBag(a, c) => Some((Kind::Bag, a, c)),
        _ => None,
    }
}

pub fn as_empty(t: &Term) -> Option<(Kind, &Type)> {
    match t {
        Term::EmptySet(e) => Some((Kind::Set, e)),
        Term::EmptyBag(e) => Some((Kind::Bag, e)),
        _ => None,
    }
}

pub fn as_sing(t: &Term) -> Option<(Kind, &Term)> {
    match t {
        Term::SetSingleton(e) => Some((Kind::Set, e)),
        Term::BagSingleton(e) => Some((Kind::Bag, e)),
        _ => None,
    }
}

/// Renames the binders of `gens` that lie in `avoid`, adjusting later
/// generators and `body`.
pub fn rename_binders(gens: &Gens, body: &Term, avoid: &BTreeSet<String>, fresh: &mut Fresh) -> (Gens, Term) {
    let mut gens = gens.clone();
    let mut body = body.clone();
    for i in 0..gens.len() {
        let x = gens[i].0.clone();
        if !avoid.contains(&x) {
            continue;
        }
        let x2 = fresh.name(&x);
        let rest = Term::SetComp(Box::new(body.clone()), gens[i + 1..].to_vec());
        let Term::SetComp(b2, rest2) = subst(&rest, &x, &Term::Var(x2.clone()), fresh) else { unreachable!() };
        gens[i].0 = x2;
        gens.truncate(i + 1);
        gens.extend(rest2);
        body = *b2;
    }
    (gens, body)
}

/// Free variables of a telescope together with the term it scopes over.
pub fn free_vars_scope(gens: &Gens, body: &Term) -> BTreeSet<String> {
    let t = Term::SetComp(Box::new(body.clone()), gens.clone());
    free_vars(&t)
}

pub fn binders(gens: &Gens) -> BTreeSet<String> {
    gens.iter().map(|(x, _)| x.clone()).collect()
}
