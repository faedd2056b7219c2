//! Free variables, capture-avoiding substitution and alpha-equivalence.

use crate::fresh::Fresh;
use crate::term::{Gens, Term};
use std::collections::{BTreeMap, BTreeSet};

pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_into(t, &mut Vec::new(), &mut out);
    out
}

pub fn is_free_in(x: &str, t: &Term) -> bool {
    free_vars(t).contains(x)
}

/// Free variables of a generator telescope (binders scope over later sources only).
pub fn free_vars_gens(gens: &Gens) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    for (x, g) in gens {
        fv_into(g, &mut bound, &mut out);
        bound.push(x.clone());
    }
    out
}

fn fv_into(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, _, body) => {
            bound.push(x.clone());
            fv_into(body, bound, out);
            bound.pop();
        }
        Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
            let n = bound.len();
            for (x, g) in gens {
                fv_into(g, bound, out);
                bound.push(x.clone());
            }
            fv_into(h, bound, out);
            bound.truncate(n);
        }
        Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
            let n = bound.len();
            for (x, g) in gens {
                fv_into(g, bound, out);
                bound.push(x.clone());
            }
            fv_into(body, bound, out);
            bound.truncate(n);
        }
        _ => t.for_each_child(&mut |c| fv_into(c, bound, out)),
    }
}

/// All variable names occurring in `t`, bound or free.
pub fn all_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    all_into(t, &mut out);
    out
}

fn all_into(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) | Term::Lam(x, _, _) => {
            out.insert(x.clone());
        }
        Term::SetComp(_, gens) | Term::BagComp(_, gens) | Term::GraphSet(gens, _) | Term::GraphBag(gens, _) => {
            for (x, _) in gens {
                out.insert(x.clone());
            }
        }
        _ => {}
    }
    t.for_each_child(&mut |c| all_into(c, out));
}

/// `t[val/x]`.
pub fn subst(t: &Term, x: &str, val: &Term, fresh: &mut Fresh) -> Term {
    let mut m = BTreeMap::new();
    m.insert(x.to_string(), val.clone());
    subst_map(t, &m, fresh)
}

/// Simultaneous capture-avoiding substitution.
pub fn subst_map(t: &Term, m: &BTreeMap<String, Term>, fresh: &mut Fresh) -> Term {
    if m.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(y) => m.get(y).cloned().unwrap_or_else(|| t.clone()),
        Term::Lam(y, ty, body) => {
            let (mut gens, body) =
                subst_binders(&[(y.clone(), Term::Const(crate::term::Base::Bool(true)))], body, m, fresh);
            let (y2, _) = gens.pop().unwrap();
            Term::Lam(y2, ty.clone(), Box::new(body))
        }
        Term::SetComp(h, gens) => {
            let (g2, h2) = subst_binders(gens, h, m, fresh);
            Term::SetComp(Box::new(h2), g2)
        }
        Term::BagComp(h, gens) => {
            let (g2, h2) = subst_binders(gens, h, m, fresh);
            Term::BagComp(Box::new(h2), g2)
        }
        Term::GraphSet(gens, body) => {
            let (g2, b2) = subst_binders(gens, body, m, fresh);
            Term::GraphSet(g2, Box::new(b2))
        }
        Term::GraphBag(gens, body) => {
            let (g2, b2) = subst_binders(gens, body, m, fresh);
            Term::GraphBag(g2, Box::new(b2))
        }
        _ => t.map_children(&mut |c| subst_map(c, m, fresh)),
    }
}

/// Substitutes through a telescope and the term it scopes over, renaming
/// binders that would capture a free variable of a substituted value.
fn subst_binders(gens: &[(String, Term)], body: &Term, m: &BTreeMap<String, Term>, fresh: &mut Fresh) -> (Gens, Term) {
    let mut m = m.clone();
    let mut out = Vec::with_capacity(gens.len());
    for (i, (x, g)) in gens.iter().enumerate() {
        let g2 = subst_map(g, &m, fresh);
        m.remove(x);
        let rest_mentions = |m: &BTreeMap<String, Term>| {
            m.keys().any(|k| gens[i + 1..].iter().any(|(_, s)| is_free_in_scope(k, s)) || is_free_in(k, body))
        };
        let captures = m.values().any(|v| is_free_in(x, v)) && rest_mentions(&m);
        if captures {
            let x2 = fresh.name(x);
            m.insert(x.clone(), Term::Var(x2.clone()));
            out.push((x2, g2));
        } else {
            out.push((x.clone(), g2));
        }
    }
    let body2 = subst_map(body, &m, fresh);
    (out, body2)
}

fn is_free_in_scope(k: &str, t: &Term) -> bool {
    is_free_in(k, t)
}

/// Renames every bound variable to a canonical name so that alpha-equivalent
/// terms become syntactically equal.
pub fn canonicalize(t: &Term) -> Term {
    let mut n = 0usize;
    canon(t, &BTreeMap::new(), &mut n)
}

fn canon(t: &Term, env: &BTreeMap<String, String>, n: &mut usize) -> Term {
    let bind = |x: &str, env: &mut BTreeMap<String, String>, n: &mut usize| {
        let c = format!("%{}", n);
        *n += 1;
        env.insert(x.to_string(), c.clone());
        c
    };
    match t {
        Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
        Term::Lam(x, ty, body) => {
            let mut e = env.clone();
            let c = bind(x, &mut e, n);
            Term::Lam(c, ty.clone(), Box::new(canon(body, &e, n)))
        }
        Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
            let mut e = env.clone();
            let mut g2 = Vec::new();
            for (x, g) in gens {
                let s = canon(g, &e, n);
                let c = bind(x, &mut e, n);
                g2.push((c, s));
            }
            let h2 = Box::new(canon(h, &e, n));
            if matches!(t, Term::SetComp(..)) {
                Term::SetComp(h2, g2)
            } else {
                Term::BagComp(h2, g2)
            }
        }
        Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
            let mut e = env.clone();
            let mut g2 = Vec::new();
            for (x, g) in gens {
                let s = canon(g, &e, n);
                let c = bind(x, &mut e, n);
                g2.push((c, s));
            }
            let b2 = Box::new(canon(body, &e, n));
            if matches!(t, Term::GraphSet(..)) {
                Term::GraphSet(g2, b2)
            } else {
                Term::GraphBag(g2, b2)
            }
        }
        _ => t.map_children(&mut |c| canon(c, env, n)),
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    canonicalize(a) == canonicalize(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::*;

    #[test]
    fn fv_respects_binders() {
        let t = comp_bag(sing_bag(proj(var("x"), "a")), vec![("x", var("n")), ("y", var("x"))]);
        let fv: Vec<_> = free_vars(&t).into_iter().collect();
        assert_eq!(fv, ["n"]);
    }

    #[test]
    fn tables_are_not_variables() {
        let t = comp_bag(sing_bag(var("c")), vec![("c", table("Cand"))]);
        assert!(free_vars(&t).is_empty());
    }

    #[test]
    fn lambda_shadowing() {
        let id = Term::Lam("x".into(), crate::types::Type::INT, Box::new(var("x")));
        let mut f = Fresh::new();
        assert_eq!(subst(&id, "x", &int(3), &mut f), id);
    }

    #[test]
    fn binder_passes_through() {
        let t = comp_set(sing_set(proj(var("x"), "l")), vec![("y", table("t"))]);
        let r = record(vec![("l", int(1))]);
        let mut f = Fresh::new();
        let got = subst(&t, "x", &r, &mut f);
        assert_eq!(got, comp_set(sing_set(proj(r, "l")), vec![("y", table("t"))]));
    }

    #[test]
    fn capture_is_avoided() {
        // for (y <- t) [x]  with x := y
        let t = comp_bag(sing_bag(var("x")), vec![("y", table("t"))]);
        let mut f = Fresh::new();
        let got = subst(&t, "x", &var("y"), &mut f);
        match &got {
            Term::BagComp(h, gens) => {
                assert_ne!(gens[0].0, "y");
                assert_eq!(**h, sing_bag(var("y")));
            }
            _ => panic!(),
        }
        assert!(free_vars(&got).contains("y"));
    }

    #[test]
    fn alpha_equivalence() {
        let a = comp_bag(sing_bag(var("x")), vec![("x", table("t"))]);
        let b = comp_bag(sing_bag(var("z")), vec![("z", table("t"))]);
        assert!(alpha_eq(&a, &b));
        let c = comp_bag(sing_bag(var("w")), vec![("z", table("t"))]);
        assert!(!alpha_eq(&a, &c));
    }
}
