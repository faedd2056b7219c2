//! Query lifting: every collection-typed subterm of a normal form becomes a
//! graph over its comprehension context, defined in the shredding environment.

use crate::env::ShreddingEnv;
use crate::ShredError;
use nrc_core::subst::all_vars;
use nrc_core::typecheck::gens_types;
use nrc_core::{Ctx, Fresh, Gens, Signature, Term};
use nrc_normalize::is_normal_form_in;
use nrc_normalize::shape::{as_comp, as_sing, as_where, comp, empty, rename_binders, sing, where_, Kind};
use std::collections::BTreeSet;

/// Supply of graph variables `phi1`, `phi2`, ... in traversal order.
#[derive(Clone, Debug)]
pub struct GraphNames {
    prefix: String,
    next: usize,
}

impl GraphNames {
    /// Names that cannot clash with the variables of `t` or the entries of `env`.
    pub fn avoiding(t: &Term, env: &ShreddingEnv) -> GraphNames {
        let vars = all_vars(t);
        let mut prefix = "phi".to_string();
        while vars
            .iter()
            .any(|v| v.strip_prefix(prefix.as_str()).is_some_and(|r| r.bytes().all(|b| b.is_ascii_digit())))
        {
            prefix.push('_');
        }
        let next =
            env.names().filter_map(|p| p.strip_prefix(prefix.as_str())?.parse::<usize>().ok()).max().unwrap_or(0);
        GraphNames { prefix, next }
    }

    pub fn fresh(&mut self) -> String {
        self.next += 1;
        format!("{}{}", self.prefix, self.next)
    }
}

/// `φ ⊛ dom(Θ)`.
pub fn application(phi: &str, theta: &Gens) -> Term {
    Term::GraphApp(Box::new(Term::Var(phi.to_string())), theta.iter().map(|(x, _)| Term::Var(x.clone())).collect())
}

/// Shreds the normal form `t`, whose free variables are bound by the set
/// telescope `theta`, extending `env`.
pub fn shred(env: &ShreddingEnv, theta: &Gens, t: &Term, sig: &Signature) -> Result<(Term, ShreddingEnv), ShredError> {
    let tys = gens_types(&Ctx::new(), theta, sig, true).map_err(ShredError::Type)?;
    let ctx = Ctx::from_pairs(theta.iter().map(|(x, _)| x.clone()).zip(tys));
    is_normal_form_in(t, &ctx, sig).map_err(|e| ShredError::NotNormal(e.to_string()))?;
    let scope = Term::SetComp(Box::new(t.clone()), theta.clone());
    let mut s = Shredder { names: GraphNames::avoiding(&scope, env), fresh: Fresh::avoiding(&scope) };
    s.go(env.clone(), theta, t)
}

struct Shredder {
    names: GraphNames,
    fresh: Fresh,
}

fn kind_of(t: &Term) -> Option<Kind> {
    match t {
        Term::SetUnion(..) | Term::SetComp(..) | Term::EmptySet(_) | Term::SetSingleton(_) | Term::WhereSet(..) => {
            Some(Kind::Set)
        }
        Term::BagUnion(..) | Term::BagComp(..) | Term::EmptyBag(_) | Term::BagSingleton(_) | Term::WhereBag(..) => {
            Some(Kind::Bag)
        }
        _ => None,
    }
}

/// Non-empty leaves of a union tree, left to right.
fn branches<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
    match t {
        Term::SetUnion(a, b) | Term::BagUnion(a, b) => {
            branches(a, out);
            branches(b, out);
        }
        Term::EmptySet(_) | Term::EmptyBag(_) => {}
        _ => out.push(t),
    }
}

fn empty_elem(t: &Term) -> Option<&nrc_core::Type> {
    match t {
        Term::SetUnion(a, _) | Term::BagUnion(a, _) => empty_elem(a),
        Term::EmptySet(e) | Term::EmptyBag(e) => Some(e),
        _ => None,
    }
}

fn graph(k: Kind, theta: Gens, body: Term) -> Term {
    match k {
        Kind::Set => Term::GraphSet(theta, Box::new(body)),
        Kind::Bag => Term::GraphBag(theta, Box::new(body)),
    }
}

/// The set generator standing for a bag generator inside a graph domain.
fn as_set_generator(g: &Term) -> Term {
    match g {
        Term::Promote(q) => (**q).clone(),
        _ => Term::Dedup(Box::new(g.clone())),
    }
}

impl Shredder {
    fn go(&mut self, env: ShreddingEnv, theta: &Gens, m: &Term) -> Result<(Term, ShreddingEnv), ShredError> {
        if let Term::Record(fs) = m {
            let mut env = env;
            let mut out = Vec::with_capacity(fs.len());
            for (l, f) in fs {
                let (f2, e2) = self.go(env, theta, f)?;
                env = e2;
                out.push((l.clone(), f2));
            }
            return Ok((Term::Record(out), env));
        }
        match kind_of(m) {
            Some(k) => self.collection(env, theta, m, k),
            None => Ok((m.clone(), env)),
        }
    }

    fn collection(
        &mut self,
        env: ShreddingEnv,
        theta: &Gens,
        m: &Term,
        k: Kind,
    ) -> Result<(Term, ShreddingEnv), ShredError> {
        let phi = self.names.fresh();
        let mut bs = Vec::new();
        branches(m, &mut bs);
        match bs.as_slice() {
            [] => {
                let elem = empty_elem(m).ok_or_else(|| ShredError::Shape(format!("not a union tree: {}", m)))?;
                let body = graph(k, theta.clone(), empty(k, elem.clone()));
                Ok((application(&phi, theta), env.extend(&phi, body)))
            }
            [c] => self.comprehension(env, theta, c, k, &phi),
            _ => {
                let mut env = env;
                let mut psis = Vec::with_capacity(bs.len());
                for c in &bs {
                    let psi = self.names.fresh();
                    let (app, e2) = self.comprehension(env, theta, c, k, &psi)?;
                    if app != application(&psi, theta) {
                        return Err(ShredError::Shape(format!("union branch shredded to {}", app)));
                    }
                    env = e2;
                    psis.push(psi);
                }
                let body = psis
                    .iter()
                    .map(|p| env.lookup(p).cloned().expect("just defined"))
                    .reduce(|a, b| nrc_normalize::shape::union(k, a, b))
                    .expect("two or more branches");
                if env.contains(&phi) {
                    return Err(ShredError::Fresh(phi));
                }
                Ok((application(&phi, theta), env.without(&psis).extend(&phi, body)))
            }
        }
    }

    fn comprehension(
        &mut self,
        env: ShreddingEnv,
        theta: &Gens,
        c: &Term,
        k: Kind,
        phi: &str,
    ) -> Result<(Term, ShreddingEnv), ShredError> {
        let (head, gens) = match as_comp(c) {
            Some((_, h, g)) => (h.clone(), g.clone()),
            None => (c.clone(), Vec::new()),
        };
        let (gens, head) = self.distinct_binders(theta, gens, head);
        let (single, guard) = match as_where(&head) {
            Some((_, s, g)) => (s, Some(g)),
            None => (&head, None),
        };
        let Some((_, elem)) = as_sing(single) else {
            return Err(ShredError::Shape(format!("comprehension head is not a singleton: {}", head)));
        };
        let mut inner_theta = theta.clone();
        inner_theta.extend(
            gens.iter().map(|(x, g)| (x.clone(), if k == Kind::Bag { as_set_generator(g) } else { g.clone() })),
        );
        let (shredded, env) = self.go(env, &inner_theta, elem)?;
        if env.contains(phi) {
            return Err(ShredError::Fresh(phi.to_string()));
        }
        let mut new_head = sing(k, shredded);
        if let Some(g) = guard {
            new_head = where_(k, new_head, g.clone());
        }
        let body = if gens.is_empty() { new_head } else { comp(k, new_head, gens) };
        Ok((application(phi, theta), env.extend(phi, graph(k, theta.clone(), body))))
    }

    /// Renames binders so that the extended telescope has no repeated names.
    fn distinct_binders(&mut self, theta: &Gens, mut gens: Gens, mut head: Term) -> (Gens, Term) {
        let mut seen: BTreeSet<String> = theta.iter().map(|(x, _)| x.clone()).collect();
        for i in 0..gens.len() {
            let x = gens[i].0.clone();
            if seen.contains(&x) {
                let avoid = BTreeSet::from([x]);
                let (rest, h) = rename_binders(&gens[i..].to_vec(), &head, &avoid, &mut self.fresh);
                gens.truncate(i);
                gens.extend(rest);
                head = h;
            }
            seen.insert(gens[i].0.clone());
        }
        (gens, head)
    }
}
