//! One-step rewriting, leftmost-outermost.

use crate::shape::*;
use nrc_core::subst::{free_vars, is_free_in, subst};
use nrc_core::term::{and, eq, not, proj, Gens, Term};
use nrc_core::typecheck::gens_types;
use nrc_core::{typecheck, Ctx, Fresh, Signature, Type, TypeError};

/// Where a subterm sits relative to its parent; a few rules only fire in
/// some positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pos {
    Term,
    GenSource,
    UnderDedup,
    UnderProj,
}

pub struct Rewriter<'a> {
    pub sig: &'a Signature,
    pub fresh: &'a mut Fresh,
}

type Step = Result<Option<(&'static str, Term)>, TypeError>;

impl<'a> Rewriter<'a> {
    /// Fires one rule at the leftmost-outermost redex of `t`.
    pub fn step(&mut self, t: &Term, ctx: &Ctx) -> Step {
        let mut c = ctx.clone();
        self.visit(t, &mut c, Pos::Term)
    }

    fn ty(&self, ctx: &Ctx, t: &Term) -> Result<Type, TypeError> {
        typecheck(ctx, t, self.sig)
    }

    fn flat_gens(&self, ctx: &Ctx, gens: &Gens) -> Result<bool, TypeError> {
        Ok(gens_types(ctx, gens, self.sig, false)?.iter().all(|t| t.is_flat_elem()))
    }

    fn visit(&mut self, t: &Term, ctx: &mut Ctx, pos: Pos) -> Step {
        if let Some(r) = self.at(t, ctx, pos)? {
            return Ok(Some(r));
        }
        match t {
            Term::Lam(..) | Term::GraphSet(..) | Term::GraphBag(..) | Term::GraphApp(..) => Ok(None),
            Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
                let set = matches!(t, Term::SetComp(..));
                let n = ctx.len();
                let tys = gens_types(ctx, gens, self.sig, set)?;
                for ((x, _), ty) in gens.iter().zip(&tys) {
                    ctx.push(x, ty.clone());
                }
                let r = self.visit(h, ctx, Pos::Term);
                ctx.truncate(n);
                if let Some((rule, h2)) = r? {
                    let h2 = Box::new(h2);
                    return Ok(Some((
                        rule,
                        if set { Term::SetComp(h2, gens.clone()) } else { Term::BagComp(h2, gens.clone()) },
                    )));
                }
                for i in 0..gens.len() {
                    for ((x, _), ty) in gens[..i].iter().zip(&tys) {
                        ctx.push(x, ty.clone());
                    }
                    let r = self.visit(&gens[i].1, ctx, Pos::GenSource);
                    ctx.truncate(n);
                    if let Some((rule, g2)) = r? {
                        let mut gs = gens.clone();
                        gs[i].1 = g2;
                        return Ok(Some((
                            rule,
                            if set { Term::SetComp(h.clone(), gs) } else { Term::BagComp(h.clone(), gs) },
                        )));
                    }
                }
                Ok(None)
            }
            _ => {
                let child_pos = match t {
                    Term::Dedup(_) => Pos::UnderDedup,
                    Term::Proj(..) => Pos::UnderProj,
                    _ => Pos::Term,
                };
                let mut kids = Vec::new();
                t.for_each_child(&mut |c| kids.push(c));
                for (i, k) in kids.iter().enumerate() {
                    if let Some((rule, k2)) = self.visit(k, ctx, child_pos)? {
                        let mut j = 0;
                        let mut k2 = Some(k2);
                        let t2 = t.map_children(&mut |c| {
                            let r = if j == i { k2.take().unwrap() } else { c.clone() };
                            j += 1;
                            r
                        });
                        return Ok(Some((rule, t2)));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Rules whose redex is `t` itself.
    fn at(&mut self, t: &Term, ctx: &Ctx, pos: Pos) -> Step {
        match t {
            Term::App(f, a) => {
                if let Term::Lam(x, _, body) = &**f {
                    return Ok(Some(("beta", subst(body, x, a, self.fresh))));
                }
            }
            Term::Proj(r, l) => {
                if let Term::Record(fs) = &**r {
                    if let Some((_, v)) = fs.iter().find(|(k, _)| k == l) {
                        return Ok(Some(("record-proj", v.clone())));
                    }
                }
            }
            Term::SetComp(..) | Term::BagComp(..) => return self.comp_rules(t, ctx),
            Term::WhereSet(..) | Term::WhereBag(..) => {
                if let Some(r) = self.where_rules(t, ctx)? {
                    return Ok(Some(r));
                }
            }
            Term::Dedup(m) => {
                let r = match &**m {
                    Term::EmptyBag(e) => Some(("dedup-empty", Term::EmptySet(e.clone()))),
                    Term::BagSingleton(e) => Some(("dedup-singleton", Term::SetSingleton(e.clone()))),
                    Term::BagUnion(a, b) => Some((
                        "dedup-union",
                        Term::SetUnion(Box::new(Term::Dedup(a.clone())), Box::new(Term::Dedup(b.clone()))),
                    )),
                    // Generators of non-flat type are normalized away first.
                    Term::BagComp(h, gens) if self.flat_gens(ctx, gens)? => Some((
                        "dedup-comprehension",
                        Term::SetComp(
                            Box::new(Term::Dedup(h.clone())),
                            gens.iter().map(|(x, g)| (x.clone(), Term::Dedup(Box::new(g.clone())))).collect(),
                        ),
                    )),
                    Term::WhereBag(a, c) => {
                        Some(("dedup-where", Term::WhereSet(Box::new(Term::Dedup(a.clone())), c.clone())))
                    }
                    Term::Promote(a) => Some(("dedup-promote", (**a).clone())),
                    _ => None,
                };
                if r.is_some() {
                    return Ok(r);
                }
            }
            Term::Promote(m) => {
                let r = match &**m {
                    Term::EmptySet(e) => Some(("promote-empty", Term::EmptyBag(e.clone()))),
                    Term::WhereSet(a, c) => {
                        Some(("promote-where", Term::WhereBag(Box::new(Term::Promote(a.clone())), c.clone())))
                    }
                    _ => None,
                };
                if r.is_some() {
                    return Ok(r);
                }
            }
            Term::EmptySetTest(m) | Term::EmptyBagTest(m) => {
                let k = if matches!(t, Term::EmptySetTest(_)) { Kind::Set } else { Kind::Bag };
                let mt = self.ty(ctx, m)?;
                if !mt.is_flat_collection() {
                    let x = self.fresh.name("x");
                    let wrapped = comp(k, sing(k, Term::Record(vec![])), vec![(x, (**m).clone())]);
                    return Ok(Some(("empty-flatten", empty_test(k, wrapped))));
                }
            }
            Term::Member(m, n) => return Ok(Some(("member-expand", self.expand_member(m, n, ctx)?))),
            Term::Var(x) if pos != Pos::UnderProj => {
                if let Some(Type::Record(fs)) = ctx.lookup(x) {
                    let fields = fs.iter().map(|(l, _)| (l.clone(), proj(t.clone(), l))).collect();
                    return Ok(Some(("record-eta", Term::Record(fields))));
                }
            }
            _ => {}
        }
        Ok(self.standardize(t, pos))
    }

    /// Moves a bare table, promotion, bag difference or deduplicated
    /// table/difference in term position into a generator, so that every
    /// collection in the result is a union of comprehensions.
    fn standardize(&mut self, t: &Term, pos: Pos) -> Option<(&'static str, Term)> {
        let bag_gen = match (t, pos) {
            (_, Pos::GenSource) => false,
            (Term::Table(_) | Term::BagDiff(..), Pos::UnderDedup) => false,
            (Term::Table(_), _) => true,
            (Term::Promote(_), _) => true,
            (Term::BagDiff(..), _) => true,
            _ => false,
        };
        if bag_gen {
            let z = self.fresh.name("z");
            let e = comp(Kind::Bag, sing(Kind::Bag, Term::Var(z.clone())), vec![(z, t.clone())]);
            return Some(("eta-bag", e));
        }
        if pos == Pos::Term {
            if let Term::Dedup(m) = t {
                if matches!(**m, Term::Table(_) | Term::BagDiff(..)) {
                    let z = self.fresh.name("z");
                    let e = comp(Kind::Set, sing(Kind::Set, Term::Var(z.clone())), vec![(z, t.clone())]);
                    return Some(("eta-set", e));
                }
            }
        }
        None
    }

    fn expand_member(&mut self, m: &Term, n: &Term, ctx: &Ctx) -> Result<Term, TypeError> {
        let nt = self.ty(ctx, n)?;
        let elem = nt.elem().cloned().unwrap_or(Type::unit());
        let x = self.fresh.name("x");
        let src = match nt {
            Type::Bag(_) => Term::Dedup(Box::new(n.clone())),
            _ => n.clone(),
        };
        let cond = match &elem {
            Type::Record(fs) if !fs.is_empty() => {
                fs.iter().map(|(l, _)| eq(proj(Term::Var(x.clone()), l), proj(m.clone(), l))).reduce(and).unwrap()
            }
            Type::Record(_) => Term::Const(nrc_core::Base::Bool(true)),
            _ => eq(Term::Var(x.clone()), m.clone()),
        };
        let q = comp(Kind::Set, where_(Kind::Set, sing(Kind::Set, Term::Record(vec![])), cond), vec![(x, src)]);
        Ok(not(Term::EmptySetTest(Box::new(q))))
    }

    fn where_rules(&mut self, t: &Term, ctx: &Ctx) -> Step {
        let (k, body, c) = as_where(t).unwrap();
        if c.is_true() {
            return Ok(Some(("where-true", body.clone())));
        }
        if c.is_false() {
            let bt = self.ty(ctx, body)?;
            return Ok(Some(("where-false", empty(k, bt.elem().cloned().unwrap_or(Type::unit())))));
        }
        if as_empty(body).is_some() {
            return Ok(Some(("where-empty", body.clone())));
        }
        if let Some((_, a, b)) = as_union(body) {
            return Ok(Some((
                "where-union",
                union(k, where_(k, a.clone(), c.clone()), where_(k, b.clone(), c.clone())),
            )));
        }
        if let Some((_, h, gens)) = as_comp(body) {
            let fv = free_vars(c);
            let (gens, h) = rename_binders(gens, h, &fv, self.fresh);
            return Ok(Some(("where-comprehension", comp(k, where_(k, h, c.clone()), gens))));
        }
        if let Some((_, inner, c2)) = as_where(body) {
            return Ok(Some(("where-where", where_(k, inner.clone(), and(c.clone(), c2.clone())))));
        }
        Ok(None)
    }

    fn comp_rules(&mut self, t: &Term, ctx: &Ctx) -> Step {
        let (k, head, gens) = as_comp(t).unwrap();
        if as_empty(head).is_some() {
            return Ok(Some(("comprehension-empty-head", head.clone())));
        }
        if gens.iter().any(|(_, g)| as_empty(g).is_some()) {
            let ct = self.ty(ctx, t)?;
            return Ok(Some(("comprehension-empty-generator", empty(k, ct.elem().cloned().unwrap()))));
        }
        if let Some(i) = gens.iter().position(|(_, g)| as_sing(g).is_some()) {
            let (x, g) = &gens[i];
            let (_, n) = as_sing(g).unwrap();
            let rest = comp(k, head.clone(), gens[i + 1..].to_vec());
            let rest = subst(&rest, x, n, self.fresh);
            let (_, h2, tail) = as_comp(&rest).unwrap();
            let mut gs = gens[..i].to_vec();
            gs.extend(tail.iter().cloned());
            return Ok(Some(("comprehension-singleton-generator", comp(k, h2.clone(), gs))));
        }
        if let Some((_, a, b)) = as_union(head) {
            return Ok(Some((
                "comprehension-union-head",
                union(k, comp(k, a.clone(), gens.clone()), comp(k, b.clone(), gens.clone())),
            )));
        }
        if let Some(i) = gens.iter().position(|(_, g)| as_union(g).is_some()) {
            let (_, a, b) = as_union(&gens[i].1).unwrap();
            let mut ga = gens.clone();
            ga[i].1 = a.clone();
            let mut gb = gens.clone();
            gb[i].1 = b.clone();
            return Ok(Some((
                "comprehension-union-generator",
                union(k, comp(k, head.clone(), ga), comp(k, head.clone(), gb)),
            )));
        }
        if let Some(i) = gens.iter().position(|(_, g)| as_comp(g).is_some()) {
            let (x, g) = &gens[i];
            let (_, r, inner) = as_comp(g).unwrap();
            let later: Gens = gens[i + 1..].to_vec();
            let mut avoid = free_vars_scope(&later, head);
            avoid.extend(binders(&gens[..i].to_vec()));
            avoid.extend(binders(&later));
            avoid.insert(x.clone());
            let (inner, r) = rename_binders(inner, r, &avoid, self.fresh);
            let mut gs = gens[..i].to_vec();
            gs.extend(inner);
            gs.push((x.clone(), r));
            gs.extend(later);
            return Ok(Some(("comprehension-generator-unnest", comp(k, head.clone(), gs))));
        }
        if let Some((_, m, inner)) = as_comp(head) {
            let (inner, m) = rename_binders(inner, m, &binders(gens), self.fresh);
            let mut gs = gens.clone();
            gs.extend(inner);
            return Ok(Some(("comprehension-head-flatten", comp(k, m, gs))));
        }
        if let Some(i) = gens.iter().position(|(_, g)| as_where(g).is_some()) {
            let (_, r, c) = as_where(&gens[i].1).unwrap();
            let fv = free_vars(c);
            let mut tail = gens[i..].to_vec();
            tail[0].1 = r.clone();
            let (tail, h2) = rename_binders(&tail, head, &fv, self.fresh);
            let mut gs = gens[..i].to_vec();
            gs.extend(tail);
            return Ok(Some(("comprehension-where-generator", comp(k, where_(k, h2, c.clone()), gs))));
        }
        // Constrained eta-expansions: guarded variants first.
        if let Some((_, inner, c)) = as_where(head) {
            if is_blocking_head(k, inner) {
                let z = self.fresh_avoiding("z", c);
                let mut gs = gens.clone();
                gs.push((z.clone(), inner.clone()));
                return Ok(Some(("eta-guarded-head", comp(k, where_(k, sing(k, Term::Var(z)), c.clone()), gs))));
            }
        }
        if is_blocking_head(k, head) {
            let z = self.fresh.name("z");
            let mut gs = gens.clone();
            gs.push((z.clone(), head.clone()));
            return Ok(Some(("eta-head", comp(k, sing(k, Term::Var(z)), gs))));
        }
        Ok(None)
    }

    fn fresh_avoiding(&mut self, base: &str, t: &Term) -> String {
        loop {
            let z = self.fresh.name(base);
            if !is_free_in(&z, t) {
                return z;
            }
        }
    }
}

/// Heads that block the comprehension rules: `δ(M - N)` for sets, `ιM` and
/// `M - N` for bags.
fn is_blocking_head(k: Kind, h: &Term) -> bool {
    match (k, h) {
        (Kind::Set, Term::Dedup(m)) => matches!(**m, Term::BagDiff(..)),
        (Kind::Bag, Term::Promote(_) | Term::BagDiff(..)) => true,
        _ => false,
    }
}
