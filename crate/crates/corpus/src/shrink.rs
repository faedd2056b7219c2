//! Greedy counterexample minimization.

use nrc_core::term::{Base, Term};
use nrc_core::typecheck::gens_types;
use nrc_core::{typecheck, typecheck_closed, Ctx, Signature, Type};

/// Repeatedly replaces subterms by smaller same-typed terms (a child, a typed
/// empty collection, or a constant) while `fails` keeps holding.
pub fn shrink(t: &Term, sig: &Signature, fails: &mut dyn FnMut(&Term) -> bool) -> Term {
    let Ok(ty) = typecheck_closed(t, sig) else { return t.clone() };
    let mut cur = t.clone();
    'outer: loop {
        let mut sites = Vec::new();
        typed_sites(&cur, &mut Ctx::new(), sig, &mut Vec::new(), &mut sites);
        for (path, sty) in sites {
            let sub = at(&cur, &path).clone();
            for cand in candidates(&sub, &sty) {
                if cand.size() >= sub.size() {
                    continue;
                }
                let next = replace_at(&cur, &path, &cand);
                if typecheck_closed(&next, sig).as_ref() == Ok(&ty) && fails(&next) {
                    cur = next;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

fn candidates(t: &Term, ty: &Type) -> Vec<Term> {
    let mut out = Vec::new();
    match ty {
        Type::Set(e) => out.push(Term::EmptySet((**e).clone())),
        Type::Bag(e) => out.push(Term::EmptyBag((**e).clone())),
        Type::Base(b) => {
            out.push(Term::Const(match b {
                nrc_core::BaseType::Int => Base::Int(0),
                nrc_core::BaseType::Bool => Base::Bool(true),
                nrc_core::BaseType::String => Base::Str("a".into()),
            }));
            if *ty == Type::BOOL {
                out.push(Term::Const(Base::Bool(false)));
            }
        }
        _ => {}
    }
    t.for_each_child(&mut |c| out.push(c.clone()));
    out
}

/// Every subterm path together with the subterm's type in its context.
fn typed_sites(t: &Term, ctx: &mut Ctx, sig: &Signature, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, Type)>) {
    if let Ok(ty) = typecheck(ctx, t, sig) {
        out.push((path.clone(), ty));
    } else {
        return;
    }
    let n = ctx.len();
    match t {
        Term::Lam(x, ty, body) => {
            ctx.push(x, ty.clone());
            path.push(0);
            typed_sites(body, ctx, sig, path, out);
            path.pop();
        }
        Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
            let set = matches!(t, Term::SetComp(..));
            let Ok(tys) = gens_types(ctx, gens, sig, set) else { return };
            for (i, (x, g)) in gens.iter().enumerate() {
                path.push(i + 1);
                typed_sites(g, ctx, sig, path, out);
                path.pop();
                ctx.push(x, tys[i].clone());
            }
            path.push(0);
            typed_sites(h, ctx, sig, path, out);
            path.pop();
        }
        Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
            let Ok(tys) = gens_types(ctx, gens, sig, true) else { return };
            for (i, (x, g)) in gens.iter().enumerate() {
                path.push(i);
                typed_sites(g, ctx, sig, path, out);
                path.pop();
                ctx.push(x, tys[i].clone());
            }
            path.push(gens.len());
            typed_sites(body, ctx, sig, path, out);
            path.pop();
        }
        _ => {
            let mut i = 0;
            t.for_each_child(&mut |c| {
                path.push(i);
                typed_sites(c, ctx, sig, path, out);
                path.pop();
                i += 1;
            });
        }
    }
    ctx.truncate(n);
}

fn at<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    let Some((&i, rest)) = path.split_first() else { return t };
    let mut found = None;
    let mut k = 0;
    t.for_each_child(&mut |c| {
        if k == i {
            found = Some(c);
        }
        k += 1;
    });
    at(found.expect("valid path"), rest)
}

fn replace_at(t: &Term, path: &[usize], new: &Term) -> Term {
    let Some((&i, rest)) = path.split_first() else { return new.clone() };
    let mut k = 0;
    t.map_children(&mut |c| {
        let r = if k == i { replace_at(c, rest, new) } else { c.clone() };
        k += 1;
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nrc_core::term::*;

    #[test]
    fn shrinks_to_the_failing_core() {
        let sig = Signature::builtins().with_table("R", &[("a", nrc_core::BaseType::Int)]);
        let t = union_bag(
            comp_bag(sing_bag(proj(var("x"), "a")), vec![("x", table("R"))]),
            sing_bag(prim("+", vec![int(1), int(2)])),
        );
        // "fails" whenever the term still mentions a `+`.
        let got = shrink(&t, &sig, &mut |t| t.any(&|s| matches!(s, Term::Prim(c, _) if c == "+")));
        assert_eq!(got, sing_bag(prim("+", vec![int(1), int(2)])));
    }
}
