//! Translation of graph constructs into plain comprehensions over flat
//! (key, output) rows.

use nrc_core::records::{flat_fields, flat_type, unflatten};
use nrc_core::term::{Base, Gens, Term};
use nrc_core::{typecheck, Ctx, Fresh, Signature, Type, TypeError};
use nrc_normalize::shape::{comp, sing, where_, Kind};

/// Column prefix of the `i`th graph argument (1-based).
pub fn key_prefix(i: usize) -> String {
    format!("k{}", i)
}

pub const OUT_PREFIX: &str = "out";

/// Flat record type of the rows representing a graph with these argument and
/// output element types.
pub fn row_type(args: &[Type], out: &Type) -> Type {
    let mut fs: Vec<(String, Type)> =
        args.iter().enumerate().flat_map(|(i, t)| flat_type(t, &key_prefix(i + 1))).collect();
    fs.extend(flat_type(out, OUT_PREFIX));
    Type::record(fs)
}

/// A row built from argument and output terms.
pub fn row(args: &[(Term, Type)], out: (&Term, &Type)) -> Term {
    let mut fs: Vec<(String, Term)> =
        args.iter().enumerate().flat_map(|(i, (t, ty))| flat_fields(t, ty, &key_prefix(i + 1))).collect();
    fs.extend(flat_fields(out.0, out.1, OUT_PREFIX));
    nrc_core::types::sort_fields(&mut fs);
    Term::Record(fs)
}

/// Collection type replacing a graph type; other types map structurally.
pub fn graph_free_type(t: &Type) -> Type {
    match t {
        Type::Base(_) => t.clone(),
        Type::Record(fs) => Type::record(fs.iter().map(|(l, t)| (l.clone(), graph_free_type(t))).collect()),
        Type::Set(e) => Type::set(graph_free_type(e)),
        Type::Bag(e) => Type::bag(graph_free_type(e)),
        Type::Fun(a, b) => Type::fun(graph_free_type(a), graph_free_type(b)),
        Type::Graph(args, out) => {
            let args: Vec<Type> = args.iter().map(graph_free_type).collect();
            match &**out {
                Type::Set(e) => Type::set(row_type(&args, &graph_free_type(e))),
                Type::Bag(e) => Type::bag(row_type(&args, &graph_free_type(e))),
                o => graph_free_type(o),
            }
        }
    }
}

/// Replaces every graph abstraction and application by comprehensions.
/// Terms without graph constructs are returned unchanged.
pub fn eliminate_graphs(t: &Term, ctx: &Ctx, sig: &Signature, fresh: &mut Fresh) -> Result<Term, TypeError> {
    if !t.has_graphs() {
        return Ok(t.clone());
    }
    fresh.reserve(t);
    let new_ctx = Ctx::from_pairs(ctx.entries().iter().map(|(x, t)| (x.clone(), graph_free_type(t))));
    Elim { sig, fresh }.go(t, &mut ctx.clone(), &mut new_ctx.clone())
}

struct Elim<'a> {
    sig: &'a Signature,
    fresh: &'a mut Fresh,
}

impl Elim<'_> {
    /// `old` types the input, `new` the output.
    fn go(&mut self, t: &Term, old: &mut Ctx, new: &mut Ctx) -> Result<Term, TypeError> {
        if !t.has_graphs() {
            return Ok(t.clone());
        }
        match t {
            Term::Lam(x, ty, body) => {
                old.push(x, ty.clone());
                new.push(x, graph_free_type(ty));
                let b = self.go(body, old, new);
                old.pop();
                new.pop();
                Ok(Term::Lam(x.clone(), graph_free_type(ty), Box::new(b?)))
            }
            Term::SetComp(h, gens) | Term::BagComp(h, gens) => {
                let k = if matches!(t, Term::SetComp(..)) { Kind::Set } else { Kind::Bag };
                let (n_old, n_new) = (old.len(), new.len());
                let r = self.gens(gens, k == Kind::Set, old, new).and_then(|(g2, _)| {
                    let h2 = self.go(h, old, new)?;
                    Ok(comp(k, h2, g2))
                });
                old.truncate(n_old);
                new.truncate(n_new);
                r
            }
            Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
                let bag = matches!(t, Term::GraphBag(..));
                let (n_old, n_new) = (old.len(), new.len());
                let r = self.graph(gens, body, bag, old, new);
                old.truncate(n_old);
                new.truncate(n_new);
                r
            }
            Term::GraphApp(g, args) => self.app(g, args, old, new),
            _ => {
                let mut err = None;
                let r = t.map_children(&mut |c| match self.go(c, old, new) {
                    Ok(c2) => c2,
                    Err(e) => {
                        err.get_or_insert(e);
                        c.clone()
                    }
                });
                err.map_or(Ok(r), Err)
            }
        }
    }

    /// Translates a telescope, leaving its binders pushed on both contexts.
    fn gens(&mut self, gens: &Gens, set: bool, old: &mut Ctx, new: &mut Ctx) -> Result<(Gens, Vec<Type>), TypeError> {
        let mut out = Vec::new();
        let mut tys = Vec::new();
        for (x, g) in gens {
            let g_old = typecheck(old, g, self.sig)?;
            let g2 = self.go(g, old, new)?;
            let e_old = g_old.elem().cloned().ok_or_else(|| TypeError::Mismatch {
                context: "generator".into(),
                expected: if set { "a set" } else { "a bag" }.into(),
                found: g_old.to_string(),
            })?;
            old.push(x, e_old.clone());
            new.push(x, graph_free_type(&e_old));
            tys.push(graph_free_type(&e_old));
            out.push((x.clone(), g2));
        }
        Ok((out, tys))
    }

    fn graph(&mut self, gens: &Gens, body: &Term, bag: bool, old: &mut Ctx, new: &mut Ctx) -> Result<Term, TypeError> {
        let (mut g2, tys) = self.gens(gens, true, old, new)?;
        let b2 = self.go(body, old, new)?;
        let bt = typecheck(new, &b2, self.sig)?;
        let out = bt.elem().cloned().ok_or_else(|| TypeError::GraphOutputNotCollection(bt.to_string()))?;
        let y = self.fresh.name("y");
        let keys: Vec<(Term, Type)> =
            g2.iter().zip(&tys).map(|((x, _), t)| (Term::Var(x.clone()), t.clone())).collect();
        let head = row(&keys, (&Term::Var(y.clone()), &out));
        if bag {
            for (_, src) in g2.iter_mut() {
                *src = Term::Promote(Box::new(src.clone()));
            }
        }
        g2.push((y, b2));
        Ok(comp(if bag { Kind::Bag } else { Kind::Set }, sing(if bag { Kind::Bag } else { Kind::Set }, head), g2))
    }

    fn app(&mut self, g: &Term, args: &[Term], old: &mut Ctx, new: &mut Ctx) -> Result<Term, TypeError> {
        let Type::Graph(arg_tys, out) = typecheck(old, g, self.sig)? else {
            return Err(TypeError::Mismatch {
                context: "graph application".into(),
                expected: "a graph".into(),
                found: g.to_string(),
            });
        };
        let g2 = self.go(g, old, new)?;
        let mut args2 = Vec::new();
        for a in args {
            args2.push(self.go(a, old, new)?);
        }
        let (k, out_elem) = match &*out {
            Type::Set(e) => (Kind::Set, graph_free_type(e)),
            Type::Bag(e) => (Kind::Bag, graph_free_type(e)),
            o => return Err(TypeError::GraphOutputNotCollection(o.to_string())),
        };
        let p = self.fresh.name("p");
        let pv = Term::Var(p.clone());
        let guard = args2
            .iter()
            .zip(&arg_tys)
            .enumerate()
            .flat_map(|(i, (a, ty))| flat_fields(a, &graph_free_type(ty), &key_prefix(i + 1)))
            .map(|(l, f)| Term::Prim("==".into(), vec![Term::Proj(Box::new(pv.clone()), l), f]))
            .reduce(|a, b| Term::Prim("and".into(), vec![a, b]))
            .unwrap_or(Term::Const(Base::Bool(true)));
        let head = where_(k, sing(k, unflatten(&pv, &out_elem, OUT_PREFIX)), guard);
        Ok(comp(k, head, vec![(p, g2)]))
    }
}
