//! Church-style type checker.

use crate::sig::{PrimType, Signature};
use crate::term::{Gens, Term};
use crate::types::Type;

/// Typing context; later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ctx {
    entries: Vec<(String, Type)>,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Type)>>(it: I) -> Ctx {
        Ctx { entries: it.into_iter().collect() }
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn push(&mut self, x: &str, t: Type) {
        self.entries.push((x.to_string(), t));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn extended(&self, x: &str, t: Type) -> Ctx {
        let mut c = self.clone();
        c.push(x, t);
        c
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.entries.truncate(n);
    }

    pub fn entries(&self) -> &[(String, Type)] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown primitive {0}")]
    UnknownPrim(String),
    #[error("label {label} not found in {ty}")]
    LabelNotFound { label: String, ty: String },
    #[error("duplicate label {0} in record")]
    DuplicateLabel(String),
    #[error("duplicate binder {0} in generators")]
    DuplicateBinder(String),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    Mismatch { context: String, expected: String, found: String },
    #[error("{op} expects a set argument, found {found}")]
    NonSetArgument { op: String, found: String },
    #[error("{op} expects a bag argument, found {found}")]
    NonBagArgument { op: String, found: String },
    #[error("{op} needs flat element type, found {found}")]
    NonFlat { op: String, found: String },
    #[error("graph output must be a set or bag, found {0}")]
    GraphOutputNotCollection(String),
    #[error("primitive {name} takes {expected} arguments, given {found}")]
    PrimArity { name: String, expected: usize, found: usize },
    #[error("graph expects {expected} arguments, given {found}")]
    GraphArity { expected: usize, found: usize },
}

impl TypeError {
    /// Stable short code for tests and diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::UnboundVariable(_) => "unbound-variable",
            TypeError::UnknownTable(_) => "unknown-table",
            TypeError::UnknownPrim(_) => "unknown-primitive",
            TypeError::LabelNotFound { .. } => "label-not-found",
            TypeError::DuplicateLabel(_) => "duplicate-label",
            TypeError::DuplicateBinder(_) => "duplicate-binder",
            TypeError::Mismatch { .. } => "mismatch",
            TypeError::NonSetArgument { .. } => "non-set-argument",
            TypeError::NonBagArgument { .. } => "non-bag-argument",
            TypeError::NonFlat { .. } => "non-flat-argument",
            TypeError::GraphOutputNotCollection(_) => "graph-output-not-collection",
            TypeError::PrimArity { .. } => "primitive-arity",
            TypeError::GraphArity { .. } => "graph-arity",
        }
    }
}

fn mismatch(context: &str, expected: impl ToString, found: &Type) -> TypeError {
    TypeError::Mismatch { context: context.to_string(), expected: expected.to_string(), found: found.to_string() }
}

pub fn typecheck(ctx: &Ctx, t: &Term, sig: &Signature) -> Result<Type, TypeError> {
    let mut c = ctx.clone();
    tc(&mut c, t, sig)
}

/// Type of a closed term.
pub fn typecheck_closed(t: &Term, sig: &Signature) -> Result<Type, TypeError> {
    typecheck(&Ctx::new(), t, sig)
}

/// Checks a telescope, returning the element types of the generators.
/// Pushes the binders onto `ctx`; callers truncate afterwards.
fn tc_gens(ctx: &mut Ctx, gens: &Gens, sig: &Signature, want_set: bool, op: &str) -> Result<Vec<Type>, TypeError> {
    let mut seen: Vec<&str> = Vec::new();
    let mut tys = Vec::new();
    for (x, g) in gens {
        if seen.contains(&x.as_str()) {
            return Err(TypeError::DuplicateBinder(x.clone()));
        }
        seen.push(x);
        let gt = tc(ctx, g, sig)?;
        let elem = match (&gt, want_set) {
            (Type::Set(e), true) | (Type::Bag(e), false) => (**e).clone(),
            (_, true) => return Err(TypeError::NonSetArgument { op: op.into(), found: gt.to_string() }),
            (_, false) => return Err(TypeError::NonBagArgument { op: op.into(), found: gt.to_string() }),
        };
        ctx.push(x, elem.clone());
        tys.push(elem);
    }
    Ok(tys)
}

/// Types of the binders of a generator list, given the context it lives in.
pub fn gens_types(ctx: &Ctx, gens: &Gens, sig: &Signature, set: bool) -> Result<Vec<Type>, TypeError> {
    let mut c = ctx.clone();
    tc_gens(&mut c, gens, sig, set, "generator")
}

fn check_flat(op: &str, elem: &Type) -> Result<(), TypeError> {
    if elem.is_flat_elem() {
        Ok(())
    } else {
        Err(TypeError::NonFlat { op: op.into(), found: elem.to_string() })
    }
}

fn tc(ctx: &mut Ctx, t: &Term, sig: &Signature) -> Result<Type, TypeError> {
    use Term::*;
    match t {
        Var(x) => ctx.lookup(x).cloned().ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Table(n) => sig.table(n).map(|r| Type::bag(r.clone())).ok_or_else(|| TypeError::UnknownTable(n.clone())),
        Const(b) => Ok(Type::Base(b.ty())),
        Prim(c, args) => {
            let pt = sig.prims.get(c).ok_or_else(|| TypeError::UnknownPrim(c.clone()))?;
            if pt.arity() != args.len() {
                return Err(TypeError::PrimArity { name: c.clone(), expected: pt.arity(), found: args.len() });
            }
            let tys = args.iter().map(|a| tc(ctx, a, sig)).collect::<Result<Vec<_>, _>>()?;
            match pt {
                PrimType::Fixed { args: want, ret } => {
                    for (w, got) in want.iter().zip(&tys) {
                        if *got != Type::Base(*w) {
                            return Err(mismatch(&format!("argument of {}", c), w.name(), got));
                        }
                    }
                    Ok(Type::Base(*ret))
                }
                PrimType::Equality => {
                    if !tys[0].is_base() {
                        return Err(mismatch(&format!("argument of {}", c), "a base type", &tys[0]));
                    }
                    if tys[0] != tys[1] {
                        return Err(mismatch(&format!("argument of {}", c), &tys[0], &tys[1]));
                    }
                    Ok(Type::BOOL)
                }
            }
        }
        Record(fs) => {
            let mut out = Vec::new();
            for (l, m) in fs {
                if out.iter().any(|(k, _): &(String, Type)| k == l) {
                    return Err(TypeError::DuplicateLabel(l.clone()));
                }
                out.push((l.clone(), tc(ctx, m, sig)?));
            }
            Ok(Type::record(out))
        }
        Proj(m, l) => {
            let mt = tc(ctx, m, sig)?;
            match &mt {
                Type::Record(_) => mt
                    .field(l)
                    .cloned()
                    .ok_or_else(|| TypeError::LabelNotFound { label: l.clone(), ty: mt.to_string() }),
                _ => Err(mismatch("projection", "a record", &mt)),
            }
        }
        Lam(x, ty, body) => {
            ctx.push(x, ty.clone());
            let bt = tc(ctx, body, sig);
            ctx.pop();
            Ok(Type::fun(ty.clone(), bt?))
        }
        App(f, a) => {
            let ft = tc(ctx, f, sig)?;
            let at = tc(ctx, a, sig)?;
            match ft {
                Type::Fun(dom, cod) => {
                    if *dom == at {
                        Ok(*cod)
                    } else {
                        Err(mismatch("application argument", &dom, &at))
                    }
                }
                other => Err(mismatch("application", "a function", &other)),
            }
        }
        EmptySet(e) => Ok(Type::set(e.clone())),
        EmptyBag(e) => Ok(Type::bag(e.clone())),
        SetSingleton(m) => Ok(Type::set(tc(ctx, m, sig)?)),
        BagSingleton(m) => Ok(Type::bag(tc(ctx, m, sig)?)),
        SetUnion(a, b) => {
            let at = tc(ctx, a, sig)?;
            let bt = tc(ctx, b, sig)?;
            let ok = matches!(&at, Type::Set(_)) || matches!(&at, Type::Graph(_, o) if matches!(**o, Type::Set(_)));
            if !ok {
                return Err(TypeError::NonSetArgument { op: "union".into(), found: at.to_string() });
            }
            if at != bt {
                return Err(mismatch("union", &at, &bt));
            }
            Ok(at)
        }
        BagUnion(a, b) => {
            let at = tc(ctx, a, sig)?;
            let bt = tc(ctx, b, sig)?;
            let ok = matches!(&at, Type::Bag(_)) || matches!(&at, Type::Graph(_, o) if matches!(**o, Type::Bag(_)));
            if !ok {
                return Err(TypeError::NonBagArgument { op: "union".into(), found: at.to_string() });
            }
            if at != bt {
                return Err(mismatch("union", &at, &bt));
            }
            Ok(at)
        }
        BagDiff(a, b) => {
            let at = tc(ctx, a, sig)?;
            let bt = tc(ctx, b, sig)?;
            let elem = match &at {
                Type::Bag(e) => e,
                Type::Graph(_, o) => match &**o {
                    Type::Bag(e) => e,
                    _ => return Err(TypeError::NonBagArgument { op: "difference".into(), found: at.to_string() }),
                },
                _ => return Err(TypeError::NonBagArgument { op: "difference".into(), found: at.to_string() }),
            };
            check_flat("difference", elem)?;
            if at != bt {
                return Err(mismatch("difference", &at, &bt));
            }
            Ok(at)
        }
        SetComp(h, gens) => {
            let n = ctx.len();
            let r = tc_gens(ctx, gens, sig, true, "set comprehension generator").and_then(|_| tc(ctx, h, sig));
            ctx.truncate(n);
            let ht = r?;
            match ht {
                Type::Set(_) => Ok(ht),
                _ => Err(TypeError::NonSetArgument { op: "set comprehension body".into(), found: ht.to_string() }),
            }
        }
        BagComp(h, gens) => {
            let n = ctx.len();
            let r = tc_gens(ctx, gens, sig, false, "bag comprehension generator").and_then(|_| tc(ctx, h, sig));
            ctx.truncate(n);
            let ht = r?;
            match ht {
                Type::Bag(_) => Ok(ht),
                _ => Err(TypeError::NonBagArgument { op: "bag comprehension body".into(), found: ht.to_string() }),
            }
        }
        Dedup(m) => {
            let mt = tc(ctx, m, sig)?;
            match mt {
                Type::Bag(e) => {
                    check_flat("dedup", &e)?;
                    Ok(Type::Set(e))
                }
                Type::Graph(args, o) => match *o {
                    Type::Bag(e) => {
                        check_flat("dedup", &e)?;
                        Ok(Type::graph(args, Type::Set(e)))
                    }
                    other => Err(TypeError::NonBagArgument { op: "dedup".into(), found: other.to_string() }),
                },
                other => Err(TypeError::NonBagArgument { op: "dedup".into(), found: other.to_string() }),
            }
        }
        Promote(m) => {
            let mt = tc(ctx, m, sig)?;
            match mt {
                Type::Set(e) => {
                    check_flat("promote", &e)?;
                    Ok(Type::Bag(e))
                }
                Type::Graph(args, o) => match *o {
                    Type::Set(e) => {
                        check_flat("promote", &e)?;
                        Ok(Type::graph(args, Type::Bag(e)))
                    }
                    other => Err(TypeError::NonSetArgument { op: "promote".into(), found: other.to_string() }),
                },
                other => Err(TypeError::NonSetArgument { op: "promote".into(), found: other.to_string() }),
            }
        }
        WhereSet(m, c) | WhereBag(m, c) => {
            let mt = tc(ctx, m, sig)?;
            let ct = tc(ctx, c, sig)?;
            if ct != Type::BOOL {
                return Err(mismatch("where condition", "Bool", &ct));
            }
            match (&mt, matches!(t, WhereSet(..))) {
                (Type::Set(_), true) | (Type::Bag(_), false) => Ok(mt),
                (_, true) => Err(TypeError::NonSetArgument { op: "where".into(), found: mt.to_string() }),
                (_, false) => Err(TypeError::NonBagArgument { op: "where".into(), found: mt.to_string() }),
            }
        }
        EmptySetTest(m) => match tc(ctx, m, sig)? {
            Type::Set(_) => Ok(Type::BOOL),
            other => Err(TypeError::NonSetArgument { op: "empty".into(), found: other.to_string() }),
        },
        EmptyBagTest(m) => match tc(ctx, m, sig)? {
            Type::Bag(_) => Ok(Type::BOOL),
            other => Err(TypeError::NonBagArgument { op: "empty".into(), found: other.to_string() }),
        },
        Member(m, n) => {
            let mt = tc(ctx, m, sig)?;
            let nt = tc(ctx, n, sig)?;
            match nt.elem() {
                Some(e) if *e == mt => {
                    check_flat("member", e)?;
                    Ok(Type::BOOL)
                }
                Some(e) => Err(mismatch("membership", e, &mt)),
                None => Err(mismatch("membership", "a collection", &nt)),
            }
        }
        GraphSet(gens, body) | GraphBag(gens, body) => {
            let n = ctx.len();
            let r =
                tc_gens(ctx, gens, sig, true, "graph domain").and_then(|tys| tc(ctx, body, sig).map(|bt| (tys, bt)));
            ctx.truncate(n);
            let (tys, bt) = r?;
            let want_set = matches!(t, GraphSet(..));
            match (&bt, want_set) {
                (Type::Set(_), true) | (Type::Bag(_), false) => Ok(Type::graph(tys, bt)),
                (Type::Set(_), false) | (Type::Bag(_), true) => {
                    Err(mismatch("graph body", if want_set { "a set" } else { "a bag" }, &bt))
                }
                _ => Err(TypeError::GraphOutputNotCollection(bt.to_string())),
            }
        }
        GraphApp(g, args) => {
            let gt = tc(ctx, g, sig)?;
            match gt {
                Type::Graph(params, out) => {
                    if params.len() != args.len() {
                        return Err(TypeError::GraphArity { expected: params.len(), found: args.len() });
                    }
                    for (p, a) in params.iter().zip(args) {
                        let at = tc(ctx, a, sig)?;
                        if at != *p {
                            return Err(mismatch("graph application argument", p, &at));
                        }
                    }
                    Ok(*out)
                }
                other => Err(mismatch("graph application", "a graph", &other)),
            }
        }
    }
}
