//! Abstract syntax.

use crate::types::{BaseType, Type};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Base {
    pub fn ty(&self) -> BaseType {
        match self {
            Base::Int(_) => BaseType::Int,
            Base::Bool(_) => BaseType::Bool,
            Base::Str(_) => BaseType::String,
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Int(i) => write!(f, "{}", i),
            Base::Bool(b) => write!(f, "{}", b),
            Base::Str(s) => write!(f, "{:?}", s),
        }
    }
}

/// Generator telescope `x1 <- M1, ..., xn <- Mn`; `Mi` may mention `x1..x(i-1)`.
pub type Gens = Vec<(String, Term)>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Table(String),
    Const(Base),
    Prim(String, Vec<Term>),
    Record(Vec<(String, Term)>),
    Proj(Box<Term>, String),
    Lam(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Annotated with the element type.
    EmptySet(Type),
    SetSingleton(Box<Term>),
    SetUnion(Box<Term>, Box<Term>),
    SetComp(Box<Term>, Gens),
    /// Annotated with the element type.
    EmptyBag(Type),
    BagSingleton(Box<Term>),
    BagUnion(Box<Term>, Box<Term>),
    BagDiff(Box<Term>, Box<Term>),
    BagComp(Box<Term>, Gens),
    Dedup(Box<Term>),
    Promote(Box<Term>),
    WhereSet(Box<Term>, Box<Term>),
    WhereBag(Box<Term>, Box<Term>),
    EmptySetTest(Box<Term>),
    EmptyBagTest(Box<Term>),
    /// Membership `M in N`; `N` may be a set or a bag.
    Member(Box<Term>, Box<Term>),
    GraphSet(Gens, Box<Term>),
    GraphBag(Gens, Box<Term>),
    GraphApp(Box<Term>, Vec<Term>),
}

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}

pub fn table(t: &str) -> Term {
    Term::Table(t.to_string())
}

pub fn int(i: i64) -> Term {
    Term::Const(Base::Int(i))
}

pub fn string(s: &str) -> Term {
    Term::Const(Base::Str(s.to_string()))
}

pub fn boolean(b: bool) -> Term {
    Term::Const(Base::Bool(b))
}

pub fn proj(t: Term, l: &str) -> Term {
    Term::Proj(Box::new(t), l.to_string())
}

pub fn prim(c: &str, args: Vec<Term>) -> Term {
    Term::Prim(c.to_string(), args)
}

pub fn eq(a: Term, b: Term) -> Term {
    prim("==", vec![a, b])
}

pub fn and(a: Term, b: Term) -> Term {
    prim("and", vec![a, b])
}

pub fn not(a: Term) -> Term {
    prim("not", vec![a])
}

pub fn record(fields: Vec<(&str, Term)>) -> Term {
    Term::Record(fields.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
}

pub fn tuple(items: Vec<Term>) -> Term {
    Term::Record(items.into_iter().enumerate().map(|(i, t)| ((i + 1).to_string(), t)).collect())
}

pub fn sing_set(t: Term) -> Term {
    Term::SetSingleton(Box::new(t))
}

pub fn sing_bag(t: Term) -> Term {
    Term::BagSingleton(Box::new(t))
}

pub fn union_set(a: Term, b: Term) -> Term {
    Term::SetUnion(Box::new(a), Box::new(b))
}

pub fn union_bag(a: Term, b: Term) -> Term {
    Term::BagUnion(Box::new(a), Box::new(b))
}

pub fn diff(a: Term, b: Term) -> Term {
    Term::BagDiff(Box::new(a), Box::new(b))
}

pub fn dedup(t: Term) -> Term {
    Term::Dedup(Box::new(t))
}

pub fn promote(t: Term) -> Term {
    Term::Promote(Box::new(t))
}

pub fn where_set(t: Term, c: Term) -> Term {
    Term::WhereSet(Box::new(t), Box::new(c))
}

pub fn where_bag(t: Term, c: Term) -> Term {
    Term::WhereBag(Box::new(t), Box::new(c))
}

pub fn comp_set(head: Term, gens: Vec<(&str, Term)>) -> Term {
    Term::SetComp(Box::new(head), own(gens))
}

pub fn comp_bag(head: Term, gens: Vec<(&str, Term)>) -> Term {
    Term::BagComp(Box::new(head), own(gens))
}

pub fn graph_set(gens: Vec<(&str, Term)>, body: Term) -> Term {
    Term::GraphSet(own(gens), Box::new(body))
}

pub fn graph_bag(gens: Vec<(&str, Term)>, body: Term) -> Term {
    Term::GraphBag(own(gens), Box::new(body))
}

pub fn graph_app(g: Term, args: Vec<Term>) -> Term {
    Term::GraphApp(Box::new(g), args)
}

fn own(gens: Vec<(&str, Term)>) -> Gens {
    gens.into_iter().map(|(x, t)| (x.to_string(), t)).collect()
}

pub fn dom(gens: &Gens) -> Vec<String> {
    gens.iter().map(|(x, _)| x.clone()).collect()
}

impl Term {
    pub fn is_true(&self) -> bool {
        matches!(self, Term::Const(Base::Bool(true)))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Term::Const(Base::Bool(false)))
    }

    /// Number of nodes, counting generator sources.
    pub fn size(&self) -> usize {
        let mut n = 1;
        self.for_each_child(&mut |c| n += c.size());
        n
    }

    /// Visits immediate subterms left to right.
    pub fn for_each_child<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        use Term::*;
        match self {
            Var(_) | Table(_) | Const(_) | EmptySet(_) | EmptyBag(_) => {}
            Prim(_, args) => args.iter().for_each(&mut *f),
            Record(fs) => fs.iter().for_each(|(_, t)| f(t)),
            Proj(t, _)
            | Lam(_, _, t)
            | SetSingleton(t)
            | BagSingleton(t)
            | Dedup(t)
            | Promote(t)
            | EmptySetTest(t)
            | EmptyBagTest(t) => f(t),
            App(a, b)
            | SetUnion(a, b)
            | BagUnion(a, b)
            | BagDiff(a, b)
            | WhereSet(a, b)
            | WhereBag(a, b)
            | Member(a, b) => {
                f(a);
                f(b)
            }
            SetComp(h, gens) | BagComp(h, gens) => {
                f(h);
                gens.iter().for_each(|(_, g)| f(g))
            }
            GraphSet(gens, b) | GraphBag(gens, b) => {
                gens.iter().for_each(|(_, g)| f(g));
                f(b)
            }
            GraphApp(g, args) => {
                f(g);
                args.iter().for_each(f)
            }
        }
    }

    /// Rebuilds the node with every immediate subterm mapped, ignoring binders.
    pub fn map_children(&self, f: &mut dyn FnMut(&Term) -> Term) -> Term {
        use Term::*;
        let b = |t: Term| Box::new(t);
        match self {
            Var(_) | Table(_) | Const(_) | EmptySet(_) | EmptyBag(_) => self.clone(),
            Prim(c, args) => Prim(c.clone(), args.iter().map(&mut *f).collect()),
            Record(fs) => Record(fs.iter().map(|(l, t)| (l.clone(), f(t))).collect()),
            Proj(t, l) => Proj(b(f(t)), l.clone()),
            Lam(x, ty, t) => Lam(x.clone(), ty.clone(), b(f(t))),
            App(x, y) => App(b(f(x)), b(f(y))),
            SetSingleton(t) => SetSingleton(b(f(t))),
            BagSingleton(t) => BagSingleton(b(f(t))),
            Dedup(t) => Dedup(b(f(t))),
            Promote(t) => Promote(b(f(t))),
            EmptySetTest(t) => EmptySetTest(b(f(t))),
            EmptyBagTest(t) => EmptyBagTest(b(f(t))),
            SetUnion(x, y) => SetUnion(b(f(x)), b(f(y))),
            BagUnion(x, y) => BagUnion(b(f(x)), b(f(y))),
            BagDiff(x, y) => BagDiff(b(f(x)), b(f(y))),
            WhereSet(x, y) => WhereSet(b(f(x)), b(f(y))),
            WhereBag(x, y) => WhereBag(b(f(x)), b(f(y))),
            Member(x, y) => Member(b(f(x)), b(f(y))),
            SetComp(h, gens) => {
                let h2 = f(h);
                SetComp(b(h2), gens.iter().map(|(x, g)| (x.clone(), f(g))).collect())
            }
            BagComp(h, gens) => {
                let h2 = f(h);
                BagComp(b(h2), gens.iter().map(|(x, g)| (x.clone(), f(g))).collect())
            }
            GraphSet(gens, body) => {
                let g2 = gens.iter().map(|(x, g)| (x.clone(), f(g))).collect();
                GraphSet(g2, b(f(body)))
            }
            GraphBag(gens, body) => {
                let g2 = gens.iter().map(|(x, g)| (x.clone(), f(g))).collect();
                GraphBag(g2, b(f(body)))
            }
            GraphApp(g, args) => {
                let g2 = f(g);
                GraphApp(b(g2), args.iter().map(&mut *f).collect())
            }
        }
    }

    /// True if any subterm (including itself) satisfies `p`.
    pub fn any(&self, p: &dyn Fn(&Term) -> bool) -> bool {
        if p(self) {
            return true;
        }
        let mut found = false;
        self.for_each_child(&mut |c| {
            if !found && c.any(p) {
                found = true;
            }
        });
        found
    }

    pub fn has_graphs(&self) -> bool {
        self.any(&|t| matches!(t, Term::GraphSet(..) | Term::GraphBag(..) | Term::GraphApp(..)))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::pretty::pretty(self))
    }
}
