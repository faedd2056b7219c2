//! The flattening embedding: graph applications become index records and
//! graphs become collections of flat (key, output) rows.

use crate::env::{typecheck_env, ShreddingEnv};
use crate::ShredError;
use nrc_core::records::{flat_fields, flat_type, SEP};
use nrc_core::term::Base;
use nrc_core::typecheck::gens_types;
use nrc_core::types::{sort_fields, BaseType};
use nrc_core::{typecheck, Ctx, Fresh, Signature, Term, Type};
use nrc_delateral::graphs::{key_prefix, row};

pub const TAG: &str = "tag";
pub const KEY: &str = "key";

/// Argument types of every graph variable, which fix the shape of indices.
///
/// All indices share one type so that unions of shredded heads stay
/// well-typed: the key record has a column for every argument column of
/// every graph, named `<graph>_<column>`, and columns belonging to other
/// graphs hold a default constant.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexLayout {
    graphs: Vec<(String, Vec<Type>)>,
}

/// One argument column of a graph: its name in the graph's rows, its name in
/// the index key, and its type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyColumn {
    pub row: String,
    pub index: String,
    pub ty: Type,
}

fn default_of(ty: &Type) -> Term {
    Term::Const(match ty {
        Type::Base(BaseType::Int) => Base::Int(0),
        Type::Base(BaseType::Bool) => Base::Bool(false),
        _ => Base::Str(String::new()),
    })
}

impl IndexLayout {
    pub fn from_env(env: &ShreddingEnv, sig: &Signature) -> Result<IndexLayout, ShredError> {
        let ctx = typecheck_env(env, sig)?;
        let graphs = ctx
            .entries()
            .iter()
            .map(|(p, t)| match t {
                Type::Graph(args, _) => (p.clone(), args.clone()),
                _ => unreachable!("typecheck_env only admits graph types"),
            })
            .collect();
        Ok(IndexLayout { graphs })
    }

    pub fn graphs(&self) -> impl Iterator<Item = &str> {
        self.graphs.iter().map(|(p, _)| p.as_str())
    }

    pub fn key_columns(&self, phi: &str) -> Option<Vec<KeyColumn>> {
        let (_, args) = self.graphs.iter().find(|(p, _)| p == phi)?;
        Some(
            args.iter()
                .enumerate()
                .flat_map(|(i, t)| flat_type(t, &key_prefix(i + 1)))
                .map(|(c, ty)| KeyColumn { index: format!("{}{}{}", phi, SEP, c), row: c, ty })
                .collect(),
        )
    }

    fn all_key_columns(&self) -> Vec<KeyColumn> {
        self.graphs.iter().flat_map(|(p, _)| self.key_columns(p).expect("listed")).collect()
    }

    /// The type of indices: `(tag: String, key: (...))`.
    pub fn index_type(&self) -> Type {
        let key = Type::record(self.all_key_columns().into_iter().map(|k| (k.index, k.ty)).collect());
        Type::record(vec![(TAG.into(), Type::STRING), (KEY.into(), key)])
    }

    /// `index(φ, args)`.
    pub fn index(&self, phi: &str, args: &[Term]) -> Result<Term, ShredError> {
        let (_, tys) =
            self.graphs.iter().find(|(p, _)| p == phi).ok_or_else(|| ShredError::MissingGraph(phi.into()))?;
        if tys.len() != args.len() {
            return Err(ShredError::Shape(format!("{} applied to {} arguments", phi, args.len())));
        }
        let own: Vec<(String, Term)> = args
            .iter()
            .zip(tys)
            .enumerate()
            .flat_map(|(i, (a, t))| flat_fields(a, t, &key_prefix(i + 1)))
            .map(|(c, t)| (format!("{}{}{}", phi, SEP, c), t))
            .collect();
        let mut key: Vec<(String, Term)> = self
            .all_key_columns()
            .into_iter()
            .map(|k| {
                let v = own
                    .iter()
                    .find(|(c, _)| *c == k.index)
                    .map(|(_, t)| t.clone())
                    .unwrap_or_else(|| default_of(&k.ty));
                (k.index, v)
            })
            .collect();
        sort_fields(&mut key);
        Ok(Term::Record(vec![(KEY.into(), Term::Record(key)), (TAG.into(), Term::Const(Base::Str(phi.into())))]))
    }

    /// `⌊τ⌋`: nested collections replaced by the index type.
    pub fn flat_type(&self, ty: &Type) -> Type {
        match ty {
            Type::Record(fs) => Type::record(fs.iter().map(|(l, t)| (l.clone(), self.flat_type(t))).collect()),
            Type::Set(_) | Type::Bag(_) => self.index_type(),
            t => t.clone(),
        }
    }
}

/// `⌊t⌋` for a shredded term or environment entry.
pub fn flatten(t: &Term, layout: &IndexLayout, sig: &Signature) -> Result<Term, ShredError> {
    Flattener { layout, sig, fresh: Fresh::avoiding(t) }.go(t)
}

struct Flattener<'a> {
    layout: &'a IndexLayout,
    sig: &'a Signature,
    fresh: Fresh,
}

impl Flattener<'_> {
    fn go(&mut self, t: &Term) -> Result<Term, ShredError> {
        Ok(match t {
            Term::GraphApp(g, args) => match &**g {
                Term::Var(phi) => self.layout.index(phi, args)?,
                _ => return Err(ShredError::Shape(format!("application of a non-variable: {}", t))),
            },
            Term::Record(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for (l, f) in fs {
                    out.push((l.clone(), self.go(f)?));
                }
                Term::Record(out)
            }
            Term::SetUnion(a, b) => Term::SetUnion(Box::new(self.go(a)?), Box::new(self.go(b)?)),
            Term::BagUnion(a, b) => Term::BagUnion(Box::new(self.go(a)?), Box::new(self.go(b)?)),
            Term::SetComp(h, gens) => Term::SetComp(Box::new(self.go(h)?), gens.clone()),
            Term::BagComp(h, gens) => Term::BagComp(Box::new(self.go(h)?), gens.clone()),
            Term::SetSingleton(e) => Term::SetSingleton(Box::new(self.go(e)?)),
            Term::BagSingleton(e) => Term::BagSingleton(Box::new(self.go(e)?)),
            Term::WhereSet(s, c) => Term::WhereSet(Box::new(self.go(s)?), c.clone()),
            Term::WhereBag(s, c) => Term::WhereBag(Box::new(self.go(s)?), c.clone()),
            Term::EmptySet(e) => Term::EmptySet(self.layout.flat_type(e)),
            Term::EmptyBag(e) => Term::EmptyBag(self.layout.flat_type(e)),
            Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
                let bag = matches!(t, Term::GraphBag(..));
                let tys = gens_types(&Ctx::new(), gens, self.sig, true)?;
                let body = self.go(body)?;
                let ctx = Ctx::from_pairs(gens.iter().map(|(x, _)| x.clone()).zip(tys.iter().cloned()));
                let out = match typecheck(&ctx, &body, self.sig)? {
                    Type::Set(e) | Type::Bag(e) => *e,
                    ty => return Err(ShredError::Shape(format!("graph body of type {}", ty))),
                };
                let y = self.fresh.name("y");
                let args: Vec<(Term, Type)> = gens.iter().map(|(x, _)| Term::Var(x.clone())).zip(tys).collect();
                let pair = row(&args, (&Term::Var(y.clone()), &out));
                let mut dom: Vec<(String, Term)> = gens
                    .iter()
                    .map(|(x, g)| (x.clone(), if bag { Term::Promote(Box::new(g.clone())) } else { g.clone() }))
                    .collect();
                dom.push((y, body));
                if bag {
                    Term::BagComp(Box::new(Term::BagSingleton(Box::new(pair))), dom)
                } else {
                    Term::SetComp(Box::new(Term::SetSingleton(Box::new(pair))), dom)
                }
            }
            Term::Promote(_) | Term::BagDiff(..) | Term::Dedup(_) | Term::Table(_) => {
                return Err(ShredError::Shape(format!("{} outside a generator", t)));
            }
            _ => t.clone(),
        })
    }
}
