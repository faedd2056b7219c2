//! Recognizer for nested relational normal forms.
//!
//! Conventions accepted beyond the bare grammar: the empty collection counts
//! as an empty union, a comprehension without a guard has guard `true`, and a
//! (possibly guarded) singleton outside a comprehension head counts as a
//! comprehension with no generators. A variable of base type is a base term.

use nrc_core::term::{Gens, Term};
use nrc_core::typecheck::gens_types;
use nrc_core::{typecheck, Ctx, Signature, Type};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NfTag {
    BaseX,
    RecordM,
    SetQ,
    BagR,
    ComprC,
    ComprD,
    GenF,
    GenG,
    StarredFlat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub tag: NfTag,
    pub term: Term,
}

/// The first subterm, in pre-order, that breaks the grammar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotNormal {
    /// Child indices from the root.
    pub path: Vec<usize>,
    pub term: Term,
    pub reason: String,
}

impl std::error::Error for NotNormal {}

impl fmt::Display for NotNormal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not in normal form at {:?}: {} ({})", self.path, self.term, self.reason)
    }
}

type R<T> = Result<T, NotNormal>;

struct Rec<'a> {
    sig: &'a Signature,
    ctx: Ctx,
    path: Vec<usize>,
}

/// Classifies a closed term of nested relational type.
pub fn is_normal_form(t: &Term, sig: &Signature) -> Result<NormalForm, NotNormal> {
    is_normal_form_in(t, &Ctx::new(), sig)
}

pub fn is_normal_form_in(t: &Term, ctx: &Ctx, sig: &Signature) -> Result<NormalForm, NotNormal> {
    let mut r = Rec { sig, ctx: ctx.clone(), path: Vec::new() };
    let tag = r.m(t, false)?;
    Ok(NormalForm { tag, term: t.clone() })
}

impl<'a> Rec<'a> {
    fn fail<T>(&self, t: &Term, reason: impl Into<String>) -> R<T> {
        Err(NotNormal { path: self.path.clone(), term: t.clone(), reason: reason.into() })
    }

    fn ty(&self, t: &Term) -> R<Type> {
        typecheck(&self.ctx, t, self.sig).or_else(|e| self.fail(t, format!("ill-typed: {}", e)))
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.path.push(i);
        let r = f(self);
        self.path.pop();
        r
    }

    /// General normal form, or its starred variant when `star` is set.
    fn m(&mut self, t: &Term, star: bool) -> R<NfTag> {
        let ty = self.ty(t)?;
        match &ty {
            Type::Base(_) => self.x(t).map(|_| NfTag::BaseX),
            Type::Record(fs) => {
                let Term::Record(items) = t else { return self.fail(t, "record-typed term is not a record literal") };
                if star && !fs.iter().all(|(_, f)| f.is_base()) {
                    return self.fail(t, "starred record has a non-base field");
                }
                for (i, (_, e)) in items.iter().enumerate() {
                    self.child(i, |r| r.m(e, star))?;
                }
                Ok(if star { NfTag::StarredFlat } else { NfTag::RecordM })
            }
            Type::Set(_) | Type::Bag(_) if star => self.fail(t, "nested collection inside a starred form"),
            Type::Set(_) => self.union(t, true, false).map(|_| NfTag::SetQ),
            Type::Bag(_) => self.union(t, false, false).map(|_| NfTag::BagR),
            _ => self.fail(t, format!("type {} is not nested relational", ty)),
        }
    }

    fn x(&mut self, t: &Term) -> R<()> {
        match t {
            Term::Var(_) | Term::Const(_) => Ok(()),
            Term::Proj(v, _) if matches!(**v, Term::Var(_)) => Ok(()),
            Term::Prim(_, args) => {
                for (i, a) in args.iter().enumerate() {
                    self.child(i, |r| r.x(a))?;
                }
                Ok(())
            }
            Term::EmptySetTest(q) => self.child(0, |r| r.starred(q, true)),
            Term::EmptyBagTest(q) => self.child(0, |r| r.starred(q, false)),
            _ => self.fail(t, "not a base normal form"),
        }
    }

    fn starred(&mut self, t: &Term, set: bool) -> R<()> {
        let ty = self.ty(t)?;
        if !ty.is_flat_collection() {
            return self.fail(t, "starred collection is not flat");
        }
        self.union(t, set, true)
    }

    /// `Q` / `R`: a union tree of comprehensions.
    fn union(&mut self, t: &Term, set: bool, star: bool) -> R<()> {
        match t {
            Term::SetUnion(a, b) if set => {
                self.child(0, |r| r.union(a, set, star))?;
                self.child(1, |r| r.union(b, set, star))
            }
            Term::BagUnion(a, b) if !set => {
                self.child(0, |r| r.union(a, set, star))?;
                self.child(1, |r| r.union(b, set, star))
            }
            Term::EmptySet(_) if set => Ok(()),
            Term::EmptyBag(_) if !set => Ok(()),
            _ => self.comprehension(t, set, star).map(|_| ()),
        }
    }

    /// `C` / `D`.
    fn comprehension(&mut self, t: &Term, set: bool, star: bool) -> R<NfTag> {
        let tag = if set { NfTag::ComprC } else { NfTag::ComprD };
        let (head, gens): (&Term, &[(String, Term)]) = match t {
            Term::SetComp(h, g) if set => (h, g),
            Term::BagComp(h, g) if !set => (h, g),
            Term::SetSingleton(_) | Term::WhereSet(..) if set => (t, &[]),
            Term::BagSingleton(_) | Term::WhereBag(..) if !set => (t, &[]),
            _ => return self.fail(t, "expected a comprehension"),
        };
        let is_comp = !std::ptr::eq(head, t);
        let n = self.ctx.len();
        let r = (|| {
            if is_comp {
                for (i, (_, g)) in gens.iter().enumerate() {
                    self.child(i + 1, |r| r.generator(g, set))?;
                    let tys = gens_types(&self.ctx, &vec![gens[i].clone()], self.sig, set)
                        .or_else(|e| self.fail(g, format!("ill-typed: {}", e)))?;
                    self.ctx.push(&gens[i].0, tys[0].clone());
                }
            }
            let hi = if is_comp { 0 } else { usize::MAX };
            let go = |r: &mut Self| r.guarded_head(head, set, star);
            if is_comp {
                self.child(hi, go)
            } else {
                go(self)
            }
        })();
        self.ctx.truncate(n);
        r.map(|_| tag)
    }

    fn guarded_head(&mut self, h: &Term, set: bool, star: bool) -> R<()> {
        let (single, guard) = match (h, set) {
            (Term::WhereSet(s, c), true) | (Term::WhereBag(s, c), false) => (&**s, Some(&**c)),
            _ => (h, None),
        };
        let elem = match (single, set) {
            (Term::SetSingleton(e), true) | (Term::BagSingleton(e), false) => e,
            _ => return self.fail(h, "comprehension head is not a singleton"),
        };
        if let Some(c) = guard {
            self.child(1, |r| r.x(c))?;
        }
        self.child(0, |r| r.m(elem, star)).map(|_| ())
    }

    /// `F` for sets, `G` for bags.
    fn generator(&mut self, g: &Term, set: bool) -> R<NfTag> {
        match (g, set) {
            (Term::Dedup(inner), true) => match &**inner {
                Term::Table(_) => Ok(NfTag::GenF),
                Term::BagDiff(a, b) => {
                    self.child(0, |r| {
                        r.child(0, |r| r.starred(a, false))?;
                        r.child(1, |r| r.starred(b, false))
                    })?;
                    Ok(NfTag::GenF)
                }
                _ => self.fail(g, "set generator must be a deduplicated table or difference"),
            },
            (Term::Table(_), false) => Ok(NfTag::GenG),
            (Term::Promote(q), false) => self.child(0, |r| r.starred(q, true)).map(|_| NfTag::GenG),
            (Term::BagDiff(a, b), false) => {
                self.child(0, |r| r.starred(a, false))?;
                self.child(1, |r| r.starred(b, false))?;
                Ok(NfTag::GenG)
            }
            _ => self.fail(
                g,
                if set { "set generator must be δt or δ(R - R)" } else { "bag generator must be t, ιQ or R - R" },
            ),
        }
    }
}

/// Generator sources of a comprehension, for callers that inspect the shape.
pub fn generators(t: &Term) -> Option<&Gens> {
    match t {
        Term::SetComp(_, g) | Term::BagComp(_, g) => Some(g),
        _ => None,
    }
}
