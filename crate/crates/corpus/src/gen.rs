//! Seeded generator of well-typed closed queries and small databases.

use nrc_core::term::{Base, Gens, Term};
use nrc_core::{typecheck_closed, BaseType, Signature, Type};
use nrc_semantics::{KValue, Store};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Which result types to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Any,
    /// Sets or bags of flat elements.
    Flat,
    /// Collections whose elements contain a collection.
    Nested,
}

#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub seed: u64,
    pub max_depth: usize,
    pub max_rows: usize,
    /// Number of distinct constants per base type.
    pub domain: usize,
    pub count: usize,
    pub shape: Shape,
}

impl Default for CorpusSpec {
    fn default() -> CorpusSpec {
        CorpusSpec { seed: 0, max_depth: 5, max_rows: 3, domain: 4, count: 500, shape: Shape::Any }
    }
}

/// Tables used by generated queries.
pub fn corpus_signature() -> Signature {
    use BaseType::*;
    Signature::builtins()
        .with_table("R", &[("a", Int), ("b", String)])
        .with_table("S", &[("a", Int), ("c", Int)])
        .with_table("T", &[("b", String), ("d", Bool)])
}

const STRINGS: [&str; 4] = ["a", "b", "c", "d"];

struct Gen<'a> {
    rng: ChaCha8Rng,
    sig: &'a Signature,
    domain: usize,
    vars: Vec<(String, Type)>,
    next_var: usize,
}

pub fn generate_corpus(spec: &CorpusSpec) -> Vec<Term> {
    let sig = corpus_signature();
    let mut g = Gen::new(spec.seed, &sig, spec.domain);
    (0..spec.count).map(|_| g.query(spec.max_depth.max(1), spec.shape)).collect()
}

/// A random database for [`corpus_signature`], with at most `max_rows` rows per
/// table drawn with repetition from the constant domain.
pub fn generate_store(seed: u64, max_rows: usize, domain: usize) -> Store {
    let sig = corpus_signature();
    let mut g = Gen::new(seed ^ 0x5eed_5eed, &sig, domain);
    let mut store = Store::new();
    for (name, ty) in &sig.tables {
        let n = g.rng.gen_range(0..=max_rows);
        let mut rows = BTreeMap::new();
        for _ in 0..n {
            let Type::Record(fs) = ty else { unreachable!() };
            let row = KValue::record(fs.iter().map(|(l, t)| (l.clone(), KValue::Base(g.constant(t)))));
            *rows.entry(row).or_insert(0) += 1;
        }
        store.insert(name.clone(), rows);
    }
    store
}

impl<'a> Gen<'a> {
    fn new(seed: u64, sig: &'a Signature, domain: usize) -> Gen<'a> {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), sig, domain: domain.max(1), vars: Vec::new(), next_var: 0 }
    }

    fn query(&mut self, depth: usize, shape: Shape) -> Term {
        loop {
            self.vars.clear();
            self.next_var = 0;
            let ty = self.top_type(shape, depth);
            if let Some(t) = self.term(&ty, depth) {
                match typecheck_closed(&t, self.sig) {
                    Ok(got) if got == ty => return t,
                    other => panic!("generator produced an ill-typed term {}: {:?}", t, other),
                }
            }
        }
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn fresh_var(&mut self) -> String {
        self.next_var += 1;
        format!("x{}", self.next_var)
    }

    fn constant(&mut self, t: &Type) -> Base {
        let k = self.rng.gen_range(0..self.domain);
        match t {
            Type::Base(BaseType::Int) => Base::Int(k as i64),
            Type::Base(BaseType::Bool) => Base::Bool(k % 2 == 0),
            _ => Base::Str(STRINGS[k % STRINGS.len()].to_string()),
        }
    }

    fn base_type(&mut self) -> Type {
        [Type::INT, Type::INT, Type::STRING, Type::BOOL].choose(&mut self.rng).unwrap().clone()
    }

    fn table_types(&self) -> Vec<Type> {
        self.sig.tables.values().cloned().collect()
    }

    fn flat_elem(&mut self) -> Type {
        match self.rng.gen_range(0..5) {
            0 => self.base_type(),
            1 => {
                let a = self.base_type();
                let fields = if self.chance(0.5) {
                    vec![("a".to_string(), a)]
                } else {
                    vec![("a".to_string(), a), ("b".to_string(), self.base_type())]
                };
                Type::record(fields)
            }
            _ => self.table_types().choose(&mut self.rng).unwrap().clone(),
        }
    }

    fn flat_collection(&mut self) -> Type {
        let e = self.flat_elem();
        if self.chance(0.5) {
            Type::set(e)
        } else {
            Type::bag(e)
        }
    }

    fn nested_collection(&mut self) -> Type {
        let inner = self.flat_collection();
        let elem = match self.rng.gen_range(0..4) {
            0 => inner,
            1 => Type::record(vec![("k".into(), self.base_type()), ("v".into(), inner)]),
            2 => {
                let deeper = Type::record(vec![("k".into(), self.base_type()), ("v".into(), inner)]);
                Type::record(vec![("k".into(), Type::INT), ("w".into(), self.collection_of(deeper))])
            }
            _ => Type::record(vec![("v".into(), inner), ("w".into(), self.flat_collection())]),
        };
        self.collection_of(elem)
    }

    fn collection_of(&mut self, e: Type) -> Type {
        if self.chance(0.5) {
            Type::set(e)
        } else {
            Type::bag(e)
        }
    }

    fn top_type(&mut self, shape: Shape, depth: usize) -> Type {
        if depth <= 1 {
            // Leaves only: literals and table references.
            return if shape == Shape::Any && self.chance(0.5) {
                self.base_type()
            } else {
                Type::bag(self.table_types().choose(&mut self.rng).unwrap().clone())
            };
        }
        match shape {
            Shape::Flat => self.flat_collection(),
            Shape::Nested if depth >= 3 => self.nested_collection(),
            Shape::Nested => self.flat_collection(),
            Shape::Any => match self.rng.gen_range(0..10) {
                0 => self.base_type(),
                1..=5 => self.flat_collection(),
                _ if depth >= 3 => self.nested_collection(),
                _ => self.flat_collection(),
            },
        }
    }

    fn vars_of(&self, ty: &Type) -> Vec<String> {
        self.vars.iter().filter(|(_, t)| t == ty).map(|(x, _)| x.clone()).collect()
    }

    /// `x.l` for variables in scope with a field of type `ty`.
    fn projections_to(&self, ty: &Type) -> Vec<Term> {
        let mut out = Vec::new();
        for (x, t) in &self.vars {
            if let Type::Record(fs) = t {
                for (l, ft) in fs {
                    if ft == ty {
                        out.push(Term::Proj(Box::new(Term::Var(x.clone())), l.clone()));
                    }
                }
            }
        }
        out
    }

    fn tables_of(&self, e: &Type) -> Vec<String> {
        self.sig.tables.iter().filter(|(_, t)| *t == e).map(|(n, _)| n.clone()).collect()
    }

    /// Smallest terms of type `ty`. Projections of variables and tables under
    /// `dedup` or a singleton count as leaves so that bounded terms still
    /// touch the data.
    fn leaf(&mut self, ty: &Type) -> Option<Term> {
        let vars = self.vars_of(ty);
        if !vars.is_empty() && self.chance(0.5) {
            return Some(Term::Var(vars.choose(&mut self.rng).unwrap().clone()));
        }
        if self.vars.is_empty() && self.next_var == 0 {
            // Top-level leaf: literals and table references only.
            return match ty {
                Type::Base(_) => Some(Term::Const(self.constant(ty))),
                Type::Bag(e) => self.tables_of(e).first().map(|n| Term::Table(n.clone())),
                _ => None,
            };
        }
        let projs = self.projections_to(ty);
        match ty {
            Type::Base(_) if !projs.is_empty() && self.chance(0.6) => {
                Some(projs.choose(&mut self.rng).unwrap().clone())
            }
            Type::Base(_) if *ty == Type::BOOL && self.chance(0.7) => {
                let pick = [Type::INT, Type::STRING, Type::BOOL].choose(&mut self.rng).unwrap().clone();
                let ps = self.projections_to(&pick);
                let Some(p) = ps.choose(&mut self.rng).cloned() else {
                    return Some(Term::Const(self.constant(ty)));
                };
                let other = match ps.choose(&mut self.rng) {
                    Some(q) if self.chance(0.4) => q.clone(),
                    _ => Term::Const(self.constant(&pick)),
                };
                let op = if pick == Type::INT && self.chance(0.3) { "<" } else { "==" };
                Some(Term::Prim(op.into(), vec![p, other]))
            }
            Type::Base(_) => Some(Term::Const(self.constant(ty))),
            Type::Set(e) | Type::Bag(e) => {
                let set = matches!(ty, Type::Set(_));
                let tables = self.tables_of(e);
                let elems = self.projections_to(e);
                let r = self.rng.gen_range(0..10);
                if !tables.is_empty() && r < 6 {
                    let t = Term::Table(tables.choose(&mut self.rng).unwrap().clone());
                    Some(if set { Term::Dedup(Box::new(t)) } else { t })
                } else if r < 8 && (e.is_base() || !elems.is_empty()) {
                    let x = match elems.choose(&mut self.rng) {
                        Some(p) if self.chance(0.7) => p.clone(),
                        _ => self.leaf(e)?,
                    };
                    Some(if set { Term::SetSingleton(Box::new(x)) } else { Term::BagSingleton(Box::new(x)) })
                } else if set {
                    Some(Term::EmptySet((**e).clone()))
                } else {
                    Some(Term::EmptyBag((**e).clone()))
                }
            }
            _ => vars.first().map(|x| Term::Var(x.clone())),
        }
    }

    fn term(&mut self, ty: &Type, depth: usize) -> Option<Term> {
        if depth <= 1 {
            return self.leaf(ty);
        }
        for _ in 0..4 {
            let r = match ty {
                Type::Base(_) => self.base_term(ty, depth),
                Type::Record(fs) => {
                    if self.chance(0.1) {
                        self.lambda_app(ty, depth)
                    } else {
                        let vars = self.vars_of(ty);
                        if !vars.is_empty() && self.chance(0.3) {
                            Some(Term::Var(vars[0].clone()))
                        } else {
                            let mut items = Vec::new();
                            for (l, ft) in fs.clone() {
                                items.push((l, self.term(&ft, depth - 1)?));
                            }
                            Some(Term::Record(items))
                        }
                    }
                }
                Type::Set(e) => self.set_term(e, depth),
                Type::Bag(e) => self.bag_term(e, depth),
                _ => None,
            };
            if r.is_some() {
                return r;
            }
        }
        self.leaf(ty)
    }

    fn base_term(&mut self, ty: &Type, depth: usize) -> Option<Term> {
        let d = depth - 1;
        let projs = self.projections_to(ty);
        if !projs.is_empty() && self.chance(0.5) {
            return Some(projs.choose(&mut self.rng).unwrap().clone());
        }
        let is_bool = *ty == Type::BOOL;
        match self.rng.gen_range(0..10) {
            0..=2 => self.leaf(ty),
            3 | 4 if is_bool => {
                let t = self.base_type();
                let op = if t == Type::INT && self.chance(0.3) { "<" } else { "==" };
                Some(Term::Prim(op.into(), vec![self.term(&t, d)?, self.term(&t, d)?]))
            }
            5 if is_bool => {
                let op = ["and", "or"].choose(&mut self.rng).unwrap().to_string();
                Some(Term::Prim(op, vec![self.term(ty, d)?, self.term(ty, d)?]))
            }
            6 if is_bool => Some(Term::Prim("not".into(), vec![self.term(ty, d)?])),
            7 if is_bool => {
                let ct = if self.chance(0.7) { self.flat_collection() } else { self.nested_collection() };
                let m = self.term(&ct, d)?;
                Some(match ct {
                    Type::Set(_) => Term::EmptySetTest(Box::new(m)),
                    _ => Term::EmptyBagTest(Box::new(m)),
                })
            }
            8 if is_bool => {
                let ct = self.flat_collection();
                let e = ct.elem().unwrap().clone();
                Some(Term::Member(Box::new(self.term(&e, d)?), Box::new(self.term(&ct, d)?)))
            }
            3..=6 if *ty == Type::INT => {
                let op = ["+", "-", "*"].choose(&mut self.rng).unwrap().to_string();
                Some(Term::Prim(op, vec![self.term(ty, d)?, self.term(ty, d)?]))
            }
            3 | 4 if *ty == Type::STRING => Some(Term::Prim("^^".into(), vec![self.term(ty, d)?, self.leaf(ty)?])),
            9 => self.lambda_app(ty, depth),
            _ => self.leaf(ty),
        }
    }

    fn lambda_app(&mut self, ty: &Type, depth: usize) -> Option<Term> {
        if depth < 3 {
            return None;
        }
        let pt = if self.chance(0.5) { self.flat_elem() } else { self.flat_collection() };
        let arg = self.term(&pt, depth - 1)?;
        let x = self.fresh_var();
        self.vars.push((x.clone(), pt.clone()));
        let body = self.term(ty, depth - 2);
        self.vars.pop();
        Some(Term::App(Box::new(Term::Lam(x, pt, Box::new(body?))), Box::new(arg)))
    }

    /// One or two generators; returns the telescope and pushes the binders.
    fn generators(&mut self, set: bool, depth: usize) -> Option<Gens> {
        let n = if self.chance(0.5) { 2 } else { 1 };
        let mut gens = Vec::new();
        for _ in 0..n {
            let e = if self.chance(0.7) {
                self.table_types().choose(&mut self.rng).unwrap().clone()
            } else if self.chance(0.2) {
                Type::record(vec![("k".into(), Type::INT), ("v".into(), self.flat_collection())])
            } else {
                self.flat_elem()
            };
            let src_ty = if set { Type::set(e.clone()) } else { Type::bag(e.clone()) };
            let tables = self.tables_of(&e);
            let src = if !gens.is_empty() && !tables.is_empty() && self.chance(0.7) {
                self.correlated(set, &tables[0], &e)
            } else {
                self.term(&src_ty, depth)
            };
            let Some(src) = src else {
                self.vars.truncate(self.vars.len() - gens.len());
                return None;
            };
            let x = self.fresh_var();
            self.vars.push((x.clone(), e));
            gens.push((x, src));
        }
        Some(gens)
    }

    /// A filter of table `t` against a field of an enclosing binder, in one
    /// of the shapes that stay lateral after normalization.
    fn correlated(&mut self, set: bool, t: &str, e: &Type) -> Option<Term> {
        let Type::Record(fs) = e else { return None };
        let (l, ft) = fs.choose(&mut self.rng)?.clone();
        let outer = self.projections_to(&ft).choose(&mut self.rng)?.clone();
        let z = self.fresh_var();
        let cond = Term::Prim("==".into(), vec![Term::Proj(Box::new(Term::Var(z.clone())), l), outer]);
        let zv = Box::new(Term::Var(z.clone()));
        let table = Box::new(Term::Table(t.to_string()));
        let filtered_set = Term::SetComp(
            Box::new(Term::WhereSet(Box::new(Term::SetSingleton(zv.clone())), Box::new(cond.clone()))),
            vec![(z.clone(), Term::Dedup(table.clone()))],
        );
        let filtered_bag = Term::BagComp(
            Box::new(Term::WhereBag(Box::new(Term::BagSingleton(zv)), Box::new(cond))),
            vec![(z, (*table).clone())],
        );
        let diff = if self.chance(0.5) {
            Term::BagDiff(table, Box::new(filtered_bag))
        } else {
            Term::BagDiff(Box::new(filtered_bag), table)
        };
        Some(match (set, self.rng.gen_range(0..2)) {
            (true, 0) => filtered_set,
            (true, _) => Term::Dedup(Box::new(diff)),
            (false, 0) => Term::Promote(Box::new(filtered_set)),
            (false, _) => diff,
        })
    }

    fn comprehension(&mut self, set: bool, elem: &Type, depth: usize) -> Option<Term> {
        let gens = self.generators(set, depth - 1)?;
        let coll = if set { Type::set(elem.clone()) } else { Type::bag(elem.clone()) };
        let head = if self.chance(0.4) {
            let body = self.head(set, elem, &coll, depth - 1);
            let cond = self.term(&Type::BOOL, depth - 2);
            match (body, cond) {
                (Some(b), Some(c)) => Some(if set {
                    Term::WhereSet(Box::new(b), Box::new(c))
                } else {
                    Term::WhereBag(Box::new(b), Box::new(c))
                }),
                _ => None,
            }
        } else {
            self.head(set, elem, &coll, depth)
        };
        self.vars.truncate(self.vars.len() - gens.len());
        let head = Box::new(head?);
        Some(if set { Term::SetComp(head, gens) } else { Term::BagComp(head, gens) })
    }

    /// Comprehension heads lean toward singletons so results carry data.
    fn head(&mut self, set: bool, elem: &Type, coll: &Type, depth: usize) -> Option<Term> {
        if self.chance(0.6) {
            let e = Box::new(self.term(elem, depth - 1)?);
            Some(if set { Term::SetSingleton(e) } else { Term::BagSingleton(e) })
        } else {
            self.term(coll, depth - 1)
        }
    }

    fn set_term(&mut self, e: &Type, depth: usize) -> Option<Term> {
        let d = depth - 1;
        let ty = Type::set(e.clone());
        let flat = e.is_flat_elem();
        match self.rng.gen_range(0..12) {
            0 => self.leaf(&ty),
            1 | 2 => Some(Term::SetSingleton(Box::new(self.term(e, d)?))),
            3 => Some(Term::SetUnion(Box::new(self.term(&ty, d)?), Box::new(self.term(&ty, d)?))),
            4..=6 => self.comprehension(true, e, depth),
            7 => Some(Term::WhereSet(Box::new(self.term(&ty, d)?), Box::new(self.term(&Type::BOOL, d)?))),
            8..=10 if flat => Some(Term::Dedup(Box::new(self.term(&Type::bag(e.clone()), d)?))),
            11 => self.lambda_app(&ty, depth),
            _ => self.comprehension(true, e, depth),
        }
    }

    fn bag_term(&mut self, e: &Type, depth: usize) -> Option<Term> {
        let d = depth - 1;
        let ty = Type::bag(e.clone());
        let flat = e.is_flat_elem();
        match self.rng.gen_range(0..14) {
            0 | 1 => self.leaf(&ty),
            2 => Some(Term::BagSingleton(Box::new(self.term(e, d)?))),
            3 => Some(Term::BagUnion(Box::new(self.term(&ty, d)?), Box::new(self.term(&ty, d)?))),
            4..=6 => self.comprehension(false, e, depth),
            7 => Some(Term::WhereBag(Box::new(self.term(&ty, d)?), Box::new(self.term(&Type::BOOL, d)?))),
            8 | 9 if flat => Some(Term::Promote(Box::new(self.term(&Type::set(e.clone()), d)?))),
            10 | 11 if flat => Some(Term::BagDiff(Box::new(self.term(&ty, d)?), Box::new(self.term(&ty, d)?))),
            12 => self.lambda_app(&ty, depth),
            _ => self.comprehension(false, e, depth),
        }
    }
}
