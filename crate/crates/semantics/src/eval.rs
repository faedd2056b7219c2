//! Reference evaluator.

use crate::value::{Closure, GraphVal, KValue};
use nrc_core::term::{Base, Gens};
use nrc_core::Term;
use std::collections::{BTreeMap, BTreeSet};

/// Table contents: each table is a bag of flat records.
pub type Store = BTreeMap<String, BTreeMap<KValue, u64>>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub vars: Vec<(String, KValue)>,
    pub store: Store,
}

impl Env {
    pub fn new(store: Store) -> Env {
        Env { vars: Vec::new(), store }
    }

    pub fn bind(mut self, x: &str, v: KValue) -> Env {
        self.vars.push((x.to_string(), v));
        self
    }

    pub fn lookup(&self, x: &str) -> Option<&KValue> {
        self.vars.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("table {0} is missing from the store")]
    MissingTable(String),
    #[error("graph applied to {found} arguments but expects {expected}")]
    GraphArity { expected: usize, found: usize },
    #[error("primitive {0} has no implementation")]
    UnknownPrim(String),
    #[error("ill-typed evaluation: {0}")]
    Stuck(String),
}

fn stuck<T>(what: &str, v: &KValue) -> Result<T, EvalError> {
    Err(EvalError::Stuck(format!("{} applied to {}", what, v)))
}

pub fn eval(t: &Term, env: &Env) -> Result<KValue, EvalError> {
    let mut ev = Evaluator { store: &env.store, vars: env.vars.clone() };
    ev.eval(t)
}

/// Callback receiving the values picked by each generator and their multiplicity.
type Visit<'k, E> = dyn FnMut(&mut E, &[KValue], u64) -> Result<(), EvalError> + 'k;

struct Evaluator<'a> {
    store: &'a Store,
    vars: Vec<(String, KValue)>,
}

impl<'a> Evaluator<'a> {
    fn lookup(&self, x: &str) -> Result<KValue, EvalError> {
        self.vars
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| EvalError::UnboundVariable(x.to_string()))
    }

    fn eval_bool(&mut self, t: &Term) -> Result<bool, EvalError> {
        let v = self.eval(t)?;
        v.as_bool().map_or_else(|| stuck("condition", &v), Ok)
    }

    /// Calls `k` once per assignment of the telescope, with the product of
    /// the generator multiplicities.
    fn each_binding(&mut self, gens: &[(String, Term)], mult: u64, k: &mut Visit<'_, Self>) -> Result<(), EvalError> {
        let mut picked = Vec::new();
        self.each_rec(gens, mult, &mut picked, k)
    }

    fn each_rec(
        &mut self,
        gens: &[(String, Term)],
        mult: u64,
        picked: &mut Vec<KValue>,
        k: &mut Visit<'_, Self>,
    ) -> Result<(), EvalError> {
        let Some(((x, src), rest)) = gens.split_first() else {
            return k(self, picked, mult);
        };
        let coll = self.eval(src)?;
        let entries: Vec<(KValue, u64)> = match coll.entries() {
            Some(es) => es.into_iter().map(|(v, n)| (v.clone(), n)).collect(),
            None => return stuck("generator", &coll),
        };
        for (v, n) in entries {
            self.vars.push((x.clone(), v.clone()));
            picked.push(v);
            let r = self.each_rec(rest, mult.saturating_mul(n), picked, k);
            picked.pop();
            self.vars.pop();
            r?;
        }
        Ok(())
    }

    fn eval(&mut self, t: &Term) -> Result<KValue, EvalError> {
        use Term::*;
        Ok(match t {
            Var(x) => self.lookup(x)?,
            Table(n) => KValue::Bag(self.store.get(n).cloned().ok_or_else(|| EvalError::MissingTable(n.clone()))?),
            Const(b) => KValue::Base(b.clone()),
            Prim(c, args) => {
                let vs = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                apply_prim(c, &vs)?
            }
            Record(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for (l, e) in fs {
                    out.push((l.clone(), self.eval(e)?));
                }
                KValue::record(out)
            }
            Proj(e, l) => {
                let v = self.eval(e)?;
                match v.field(l) {
                    Some(f) => f.clone(),
                    None => return stuck(&format!("projection .{}", l), &v),
                }
            }
            Lam(x, _, body) => {
                KValue::Closure(Closure { param: x.clone(), body: body.clone(), env: self.vars.clone() })
            }
            App(f, a) => {
                let fv = self.eval(f)?;
                let av = self.eval(a)?;
                let KValue::Closure(c) = fv else { return stuck("application", &fv) };
                let saved = std::mem::replace(&mut self.vars, c.env);
                self.vars.push((c.param, av));
                let r = self.eval(&c.body);
                self.vars = saved;
                r?
            }
            EmptySet(_) => KValue::empty_set(),
            EmptyBag(_) => KValue::empty_bag(),
            SetSingleton(e) => KValue::set_of([self.eval(e)?]),
            BagSingleton(e) => KValue::bag_of([(self.eval(e)?, 1)]),
            SetUnion(a, b) => union(self.eval(a)?, self.eval(b)?)?,
            BagUnion(a, b) => union(self.eval(a)?, self.eval(b)?)?,
            BagDiff(a, b) => monus(self.eval(a)?, self.eval(b)?)?,
            SetComp(head, gens) => {
                let mut acc = BTreeSet::new();
                self.each_binding(gens, 1, &mut |ev, _, _| {
                    match ev.eval(head)? {
                        KValue::Set(s) => acc.extend(s),
                        other => return stuck("set comprehension head", &other),
                    }
                    Ok(())
                })?;
                KValue::Set(acc)
            }
            BagComp(head, gens) => {
                let mut acc: BTreeMap<KValue, u64> = BTreeMap::new();
                self.each_binding(gens, 1, &mut |ev, _, m| {
                    match ev.eval(head)? {
                        KValue::Bag(b) => {
                            for (v, n) in b {
                                *acc.entry(v).or_insert(0) += n.saturating_mul(m);
                            }
                        }
                        other => return stuck("bag comprehension head", &other),
                    }
                    Ok(())
                })?;
                KValue::Bag(acc)
            }
            Dedup(e) => match self.eval(e)? {
                KValue::Bag(b) => KValue::Set(b.into_keys().collect()),
                KValue::Graph(g) if g.bag => {
                    KValue::Graph(GraphVal { bag: false, map: g.map.into_keys().map(|k| (k, 1)).collect() })
                }
                other => return stuck("dedup", &other),
            },
            Promote(e) => match self.eval(e)? {
                KValue::Set(s) => KValue::Bag(s.into_iter().map(|v| (v, 1)).collect()),
                KValue::Graph(g) if !g.bag => KValue::Graph(GraphVal { bag: true, map: g.map }),
                other => return stuck("promote", &other),
            },
            WhereSet(body, c) => {
                if self.eval_bool(c)? {
                    self.eval(body)?
                } else {
                    KValue::empty_set()
                }
            }
            WhereBag(body, c) => {
                if self.eval_bool(c)? {
                    self.eval(body)?
                } else {
                    KValue::empty_bag()
                }
            }
            EmptySetTest(e) | EmptyBagTest(e) => {
                let v = self.eval(e)?;
                match v.is_empty_collection() {
                    Some(b) => KValue::bool(b),
                    None => return stuck("empty", &v),
                }
            }
            Member(m, n) => {
                let mv = self.eval(m)?;
                let nv = self.eval(n)?;
                match nv.count(&mv) {
                    Some(k) => KValue::bool(k > 0),
                    None => return stuck("membership", &nv),
                }
            }
            GraphSet(gens, body) | GraphBag(gens, body) => {
                let bag = matches!(t, GraphBag(..));
                let mut map = BTreeMap::new();
                self.each_binding(gens, 1, &mut |ev, us, _| {
                    let out = ev.eval(body)?;
                    let Some(es) = out.entries() else { return stuck("graph body", &out) };
                    for (v, n) in es {
                        map.insert((us.to_vec(), v.clone()), if bag { n } else { 1 });
                    }
                    Ok(())
                })?;
                KValue::Graph(GraphVal { bag, map })
            }
            GraphApp(g, args) => {
                let gv = self.eval(g)?;
                let KValue::Graph(gv) = gv else { return stuck("graph application", &gv) };
                let avs = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                if let Some(((k, _), _)) = gv.map.iter().next() {
                    if k.len() != avs.len() {
                        return Err(EvalError::GraphArity { expected: k.len(), found: avs.len() });
                    }
                }
                let hits = gv.map.iter().filter(|((k, _), _)| *k == avs).map(|((_, v), n)| (v.clone(), *n));
                if gv.bag {
                    KValue::bag_of(hits)
                } else {
                    KValue::set_of(hits.map(|(v, _)| v))
                }
            }
        })
    }
}

fn union(a: KValue, b: KValue) -> Result<KValue, EvalError> {
    Ok(match (a, b) {
        (KValue::Set(mut x), KValue::Set(y)) => {
            x.extend(y);
            KValue::Set(x)
        }
        (KValue::Bag(mut x), KValue::Bag(y)) => {
            for (v, n) in y {
                *x.entry(v).or_insert(0) += n;
            }
            KValue::Bag(x)
        }
        (KValue::Graph(mut x), KValue::Graph(y)) if x.bag == y.bag => {
            for (k, n) in y.map {
                let e = x.map.entry(k).or_insert(0);
                *e = if x.bag { *e + n } else { 1 };
            }
            KValue::Graph(x)
        }
        (a, _) => return stuck("union", &a),
    })
}

fn monus(a: KValue, b: KValue) -> Result<KValue, EvalError> {
    Ok(match (a, b) {
        (KValue::Bag(x), KValue::Bag(y)) => KValue::Bag(
            x.into_iter()
                .filter_map(|(v, n)| {
                    let m = n.saturating_sub(y.get(&v).copied().unwrap_or(0));
                    (m > 0).then_some((v, m))
                })
                .collect(),
        ),
        (KValue::Graph(x), KValue::Graph(y)) if x.bag && y.bag => KValue::Graph(GraphVal {
            bag: true,
            map: x
                .map
                .into_iter()
                .filter_map(|(k, n)| {
                    let m = n.saturating_sub(y.map.get(&k).copied().unwrap_or(0));
                    (m > 0).then_some((k, m))
                })
                .collect(),
        }),
        (a, _) => return stuck("bag difference", &a),
    })
}

/// Integer arithmetic wraps so that every rewriting of a query agrees on overflow.
pub fn apply_prim(c: &str, vs: &[KValue]) -> Result<KValue, EvalError> {
    use Base::*;
    let base = |i: usize| match vs.get(i) {
        Some(KValue::Base(b)) => Ok(b),
        Some(other) => stuck(c, other),
        None => Err(EvalError::Stuck(format!("{} is missing an argument", c))),
    };
    let int = |i: usize| match base(i)? {
        Int(n) => Ok(*n),
        other => stuck(c, &KValue::Base(other.clone())),
    };
    let boolean = |i: usize| match base(i)? {
        Bool(b) => Ok(*b),
        other => stuck(c, &KValue::Base(other.clone())),
    };
    Ok(match c {
        "==" => KValue::bool(vs[0] == vs[1]),
        "<>" => KValue::bool(vs[0] != vs[1]),
        "<" => KValue::bool(int(0)? < int(1)?),
        "<=" => KValue::bool(int(0)? <= int(1)?),
        ">" => KValue::bool(int(0)? > int(1)?),
        ">=" => KValue::bool(int(0)? >= int(1)?),
        "and" => KValue::bool(boolean(0)? && boolean(1)?),
        "or" => KValue::bool(boolean(0)? || boolean(1)?),
        "not" => KValue::bool(!boolean(0)?),
        "+" => KValue::int(int(0)?.wrapping_add(int(1)?)),
        "-" => KValue::int(int(0)?.wrapping_sub(int(1)?)),
        "*" => KValue::int(int(0)?.wrapping_mul(int(1)?)),
        "^^" => match (base(0)?, base(1)?) {
            (Str(a), Str(b)) => KValue::Base(Str(format!("{}{}", a, b))),
            (a, _) => return stuck(c, &KValue::Base(a.clone())),
        },
        _ => return Err(EvalError::UnknownPrim(c.to_string())),
    })
}

/// Whether `env` satisfies every generator of `gens`: each bound value must
/// occur in the collection its generator ranges over.
pub fn models(env: &Env, gens: &Gens) -> Result<bool, EvalError> {
    let mut ev = Evaluator { store: &env.store, vars: env.vars.clone() };
    for (x, src) in gens {
        let u = env.lookup(x).cloned().ok_or_else(|| EvalError::UnboundVariable(x.clone()))?;
        let coll = ev.eval(src)?;
        match coll.count(&u) {
            Some(n) if n > 0 => {}
            Some(_) => return Ok(false),
            None => return stuck("generator", &coll),
        }
    }
    Ok(true)
}
