//! Semantic values. Collections are finitely supported maps into multiplicities:
//! sets store their support, bags and graphs store nonzero counts.

use nrc_core::term::Base;
use nrc_core::types::label_cmp;
use nrc_core::{Term, Type};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Variant order gives the canonical ordering base < record < set < bag < graph < closure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KValue {
    Base(Base),
    /// Fields sorted with [`label_cmp`].
    Record(Vec<(String, KValue)>),
    Set(BTreeSet<KValue>),
    Bag(BTreeMap<KValue, u64>),
    Graph(GraphVal),
    Closure(Closure),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphVal {
    pub bag: bool,
    pub map: BTreeMap<(Vec<KValue>, KValue), u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Closure {
    pub param: String,
    pub body: Box<Term>,
    pub env: Vec<(String, KValue)>,
}

/// Characteristic function: booleans as 0/1 multiplicities.
pub fn chi(b: bool) -> u64 {
    b as u64
}

/// Nonzero test.
pub fn zeta(n: u64) -> bool {
    n != 0
}

impl KValue {
    pub fn int(i: i64) -> KValue {
        KValue::Base(Base::Int(i))
    }

    pub fn str(s: &str) -> KValue {
        KValue::Base(Base::Str(s.to_string()))
    }

    pub fn bool(b: bool) -> KValue {
        KValue::Base(Base::Bool(b))
    }

    pub fn unit() -> KValue {
        KValue::Record(Vec::new())
    }

    pub fn record<I: IntoIterator<Item = (String, KValue)>>(fields: I) -> KValue {
        let mut fs: Vec<_> = fields.into_iter().collect();
        fs.sort_by(|a, b| label_cmp(&a.0, &b.0));
        KValue::Record(fs)
    }

    pub fn empty_set() -> KValue {
        KValue::Set(BTreeSet::new())
    }

    pub fn empty_bag() -> KValue {
        KValue::Bag(BTreeMap::new())
    }

    pub fn set_of<I: IntoIterator<Item = KValue>>(it: I) -> KValue {
        KValue::Set(it.into_iter().collect())
    }

    pub fn bag_of<I: IntoIterator<Item = (KValue, u64)>>(it: I) -> KValue {
        let mut m = BTreeMap::new();
        for (v, n) in it {
            if n > 0 {
                *m.entry(v).or_insert(0) += n;
            }
        }
        KValue::Bag(m)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            KValue::Base(Base::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn field(&self, l: &str) -> Option<&KValue> {
        match self {
            KValue::Record(fs) => fs.iter().find(|(k, _)| k == l).map(|(_, v)| v),
            _ => None,
        }
    }

    /// Multiplicity of `v` in a set or bag; `None` if `self` is not a collection.
    pub fn count(&self, v: &KValue) -> Option<u64> {
        match self {
            KValue::Set(s) => Some(chi(s.contains(v))),
            KValue::Bag(b) => Some(b.get(v).copied().unwrap_or(0)),
            _ => None,
        }
    }

    /// Support with multiplicities, for sets and bags.
    pub fn entries(&self) -> Option<Vec<(&KValue, u64)>> {
        match self {
            KValue::Set(s) => Some(s.iter().map(|v| (v, 1)).collect()),
            KValue::Bag(b) => Some(b.iter().map(|(v, n)| (v, *n)).collect()),
            _ => None,
        }
    }

    pub fn is_empty_collection(&self) -> Option<bool> {
        match self {
            KValue::Set(s) => Some(s.is_empty()),
            KValue::Bag(b) => Some(b.is_empty()),
            KValue::Graph(g) => Some(g.map.is_empty()),
            _ => None,
        }
    }

    /// The empty value of a collection type.
    pub fn empty_of(t: &Type) -> Option<KValue> {
        match t {
            Type::Set(_) => Some(KValue::empty_set()),
            Type::Bag(_) => Some(KValue::empty_bag()),
            Type::Graph(_, o) => {
                Some(KValue::Graph(GraphVal { bag: matches!(**o, Type::Bag(_)), map: BTreeMap::new() }))
            }
            _ => None,
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Base(b) => write!(f, "{}", nrc_core::pretty::base_literal(b)),
            KValue::Record(fs) => {
                write!(f, "(")?;
                for (i, (l, v)) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}={}", l, v)?;
                }
                write!(f, ")")
            }
            KValue::Set(s) => {
                write!(f, "{{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v)?;
                }
                write!(f, "}}")
            }
            KValue::Bag(b) => {
                write!(f, "[")?;
                for (i, (v, n)) in b.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{} x{}", v, n)?;
                }
                write!(f, "]")
            }
            KValue::Graph(g) => {
                write!(f, "<")?;
                for (i, ((args, out), n)) in g.map.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "(")?;
                    for (j, a) in args.iter().enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", a)?;
                    }
                    write!(f, ") ~> {}", out)?;
                    if g.bag {
                        write!(f, " x{}", n)?;
                    }
                }
                write!(f, ">")
            }
            KValue::Closure(c) => write!(f, "<closure {}>", c.param),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let vals = [
            KValue::int(3),
            KValue::unit(),
            KValue::empty_set(),
            KValue::empty_bag(),
            KValue::empty_of(&Type::graph(vec![], Type::set(Type::INT))).unwrap(),
        ];
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn zeta_chi_roundtrip() {
        for b in [true, false] {
            assert_eq!(zeta(chi(b)), b);
        }
    }

    #[test]
    fn bag_of_drops_zero() {
        let b = KValue::bag_of([(KValue::int(1), 0), (KValue::int(2), 2), (KValue::int(2), 1)]);
        assert_eq!(b, KValue::Bag([(KValue::int(2), 3)].into_iter().collect()));
    }
}
