//! Types of the calculus.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseType {
    Int,
    Bool,
    String,
}

impl BaseType {
    pub fn name(self) -> &'static str {
        match self {
            BaseType::Int => "Int",
            BaseType::Bool => "Bool",
            BaseType::String => "String",
        }
    }

    pub fn from_name(s: &str) -> Option<BaseType> {
        match s {
            "Int" => Some(BaseType::Int),
            "Bool" => Some(BaseType::Bool),
            "String" => Some(BaseType::String),
            _ => None,
        }
    }
}

/// Record fields are kept sorted by [`label_cmp`], so two record types
/// with the same fields compare equal regardless of how they were written.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Base(BaseType),
    Record(Vec<(String, Type)>),
    Set(Box<Type>),
    Bag(Box<Type>),
    Fun(Box<Type>, Box<Type>),
    /// Finite tabulated function; the output is always a set or bag type.
    Graph(Vec<Type>, Box<Type>),
}

/// Label order: numeric labels (tuple positions) come first in numeric
/// order, then the rest lexicographically.
pub fn label_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

pub fn sort_fields<T>(fields: &mut [(String, T)]) {
    fields.sort_by(|a, b| label_cmp(&a.0, &b.0));
}

impl Type {
    pub const INT: Type = Type::Base(BaseType::Int);
    pub const BOOL: Type = Type::Base(BaseType::Bool);
    pub const STRING: Type = Type::Base(BaseType::String);

    pub fn record(mut fields: Vec<(String, Type)>) -> Type {
        sort_fields(&mut fields);
        Type::Record(fields)
    }

    pub fn unit() -> Type {
        Type::Record(Vec::new())
    }

    pub fn set(t: Type) -> Type {
        Type::Set(Box::new(t))
    }

    pub fn bag(t: Type) -> Type {
        Type::Bag(Box::new(t))
    }

    pub fn fun(a: Type, b: Type) -> Type {
        Type::Fun(Box::new(a), Box::new(b))
    }

    pub fn graph(args: Vec<Type>, out: Type) -> Type {
        Type::Graph(args, Box::new(out))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Base(_))
    }

    pub fn field(&self, label: &str) -> Option<&Type> {
        match self {
            Type::Record(fs) => fs.iter().find(|(l, _)| l == label).map(|(_, t)| t),
            _ => None,
        }
    }

    /// A record all of whose fields have base type.
    pub fn is_flat_record(&self) -> bool {
        match self {
            Type::Record(fs) => fs.iter().all(|(_, t)| t.is_base()),
            _ => false,
        }
    }

    /// Element types admitted under dedup, promote and bag difference,
    /// and as elements of SQL-translatable collections.
    pub fn is_flat_elem(&self) -> bool {
        self.is_base() || self.is_flat_record()
    }

    /// Set or bag of flat elements.
    pub fn is_flat_collection(&self) -> bool {
        match self {
            Type::Set(e) | Type::Bag(e) => e.is_flat_elem(),
            _ => false,
        }
    }

    /// Records of base types nested arbitrarily deep, without collections.
    pub fn is_record_tree(&self) -> bool {
        match self {
            Type::Base(_) => true,
            Type::Record(fs) => fs.iter().all(|(_, t)| t.is_record_tree()),
            _ => false,
        }
    }

    pub fn is_nested_relational(&self) -> bool {
        match self {
            Type::Base(_) => true,
            Type::Record(fs) => fs.iter().all(|(_, t)| t.is_nested_relational()),
            Type::Set(e) | Type::Bag(e) => e.is_nested_relational(),
            Type::Fun(..) | Type::Graph(..) => false,
        }
    }

    /// Does the type mention a set or bag anywhere inside?
    pub fn has_collection(&self) -> bool {
        match self {
            Type::Base(_) => false,
            Type::Record(fs) => fs.iter().any(|(_, t)| t.has_collection()),
            Type::Set(_) | Type::Bag(_) => true,
            Type::Fun(a, b) => a.has_collection() || b.has_collection(),
            Type::Graph(..) => true,
        }
    }

    pub fn elem(&self) -> Option<&Type> {
        match self {
            Type::Set(e) | Type::Bag(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(b) => write!(f, "{}", b.name()),
            Type::Record(fs) => {
                write!(f, "(")?;
                for (i, (l, t)) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}: {}", l, t)?;
                }
                write!(f, ")")
            }
            Type::Set(e) => write!(f, "{{{}}}", e),
            Type::Bag(e) => write!(f, "[{}]", e),
            Type::Fun(a, b) => match **a {
                Type::Fun(..) | Type::Graph(..) => write!(f, "({}) -> {}", a, b),
                _ => write!(f, "{} -> {}", a, b),
            },
            Type::Graph(args, out) => {
                write!(f, "<")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, "> ~> {}", out)
            }
        }
    }
}
