//! JSON encoding of values. Sets become arrays in canonical order; bags become
//! arrays of rows carrying a `__count` field.

use crate::value::KValue;
use nrc_core::term::Base;
use nrc_core::{BaseType, Type};
use serde_json::{json, Map, Value};

pub const COUNT_FIELD: &str = "__count";

pub fn base_to_json(b: &Base) -> Value {
    match b {
        Base::Int(i) => json!(i),
        Base::Bool(b) => json!(b),
        Base::Str(s) => json!(s),
    }
}

/// One bag element with its multiplicity. Records gain a `__count` field;
/// other elements are wrapped as `{"value": v, "__count": n}`.
pub fn counted_row(v: &KValue, n: u64) -> Value {
    let mut obj = match value_to_json(v) {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    obj.insert(COUNT_FIELD.into(), json!(n));
    Value::Object(obj)
}

pub fn value_to_json(v: &KValue) -> Value {
    match v {
        KValue::Base(b) => base_to_json(b),
        KValue::Record(fs) => Value::Object(fs.iter().map(|(l, v)| (l.clone(), value_to_json(v))).collect()),
        KValue::Set(s) => Value::Array(s.iter().map(value_to_json).collect()),
        KValue::Bag(b) => Value::Array(b.iter().map(|(v, n)| counted_row(v, *n)).collect()),
        KValue::Graph(g) => Value::Array(
            g.map
                .iter()
                .map(|((args, out), n)| {
                    json!({
                        "args": args.iter().map(value_to_json).collect::<Vec<_>>(),
                        "out": value_to_json(out),
                        COUNT_FIELD: n,
                    })
                })
                .collect(),
        ),
        KValue::Closure(c) => json!(format!("<closure {}>", c.param)),
    }
}

/// Result lines for a top-level value: one line per element of a collection,
/// or a single line otherwise.
pub fn json_lines(v: &KValue) -> Vec<String> {
    match v {
        KValue::Bag(b) => b.iter().map(|(v, n)| counted_row(v, *n).to_string()).collect(),
        KValue::Set(s) => s.iter().map(|v| value_to_json(v).to_string()).collect(),
        other => vec![value_to_json(other).to_string()],
    }
}

/// Decodes a JSON value at a nested relational type. Bags accept either plain
/// arrays (repetition gives multiplicity) or counted rows.
pub fn json_to_value(ty: &Type, j: &Value) -> Result<KValue, String> {
    match ty {
        Type::Base(b) => {
            let v = match (b, j) {
                (BaseType::Int, Value::Number(n)) => n.as_i64().map(Base::Int),
                (BaseType::Bool, Value::Bool(x)) => Some(Base::Bool(*x)),
                (BaseType::String, Value::String(s)) => Some(Base::Str(s.clone())),
                _ => None,
            };
            v.map(KValue::Base).ok_or_else(|| format!("expected {}, found {}", b.name(), j))
        }
        Type::Record(fs) => {
            let obj = j.as_object().ok_or_else(|| format!("expected an object, found {}", j))?;
            let mut out = Vec::new();
            for (l, t) in fs {
                let fj = obj.get(l).ok_or_else(|| format!("missing field {}", l))?;
                out.push((l.clone(), json_to_value(t, fj).map_err(|e| format!("field {}: {}", l, e))?));
            }
            if let Some(extra) = obj.keys().find(|k| !fs.iter().any(|(l, _)| l == *k) && *k != COUNT_FIELD) {
                return Err(format!("unexpected field {}", extra));
            }
            Ok(KValue::record(out))
        }
        Type::Set(e) => {
            let arr = j.as_array().ok_or_else(|| format!("expected an array, found {}", j))?;
            Ok(KValue::set_of(arr.iter().map(|x| json_to_value(e, x)).collect::<Result<Vec<_>, _>>()?))
        }
        Type::Bag(e) => {
            let arr = j.as_array().ok_or_else(|| format!("expected an array, found {}", j))?;
            let mut items = Vec::new();
            for x in arr {
                let n = x.get(COUNT_FIELD).and_then(Value::as_u64);
                match n {
                    Some(n) => {
                        let inner = match (&**e, x.get("value")) {
                            (Type::Record(_), _) | (_, None) => x.clone(),
                            (_, Some(v)) => v.clone(),
                        };
                        items.push((json_to_value(e, &inner)?, n));
                    }
                    None => items.push((json_to_value(e, x)?, 1)),
                }
            }
            Ok(KValue::bag_of(items))
        }
        other => Err(format!("cannot read values of type {} from JSON", other)),
    }
}
