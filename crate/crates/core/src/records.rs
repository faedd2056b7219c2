//! Record trees (records nested in records, base leaves) and their flat
//! encoding with labels joined by `_` along the path.

use crate::term::{Base, Term};
use crate::types::Type;

pub const SEP: &str = "_";

fn join(prefix: &str, l: &str) -> String {
    if prefix.is_empty() {
        l.to_string()
    } else {
        format!("{}{}{}", prefix, SEP, l)
    }
}

/// Columns of a record tree type. A base type at the root becomes the single
/// column `prefix`.
pub fn flat_type(ty: &Type, prefix: &str) -> Vec<(String, Type)> {
    let mut out = Vec::new();
    flat_type_into(ty, prefix, &mut out);
    out
}

fn flat_type_into(ty: &Type, prefix: &str, out: &mut Vec<(String, Type)>) {
    match ty {
        Type::Record(fs) => fs.iter().for_each(|(l, t)| flat_type_into(t, &join(prefix, l), out)),
        t => out.push((prefix.to_string(), t.clone())),
    }
}

/// The columns of `t : ty`, projecting through records.
pub fn flat_fields(t: &Term, ty: &Type, prefix: &str) -> Vec<(String, Term)> {
    let mut out = Vec::new();
    flat_fields_into(t, ty, prefix, &mut out);
    out
}

fn flat_fields_into(t: &Term, ty: &Type, prefix: &str, out: &mut Vec<(String, Term)>) {
    match ty {
        Type::Record(fs) => {
            for (l, ft) in fs {
                let sub = match t {
                    Term::Record(items) => items.iter().find(|(k, _)| k == l).map(|(_, v)| v.clone()),
                    _ => None,
                };
                let sub = sub.unwrap_or_else(|| Term::Proj(Box::new(t.clone()), l.clone()));
                flat_fields_into(&sub, ft, &join(prefix, l), out);
            }
        }
        _ => out.push((prefix.to_string(), t.clone())),
    }
}

/// Rebuilds a value of type `ty` from the columns of the flat record `row`.
pub fn unflatten(row: &Term, ty: &Type, prefix: &str) -> Term {
    match ty {
        Type::Record(fs) => {
            Term::Record(fs.iter().map(|(l, t)| (l.clone(), unflatten(row, t, &join(prefix, l)))).collect())
        }
        _ => Term::Proj(Box::new(row.clone()), prefix.to_string()),
    }
}

/// Field-wise equality of two record trees; `true` when there are no fields.
pub fn tree_eq(a: &Term, b: &Term, ty: &Type) -> Term {
    let fa = flat_fields(a, ty, "");
    let fb = flat_fields(b, ty, "");
    fa.into_iter()
        .zip(fb)
        .map(|((_, x), (_, y))| Term::Prim("==".into(), vec![x, y]))
        .reduce(|p, q| Term::Prim("and".into(), vec![p, q]))
        .unwrap_or(Term::Const(Base::Bool(true)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::*;

    #[test]
    fn nested_record_columns() {
        let ty = Type::record(vec![
            ("b1".into(), Type::INT),
            ("r".into(), Type::record(vec![("b2".into(), Type::STRING), ("b3".into(), Type::BOOL)])),
        ]);
        let cols: Vec<String> = flat_type(&ty, "").into_iter().map(|(l, _)| l).collect();
        assert_eq!(cols, ["b1", "r_b2", "r_b3"]);
        let fs = flat_fields(&var("x"), &ty, "k");
        assert_eq!(fs[1], ("k_r_b2".to_string(), proj(proj(var("x"), "r"), "b2")));
        assert_eq!(
            unflatten(&var("p"), &ty, "k"),
            record(vec![
                ("b1", proj(var("p"), "k_b1")),
                ("r", record(vec![("b2", proj(var("p"), "k_r_b2")), ("b3", proj(var("p"), "k_r_b3"))])),
            ])
        );
    }

    #[test]
    fn base_root_is_one_column() {
        assert_eq!(flat_type(&Type::INT, "out"), [("out".to_string(), Type::INT)]);
        assert_eq!(tree_eq(&var("a"), &var("b"), &Type::unit()), boolean(true));
    }
}
