//! Flattening of nested-record elements to flat rows, with the inverse map.

use crate::SqlError;
use nrc_core::records::{flat_fields, flat_type};
use nrc_core::types::sort_fields;
use nrc_core::{typecheck_closed, Fresh, Signature, Term, Type};
use nrc_semantics::KValue;
use std::collections::BTreeSet;

/// How a flat row maps back to an element: a column, or a record of shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecordShape {
    /// The element is already flat; rows decode to themselves.
    Identity,
    Column(String),
    Record(Vec<(String, RecordShape)>),
}

impl RecordShape {
    fn of(ty: &Type, prefix: &str) -> RecordShape {
        match ty {
            Type::Record(fs) => RecordShape::Record(
                fs.iter()
                    .map(|(l, t)| {
                        let p = if prefix.is_empty() {
                            l.clone()
                        } else {
                            format!("{}{}{}", prefix, nrc_core::records::SEP, l)
                        };
                        (l.clone(), RecordShape::of(t, &p))
                    })
                    .collect(),
            ),
            _ => RecordShape::Column(prefix.to_string()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, RecordShape::Identity)
    }

    /// Rebuilds one element from a flat row.
    pub fn decode_row(&self, row: &KValue) -> Result<KValue, SqlError> {
        match self {
            RecordShape::Identity => Ok(row.clone()),
            RecordShape::Column(c) => row.field(c).cloned().ok_or_else(|| SqlError::UnknownColumn(c.clone())),
            RecordShape::Record(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for (l, s) in fs {
                    out.push((l.clone(), s.decode_row(row)?));
                }
                Ok(KValue::record(out))
            }
        }
    }

    /// Rebuilds a set or bag of elements from a collection of flat rows.
    pub fn decode(&self, rows: &KValue) -> Result<KValue, SqlError> {
        if self.is_identity() {
            return Ok(rows.clone());
        }
        let set = matches!(rows, KValue::Set(_));
        let entries = rows.entries().ok_or_else(|| SqlError::Exec("result is not a collection".into()))?;
        let mut out = Vec::with_capacity(entries.len());
        for (r, n) in entries {
            out.push((self.decode_row(r)?, n));
        }
        Ok(if set { KValue::set_of(out.into_iter().map(|(v, _)| v)) } else { KValue::bag_of(out) })
    }
}

/// Rewrites a query whose elements are records of records into one over flat
/// records with path-joined labels. Flat input is returned unchanged.
pub fn flatten_records(t: &Term, sig: &Signature) -> Result<(Term, RecordShape), SqlError> {
    let ty = typecheck_closed(t, sig).map_err(|e| SqlError::NotNormal(e.to_string()))?;
    let (elem, set) = match &ty {
        Type::Set(e) => (&**e, true),
        Type::Bag(e) => (&**e, false),
        _ => return Err(SqlError::NotFlat(ty.to_string())),
    };
    if elem.is_flat_elem() {
        return Ok((t.clone(), RecordShape::Identity));
    }
    if !elem.is_record_tree() {
        return Err(SqlError::NotFlat(format!("{} has a collection inside its elements", ty)));
    }
    let cols = flat_type(elem, "");
    let mut seen = BTreeSet::new();
    for (c, _) in &cols {
        if !seen.insert(c) {
            return Err(SqlError::Collision(c.clone()));
        }
    }
    let z = Fresh::avoiding(t).name("z");
    let mut fields = flat_fields(&Term::Var(z.clone()), elem, "");
    sort_fields(&mut fields);
    let row = Term::Record(fields);
    let out = if set {
        Term::SetComp(Box::new(Term::SetSingleton(Box::new(row))), vec![(z, t.clone())])
    } else {
        Term::BagComp(Box::new(Term::BagSingleton(Box::new(row))), vec![(z, t.clone())])
    };
    Ok((out, RecordShape::of(elem, "")))
}
