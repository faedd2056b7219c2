//! Signatures: table schemas and primitive operations.

use crate::types::{BaseType, Type};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimType {
    Fixed {
        args: Vec<BaseType>,
        ret: BaseType,
    },
    /// Binary and returning `Bool`, at any base type as long as both sides agree.
    Equality,
}

impl PrimType {
    pub fn arity(&self) -> usize {
        match self {
            PrimType::Fixed { args, .. } => args.len(),
            PrimType::Equality => 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub tables: BTreeMap<String, Type>,
    pub prims: BTreeMap<String, PrimType>,
}

/// Primitives every signature provides, whatever the schema lists.
pub const REQUIRED_PRIMS: &[&str] = &["==", "<", "<=", ">", ">=", "and", "or", "not"];

/// Names of primitives that have an evaluator and an SQL rendering.
pub const BUILTIN_PRIMS: &[&str] = &["==", "<>", "<", "<=", ">", ">=", "and", "or", "not", "+", "-", "*", "^^"];

pub fn builtin_prim(name: &str) -> Option<PrimType> {
    use BaseType::*;
    let fixed = |args: &[BaseType], ret| PrimType::Fixed { args: args.to_vec(), ret };
    Some(match name {
        "==" | "<>" => PrimType::Equality,
        "<" | "<=" | ">" | ">=" => fixed(&[Int, Int], Bool),
        "and" | "or" => fixed(&[Bool, Bool], Bool),
        "not" => fixed(&[Bool], Bool),
        "+" | "-" | "*" => fixed(&[Int, Int], Int),
        "^^" => fixed(&[String, String], String),
        _ => return None,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("schema is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("table {table}: field {field} has unknown base type {ty:?}")]
    BadFieldType { table: String, field: String, ty: String },
    #[error("primitive {0:?} has no implementation")]
    UnknownPrim(String),
    #[error("primitive {name:?} declared with type {declared} but the implementation has type {actual}")]
    PrimTypeMismatch { name: String, declared: String, actual: String },
}

#[derive(Deserialize)]
struct SchemaFile {
    #[serde(default)]
    tables: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(default)]
    prims: Option<BTreeMap<String, PrimDecl>>,
}

#[derive(Deserialize)]
struct PrimDecl {
    args: Vec<String>,
    ret: String,
}

impl Signature {
    /// Signature with no tables and every builtin primitive.
    pub fn builtins() -> Signature {
        let prims = BUILTIN_PRIMS.iter().map(|n| (n.to_string(), builtin_prim(n).unwrap())).collect();
        Signature { tables: BTreeMap::new(), prims }
    }

    pub fn with_table(mut self, name: &str, fields: &[(&str, BaseType)]) -> Signature {
        let fs = fields.iter().map(|(l, b)| (l.to_string(), Type::Base(*b))).collect();
        self.tables.insert(name.to_string(), Type::record(fs));
        self
    }

    /// Parses `{ "tables": {name: {field: basetype}}, "prims": {name: {"args": [...], "ret": ...}} }`.
    /// When `prims` is absent every builtin is available; when present only the
    /// listed ones are, on top of [`REQUIRED_PRIMS`].
    pub fn from_json(text: &str) -> Result<Signature, SchemaError> {
        let file: SchemaFile = serde_json::from_str(text)?;
        let mut sig = Signature::builtins();
        for (name, fields) in file.tables {
            let mut fs = Vec::new();
            for (field, ty) in fields {
                let b = BaseType::from_name(&ty).ok_or_else(|| SchemaError::BadFieldType {
                    table: name.clone(),
                    field: field.clone(),
                    ty: ty.clone(),
                })?;
                fs.push((field, Type::Base(b)));
            }
            sig.tables.insert(name, Type::record(fs));
        }
        if let Some(prims) = file.prims {
            sig.prims.retain(|n, _| REQUIRED_PRIMS.contains(&n.as_str()));
            for (name, decl) in prims {
                let actual = builtin_prim(&name).ok_or_else(|| SchemaError::UnknownPrim(name.clone()))?;
                let ok = match &actual {
                    PrimType::Equality => decl.args.len() == 2 && decl.ret == "Bool",
                    PrimType::Fixed { args, ret } => {
                        decl.ret == ret.name()
                            && decl.args.len() == args.len()
                            && decl.args.iter().zip(args).all(|(a, b)| a == b.name())
                    }
                };
                if !ok {
                    return Err(SchemaError::PrimTypeMismatch {
                        name,
                        declared: format!("{:?} -> {}", decl.args, decl.ret),
                        actual: format!("{:?}", actual),
                    });
                }
                sig.prims.insert(name, actual);
            }
        }
        Ok(sig)
    }

    pub fn table(&self, name: &str) -> Option<&Type> {
        self.tables.get(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_schema() {
        let s = Signature::from_json(r#"{"tables": {"Cand": {"cid": "Int", "name": "String"}}}"#).unwrap();
        assert_eq!(s.table("Cand").unwrap().to_string(), "(cid: Int, name: String)");
        assert!(s.prims.contains_key("=="));
    }

    #[test]
    fn rejects_bad_field_type() {
        let e = Signature::from_json(r#"{"tables": {"T": {"a": "Float"}}}"#).unwrap_err();
        assert!(matches!(e, SchemaError::BadFieldType { .. }));
    }

    #[test]
    fn restricts_prims() {
        let s =
            Signature::from_json(r#"{"tables": {}, "prims": {"^^": {"args": ["String", "String"], "ret": "String"}}}"#)
                .unwrap();
        assert!(s.prims.contains_key("^^"));
        assert!(!s.prims.contains_key("+"));
        assert_eq!(s.prims.len(), REQUIRED_PRIMS.len() + 1);
        let e = Signature::from_json(r#"{"prims": {"sqrt": {"args": ["Int"], "ret": "Int"}}}"#).unwrap_err();
        assert!(matches!(e, SchemaError::UnknownPrim(_)));
    }
}
