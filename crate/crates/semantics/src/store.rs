//! Loading table contents from CSV or JSON.

use crate::eval::Store;
use crate::json::json_to_value;
use crate::value::KValue;
use nrc_core::term::Base;
use nrc_core::{BaseType, Signature, Type};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{table}: {msg}")]
    Table { table: String, msg: String },
    #[error("{table}: row {row}: {msg}")]
    Row { table: String, row: usize, msg: String },
    #[error("{table}: row {row}, field {field}: cannot read {text:?} as {ty}")]
    Field { table: String, row: usize, field: String, text: String, ty: String },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
}

fn fields_of<'a>(sig: &'a Signature, table: &str) -> Result<&'a [(String, Type)], LoadError> {
    match sig.table(table) {
        Some(Type::Record(fs)) => Ok(fs),
        _ => Err(LoadError::Table { table: table.into(), msg: "not declared in the schema".into() }),
    }
}

pub fn parse_base(ty: BaseType, text: &str) -> Option<Base> {
    match ty {
        BaseType::Int => text.trim().parse().ok().map(Base::Int),
        BaseType::Bool => match text.trim() {
            "true" | "1" | "t" | "TRUE" | "True" => Some(Base::Bool(true)),
            "false" | "0" | "f" | "FALSE" | "False" => Some(Base::Bool(false)),
            _ => None,
        },
        BaseType::String => Some(Base::Str(text.to_string())),
    }
}

/// Reads a CSV table with a header row. Repeated rows give multiplicities.
pub fn load_csv<R: std::io::Read>(sig: &Signature, table: &str, reader: R) -> Result<BTreeMap<KValue, u64>, LoadError> {
    let fields = fields_of(sig, table)?;
    let terr = |msg: String| LoadError::Table { table: table.into(), msg };
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let mut out = BTreeMap::new();
    let header = match records.next() {
        None => return Ok(out),
        Some(h) => h.map_err(|e| terr(e.to_string()))?,
    };
    let header: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    let mut order = Vec::new();
    for h in &header {
        match fields.iter().position(|(l, _)| l == h) {
            Some(i) if !order.contains(&i) => order.push(i),
            Some(_) => return Err(terr(format!("column {} appears twice", h))),
            None => return Err(terr(format!("column {} is not a field of the table", h))),
        }
    }
    if let Some((missing, _)) = fields.iter().enumerate().find(|(i, _)| !order.contains(i)).map(|(_, f)| f) {
        return Err(terr(format!("missing column {}", missing)));
    }
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| LoadError::Row { table: table.into(), row, msg: e.to_string() })?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != header.len() {
            return Err(LoadError::Row {
                table: table.into(),
                row,
                msg: format!("has {} fields, expected {}", rec.len(), header.len()),
            });
        }
        let mut vals = Vec::new();
        for (col, text) in rec.iter().enumerate() {
            let (label, ty) = &fields[order[col]];
            let Type::Base(bt) = ty else { unreachable!("tables have flat record types") };
            let b = parse_base(*bt, text).ok_or_else(|| LoadError::Field {
                table: table.into(),
                row,
                field: label.clone(),
                text: text.to_string(),
                ty: bt.name().into(),
            })?;
            vals.push((label.clone(), KValue::Base(b)));
        }
        *out.entry(KValue::record(vals)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Reads a JSON array of row objects.
pub fn load_json_rows(sig: &Signature, table: &str, text: &str) -> Result<BTreeMap<KValue, u64>, LoadError> {
    let ty = sig
        .table(table)
        .cloned()
        .ok_or_else(|| LoadError::Table { table: table.into(), msg: "not declared in the schema".into() })?;
    let terr = |msg: String| LoadError::Table { table: table.into(), msg };
    if text.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    let json: serde_json::Value = serde_json::from_str(text).map_err(|e| terr(e.to_string()))?;
    let rows = json.as_array().ok_or_else(|| terr("expected a JSON array of rows".into()))?;
    let mut out = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        let v = json_to_value(&ty, r).map_err(|msg| LoadError::Row { table: table.into(), row: i + 1, msg })?;
        *out.entry(v).or_insert(0) += 1;
    }
    Ok(out)
}

/// Loads every schema table from `dir/<table>.csv` or `dir/<table>.json`.
pub fn load_dir(sig: &Signature, dir: &Path) -> Result<Store, LoadError> {
    let mut store = Store::new();
    for name in sig.tables.keys() {
        let csv_path = dir.join(format!("{}.csv", name));
        let json_path = dir.join(format!("{}.json", name));
        let rows = if csv_path.exists() {
            let f = std::fs::File::open(&csv_path).map_err(|e| LoadError::Io(csv_path.display().to_string(), e))?;
            load_csv(sig, name, f)?
        } else if json_path.exists() {
            let text =
                std::fs::read_to_string(&json_path).map_err(|e| LoadError::Io(json_path.display().to_string(), e))?;
            load_json_rows(sig, name, &text)?
        } else {
            return Err(LoadError::Table {
                table: name.clone(),
                msg: format!("no {}.csv or {}.json in {}", name, name, dir.display()),
            });
        };
        store.insert(name.clone(), rows);
    }
    Ok(store)
}
