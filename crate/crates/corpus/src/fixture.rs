//! The candidates/prescriptions/drugs example database and its queries.

use nrc_core::{parse, Signature, Term};
use nrc_semantics::{load_csv, Store};

pub const SCHEMA: &str = include_str!("../fixtures/candidates/schema.json");
pub const CAND_CSV: &str = include_str!("../fixtures/candidates/Cand.csv");
pub const PRES_CSV: &str = include_str!("../fixtures/candidates/Pres.csv");
pub const DRUG_CSV: &str = include_str!("../fixtures/candidates/Drug.csv");
pub const Q0: &str = include_str!("../fixtures/candidates/q0.nrc");
pub const Q1: &str = include_str!("../fixtures/candidates/q1.nrc");
pub const Q2: &str = include_str!("../fixtures/candidates/q2.nrc");

/// File name and contents of every fixture file.
pub const FILES: &[(&str, &str)] = &[
    ("schema.json", SCHEMA),
    ("Cand.csv", CAND_CSV),
    ("Pres.csv", PRES_CSV),
    ("Drug.csv", DRUG_CSV),
    ("q0.nrc", Q0),
    ("q1.nrc", Q1),
    ("q2.nrc", Q2),
];

pub fn signature() -> Signature {
    Signature::from_json(SCHEMA).expect("fixture schema is valid")
}

pub fn store() -> Store {
    let sig = signature();
    let mut st = Store::new();
    for (t, csv) in [("Cand", CAND_CSV), ("Pres", PRES_CSV), ("Drug", DRUG_CSV)] {
        st.insert(t.to_string(), load_csv(&sig, t, csv.as_bytes()).expect("fixture table is valid"));
    }
    st
}

/// Parses one of the fixture queries.
pub fn query(src: &str) -> Term {
    parse(src, &signature()).expect("fixture query is valid")
}
