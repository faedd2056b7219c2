use nrc_core::{parse_in, typecheck_closed, Ctx, Signature, Term};
use nrc_corpus::fixture;
use nrc_delateral::delateralize;
use nrc_normalize::normalize;
use nrc_semantics::{eval, Env, KValue, Store};
use nrc_sql::*;
use std::collections::BTreeMap;

fn term(src: &str, sig: &Signature) -> Term {
    parse_in(src, sig, &Ctx::new()).unwrap()
}

fn sql_of(t: &Term, sig: &Signature, lateral: bool) -> SqlQuery {
    let n = normalize(t, sig).unwrap();
    let n = if lateral { n } else { delateralize(&n, sig).unwrap() };
    to_sql(&n, sig).unwrap()
}

fn run(q: &SqlQuery, t: &Term, sig: &Signature, store: &Store) -> KValue {
    decode(&exec_sql(q, store).unwrap(), &typecheck_closed(t, sig).unwrap()).unwrap()
}

fn select(distinct: bool, projection: Projection, from: Vec<FromItem>) -> SqlQuery {
    SqlQuery::Select(Select { distinct, projection, from, where_: None })
}

fn table_item(t: &str) -> FromItem {
    FromItem { lateral: false, source: Source::Table(t.into()), alias: t.into() }
}

fn one_table(rows: Vec<(i64, u64)>) -> Store {
    let mut s = Store::new();
    s.insert(
        "t".into(),
        rows.into_iter().map(|(a, n)| (KValue::record([("a".to_string(), KValue::int(a))]), n)).collect(),
    );
    s
}

fn rows_a(v: &KValue) -> BTreeMap<i64, u64> {
    v.entries()
        .unwrap()
        .into_iter()
        .map(|(r, n)| match r.field("a") {
            Some(KValue::Base(nrc_core::Base::Int(i))) => (*i, n),
            _ => panic!("bad row {}", r),
        })
        .collect()
}

#[test]
fn q0_sql_matches_eval() {
    let sig = fixture::signature();
    let t = fixture::query(fixture::Q0);
    let q = sql_of(&t, &sig, false);
    let text = print_sql(&q, Dialect::Generic).unwrap();
    assert_eq!(
        text,
        "SELECT c.name AS name, d.drug AS drug FROM Cand AS c, Pres AS p, Drug AS d WHERE ((c.cid = p.cid) AND (p.did = d.did))"
    );
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn dedup_table_prints_plainly() {
    let q = select(true, Projection::Star, vec![table_item("t")]);
    assert_eq!(print_sql(&q, Dialect::Generic).unwrap(), "SELECT DISTINCT * FROM t");
    let sig = fixture::signature();
    let t = term("forset (x <- dedup(Cand)) {x.cid}", &sig);
    let text = print_sql(&sql_of(&t, &sig, false), Dialect::Generic).unwrap();
    assert_eq!(text, "SELECT DISTINCT x.cid AS v FROM (SELECT DISTINCT * FROM Cand) AS x");
}

#[test]
fn q1_keeps_lateral_on_request() {
    let sig = fixture::signature();
    let t = fixture::query(fixture::Q1);
    let q = sql_of(&t, &sig, true);
    assert!(q.has_lateral());
    let text = print_sql(&q, Dialect::Postgres).unwrap();
    assert!(text.contains("LATERAL (SELECT DISTINCT"), "{}", text);
    assert!(matches!(print_sql(&q, Dialect::Sqlite), Err(SqlError::Dialect { .. })));
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn delateralized_q1_is_two_level() {
    let sig = fixture::signature();
    let t = fixture::query(fixture::Q1);
    let q = sql_of(&t, &sig, false);
    assert!(!q.has_lateral());
    let text = print_sql(&q, Dialect::Postgres).unwrap();
    assert!(!text.contains("LATERAL"), "{}", text);
    assert_eq!(text.matches("SELECT").count(), 5, "{}", text);
    assert!(text.starts_with("SELECT c.name AS name, "), "{}", text);
    assert!(text.contains(", (SELECT DISTINCT "), "{}", text);
    print_sql(&q, Dialect::Sqlite).unwrap();
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn empty_keeps_columns() {
    let sig = fixture::signature();
    let t = term("[] : [(a: Int, b: String)]", &sig);
    let q = to_sql(&t, &sig).unwrap();
    assert_eq!(print_sql(&q, Dialect::Generic).unwrap(), "SELECT NULL AS a, NULL AS b WHERE (1 = 0)");
    assert_eq!(exec_sql(&q, &Store::new()).unwrap(), KValue::empty_bag());
}

#[test]
fn set_operations() {
    let sig = fixture::signature();
    let t = term(
        "(for (c <- Cand -- (for (d <- Cand) where (d.cid == 1) [d])) [c.cid]) ++ (for (p <- Pres) [p.cid])",
        &sig,
    );
    let q = sql_of(&t, &sig, false);
    let text = print_sql(&q, Dialect::Postgres).unwrap();
    assert!(text.starts_with("(SELECT "), "{}", text);
    assert!(text.contains(") UNION ALL ("), "{}", text);
    assert!(text.contains(") EXCEPT ALL ("), "{}", text);
    assert!(matches!(print_sql(&q, Dialect::Sqlite), Err(SqlError::Dialect { .. })));
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn union_operands_in_sqlite() {
    let sig = fixture::signature();
    let t = term("(for (c <- Cand) [c.cid]) ++ (for (p <- Pres) [p.cid])", &sig);
    let text = print_sql(&sql_of(&t, &sig, false), Dialect::Sqlite).unwrap();
    assert_eq!(
        text,
        "SELECT * FROM (SELECT c.cid AS v FROM Cand AS c) UNION ALL SELECT * FROM (SELECT p.cid AS v FROM Pres AS p)"
    );
}

#[test]
fn distinct_collapses() {
    let q = select(true, Projection::Star, vec![table_item("t")]);
    let got = exec_sql(&q, &one_table(vec![(7, 2)])).unwrap();
    assert_eq!(rows_a(&got), BTreeMap::from([(7, 1)]));
}

#[test]
fn except_all_truncates() {
    let store = {
        let mut s = one_table(vec![(7, 3)]);
        s.insert("u".into(), one_table(vec![(7, 1)]).remove("t").unwrap());
        s.insert("w".into(), one_table(vec![(7, 5)]).remove("t").unwrap());
        s
    };
    let star = |t: &str| select(false, Projection::Star, vec![table_item(t)]);
    let q = SqlQuery::ExceptAll(Box::new(star("t")), Box::new(star("u")));
    assert_eq!(rows_a(&exec_sql(&q, &store).unwrap()), BTreeMap::from([(7, 2)]));
    let q = SqlQuery::ExceptAll(Box::new(star("t")), Box::new(star("w")));
    assert!(rows_a(&exec_sql(&q, &store).unwrap()).is_empty());
}

#[test]
fn executor_errors() {
    let store = one_table(vec![(1, 1)]);
    let bad_col = SqlQuery::Select(Select {
        distinct: false,
        projection: Projection::Columns(vec![(SqlExpr::Column("t".into(), "zz".into()), "x".into())]),
        from: vec![table_item("t")],
        where_: None,
    });
    assert!(matches!(exec_sql(&bad_col, &store), Err(SqlError::UnknownColumn(_))));
    let bad_alias = SqlQuery::Select(Select {
        distinct: false,
        projection: Projection::Columns(vec![(SqlExpr::Column("q".into(), "a".into()), "x".into())]),
        from: vec![table_item("t")],
        where_: None,
    });
    assert!(matches!(exec_sql(&bad_alias, &store), Err(SqlError::UnknownAlias(_))));
    let lit = |c: &str| {
        SqlQuery::Select(Select {
            distinct: false,
            projection: Projection::Columns(vec![(SqlExpr::Lit(nrc_core::Base::Int(1)), c.into())]),
            from: vec![],
            where_: None,
        })
    };
    let q = SqlQuery::Union { all: true, left: Box::new(lit("a")), right: Box::new(lit("b")) };
    assert!(matches!(exec_sql(&q, &store), Err(SqlError::Arity { .. })));
    assert!(matches!(
        exec_sql(&select(false, Projection::Star, vec![table_item("nope")]), &store),
        Err(SqlError::UnknownTable(_))
    ));
}

#[test]
fn rejects_bad_input() {
    let sig = fixture::signature();
    let nested = normalize(&fixture::query(fixture::Q2), &sig).unwrap();
    assert!(matches!(to_sql(&nested, &sig), Err(SqlError::NotFlat(_))));
    assert!(matches!(to_sql(&fixture::query(fixture::Q1), &sig), Err(SqlError::NotNormal(_))));
    assert!(matches!(to_sql(&term("1 + 2", &sig), &sig), Err(SqlError::NotFlat(_))));
}

#[test]
fn literals_per_dialect() {
    let sig = fixture::signature();
    let t = term("for (c <- Cand) where (true) [(s = c.name ^^ \"it's\", b = false)]", &sig);
    let q = sql_of(&t, &sig, false);
    assert_eq!(print_sql(&q, Dialect::Generic).unwrap(), "SELECT (c.name || 'it''s') AS s, (1=0) AS b FROM Cand AS c");
    assert_eq!(print_sql(&q, Dialect::Postgres).unwrap(), "SELECT (c.name || 'it''s') AS s, FALSE AS b FROM Cand AS c");
    assert_eq!(print_sql(&q, Dialect::Sqlite).unwrap(), "SELECT (c.name || 'it''s') AS s, 0 AS b FROM Cand AS c");
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn emptiness_tests_become_not_exists() {
    let sig = fixture::signature();
    let t = term("for (c <- Cand) where (empty(for (p <- Pres) where (p.cid == c.cid) [p])) [c.name]", &sig);
    let q = sql_of(&t, &sig, false);
    let text = print_sql(&q, Dialect::Generic).unwrap();
    assert!(text.contains("WHERE NOT EXISTS (SELECT "), "{}", text);
    assert!(!q.has_lateral());
    let store = fixture::store();
    assert_eq!(run(&q, &t, &sig, &store), eval(&t, &Env::new(store)).unwrap());
}

#[test]
fn printing_is_deterministic() {
    let sig = fixture::signature();
    let t = fixture::query(fixture::Q1);
    let a = print_sql(&sql_of(&t, &sig, false), Dialect::Generic).unwrap();
    let b = print_sql(&sql_of(&t, &sig, false), Dialect::Generic).unwrap();
    assert_eq!(a, b);
}

#[test]
fn quoted_identifiers() {
    let sig = Signature::builtins().with_table("order", &[("1", nrc_core::BaseType::Int)]);
    let t = term("for (x <- order) [x.1]", &sig);
    let text = print_sql(&sql_of(&t, &sig, false), Dialect::Generic).unwrap();
    assert_eq!(text, "SELECT x.\"1\" AS v FROM \"order\" AS x");
}
