use nrc_core::BaseType::{Int, String as Str};
use nrc_core::{parse, Ctx, Signature};
use nrc_semantics::*;
use proptest::prelude::*;

fn sig() -> Signature {
    Signature::builtins()
        .with_table("Cand", &[("cid", Int), ("name", Str)])
        .with_table("Pres", &[("cid", Int), ("did", Int)])
        .with_table("Drug", &[("did", Int), ("drug", Str)])
}

fn store() -> Store {
    let s = sig();
    let mut st = Store::new();
    st.insert("Cand".into(), load_csv(&s, "Cand", "cid,name\n1,DJT\n2,JRB\n3,ABC\n".as_bytes()).unwrap());
    st.insert("Pres".into(), load_csv(&s, "Pres", "cid,did\n1,1\n1,1\n1,2\n2,3\n".as_bytes()).unwrap());
    st.insert(
        "Drug".into(),
        load_csv(&s, "Drug", "did,drug\n1,adderall\n2,hydrochloroquine\n3,caffeine\n".as_bytes()).unwrap(),
    );
    st
}

fn run(src: &str) -> KValue {
    eval(&parse(src, &sig()).unwrap(), &Env::new(store())).unwrap()
}

fn pair(name: &str, drug: &str) -> KValue {
    KValue::record([("name".to_string(), KValue::str(name)), ("drug".to_string(), KValue::str(drug))])
}

#[test]
fn q0_counts_duplicate_prescriptions() {
    let v = run(
        "for (c <- Cand, p <- Pres, d <- Drug) where (c.cid == p.cid && p.did == d.did) [(name=c.name,drug=d.drug)]",
    );
    let want = KValue::bag_of([
        (pair("DJT", "adderall"), 2),
        (pair("DJT", "hydrochloroquine"), 1),
        (pair("JRB", "caffeine"), 1),
    ]);
    assert_eq!(v, want);
}

#[test]
fn q1_removes_duplicate_drugs() {
    let v = run(
        "for (c <- Cand) for (d <- promote(dedup(for (p <- Pres, d <- Drug) where (c.cid == p.cid && p.did == d.did) [d.drug]))) [(name=c.name, drug=d)]",
    );
    let want = KValue::bag_of([
        (pair("DJT", "adderall"), 1),
        (pair("DJT", "hydrochloroquine"), 1),
        (pair("JRB", "caffeine"), 1),
    ]);
    assert_eq!(v, want);
}

#[test]
fn empty_set_is_zero_everywhere() {
    assert_eq!(run("{} : {Int}"), KValue::empty_set());
}

#[test]
fn dedup_and_monus() {
    let b = |pairs: &[(i64, u64)]| KValue::bag_of(pairs.iter().map(|(v, n)| (KValue::int(*v), *n)));
    assert_eq!(run("dedup([1] ++ [1] ++ [1] ++ [2])"), KValue::set_of([KValue::int(1), KValue::int(2)]));
    assert_eq!(run("([1] ++ [1] ++ [1]) -- ([1] ++ [2] ++ [2] ++ [2] ++ [2] ++ [2])"), b(&[(1, 2)]));
}

#[test]
fn closures_capture_their_environment() {
    assert_eq!(run("(fun (x : Int) -> fun (y : Int) -> x - y)(10)(3)"), KValue::int(7));
}

#[test]
fn graph_application_selects_outputs() {
    let v = run("(graph (c <- dedup(Cand)) for (p <- Pres) where (p.cid == c.cid) [p.did]) @ ((cid=1, name=\"DJT\"))");
    assert_eq!(v, KValue::bag_of([(KValue::int(1), 2), (KValue::int(2), 1)]));
    let v = run("(graph (c <- dedup(Cand)) {c.name}) @ ((cid=1, name=\"nobody\"))");
    assert_eq!(v, KValue::empty_set());
}

#[test]
fn membership_matches_count() {
    assert_eq!(run("member((cid=1, did=1), Pres)"), KValue::bool(true));
    assert_eq!(run("member((cid=9, did=1), dedup(Pres))"), KValue::bool(false));
}

#[test]
fn models_checks_each_generator() {
    let cand_row = KValue::record([("cid".to_string(), KValue::int(1)), ("name".to_string(), KValue::str("DJT"))]);
    let absent = KValue::record([("cid".to_string(), KValue::int(7)), ("name".to_string(), KValue::str("X"))]);
    let gens = vec![("x".to_string(), nrc_core::term::dedup(nrc_core::term::table("Cand")))];
    assert!(models(&Env::new(store()), &vec![]).unwrap());
    assert!(models(&Env::new(store()).bind("x", cand_row), &gens).unwrap());
    assert!(!models(&Env::new(store()).bind("x", absent), &gens).unwrap());
    assert!(matches!(models(&Env::new(store()), &gens), Err(EvalError::UnboundVariable(_))));
}

#[test]
fn equiv_examples() {
    let s = sig();
    let env = Env::new(store());
    let ctx = Ctx::new();
    let m = parse("dedup(Pres)", &s).unwrap();
    assert!(equiv(&m, &m, &ctx, &s, &env).unwrap());
    let a = parse("where (true) {1}", &s).unwrap();
    let b = parse("{1}", &s).unwrap();
    assert!(equiv(&a, &b, &ctx, &s, &env).unwrap());
    let c = parse("[1]", &s).unwrap();
    assert!(matches!(equiv(&a, &c, &ctx, &s, &env), Err(EquivError::TypeMismatch(..))));
}

#[test]
fn missing_table_is_an_error() {
    let t = parse("dedup(Pres)", &sig()).unwrap();
    assert!(matches!(eval(&t, &Env::default()), Err(EvalError::MissingTable(_))));
}

proptest! {
    #[test]
    fn set_union_commutes(xs in proptest::collection::vec(0i64..4, 0..4), ys in proptest::collection::vec(0i64..4, 0..4)) {
        let lit = |v: &[i64]| v.iter().map(|i| format!("{{{}}}", i)).fold("{} : {Int}".to_string(), |a, b| format!("{} ++ {}", a, b));
        let s = sig();
        let m = parse(&lit(&xs), &s).unwrap();
        let n = parse(&lit(&ys), &s).unwrap();
        let l = nrc_core::term::union_set(m.clone(), n.clone());
        let r = nrc_core::term::union_set(n, m);
        prop_assert!(equiv(&l, &r, &Ctx::new(), &s, &Env::new(store())).unwrap());
    }

    #[test]
    fn set_terms_yield_sets_and_bag_terms_bags(xs in proptest::collection::vec(0i64..4, 0..5)) {
        let body: Vec<String> = xs.iter().map(|i| format!("[{}]", i)).collect();
        let bag = format!("[] : [Int] ++ {}", if body.is_empty() { "[] : [Int]".to_string() } else { body.join(" ++ ") });
        prop_assert!(matches!(run(&bag), KValue::Bag(_)));
        let set = format!("dedup({})", bag);
        prop_assert!(matches!(run(&set), KValue::Set(_)));
    }
}
