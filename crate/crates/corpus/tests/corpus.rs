use nrc_core::{pretty, typecheck_closed, Term};
use nrc_corpus::{check_lemmas, corpus_signature, generate_corpus, generate_store, CorpusSpec, Shape};
use nrc_semantics::{eval, Env};

fn spec(seed: u64, count: usize) -> CorpusSpec {
    CorpusSpec { seed, count, ..CorpusSpec::default() }
}

#[test]
fn generation_is_deterministic() {
    let a = generate_corpus(&spec(0, 20));
    let b = generate_corpus(&spec(0, 20));
    assert_eq!(a, b);
    assert_ne!(a, generate_corpus(&spec(1, 20)));
}

#[test]
fn five_hundred_terms_typecheck_and_evaluate() {
    let sig = corpus_signature();
    let store = generate_store(0, 3, 4);
    for t in generate_corpus(&spec(7, 500)) {
        let ty = typecheck_closed(&t, &sig).unwrap();
        assert!(ty.is_nested_relational(), "{}", pretty(&t));
        eval(&t, &Env::new(store.clone())).unwrap();
    }
}

#[test]
fn depth_one_gives_leaves() {
    let s = CorpusSpec { max_depth: 1, count: 50, ..CorpusSpec::default() };
    for t in generate_corpus(&s) {
        assert!(matches!(t, Term::Var(_) | Term::Const(_) | Term::Table(_)), "{}", t);
    }
}

#[test]
fn constructors_are_covered() {
    let terms = generate_corpus(&spec(3, 500));
    let has = |p: &dyn Fn(&Term) -> bool| terms.iter().any(|t| t.any(p));
    assert!(has(&|t| matches!(t, Term::Dedup(_))));
    assert!(has(&|t| matches!(t, Term::Promote(_))));
    assert!(has(&|t| matches!(t, Term::BagDiff(..))));
    assert!(has(&|t| matches!(t, Term::App(..))));
    assert!(has(&|t| matches!(t, Term::Member(..))));
    assert!(has(&|t| matches!(t, Term::EmptySetTest(_) | Term::EmptyBagTest(_))));
    assert!(has(&|t| matches!(t, Term::WhereSet(..) | Term::WhereBag(..))));
    assert!(has(&|t| matches!(t, Term::SetComp(..))));
    assert!(has(&|t| matches!(t, Term::BagComp(..))));
}

#[test]
fn shapes_are_respected() {
    let sig = corpus_signature();
    let flat = CorpusSpec { shape: Shape::Flat, ..spec(5, 100) };
    for t in generate_corpus(&flat) {
        assert!(typecheck_closed(&t, &sig).unwrap().is_flat_collection());
    }
    let nested = CorpusSpec { shape: Shape::Nested, ..spec(5, 100) };
    for t in generate_corpus(&nested) {
        let ty = typecheck_closed(&t, &sig).unwrap();
        assert!(ty.elem().unwrap().has_collection(), "{}", ty);
    }
}

#[test]
fn stores_respect_bounds() {
    let store = generate_store(9, 3, 4);
    assert_eq!(store.len(), corpus_signature().tables.len());
    for rows in store.values() {
        assert!(rows.values().sum::<u64>() <= 3);
    }
}

#[test]
fn graph_lemmas_hold() {
    for r in check_lemmas() {
        assert!(r.passed(), "{}: {:?}", r.name, r.failures);
    }
}
