use nrc_core::{parse, pretty, Signature, Term};
use nrc_corpus::fixture;
use nrc_delateral::*;
use nrc_normalize::{is_normal_form, normalize};
use nrc_semantics::{eval, Env};

fn sig() -> Signature {
    fixture::signature()
}

fn normalized(src: &str) -> Term {
    normalize(&parse(src, &sig()).unwrap(), &sig()).unwrap()
}

fn same_result(a: &Term, b: &Term) {
    let env = Env::new(fixture::store());
    assert_eq!(eval(a, &env).unwrap(), eval(b, &env).unwrap(), "{}\n{}", pretty(a), pretty(b));
}

const TRICKY: &str = "for (x <- Cand, y <- (for (p <- Pres) where (p.cid == x.cid) [(did=p.did)]) -- promote(forset (d <- dedup(Drug)) where (d.did == x.cid) {(did=d.did)})) [(name=x.name, did=y.did)]";

#[test]
fn q0_has_no_lateral_occurrence() {
    let n = normalized(fixture::Q0);
    let r = lateral_report(&n, &sig()).unwrap();
    assert!(r.occurrences.is_empty());
    assert_eq!(r.metric, 0);
    assert_eq!(delateralize(&n, &sig()).unwrap(), n);
}

#[test]
fn q1_has_one_occurrence_of_c() {
    let n = normalized(fixture::Q1);
    let r = lateral_report(&n, &sig()).unwrap();
    assert_eq!(r.occurrences.len(), 1);
    assert_eq!(r.occurrences[0].binder, "c");
    assert!(matches!(r.occurrences[0].source, Term::Promote(_)));
    assert_eq!(r.metric, 1);
}

#[test]
fn q1_delateralizes() {
    let n = normalized(fixture::Q1);
    let out = delateralize_with(&n, &sig(), &Default::default(), &mut nrc_core::Fresh::avoiding(&n)).unwrap();
    println!("{}", pretty(&out.term));
    assert_eq!(out.metrics, [1, 0]);
    assert!(occurrences(&out.term).is_empty());
    is_normal_form(&out.term, &sig()).unwrap();
    same_result(&n, &out.term);
}

#[test]
fn promote_rule_builds_a_graph_over_the_deduplicated_source() {
    let n = normalized(fixture::Q1);
    let s = delateralize_step(&n).unwrap();
    let want = parse(
        "for (c <- Cand, d <- promote(graph (c <- dedup(Cand)) forset (p <- dedup(Pres), d <- dedup(Drug)) where (c.cid == p.cid && p.did == d.did) {d.drug}) @ (c)) [(name=c.name, drug=d)]",
        &sig(),
    )
    .unwrap();
    assert_eq!(s, want);
    same_result(&n, &s);
    let plain = eliminate_graphs(&s, &Default::default(), &sig(), &mut nrc_core::Fresh::avoiding(&s)).unwrap();
    assert!(!plain.has_graphs());
    same_result(&n, &plain);
}

#[test]
fn set_difference_rule() {
    let src = "forset (c <- dedup(Cand), y <- dedup((for (p <- Pres) where (p.cid == c.cid) [(did=p.did)]) -- (for (d <- Drug) where (d.did == 1) [(did=d.did)]))) {(name=c.name, did=y.did)}";
    let n = normalized(src);
    let s = delateralize_step(&n).unwrap();
    let Term::SetComp(_, gens) = &s else { panic!("{}", s) };
    let Term::GraphApp(g, args) = &gens[1].1 else { panic!("{}", s) };
    assert_eq!(args, &[Term::Var("c".into())]);
    let Term::Dedup(d) = &**g else { panic!("{}", s) };
    let Term::BagDiff(a, b) = &**d else { panic!("{}", s) };
    for side in [a, b] {
        let Term::GraphBag(dom, _) = &**side else { panic!("{}", s) };
        assert_eq!(dom[0], ("c".to_string(), Term::Dedup(Box::new(Term::Table("Cand".into())))));
    }
    same_result(&n, &s);
    let d = delateralize(&n, &sig()).unwrap();
    assert_eq!(metric(&d), 0);
    same_result(&n, &d);
}

#[test]
fn tricky_example_takes_two_iterations() {
    let n = normalized(TRICKY);
    let r = lateral_report(&n, &sig()).unwrap();
    assert_eq!(r.occurrences.len(), 1);
    assert!(matches!(r.occurrences[0].source, Term::BagDiff(..)));
    assert_eq!(r.metric, 2);
    let out = delateralize_with(&n, &sig(), &Default::default(), &mut nrc_core::Fresh::avoiding(&n)).unwrap();
    println!("{}", pretty(&out.term));
    assert_eq!(out.metrics, [2, 1, 0]);
    is_normal_form(&out.term, &sig()).unwrap();
    same_result(&n, &out.term);
}

#[test]
fn step_needs_an_occurrence() {
    assert!(matches!(delateralize_step(&normalized(fixture::Q0)), Err(DelateralizeError::NoOccurrence)));
}

#[test]
fn report_rejects_unnormalized_input() {
    let t = parse(fixture::Q1, &sig()).unwrap();
    assert!(matches!(lateral_report(&t, &sig()), Err(DelateralizeError::NotNormal(_))));
}
