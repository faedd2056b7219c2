use nrc_core::{alpha_eq, free_vars, parse, pretty, subst, typecheck, typecheck_closed, Ctx, Fresh, Term};
use nrc_corpus::{corpus_signature, generate_corpus, CorpusSpec};
use proptest::prelude::*;

fn corpus(seed: u64, count: usize) -> Vec<Term> {
    generate_corpus(&CorpusSpec { seed, count, ..CorpusSpec::default() })
}

fn round_trips(t: &Term) {
    let text = pretty(t);
    let back = parse(&text, &corpus_signature()).unwrap_or_else(|e| panic!("{}: {}", text, e));
    assert!(alpha_eq(&back, t), "{}\n reparsed as {}", text, pretty(&back));
}

/// Applied lambdas whose body and argument only mention the parameter.
fn redexes(t: &Term, out: &mut Vec<(String, nrc_core::Type, Term, Term)>) {
    if let Term::App(f, a) = t {
        if let Term::Lam(x, ty, body) = &**f {
            if free_vars(body).iter().all(|v| v == x) && free_vars(a).is_empty() {
                out.push((x.clone(), ty.clone(), (**body).clone(), (**a).clone()));
            }
        }
    }
    t.for_each_child(&mut |c| redexes(c, out));
}

#[test]
fn pretty_then_parse_is_identity() {
    for t in corpus(11, 500) {
        round_trips(&t);
    }
}

#[test]
fn substitution_preserves_types() {
    let sig = corpus_signature();
    let mut seen = 0;
    for t in corpus(12, 500) {
        let mut rs = Vec::new();
        redexes(&t, &mut rs);
        for (x, ty, body, arg) in rs {
            let want = typecheck(&Ctx::new().extended(&x, ty.clone()), &body, &sig).unwrap();
            assert_eq!(typecheck_closed(&arg, &sig).unwrap(), ty);
            let got = typecheck_closed(&subst(&body, &x, &arg, &mut Fresh::avoiding(&body)), &sig).unwrap();
            assert_eq!(got, want);
            seen += 1;
        }
    }
    assert!(seen > 20, "only {} redexes", seen);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn round_trip_random_seeds(seed in any::<u64>()) {
        for t in corpus(seed, 8) {
            round_trips(&t);
        }
    }
}
