use nrc_core::{alpha_eq, pretty, Term};
use nrc_corpus::{corpus_signature, generate_corpus, generate_store, shrink, CorpusSpec};
use nrc_normalize::{is_normal_form, normalize};
use nrc_semantics::{eval, Env};
use proptest::prelude::*;

/// Checks every normalizer invariant on one term, returning a description of
/// the first violation.
fn violation(t: &Term, store_seed: u64) -> Option<String> {
    let sig = corpus_signature();
    let env = Env::new(generate_store(store_seed, 3, 4));
    let n = match normalize(t, &sig) {
        Ok(n) => n,
        Err(e) => return Some(format!("normalize failed: {}", e)),
    };
    match (eval(t, &env), eval(&n, &env)) {
        (Ok(a), Ok(b)) if a == b => {}
        (a, b) => return Some(format!("eval differs: {:?} vs {:?} for {}", a, b, pretty(&n))),
    }
    if let Err(e) = is_normal_form(&n, &sig) {
        return Some(format!("not normal: {} in {}", e, pretty(&n)));
    }
    match normalize(&n, &sig) {
        Ok(m) if alpha_eq(&m, &n) => None,
        Ok(m) => Some(format!("not idempotent: {} then {}", pretty(&n), pretty(&m))),
        Err(e) => Some(format!("renormalize failed: {}", e)),
    }
}

fn check_all(spec: &CorpusSpec) {
    let sig = corpus_signature();
    for (i, t) in generate_corpus(spec).into_iter().enumerate() {
        let seed = spec.seed.wrapping_add(i as u64);
        if let Some(msg) = violation(&t, seed) {
            let small = shrink(&t, &sig, &mut |c| violation(c, seed).is_some());
            panic!(
                "term {}: {}\n{}\nminimized: {}\n{}",
                i,
                pretty(&t),
                msg,
                pretty(&small),
                violation(&small, seed).unwrap()
            );
        }
    }
}

#[test]
fn five_hundred_seeded_terms() {
    check_all(&CorpusSpec { seed: 2024, count: 500, ..CorpusSpec::default() });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_seeds(seed in any::<u64>()) {
        check_all(&CorpusSpec { seed, count: 10, ..CorpusSpec::default() });
    }
}

#[test]
#[ignore]
fn many_seeded_terms() {
    for seed in 0..40 {
        check_all(&CorpusSpec { seed, count: 500, ..CorpusSpec::default() });
        check_all(&CorpusSpec { seed, count: 100, max_depth: 7, ..CorpusSpec::default() });
    }
}
