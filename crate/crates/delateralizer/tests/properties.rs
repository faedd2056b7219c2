use nrc_core::{pretty, Fresh, Term};
use nrc_corpus::{corpus_signature, generate_corpus, generate_store, shrink, CorpusSpec, Shape};
use nrc_delateral::{delateralize_with, metric, occurrences};
use nrc_normalize::{is_normal_form, normalize, Options};
use nrc_semantics::{eval, Env};
use proptest::prelude::*;

fn violation(t: &Term, store_seed: u64) -> Option<String> {
    let sig = corpus_signature();
    let n = normalize(t, &sig).ok()?;
    let out = match delateralize_with(&n, &sig, &Options::default(), &mut Fresh::avoiding(&n)) {
        Ok(o) => o,
        Err(e) => return Some(format!("delateralize failed: {}", e)),
    };
    if !out.metrics.windows(2).all(|w| w[1] < w[0]) || *out.metrics.last().unwrap() != 0 {
        return Some(format!("metrics {:?}", out.metrics));
    }
    if metric(&out.term) != 0 || !occurrences(&out.term).is_empty() {
        return Some(format!("lateral result {}", pretty(&out.term)));
    }
    if let Err(e) = is_normal_form(&out.term, &sig) {
        return Some(format!("not normal: {}", e));
    }
    let env = Env::new(generate_store(store_seed, 3, 4));
    match (eval(t, &env), eval(&out.term, &env)) {
        (Ok(a), Ok(b)) if a == b => None,
        (a, b) => Some(format!("eval differs: {:?} vs {:?} for {}", a, b, pretty(&out.term))),
    }
}

pub fn check_all(spec: &CorpusSpec) -> usize {
    let sig = corpus_signature();
    let mut lateral = 0;
    for (i, t) in generate_corpus(spec).into_iter().enumerate() {
        let seed = spec.seed.wrapping_add(i as u64);
        if metric(&normalize(&t, &sig).unwrap()) > 0 {
            lateral += 1;
        }
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
    lateral
}

#[test]
fn flat_corpus() {
    let lateral = check_all(&CorpusSpec { seed: 5, count: 500, shape: Shape::Flat, ..CorpusSpec::default() });
    assert!(lateral >= 20, "only {} lateral terms", lateral);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_seeds(seed in any::<u64>()) {
        check_all(&CorpusSpec { seed, count: 10, shape: Shape::Flat, ..CorpusSpec::default() });
    }
}

#[test]
#[ignore]
fn many_seeds() {
    for seed in 0..40 {
        check_all(&CorpusSpec { seed, count: 500, shape: Shape::Flat, ..CorpusSpec::default() });
        check_all(&CorpusSpec { seed, count: 100, max_depth: 7, shape: Shape::Flat, ..CorpusSpec::default() });
    }
}
