use nrc_core::{parse, parse_in, pretty, typecheck_closed, Ctx, Signature, Term, Type};
use nrc_corpus::fixture;
use nrc_normalize::normalize;
use nrc_semantics::{eval, Env, KValue};
use nrc_shred::*;

fn sig() -> Signature {
    fixture::signature()
}

fn term(src: &str) -> Term {
    parse_in(src, &sig(), &Ctx::new()).unwrap()
}

fn eval_closed(t: &Term) -> KValue {
    eval(t, &Env::new(fixture::store())).unwrap()
}

fn q2() -> Shredded {
    shred_closed(&fixture::query(fixture::Q2), &sig()).unwrap()
}

#[test]
fn base_terms_shred_to_themselves() {
    let t = term("1 + 2");
    let env = ShreddingEnv::new().extend("phi9", term("graph () forset (c <- dedup(Cand)) {c.cid}"));
    let (out, env2) = shred(&env, &Vec::new(), &t, &sig()).unwrap();
    assert_eq!(out, t);
    assert_eq!(env2, env);
}

#[test]
fn q2_lifts_two_graphs() {
    let s = q2();
    assert_eq!(pretty(&s.term), "phi1 @ ()");
    let names: Vec<_> = s.env.names().collect();
    assert_eq!(names, ["phi2", "phi1"]);
    assert_eq!(pretty(s.env.lookup("phi1").unwrap()), "graph () for (x <- Cand) [(name=x.name, drugs=phi2 @ (x))]");
    assert!(matches!(s.env.lookup("phi2"), Some(Term::GraphSet(gens, _)) if gens.len() == 1 && gens[0].0 == "x"));
}

#[test]
fn q2_entries_match_the_hand_decomposition() {
    let s = q2();
    let flat: std::collections::BTreeMap<_, _> = s.flat_env.iter().cloned().collect();
    // The lookup table of drugs per candidate.
    let q_f = term(
        "dedup(for (x <- Cand, p <- Pres, d <- Drug) where (x.cid == p.cid && p.did == d.did) \
         [(k1_cid = x.cid, k1_name = x.name, out = d.drug)])",
    );
    assert_eq!(eval_closed(&flat["phi2"]), eval_closed(&q_f));
    // The outer skeleton, with the nested field replaced by an index on x.
    let q_21 = term(
        "for (x <- Cand) [(out_name = x.name, out_drugs_tag = \"phi2\", \
         out_drugs_key_phi2_k1_cid = x.cid, out_drugs_key_phi2_k1_name = x.name)]",
    );
    assert_eq!(eval_closed(&flat["phi1"]), eval_closed(&q_21));
}

#[test]
fn q2_stitches_to_its_value() {
    let t = fixture::query(fixture::Q2);
    let expected = eval_closed(&t);
    let djt = KValue::record([
        ("name".to_string(), KValue::str("DJT")),
        ("drugs".to_string(), KValue::set_of([KValue::str("adderall"), KValue::str("hydrochloroquine")])),
    ]);
    assert_eq!(expected.count(&djt), Some(1));
    for engine in [Engine::Eval, Engine::Sql] {
        assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), engine).unwrap(), expected);
    }
}

#[test]
fn q2_value_set_deduplicates_pairs() {
    let s = q2();
    let store = fixture::store();
    let xi = build_value_set(&s.env, &sig(), &store, Engine::Eval).unwrap();
    let via_sql = build_value_set(&s.env, &sig(), &store, Engine::Sql).unwrap();
    assert_eq!(xi, via_sql);
    let pair = KValue::record([
        ("k1_cid".to_string(), KValue::int(1)),
        ("k1_name".to_string(), KValue::str("DJT")),
        ("out".to_string(), KValue::str("adderall")),
    ]);
    assert_eq!(xi.values["phi2"].count(&pair), Some(1));
    assert!(matches!(xi.values["phi2"], KValue::Set(_)));
    assert_eq!(xi.values["phi2"].entries().unwrap().len(), 3);
}

#[test]
fn unions_absorb_their_branches() {
    let t = term(
        "for (x <- Cand) [(a = (forset (p <- dedup(Pres)) where (p.cid == x.cid) {p.did}) \
         ++ (forset (d <- dedup(Drug)) {d.did}))]",
    );
    let n = normalize(&t, &sig()).unwrap();
    let (out, env) = shred(&ShreddingEnv::new(), &Vec::new(), &n, &sig()).unwrap();
    assert_eq!(pretty(&out), "phi1 @ ()");
    let names: Vec<_> = env.names().collect();
    assert_eq!(names, ["phi2", "phi1"]);
    match env.lookup("phi2").unwrap() {
        Term::SetUnion(a, b) => {
            assert!(matches!(&**a, Term::GraphSet(g, _) if g.len() == 1));
            assert!(matches!(&**b, Term::GraphSet(g, _) if g.len() == 1));
        }
        other => panic!("expected a union of graphs, got {}", pretty(other)),
    }
    for engine in [Engine::Eval, Engine::Sql] {
        assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), engine).unwrap(), eval_closed(&t));
    }
}

#[test]
fn empty_nested_collections() {
    let t = term("for (x <- Cand) [(name = x.name, none = {} : {Int})]");
    let s = shred_closed(&t, &sig()).unwrap();
    assert_eq!(s.env.len(), 2);
    let xi = build_value_set(&s.env, &sig(), &fixture::store(), Engine::Eval).unwrap();
    assert!(xi.values.values().any(|v| v.is_empty_collection() == Some(true)));
    for engine in [Engine::Eval, Engine::Sql] {
        assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), engine).unwrap(), eval_closed(&t));
    }
}

#[test]
fn environment_typing() {
    assert!(typecheck_env(&ShreddingEnv::new(), &sig()).unwrap().is_empty());
    let s = q2();
    let ctx = typecheck_env(&s.env, &sig()).unwrap();
    let tys: Vec<String> = ctx.entries().iter().map(|(p, t)| format!("{}: {}", p, t)).collect();
    assert_eq!(tys[0], "phi2: <(cid: Int, name: String)> ~> {String}");
    assert!(tys[1].starts_with("phi1: <> ~> [(drugs: {String}, name: String)]"), "{}", tys[1]);

    let forward = ShreddingEnv::new()
        .extend("phi1", s.env.lookup("phi1").unwrap().clone())
        .extend("phi2", s.env.lookup("phi2").unwrap().clone());
    assert!(matches!(typecheck_env(&forward, &sig()), Err(EnvError::ForwardReference { .. })));
    let dup = ShreddingEnv::new()
        .extend("phi2", s.env.lookup("phi2").unwrap().clone())
        .extend("phi2", s.env.lookup("phi2").unwrap().clone());
    assert!(matches!(typecheck_env(&dup, &sig()), Err(EnvError::Duplicate(_))));
    let not_graph = ShreddingEnv::new().extend("phi1", term("Cand"));
    assert!(matches!(typecheck_env(&not_graph, &sig()), Err(EnvError::NotGraph(..))));
}

#[test]
fn applications_flatten_to_indices() {
    let s = q2();
    assert_eq!(pretty(&s.flat_term), "(key=(phi2_k1_cid=0, phi2_k1_name=\"\"), tag=\"phi1\")");
    assert_eq!(s.layout.index_type().to_string(), "(key: (phi2_k1_cid: Int, phi2_k1_name: String), tag: String)");
    let x = Term::Var("x".into());
    let idx = s.layout.index("phi2", &[x]).unwrap();
    assert_eq!(pretty(&idx), "(key=(phi2_k1_cid=x.cid, phi2_k1_name=x.name), tag=\"phi2\")");
    let base = term("1 + 2");
    assert_eq!(flatten(&base, &s.layout, &sig()).unwrap(), base);
}

#[test]
fn bag_graphs_flatten_with_promoted_domains() {
    let g = term(
        "graph (x <- dedup(Cand)) for (y <- promote(forset (p <- dedup(Pres)) where (p.cid == x.cid) {p})) [y.did]",
    );
    let env = ShreddingEnv::new().extend("phi1", g.clone());
    let layout = IndexLayout::from_env(&env, &sig()).unwrap();
    let f = flatten(&g, &layout, &sig()).unwrap();
    match &f {
        Term::BagComp(head, gens) => {
            assert_eq!(gens.len(), 2);
            assert_eq!(pretty(&gens[0].1), "promote(dedup(Cand))");
            assert!(matches!(&gens[1].1, Term::BagComp(..)));
            assert_eq!(pretty(head), format!("[(k1_cid=x.cid, k1_name=x.name, out={})]", gens[1].0));
        }
        other => panic!("{}", pretty(other)),
    }
    let ty = typecheck_closed(&f, &sig()).unwrap();
    assert!(ty.is_flat_collection(), "{}", ty);
}

#[test]
fn stitching_edge_cases() {
    let s = q2();
    let xi = build_value_set(&s.env, &sig(), &fixture::store(), Engine::Eval).unwrap();
    assert_eq!(stitch(&xi, &KValue::int(4), &Type::INT).unwrap(), KValue::int(4));
    let nobody = KValue::record([
        ("tag".to_string(), KValue::str("phi2")),
        (
            "key".to_string(),
            KValue::record([
                ("phi2_k1_cid".to_string(), KValue::int(99)),
                ("phi2_k1_name".to_string(), KValue::str("?")),
            ]),
        ),
    ]);
    assert_eq!(stitch(&xi, &nobody, &Type::set(Type::STRING)).unwrap(), KValue::empty_set());
    assert_eq!(stitch(&xi, &nobody, &Type::bag(Type::STRING)).unwrap(), KValue::empty_bag());
    let missing = KValue::record([("tag".to_string(), KValue::str("phi7")), ("key".to_string(), KValue::unit())]);
    assert!(matches!(stitch(&xi, &missing, &Type::set(Type::STRING)), Err(ShredError::MissingGraph(_))));
}

#[test]
fn flat_queries_shred_to_one_entry() {
    let t = fixture::query(fixture::Q0);
    let s = shred_closed(&t, &sig()).unwrap();
    assert_eq!(s.env.len(), 1);
    for engine in [Engine::Eval, Engine::Sql] {
        assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), engine).unwrap(), eval_closed(&t));
    }
}

#[test]
fn deeper_nesting() {
    // Each candidate's drugs, each with the bag of prescribing candidate ids.
    let t = term(
        "for (x <- Cand) [(name = x.name, drugs = forset (p <- dedup(Pres), d <- dedup(Drug)) \
         where (x.cid == p.cid && p.did == d.did) \
         {(drug = d.drug, by = for (q <- Pres) where (q.did == d.did) [q.cid])})]",
    );
    let s = shred_closed(&t, &sig()).unwrap();
    assert_eq!(s.env.len(), 3);
    for engine in [Engine::Eval, Engine::Sql] {
        assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), engine).unwrap(), eval_closed(&t));
    }
}

#[test]
fn input_environment_is_preserved() {
    let sig = sig();
    let n = normalize(&fixture::query(fixture::Q2), &sig).unwrap();
    let old = term("graph () forset (c <- dedup(Cand)) {c.cid}");
    let env = ShreddingEnv::new().extend("phi7", old.clone());
    let (out, env2) = shred(&env, &Vec::new(), &n, &sig).unwrap();
    assert_eq!(env2.entries()[0], ("phi7".to_string(), old));
    assert!(!env2.entries()[1..].iter().any(|(p, _)| p == "phi7"));
    assert_eq!(pretty(&out), "phi8 @ ()");
    // Unreferenced entries do not change the meaning.
    let direct = shred(&ShreddingEnv::new(), &Vec::new(), &n, &sig).unwrap();
    let env = Env::new(fixture::store());
    assert_eq!(
        eval(&substitute_env(&out, &env2), &env).unwrap(),
        eval(&substitute_env(&direct.0, &direct.1), &env).unwrap()
    );
}

#[test]
fn rejects_unnormalized_input() {
    let t = parse(fixture::Q2, &sig()).unwrap();
    assert!(matches!(shred(&ShreddingEnv::new(), &Vec::new(), &t, &sig()), Err(ShredError::NotNormal(_))));
}

#[test]
fn names_avoid_program_variables() {
    let t =
        term("for (phi1 <- Cand) [(n = phi1.name, s = forset (d <- dedup(Drug)) where (d.did == phi1.cid) {d.drug})]");
    let s = shred_closed(&t, &sig()).unwrap();
    assert!(s.env.names().all(|p| p.starts_with("phi_")), "{}", s.env);
    assert_eq!(shred_pipeline(&t, &sig(), &fixture::store(), Engine::Sql).unwrap(), eval_closed(&t));
}
