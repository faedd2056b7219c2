//! Graph lemmas and generator commutativity, checked by evaluation on every
//! instance over a three-element domain with multiplicities up to three.

use nrc_core::{parse_in, subst, Ctx, Fresh, Signature, Term, Type};
use nrc_semantics::{equiv, Env, KValue, Store};

pub const DOMAIN: [i64; 3] = [0, 1, 2];
pub const MAX_MULT: u64 = 3;

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub name: &'static str,
    pub instances: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.instances > 0
    }
}

/// Free variables available to lemma instances.
fn lemma_ctx() -> Ctx {
    let bag = Type::bag(Type::INT);
    let set = Type::set(Type::INT);
    Ctx::from_pairs([
        ("NB".to_string(), bag.clone()),
        ("NB2".to_string(), bag),
        ("NS".to_string(), set.clone()),
        ("NS2".to_string(), set),
        ("O".to_string(), Type::INT),
    ])
}

pub fn all_bags() -> Vec<KValue> {
    let k = DOMAIN.len() as u32;
    let base = MAX_MULT + 1;
    (0..base.pow(k))
        .map(|mut code| {
            KValue::bag_of(DOMAIN.iter().map(|&d| {
                let n = code % base;
                code /= base;
                (KValue::int(d), n)
            }))
        })
        .collect()
}

pub fn all_sets() -> Vec<KValue> {
    (0..1u32 << DOMAIN.len())
        .map(|bits| {
            KValue::set_of(DOMAIN.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &d)| KValue::int(d)))
        })
        .collect()
}

/// Every binding of the free variables of the lemma context that `vars` names.
fn instances(vars: &[&str]) -> Vec<Env> {
    let mut envs = vec![Env::new(Store::new())];
    for v in vars {
        let vals: Vec<KValue> = match *v {
            "NB" | "NB2" => all_bags(),
            "NS" | "NS2" => all_sets(),
            _ => (0..=DOMAIN.len() as i64).map(KValue::int).collect(),
        };
        envs = envs.into_iter().flat_map(|e| vals.iter().map(move |x| e.clone().bind(v, x.clone()))).collect();
    }
    envs
}

fn mentioned(ts: &[&Term]) -> Vec<&'static str> {
    ["NB", "NB2", "NS", "NS2", "O"]
        .into_iter()
        .filter(|v| ts.iter().any(|t| nrc_core::free_vars(t).contains(*v)))
        .collect()
}

struct Checker {
    sig: Signature,
    ctx: Ctx,
}

impl Checker {
    fn parse(&self, src: &str, extra: &[(&str, Type)]) -> Term {
        let mut ctx = self.ctx.clone();
        for (x, t) in extra {
            ctx.push(x, t.clone());
        }
        parse_in(src, &self.sig, &ctx).unwrap_or_else(|e| panic!("lemma instance {} does not parse: {}", src, e))
    }

    fn check(&self, report: &mut LemmaReport, lhs: &Term, rhs: &Term) {
        for env in instances(&mentioned(&[lhs, rhs])) {
            report.instances += 1;
            match equiv(lhs, rhs, &self.ctx, &self.sig, &env) {
                Ok(true) => {}
                Ok(false) => report.failures.push(format!("{}  vs  {}", lhs, rhs)),
                Err(e) => report.failures.push(format!("{}  vs  {}: {}", lhs, rhs, e)),
            }
            if report.failures.len() > 5 {
                return;
            }
        }
    }
}

const BAG_BODIES: &[&str] = &[
    "[x]",
    "[x + 1]",
    "[x] ++ [x]",
    "where (x < 2) [x]",
    "[] : [Int]",
    "for (z <- NB) where (z <= x) [z]",
    "NB -- [x]",
];

const SET_BODIES: &[&str] =
    &["{x}", "{x * 2}", "{x} ++ {0}", "where (x > 0) {x}", "{} : {Int}", "forset (z <- NS) where (z <> x) {z}"];

const PAIR_BAG_BODIES: &[&str] = &["[(a=x, b=y)]", "[x + y]", "where (x < y) [x]"];
const PAIR_SET_BODIES: &[&str] = &["{(a=x, b=y)}", "{x - y}", "where (x == y) {x}"];

pub fn check_lemmas() -> Vec<LemmaReport> {
    let c = Checker { sig: Signature::builtins(), ctx: lemma_ctx() };
    let x_int = [("x", Type::INT)];
    let new = |name| LemmaReport { name, instances: 0, failures: Vec::new() };

    let mut elem = new("graph-elem");
    for m in BAG_BODIES {
        let lhs = c.parse(&format!("for (x <- NB) where (member(x, dedup(NB))) {}", paren(m)), &[]);
        let rhs = c.parse(&format!("for (x <- NB) {}", paren(m)), &[]);
        c.check(&mut elem, &lhs, &rhs);
    }

    let mut eta = new("graph-eta");
    for m in BAG_BODIES {
        let lhs = c.parse(&format!("(graph (x <- NS) {}) @ (O)", paren(m)), &[]);
        let body = c.parse(m, &x_int);
        let inst = subst(&body, "x", &Term::Var("O".into()), &mut Fresh::avoiding(&body));
        let rhs = Term::WhereBag(
            Box::new(inst),
            Box::new(Term::Member(Box::new(Term::Var("O".into())), Box::new(Term::Var("NS".into())))),
        );
        c.check(&mut eta, &lhs, &rhs);
    }
    for m in SET_BODIES {
        let lhs = c.parse(&format!("(graph (x <- NS) {}) @ (O)", paren(m)), &[]);
        let body = c.parse(m, &x_int);
        let inst = subst(&body, "x", &Term::Var("O".into()), &mut Fresh::avoiding(&body));
        let rhs = Term::WhereSet(
            Box::new(inst),
            Box::new(Term::Member(Box::new(Term::Var("O".into())), Box::new(Term::Var("NS".into())))),
        );
        c.check(&mut eta, &lhs, &rhs);
    }

    let mut iota = new("graph-iota");
    for m in SET_BODIES {
        let lhs = c.parse(&format!("promote(graph (x <- NS) {})", paren(m)), &[]);
        let rhs = c.parse(&format!("graph (x <- NS) promote({})", m), &[]);
        c.check(&mut iota, &lhs, &rhs);
    }

    let mut delta = new("graph-delta");
    for m in BAG_BODIES {
        let lhs = c.parse(&format!("dedup(graph (x <- NS) {})", paren(m)), &[]);
        let rhs = c.parse(&format!("graph (x <- NS) dedup({})", m), &[]);
        c.check(&mut delta, &lhs, &rhs);
    }

    let mut union = new("graph-union");
    let mut diff = new("graph-diff");
    for (i, m1) in BAG_BODIES.iter().enumerate() {
        for m2 in &BAG_BODIES[i..] {
            let lhs = c.parse(&format!("graph (x <- NS) ({}) ++ ({})", m1, m2), &[]);
            let rhs = c.parse(&format!("(graph (x <- NS) {}) ++ (graph (x <- NS) {})", paren(m1), paren(m2)), &[]);
            c.check(&mut union, &lhs, &rhs);
            let lhs = c.parse(&format!("graph (x <- NS) ({}) -- ({})", m1, m2), &[]);
            let rhs = c.parse(&format!("(graph (x <- NS) {}) -- (graph (x <- NS) {})", paren(m1), paren(m2)), &[]);
            c.check(&mut diff, &lhs, &rhs);
        }
    }
    for (i, m1) in SET_BODIES.iter().enumerate() {
        for m2 in &SET_BODIES[i..] {
            let lhs = c.parse(&format!("graph (x <- NS) ({}) ++ ({})", m1, m2), &[]);
            let rhs = c.parse(&format!("(graph (x <- NS) {}) ++ (graph (x <- NS) {})", paren(m1), paren(m2)), &[]);
            c.check(&mut union, &lhs, &rhs);
        }
    }

    let mut comm = new("commutativity");
    for m in PAIR_BAG_BODIES {
        let lhs = c.parse(&format!("for (x <- NB, y <- NB2) {}", paren(m)), &[]);
        let rhs = c.parse(&format!("for (y <- NB2, x <- NB) {}", paren(m)), &[]);
        c.check(&mut comm, &lhs, &rhs);
    }
    for m in PAIR_SET_BODIES {
        let lhs = c.parse(&format!("forset (x <- NS, y <- NS2) {}", paren(m)), &[]);
        let rhs = c.parse(&format!("forset (y <- NS2, x <- NS) {}", paren(m)), &[]);
        c.check(&mut comm, &lhs, &rhs);
    }

    vec![elem, eta, iota, delta, union, diff, comm]
}

fn paren(m: &str) -> String {
    format!("({})", m)
}
