//! Printer for the surface syntax accepted by [`crate::parser::parse`].

use crate::term::{Base, Gens, Term};
use crate::types::Type;

// Precedence levels, loosest first.
const BINDER: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const SETOP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const POSTFIX: u8 = 8;

pub fn pretty(t: &Term) -> String {
    let mut out = String::new();
    go(t, BINDER, &mut out);
    out
}

pub fn base_literal(b: &Base) -> String {
    match b {
        Base::Str(s) => {
            let mut o = String::from("\"");
            for c in s.chars() {
                match c {
                    '"' => o.push_str("\\\""),
                    '\\' => o.push_str("\\\\"),
                    '\n' => o.push_str("\\n"),
                    '\t' => o.push_str("\\t"),
                    '\r' => o.push_str("\\r"),
                    '\0' => o.push_str("\\0"),
                    c => o.push(c),
                }
            }
            o.push('"');
            o
        }
        other => other.to_string(),
    }
}

fn infix(op: &str) -> Option<(&'static str, u8)> {
    Some(match op {
        "or" => ("||", OR),
        "and" => ("&&", AND),
        "==" => ("==", CMP),
        "<>" => ("<>", CMP),
        "<" => ("<", CMP),
        "<=" => ("<=", CMP),
        ">" => (">", CMP),
        ">=" => (">=", CMP),
        "+" => ("+", ADD),
        "-" => ("-", ADD),
        "^^" => ("^^", ADD),
        "*" => ("*", MUL),
        _ => return None,
    })
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Lam(..)
        | Term::SetComp(..)
        | Term::BagComp(..)
        | Term::WhereSet(..)
        | Term::WhereBag(..)
        | Term::GraphSet(..)
        | Term::GraphBag(..) => BINDER,
        Term::SetUnion(..) | Term::BagUnion(..) | Term::BagDiff(..) => SETOP,
        Term::Prim(op, args) if args.len() == 2 && infix(op).is_some() => infix(op).unwrap().1,
        Term::Prim(op, args) if op == "not" && args.len() == 1 => UNARY,
        Term::Const(Base::Int(i)) if *i < 0 => UNARY,
        _ => POSTFIX,
    }
}

fn go(t: &Term, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        go(t, BINDER, out);
        out.push(')');
        return;
    }
    match t {
        Term::Var(x) | Term::Table(x) => out.push_str(x),
        Term::Const(b) => out.push_str(&base_literal(b)),
        Term::Prim(op, args) => {
            if let (Some((sym, lv)), 2) = (infix(op), args.len()) {
                // Comparisons do not associate; everything else is left-associative.
                let lhs = if lv == CMP { lv + 1 } else { lv };
                go(&args[0], lhs, out);
                out.push(' ');
                out.push_str(sym);
                out.push(' ');
                go(&args[1], lv + 1, out);
            } else if op == "not" && args.len() == 1 {
                out.push('!');
                go(&args[0], UNARY, out);
            } else {
                out.push_str(op);
                list(args, out);
            }
        }
        Term::Record(fs) => {
            out.push('(');
            for (i, (l, e)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l);
                out.push('=');
                go(e, BINDER, out);
            }
            out.push(')');
        }
        Term::Proj(e, l) => {
            go(e, POSTFIX, out);
            out.push('.');
            out.push_str(l);
        }
        Term::Lam(x, ty, body) => {
            out.push_str(&format!("fun ({} : {}) -> ", x, ty));
            go(body, BINDER, out);
        }
        Term::App(f, a) => {
            go(f, POSTFIX, out);
            out.push('(');
            go(a, BINDER, out);
            out.push(')');
        }
        Term::EmptySet(e) => out.push_str(&format!("{{}} : {}", Type::set(e.clone()))),
        Term::EmptyBag(e) => out.push_str(&format!("[] : {}", Type::bag(e.clone()))),
        Term::SetSingleton(e) => {
            out.push('{');
            go(e, BINDER, out);
            out.push('}');
        }
        Term::BagSingleton(e) => {
            out.push('[');
            go(e, BINDER, out);
            out.push(']');
        }
        Term::SetUnion(a, b) | Term::BagUnion(a, b) | Term::BagDiff(a, b) => {
            go(a, SETOP, out);
            out.push_str(if matches!(t, Term::BagDiff(..)) { " -- " } else { " ++ " });
            go(b, SETOP + 1, out);
        }
        Term::SetComp(head, gens) | Term::BagComp(head, gens) => {
            out.push_str(if matches!(t, Term::SetComp(..)) { "forset " } else { "for " });
            generators(gens, out);
            out.push(' ');
            go(head, BINDER, out);
        }
        Term::WhereSet(body, c) | Term::WhereBag(body, c) => {
            out.push_str("where (");
            go(c, BINDER, out);
            out.push_str(") ");
            go(body, BINDER, out);
        }
        Term::Dedup(e) => call("dedup", &[e], out),
        Term::Promote(e) => call("promote", &[e], out),
        Term::EmptySetTest(e) | Term::EmptyBagTest(e) => call("empty", &[e], out),
        Term::Member(m, n) => call("member", &[m, n], out),
        Term::GraphSet(gens, body) | Term::GraphBag(gens, body) => {
            out.push_str("graph ");
            generators(gens, out);
            out.push(' ');
            go(body, BINDER, out);
        }
        Term::GraphApp(g, args) => {
            go(g, POSTFIX, out);
            out.push_str(" @ ");
            list(args, out);
        }
    }
}

fn call(name: &str, args: &[&Term], out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        go(a, BINDER, out);
    }
    out.push(')');
}

fn list(args: &[Term], out: &mut String) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        go(a, BINDER, out);
    }
    out.push(')');
}

fn generators(gens: &Gens, out: &mut String) {
    out.push('(');
    for (i, (x, src)) in gens.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(x);
        out.push_str(" <- ");
        go(src, BINDER, out);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::*;

    #[test]
    fn q0_text() {
        let q = comp_bag(
            where_bag(
                sing_bag(record(vec![("drug", proj(var("d"), "drug")), ("name", proj(var("c"), "name"))])),
                and(eq(proj(var("c"), "cid"), proj(var("p"), "cid")), eq(proj(var("p"), "did"), proj(var("d"), "did"))),
            ),
            vec![("c", table("Cand")), ("p", table("Pres")), ("d", table("Drug"))],
        );
        assert_eq!(
            pretty(&q),
            "for (c <- Cand, p <- Pres, d <- Drug) where (c.cid == p.cid && p.did == d.did) [(drug=d.drug, name=c.name)]"
        );
    }

    #[test]
    fn binders_under_operators_are_parenthesized() {
        let t = union_bag(comp_bag(sing_bag(var("x")), vec![("x", table("R"))]), table("R"));
        assert_eq!(pretty(&t), "(for (x <- R) [x]) ++ R");
        let t = prim("-", vec![int(1), prim("-", vec![int(2), int(-3)])]);
        assert_eq!(pretty(&t), "1 - (2 - -3)");
    }
}
