//! Surface syntax parser. Parsing produces an untyped tree which is then
//! elaborated against the signature: the elaborator picks between the set
//! and bag versions of `++`, `where`, `empty` and `graph`, and fills in
//! element types of unannotated empty collections from a sibling operand.

use crate::lexer::{lex, Tok, Token};
use crate::sig::Signature;
use crate::term::{Base, Term};
use crate::typecheck::{typecheck, Ctx, TypeError};
use crate::types::{BaseType, Type};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown name {name}")]
    UnknownName { line: usize, col: usize, name: String },
    #[error("{line}:{col}: {err}")]
    Type { line: usize, col: usize, err: TypeError },
}

impl ParseError {
    pub fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. }
            | ParseError::UnknownName { line, col, .. }
            | ParseError::Type { line, col, .. } => (*line, *col),
        }
    }
}

#[derive(Clone, Debug)]
struct SE {
    kind: S,
    line: usize,
    col: usize,
}

#[derive(Clone, Debug)]
enum S {
    Ident(String),
    Lit(Base),
    Call(String, Vec<SE>),
    Record(Vec<(String, SE)>),
    Proj(Box<SE>, String),
    Lam(String, Type, Box<SE>),
    App(Box<SE>, Vec<SE>),
    Bin(&'static str, Box<SE>, Box<SE>),
    Not(Box<SE>),
    SetSing(Box<SE>),
    BagSing(Box<SE>),
    EmptySet(Option<Type>),
    EmptyBag(Option<Type>),
    Union(Box<SE>, Box<SE>),
    Diff(Box<SE>, Box<SE>),
    For { set: bool, gens: Vec<(String, SE)>, cond: Option<Box<SE>>, body: Box<SE> },
    Where(Box<SE>, Box<SE>),
    Dedup(Box<SE>),
    Promote(Box<SE>),
    Empty(Box<SE>),
    Member(Box<SE>, Box<SE>),
    Graph(Vec<(String, SE)>, Box<SE>),
    GApp(Box<SE>, Vec<SE>),
}

const KEYWORDS: &[&str] = &[
    "for", "forset", "where", "fun", "graph", "dedup", "promote", "empty", "member", "true", "false", "and", "or",
    "not",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (l, c) = self.here();
        Err(ParseError::syntax(l, c, msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", s, describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn label(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Int(n) if n >= 0 => {
                self.bump();
                Ok(n.to_string())
            }
            other => self.err(format!("expected label, found {}", describe(&other))),
        }
    }

    fn mk(&self, kind: S, at: (usize, usize)) -> SE {
        SE { kind, line: at.0, col: at.1 }
    }

    fn expr(&mut self) -> Result<SE, ParseError> {
        let at = self.here();
        if self.is_kw("fun") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            return Ok(self.mk(S::Lam(x, ty, Box::new(body)), at));
        }
        if self.is_kw("for") || self.is_kw("forset") {
            let set = self.is_kw("forset");
            self.bump();
            let gens = self.gens()?;
            let cond = if self.is_kw("where") {
                self.bump();
                self.expect_sym("(")?;
                let c = self.expr()?;
                self.expect_sym(")")?;
                Some(Box::new(c))
            } else {
                None
            };
            let body = self.expr()?;
            return Ok(self.mk(S::For { set, gens, cond, body: Box::new(body) }, at));
        }
        if self.is_kw("where") {
            self.bump();
            self.expect_sym("(")?;
            let c = self.expr()?;
            self.expect_sym(")")?;
            let body = self.expr()?;
            return Ok(self.mk(S::Where(Box::new(c), Box::new(body)), at));
        }
        if self.is_kw("graph") {
            self.bump();
            let gens = self.gens()?;
            let body = self.expr()?;
            return Ok(self.mk(S::Graph(gens, Box::new(body)), at));
        }
        self.disj()
    }

    fn gens(&mut self) -> Result<Vec<(String, SE)>, ParseError> {
        self.expect_sym("(")?;
        let mut gens = Vec::new();
        if self.eat_sym(")") {
            return Ok(gens);
        }
        loop {
            let x = self.ident()?;
            self.expect_sym("<-")?;
            let src = self.expr()?;
            gens.push((x, src));
            if self.eat_sym(")") {
                return Ok(gens);
            }
            self.expect_sym(",")?;
        }
    }

    fn binary(
        &mut self,
        next: fn(&mut Parser) -> Result<SE, ParseError>,
        ops: &[(&'static str, &'static str)],
    ) -> Result<SE, ParseError> {
        let mut lhs = next(self)?;
        loop {
            let at = self.here();
            let op = ops.iter().find(|(tok, _)| match self.peek() {
                Tok::Sym(s) => s == tok,
                Tok::Ident(s) => s == tok,
                _ => false,
            });
            let Some((_, name)) = op else { return Ok(lhs) };
            self.bump();
            let rhs = next(self)?;
            lhs = match *name {
                "++" => self.mk(S::Union(Box::new(lhs), Box::new(rhs)), at),
                "--" => self.mk(S::Diff(Box::new(lhs), Box::new(rhs)), at),
                _ => self.mk(S::Bin(name, Box::new(lhs), Box::new(rhs)), at),
            };
        }
    }

    fn disj(&mut self) -> Result<SE, ParseError> {
        self.binary(Parser::conj, &[("||", "or"), ("or", "or")])
    }

    fn conj(&mut self) -> Result<SE, ParseError> {
        self.binary(Parser::cmp, &[("&&", "and"), ("and", "and")])
    }

    fn cmp(&mut self) -> Result<SE, ParseError> {
        let lhs = self.setop()?;
        let at = self.here();
        let ops = ["==", "<>", "<=", ">=", "<", ">"];
        if let Tok::Sym(s) = self.peek() {
            if let Some(op) = ops.iter().find(|o| *o == s) {
                self.bump();
                let rhs = self.setop()?;
                return Ok(self.mk(S::Bin(op, Box::new(lhs), Box::new(rhs)), at));
            }
        }
        Ok(lhs)
    }

    fn setop(&mut self) -> Result<SE, ParseError> {
        self.binary(Parser::additive, &[("++", "++"), ("--", "--")])
    }

    fn additive(&mut self) -> Result<SE, ParseError> {
        self.binary(Parser::mult, &[("+", "+"), ("-", "-"), ("^^", "^^")])
    }

    fn mult(&mut self) -> Result<SE, ParseError> {
        self.binary(Parser::unary, &[("*", "*")])
    }

    fn unary(&mut self) -> Result<SE, ParseError> {
        let at = self.here();
        if self.eat_sym("!") || (self.is_kw("not") && !matches!(self.peek_at(1), Tok::Sym("("))) {
            if self.is_kw("not") {
                self.bump();
            }
            let e = self.unary()?;
            return Ok(self.mk(S::Not(Box::new(e)), at));
        }
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(n) = self.peek().clone() {
                self.bump();
                let lit = self.mk(S::Lit(Base::Int(-n)), at);
                return self.postfix_from(lit);
            }
            let e = self.unary()?;
            let zero = self.mk(S::Lit(Base::Int(0)), at);
            return Ok(self.mk(S::Bin("-", Box::new(zero), Box::new(e)), at));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<SE, ParseError> {
        let a = self.atom()?;
        self.postfix_from(a)
    }

    fn postfix_from(&mut self, mut e: SE) -> Result<SE, ParseError> {
        loop {
            let at = self.here();
            if self.eat_sym(".") {
                let l = self.label()?;
                e = self.mk(S::Proj(Box::new(e), l), at);
            } else if self.is_sym("(") {
                let args = self.args()?;
                e = self.mk(S::App(Box::new(e), args), at);
            } else if self.eat_sym("@") {
                let args = self.args()?;
                e = self.mk(S::GApp(Box::new(e), args), at);
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> Result<Vec<SE>, ParseError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn one_arg(&mut self) -> Result<SE, ParseError> {
        let mut a = self.args()?;
        if a.len() != 1 {
            return self.err("expected exactly one argument");
        }
        Ok(a.pop().unwrap())
    }

    fn annotation(&mut self) -> Result<Option<Type>, ParseError> {
        if self.eat_sym(":") {
            Ok(Some(self.ty()?))
        } else {
            Ok(None)
        }
    }

    fn atom(&mut self) -> Result<SE, ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(self.mk(S::Lit(Base::Int(n)), at))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(self.mk(S::Lit(Base::Str(s)), at))
            }
            Tok::Ident(k) => match k.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(self.mk(S::Lit(Base::Bool(k == "true")), at))
                }
                "dedup" | "promote" | "empty" => {
                    self.bump();
                    let a = Box::new(self.one_arg()?);
                    Ok(self.mk(
                        match k.as_str() {
                            "dedup" => S::Dedup(a),
                            "promote" => S::Promote(a),
                            _ => S::Empty(a),
                        },
                        at,
                    ))
                }
                "member" => {
                    self.bump();
                    let mut a = self.args()?;
                    if a.len() != 2 {
                        return self.err("member takes two arguments");
                    }
                    let n = a.pop().unwrap();
                    let m = a.pop().unwrap();
                    Ok(self.mk(S::Member(Box::new(m), Box::new(n)), at))
                }
                "not" => {
                    self.bump();
                    let a = self.one_arg()?;
                    Ok(self.mk(S::Not(Box::new(a)), at))
                }
                "for" | "forset" | "where" | "graph" | "fun" => {
                    self.err(format!("`{}` expression must be parenthesized here", k))
                }
                _ => {
                    let name = self.ident()?;
                    if self.is_sym("(") {
                        let args = self.args()?;
                        return Ok(self.mk(S::Call(name, args), at));
                    }
                    Ok(self.mk(S::Ident(name), at))
                }
            },
            Tok::Sym("[") => {
                self.bump();
                if self.eat_sym("]") {
                    if self.is_kw("bag") {
                        self.bump();
                    } else if self.is_kw("set") {
                        self.bump();
                        let ann = self.annotation()?;
                        return self.empty_with(true, ann, at);
                    }
                    let ann = self.annotation()?;
                    return self.empty_with(false, ann, at);
                }
                let e = self.expr()?;
                self.expect_sym("]")?;
                Ok(self.mk(S::BagSing(Box::new(e)), at))
            }
            Tok::Sym("{") => {
                self.bump();
                if self.eat_sym("}") {
                    let ann = self.annotation()?;
                    return self.empty_with(true, ann, at);
                }
                let e = self.expr()?;
                self.expect_sym("}")?;
                Ok(self.mk(S::SetSing(Box::new(e)), at))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(self.mk(S::Record(Vec::new()), at));
                }
                let is_field = matches!((self.peek(), self.peek_at(1)), (Tok::Ident(_) | Tok::Int(_), Tok::Sym("=")));
                if is_field {
                    let mut fields = Vec::new();
                    loop {
                        let l = self.label()?;
                        self.expect_sym("=")?;
                        fields.push((l, self.expr()?));
                        if self.eat_sym(")") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                    return Ok(self.mk(S::Record(fields), at));
                }
                let first = self.expr()?;
                if self.eat_sym(")") {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat_sym(",") {
                    items.push(self.expr()?);
                }
                self.expect_sym(")")?;
                let fields = items.into_iter().enumerate().map(|(i, e)| ((i + 1).to_string(), e)).collect();
                Ok(self.mk(S::Record(fields), at))
            }
            other => self.err(format!("unexpected {}", describe(&other))),
        }
    }

    /// `ann` may be either the collection type or, for brevity, the element type.
    fn empty_with(&mut self, set: bool, ann: Option<Type>, at: (usize, usize)) -> Result<SE, ParseError> {
        let elem = match ann {
            None => None,
            Some(Type::Set(e)) if set => Some(*e),
            Some(Type::Bag(e)) if !set => Some(*e),
            Some(t @ (Type::Set(_) | Type::Bag(_))) => {
                return Err(ParseError::syntax(
                    at.0,
                    at.1,
                    format!("annotation {} does not match the kind of empty collection", t),
                ))
            }
            Some(t) => Some(t),
        };
        Ok(self.mk(if set { S::EmptySet(elem) } else { S::EmptyBag(elem) }, at))
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let dom = self.ty_atom()?;
        if self.eat_sym("->") {
            let cod = self.ty()?;
            return Ok(Type::fun(dom, cod));
        }
        Ok(dom)
    }

    fn ty_atom(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n) => match BaseType::from_name(&n) {
                Some(b) => {
                    self.bump();
                    Ok(Type::Base(b))
                }
                None => self.err(format!("unknown type {}", n)),
            },
            Tok::Sym("{") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym("}")?;
                Ok(Type::set(t))
            }
            Tok::Sym("[") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym("]")?;
                Ok(Type::bag(t))
            }
            Tok::Sym("<") => {
                self.bump();
                let mut args = Vec::new();
                if !self.eat_sym(">") {
                    loop {
                        args.push(self.ty()?);
                        if self.eat_sym(">") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                self.expect_sym("~>")?;
                let out = self.ty_atom()?;
                Ok(Type::graph(args, out))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Type::unit());
                }
                let labelled = matches!((self.peek(), self.peek_at(1)), (Tok::Ident(_) | Tok::Int(_), Tok::Sym(":")));
                let mut fields = Vec::new();
                let mut i = 0;
                loop {
                    i += 1;
                    if labelled {
                        let l = self.label()?;
                        self.expect_sym(":")?;
                        fields.push((l, self.ty()?));
                    } else {
                        fields.push((i.to_string(), self.ty()?));
                    }
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
                if !labelled && fields.len() == 1 {
                    return Ok(fields.pop().unwrap().1);
                }
                Ok(Type::record(fields))
            }
            other => self.err(format!("expected a type, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{}`", s),
        Tok::Int(n) => format!("`{}`", n),
        Tok::Str(s) => format!("{:?}", s),
        Tok::Sym(s) => format!("`{}`", s),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses a type written in surface syntax, e.g. `[(a: Int, b: {String})]`.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.ty()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.err(format!("unexpected {} after type", describe(p.peek())));
    }
    Ok(t)
}

/// Parses and elaborates a closed query.
pub fn parse(src: &str, sig: &Signature) -> Result<Term, ParseError> {
    parse_in(src, sig, &Ctx::new())
}

/// Parses and elaborates a query whose free variables are typed by `ctx`.
pub fn parse_in(src: &str, sig: &Signature, ctx: &Ctx) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let se = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.err(format!("unexpected {} after expression", describe(p.peek())));
    }
    let mut el = Elab { sig, ctx: ctx.clone() };
    Ok(el.elab(&se, None)?.0)
}

struct Elab<'a> {
    sig: &'a Signature,
    ctx: Ctx,
}

impl<'a> Elab<'a> {
    fn type_of(&self, se: &SE, t: &Term) -> Result<Type, ParseError> {
        typecheck(&self.ctx, t, self.sig).map_err(|err| ParseError::Type { line: se.line, col: se.col, err })
    }

    fn tyerr(se: &SE, err: TypeError) -> ParseError {
        ParseError::Type { line: se.line, col: se.col, err }
    }

    /// `expect` is a hint used only to fill in unannotated empty collections.
    fn elab(&mut self, se: &SE, expect: Option<&Type>) -> Result<(Term, Type), ParseError> {
        let b = Box::new;
        let term = match &se.kind {
            S::Ident(x) => {
                if self.ctx.lookup(x).is_some() {
                    Term::Var(x.clone())
                } else if self.sig.table(x).is_some() {
                    Term::Table(x.clone())
                } else {
                    return Err(ParseError::UnknownName { line: se.line, col: se.col, name: x.clone() });
                }
            }
            S::Lit(v) => Term::Const(v.clone()),
            S::Call(f, args) => {
                if self.ctx.lookup(f).is_some() {
                    let fse = SE { kind: S::Ident(f.clone()), line: se.line, col: se.col };
                    let app = SE { kind: S::App(Box::new(fse), args.clone()), line: se.line, col: se.col };
                    return self.elab(&app, expect);
                }
                if !self.sig.prims.contains_key(f) {
                    return Err(ParseError::UnknownName { line: se.line, col: se.col, name: f.clone() });
                }
                let mut ts = Vec::new();
                for a in args {
                    ts.push(self.elab(a, None)?.0);
                }
                Term::Prim(f.clone(), ts)
            }
            S::Record(fs) => {
                let mut out = Vec::new();
                for (l, e) in fs {
                    let hint = expect.and_then(|t| t.field(l)).cloned();
                    out.push((l.clone(), self.elab(e, hint.as_ref())?.0));
                }
                Term::Record(out)
            }
            S::Proj(e, l) => Term::Proj(b(self.elab(e, None)?.0), l.clone()),
            S::Lam(x, ty, body) => {
                self.ctx.push(x, ty.clone());
                let r = self.elab(body, None);
                self.ctx.pop();
                Term::Lam(x.clone(), ty.clone(), b(r?.0))
            }
            S::App(f, args) => {
                let (mut t, _) = self.elab(f, None)?;
                for a in args {
                    t = Term::App(b(t), b(self.elab(a, None)?.0));
                }
                t
            }
            S::Bin(op, l, r) => {
                let lt = self.elab(l, None)?.0;
                let rt = self.elab(r, None)?.0;
                Term::Prim(op.to_string(), vec![lt, rt])
            }
            S::Not(e) => Term::Prim("not".into(), vec![self.elab(e, None)?.0]),
            S::SetSing(e) => {
                let hint = expect.and_then(|t| t.elem()).cloned();
                Term::SetSingleton(b(self.elab(e, hint.as_ref())?.0))
            }
            S::BagSing(e) => {
                let hint = expect.and_then(|t| t.elem()).cloned();
                Term::BagSingleton(b(self.elab(e, hint.as_ref())?.0))
            }
            S::EmptySet(ann) | S::EmptyBag(ann) => {
                let set = matches!(se.kind, S::EmptySet(_));
                let elem = match (ann, expect) {
                    (Some(t), _) => t.clone(),
                    (None, Some(Type::Set(e))) if set => (**e).clone(),
                    (None, Some(Type::Bag(e))) if !set => (**e).clone(),
                    _ => {
                        return Err(ParseError::syntax(
                            se.line,
                            se.col,
                            "cannot infer the element type of this empty collection; add an annotation such as `[] : [Int]`",
                        ))
                    }
                };
                if set {
                    Term::EmptySet(elem)
                } else {
                    Term::EmptyBag(elem)
                }
            }
            S::Union(l, r) | S::Diff(l, r) => {
                let is_diff = matches!(se.kind, S::Diff(..));
                let (lt, rt, ty) = if is_empty_unannotated(l) {
                    let (rt, ty) = self.elab(r, expect)?;
                    let (lt, _) = self.elab(l, Some(&ty))?;
                    (lt, rt, ty)
                } else {
                    let (lt, ty) = self.elab(l, expect)?;
                    let (rt, _) = self.elab(r, Some(&ty))?;
                    (lt, rt, ty)
                };
                if is_diff {
                    Term::BagDiff(b(lt), b(rt))
                } else if is_bag_like(&ty) {
                    Term::BagUnion(b(lt), b(rt))
                } else {
                    Term::SetUnion(b(lt), b(rt))
                }
            }
            S::For { set, gens, cond, body } => {
                let n = self.ctx.len();
                let r = self.elab_for(*set, gens, cond.as_deref(), body, expect);
                self.ctx.truncate(n);
                r?
            }
            S::Where(c, body) => {
                let (bt, bty) = self.elab(body, expect)?;
                let (ct, _) = self.elab(c, None)?;
                if is_bag_like(&bty) {
                    Term::WhereBag(b(bt), b(ct))
                } else {
                    Term::WhereSet(b(bt), b(ct))
                }
            }
            S::Dedup(e) => Term::Dedup(b(self.elab(e, None)?.0)),
            S::Promote(e) => Term::Promote(b(self.elab(e, None)?.0)),
            S::Empty(e) => {
                let (t, ty) = self.elab(e, None)?;
                if is_bag_like(&ty) {
                    Term::EmptyBagTest(b(t))
                } else {
                    Term::EmptySetTest(b(t))
                }
            }
            S::Member(m, n) => {
                let (nt, nty) = self.elab(n, None)?;
                let (mt, _) = self.elab(m, nty.elem())?;
                Term::Member(b(mt), b(nt))
            }
            S::Graph(gens, body) => {
                let n = self.ctx.len();
                let r = self.elab_graph(gens, body);
                self.ctx.truncate(n);
                r?
            }
            S::GApp(g, args) => {
                let (gt, gty) = self.elab(g, None)?;
                let params = match &gty {
                    Type::Graph(ps, _) => ps.clone(),
                    _ => Vec::new(),
                };
                let mut ts = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    ts.push(self.elab(a, params.get(i))?.0);
                }
                Term::GraphApp(b(gt), ts)
            }
        };
        let ty = self.type_of(se, &term)?;
        Ok((term, ty))
    }

    fn elab_gens(&mut self, set: bool, graph: bool, gens: &[(String, SE)]) -> Result<Vec<(String, Term)>, ParseError> {
        let mut out = Vec::new();
        for (x, g) in gens {
            let (mut gt, gty) = self.elab(g, None)?;
            let elem = match (&gty, set) {
                (Type::Set(e), true) | (Type::Bag(e), false) => (**e).clone(),
                // A set generator in a bag comprehension is promoted, a bag
                // generator in a set comprehension deduplicated.
                (Type::Set(e), false) | (Type::Bag(e), true) if !graph => {
                    gt = if set { Term::Dedup(Box::new(gt)) } else { Term::Promote(Box::new(gt)) };
                    self.type_of(g, &gt)?;
                    (**e).clone()
                }
                (_, true) => {
                    return Err(Self::tyerr(
                        g,
                        TypeError::NonSetArgument { op: "forset generator".into(), found: gty.to_string() },
                    ))
                }
                (_, false) => {
                    return Err(Self::tyerr(
                        g,
                        TypeError::NonBagArgument { op: "for generator".into(), found: gty.to_string() },
                    ))
                }
            };
            self.ctx.push(x, elem);
            out.push((x.clone(), gt));
        }
        Ok(out)
    }

    fn elab_for(
        &mut self,
        set: bool,
        gens: &[(String, SE)],
        cond: Option<&SE>,
        body: &SE,
        expect: Option<&Type>,
    ) -> Result<Term, ParseError> {
        let gs = self.elab_gens(set, false, gens)?;
        let (mut head, _) = self.elab(body, expect)?;
        if let Some(c) = cond {
            let (ct, _) = self.elab(c, None)?;
            head = if set {
                Term::WhereSet(Box::new(head), Box::new(ct))
            } else {
                Term::WhereBag(Box::new(head), Box::new(ct))
            };
        }
        Ok(if set { Term::SetComp(Box::new(head), gs) } else { Term::BagComp(Box::new(head), gs) })
    }

    fn elab_graph(&mut self, gens: &[(String, SE)], body: &SE) -> Result<Term, ParseError> {
        let gs = self.elab_gens(true, true, gens)?;
        let (bt, bty) = self.elab(body, None)?;
        Ok(if is_bag_like(&bty) { Term::GraphBag(gs, Box::new(bt)) } else { Term::GraphSet(gs, Box::new(bt)) })
    }
}

fn is_empty_unannotated(se: &SE) -> bool {
    matches!(se.kind, S::EmptySet(None) | S::EmptyBag(None))
}

fn is_bag_like(t: &Type) -> bool {
    match t {
        Type::Bag(_) => true,
        Type::Graph(_, o) => matches!(**o, Type::Bag(_)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::*;
    use crate::types::BaseType::*;

    fn sig() -> Signature {
        Signature::builtins()
            .with_table("Cand", &[("cid", Int), ("name", String)])
            .with_table("Pres", &[("cid", Int), ("did", Int)])
            .with_table("Drug", &[("did", Int), ("drug", String)])
    }

    #[test]
    fn q0_parses_to_one_comprehension() {
        let src = "for (c <- Cand, p <- Pres, d <- Drug) where (c.cid == p.cid && p.did == d.did) [(name=c.name,drug=d.drug)]";
        let t = parse(src, &sig()).unwrap();
        let want = comp_bag(
            where_bag(
                sing_bag(record(vec![("name", proj(var("c"), "name")), ("drug", proj(var("d"), "drug"))])),
                and(eq(proj(var("c"), "cid"), proj(var("p"), "cid")), eq(proj(var("p"), "did"), proj(var("d"), "did"))),
            ),
            vec![("c", table("Cand")), ("p", table("Pres")), ("d", table("Drug"))],
        );
        assert_eq!(t, want);
    }

    #[test]
    fn annotated_empty_set() {
        assert_eq!(parse("[]set : {Int}", &sig()).unwrap(), Term::EmptySet(Type::INT));
        assert_eq!(parse("{} : {Int}", &sig()).unwrap(), Term::EmptySet(Type::INT));
        assert_eq!(parse("[] : [Int]", &sig()).unwrap(), Term::EmptyBag(Type::INT));
    }

    #[test]
    fn dedup_table() {
        assert_eq!(parse("dedup(Pres)", &sig()).unwrap(), dedup(table("Pres")));
    }

    #[test]
    fn empty_inferred_from_sibling() {
        let t = parse("[] ++ [1]", &sig()).unwrap();
        assert_eq!(t, union_bag(Term::EmptyBag(Type::INT), sing_bag(int(1))));
        assert!(parse("[]", &sig()).is_err());
    }

    #[test]
    fn set_and_bag_operators_follow_types() {
        let t = parse("{1} ++ {2}", &sig()).unwrap();
        assert!(matches!(t, Term::SetUnion(..)));
        let t = parse("where (true) {1}", &sig()).unwrap();
        assert!(matches!(t, Term::WhereSet(..)));
        let t = parse("empty(Pres)", &sig()).unwrap();
        assert!(matches!(t, Term::EmptyBagTest(..)));
    }

    #[test]
    fn syntax_error_position() {
        let e = parse("for (c <- Cand)\n  [c.name", &sig()).unwrap_err();
        assert_eq!(e.position(), (2, 10));
        assert!(matches!(e, ParseError::Syntax { .. }));
    }

    #[test]
    fn unknown_table() {
        let e = parse("for (c <- Nope) [c]", &sig()).unwrap_err();
        assert!(matches!(e, ParseError::UnknownName { ref name, .. } if name == "Nope"));
        assert_eq!(e.position(), (1, 11));
        let e = parse("frob(1)", &sig()).unwrap_err();
        assert!(matches!(e, ParseError::UnknownName { .. }));
    }

    #[test]
    fn tuples_and_lambdas() {
        let t = parse("(fun (x : (Int, Int)) -> x.2)((1, 2))", &sig()).unwrap();
        assert_eq!(typecheck(&Ctx::new(), &t, &sig()).unwrap(), Type::INT);
    }

    #[test]
    fn graphs() {
        let t = parse("(graph (x <- dedup(Pres)) {x.did}) @ ((cid=1, did=2))", &sig()).unwrap();
        assert!(matches!(t, Term::GraphApp(..)));
        assert_eq!(typecheck(&Ctx::new(), &t, &sig()).unwrap(), Type::set(Type::INT));
    }

    #[test]
    fn generators_coerce_between_sets_and_bags() {
        let t = parse("for (x <- dedup(Pres)) [x.cid]", &sig()).unwrap();
        assert_eq!(t, comp_bag(sing_bag(proj(var("x"), "cid")), vec![("x", promote(dedup(table("Pres"))))]));
        let t = parse("forset (x <- Pres) {x.cid}", &sig()).unwrap();
        assert_eq!(t, comp_set(sing_set(proj(var("x"), "cid")), vec![("x", dedup(table("Pres")))]));
    }

    #[test]
    fn types_parse() {
        let t = parse_type("<(a: Int), Bool> ~> [String]").unwrap();
        assert_eq!(t.to_string(), "<(a: Int), Bool> ~> [String]");
        assert_eq!(parse_type("(Int, String)").unwrap().to_string(), "(1: Int, 2: String)");
    }
}
