//! Recursive-descent parser. A token at the start of a line whose column is
//! at or left of the enclosing layout column ends the current item; top-level
//! declarations use column 1 and `do` blocks the column of their first
//! statement.

use std::collections::HashMap;

use super::lexer::{lex, Tok, Token};
use super::{Decl, Program, SExpr, SKind, Span, SyntaxError};
use crate::ast::{subst_tyvar, subst_type_map, Type, Variance};
use crate::name::Name;
use crate::pred::{BaseSort, BinOp, Pred, UnOp, TRUE};

const KEYWORDS: &[&str] = &["assume", "data", "type", "let", "in", "if", "then", "else", "do", "forall"];
const RESERVED_SYMS: &[&str] = &["::", "->", "<-", "|", ".", ":", "="];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Assoc {
    Left,
    Right,
    Non,
}

/// Precedence of infix operators in terms. Operators that are not built in,
/// such as `>>=`, bind loosest and associate to the left.
fn term_op(op: &str) -> (u8, Assoc) {
    match op {
        "||" => (2, Assoc::Right),
        "&&" => (3, Assoc::Right),
        "=" | "==" | "/=" | "<" | "<=" | ">" | ">=" => (4, Assoc::Non),
        "+" | "-" => (6, Assoc::Left),
        "*" => (7, Assoc::Left),
        _ => (1, Assoc::Left),
    }
}

fn pred_op(op: &str) -> Option<(u8, Assoc)> {
    Some(match op {
        "=>" => (1, Assoc::Right),
        "||" => (2, Assoc::Right),
        "&&" => (3, Assoc::Right),
        "=" | "==" | "/=" | "<" | "<=" | ">" | ">=" => (4, Assoc::Non),
        "+" | "-" => (6, Assoc::Left),
        "*" => (7, Assoc::Left),
        _ => return None,
    })
}

struct Alias {
    params: Vec<Name>,
    body: Type,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// (column, position of the item's first token)
    layout: Vec<(u32, usize)>,
    aliases: HashMap<String, Alias>,
    datas: HashMap<String, usize>,
    anon: usize,
}

pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, layout: Vec::new(), aliases: HashMap::new(), datas: HashMap::new(), anon: 0 };
    let mut decls = Vec::new();
    while p.toks[p.pos].tok != Tok::Eof {
        let t = &p.toks[p.pos];
        if t.col != 1 {
            return Err(p.error_at(p.pos, "declarations must start in column 1"));
        }
        p.layout = vec![(1, p.pos)];
        if let Some(d) = p.decl()? {
            decls.push(d);
        }
        if p.cur() != &Tok::Eof {
            return Err(p.error(format!("unexpected {}", describe(p.cur()))));
        }
    }
    Ok(Program { decls })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Upper(s) | Tok::Sym(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Backslash => "`\\`".into(),
        Tok::Eof => "end of declaration".into(),
    }
}

impl Parser {
    fn blocked_at(&self, pos: usize) -> bool {
        let t = &self.toks[pos];
        match self.layout.last() {
            Some(&(col, start)) => t.line_start && t.col <= col && pos != start,
            None => false,
        }
    }

    /// Current token, reading as `Eof` at a layout boundary.
    fn cur(&self) -> &Tok {
        if self.blocked_at(self.pos) {
            &Tok::Eof
        } else {
            &self.toks[self.pos].tok
        }
    }

    fn peek(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        if (self.pos..=i).any(|j| self.blocked_at(j)) {
            &Tok::Eof
        } else {
            &self.toks[i].tok
        }
    }

    fn span(&self) -> Span {
        let t = &self.toks[self.pos];
        Span { line: t.line, col: t.col }
    }

    fn error_at(&self, pos: usize, msg: impl Into<String>) -> SyntaxError {
        let t = &self.toks[pos];
        SyntaxError::new(t.line, t.col, msg)
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        self.error_at(self.pos, msg)
    }

    fn bump(&mut self) -> Tok {
        let t = self.cur().clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.cur(), Tok::Sym(x) if x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.cur(), Tok::Ident(x) if x == s)
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if self.cur() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", describe(&t), describe(self.cur()))))
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        self.expect(Tok::Sym(s.into()))
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", describe(self.cur()))))
        }
    }

    fn ident(&mut self) -> Result<Name, SyntaxError> {
        match self.cur().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(Name::from(s))
            }
            t => Err(self.error(format!("expected an identifier, found {}", describe(&t)))),
        }
    }

    /// A declared name: identifier or parenthesized operator.
    fn decl_name(&mut self) -> Result<Name, SyntaxError> {
        if self.cur() == &Tok::LParen {
            if let (Tok::Sym(op), Tok::RParen) = (self.peek(1).clone(), self.peek(2).clone()) {
                self.pos += 3;
                return Ok(Name::from(op));
            }
        }
        self.ident()
    }

    // ---- declarations ----

    fn decl(&mut self) -> Result<Option<Decl>, SyntaxError> {
        let span = self.span();
        if self.is_kw("assume") {
            self.bump();
            let name = self.decl_name()?;
            self.expect_sym("::")?;
            let ty = self.signature()?;
            return Ok(Some(Decl::Assume { name, ty, span }));
        }
        if self.is_kw("data") {
            self.bump();
            let name = self.upper()?;
            let mut variances = Vec::new();
            while let Tok::Sym(s) = self.cur().clone() {
                for c in s.chars() {
                    variances.push(match c {
                        '+' => Variance::Co,
                        '-' => Variance::Contra,
                        '=' => Variance::Inv,
                        _ => return Err(self.error(format!("expected a variance (+, - or =), found `{c}`"))),
                    });
                }
                self.bump();
            }
            self.datas.insert(name.clone(), variances.len());
            return Ok(Some(Decl::Data { name: Name::from(name), variances, span }));
        }
        if self.is_kw("type") {
            self.bump();
            let name = self.upper()?;
            let mut params = Vec::new();
            while !self.is_sym("=") {
                params.push(self.ident()?);
            }
            self.bump();
            let body = self.ty()?;
            self.aliases.insert(name, Alias { params, body });
            return Ok(None);
        }
        let name = self.decl_name()?;
        if self.is_sym("::") {
            self.bump();
            let ty = self.signature()?;
            return Ok(Some(Decl::Sig { name, ty, span }));
        }
        let mut params = Vec::new();
        while !self.is_sym("=") {
            params.push((self.ident()?, self.span()));
        }
        self.bump();
        let mut body = self.expr()?;
        for (x, s) in params.into_iter().rev() {
            body = SExpr::new(SKind::Lam(x, Box::new(body)), s);
        }
        Ok(Some(Decl::Def { name, body, span }))
    }

    fn upper(&mut self) -> Result<String, SyntaxError> {
        match self.cur().clone() {
            Tok::Upper(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.error(format!("expected a capitalized name, found {}", describe(&t)))),
        }
    }

    // ---- types ----

    /// A type with its free type variables generalized at the front.
    fn signature(&mut self) -> Result<Type, SyntaxError> {
        let t = self.ty()?;
        let mut free = Vec::new();
        free_tyvars(&t, &mut Vec::new(), &mut free);
        Ok(free.into_iter().rev().fold(t, |t, a| Type::Forall(a, Box::new(t))))
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        if self.is_kw("forall") {
            self.bump();
            let mut vars = vec![self.ident()?];
            while !self.is_sym(".") {
                vars.push(self.ident()?);
            }
            self.bump();
            let body = self.ty()?;
            return Ok(vars.into_iter().rev().fold(body, |t, a| Type::Forall(a, Box::new(t))));
        }
        if self.cur() == &Tok::LBracket {
            self.bump();
            let mut binds = Vec::new();
            loop {
                let x = self.ident()?;
                self.expect_sym(":")?;
                binds.push((x, self.ty()?));
                if self.cur() == &Tok::Comma {
                    self.bump();
                    continue;
                }
                self.expect(Tok::RBracket)?;
                break;
            }
            let pair = if self.is_sym(".") {
                true
            } else if self.is_sym("->") {
                false
            } else {
                return Err(self.error("expected `->` or `.` after implicit binders"));
            };
            self.bump();
            let body = self.ty()?;
            return Ok(binds.into_iter().rev().fold(body, |t, (x, d)| {
                let (dom, cod) = (Box::new(d), Box::new(t));
                if pair {
                    Type::ImplPair { x, fst: dom, snd: cod }
                } else {
                    Type::ImplFun { x, dom, cod }
                }
            }));
        }
        if let (Tok::Ident(_), Tok::Sym(s)) = (self.cur().clone(), self.peek(1).clone()) {
            if s == ":" {
                let x = self.ident()?;
                self.bump();
                let dom = self.btype()?;
                self.expect_sym("->")?;
                let cod = self.ty()?;
                return Ok(Type::Fun { x, dom: Box::new(dom), cod: Box::new(cod) });
            }
        }
        let dom = self.btype()?;
        if self.is_sym("->") {
            self.bump();
            let cod = self.ty()?;
            self.anon += 1;
            return Ok(Type::Fun { x: Name::from(format!("_{}", self.anon)), dom: Box::new(dom), cod: Box::new(cod) });
        }
        Ok(dom)
    }

    fn btype(&mut self) -> Result<Type, SyntaxError> {
        if let Tok::Upper(c) = self.cur().clone() {
            if let Some(alias) = self.aliases.get(&c) {
                let params = alias.params.clone();
                let mut type_params = Vec::new();
                free_tyvars(&alias.body, &mut Vec::new(), &mut type_params);
                self.bump();
                let mut s = HashMap::new();
                let mut tys = Vec::new();
                for x in params {
                    // A parameter used as a type variable in the body takes a
                    // type argument; any other takes a predicate atom.
                    if type_params.contains(&x) {
                        tys.push((x, self.atype()?));
                    } else {
                        s.insert(x, self.pred_atom()?);
                    }
                }
                let body = subst_type_map(&self.aliases[&c].body, &s);
                // Through placeholders, so the substitution is simultaneous.
                let hole = |a: &Name| Type::Var(Name::from(format!("%{a}")));
                let body = tys.iter().fold(body, |t, (a, _)| subst_tyvar(&t, a, &hole(a)));
                return Ok(tys.iter().fold(body, |t, (a, by)| subst_tyvar(&t, &Name::from(format!("%{a}")), by)));
            }
            if let Some(&arity) = self.datas.get(&c) {
                self.bump();
                let mut args = Vec::new();
                for _ in 0..arity {
                    args.push(self.atype()?);
                }
                return Ok(Type::Con(Name::from(c), args));
            }
        }
        self.atype()
    }

    fn atype(&mut self) -> Result<Type, SyntaxError> {
        match self.cur().clone() {
            Tok::Upper(c) => {
                if let Some(sort) = BaseSort::from_name(&c) {
                    self.bump();
                    return Ok(Type::trivial(sort));
                }
                if self.aliases.get(&c).is_some_and(|a| a.params.is_empty()) || self.datas.get(&c) == Some(&0) {
                    return self.btype();
                }
                Err(self.error(format!("unknown type `{c}`")))
            }
            Tok::Ident(a) if !KEYWORDS.contains(&a.as_str()) => {
                self.bump();
                Ok(Type::Var(Name::from(a)))
            }
            Tok::LParen => {
                self.bump();
                if self.cur() == &Tok::RParen {
                    self.bump();
                    return Ok(Type::trivial(BaseSort::Unit));
                }
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let v = self.ident()?;
                self.expect_sym(":")?;
                let sort = self.sort()?;
                let r = if self.is_sym("|") {
                    self.bump();
                    self.pred(0)?
                } else {
                    TRUE
                };
                self.expect(Tok::RBrace)?;
                Ok(Type::Base { v, sort, r })
            }
            t => Err(self.error(format!("expected a type, found {}", describe(&t)))),
        }
    }

    fn sort(&mut self) -> Result<BaseSort, SyntaxError> {
        match self.cur().clone() {
            Tok::Upper(s) => match BaseSort::from_name(&s) {
                Some(b) => {
                    self.bump();
                    Ok(b)
                }
                None => Err(self.error(format!("`{s}` is not a base sort"))),
            },
            Tok::LParen if self.peek(1) == &Tok::RParen => {
                self.pos += 2;
                Ok(BaseSort::Unit)
            }
            t => Err(self.error(format!("expected a base sort, found {}", describe(&t)))),
        }
    }

    // ---- refinement predicates ----

    fn pred(&mut self, min: u8) -> Result<Pred, SyntaxError> {
        let mut lhs = self.pred_unary()?;
        loop {
            let Tok::Sym(op) = self.cur().clone() else { break };
            let Some((prec, assoc)) = pred_op(&op) else { break };
            if prec < min {
                break;
            }
            self.bump();
            let next = if assoc == Assoc::Right { prec } else { prec + 1 };
            let rhs = self.pred(next)?;
            lhs = match op.as_str() {
                "&&" => Pred::And(vec![lhs, rhs]),
                "||" => Pred::Or(vec![lhs, rhs]),
                "/=" => Pred::not(Pred::eq(lhs, rhs)),
                "=" | "==" => Pred::eq(lhs, rhs),
                _ => Pred::bin(BinOp::from_symbol(&op).expect("pred_op covers BinOp symbols"), lhs, rhs),
            };
            if assoc == Assoc::Non && matches!(self.cur(), Tok::Sym(s) if pred_op(s).map(|p| p.0) == Some(prec)) {
                return Err(self.error("comparison operators do not associate"));
            }
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> Result<Pred, SyntaxError> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Pred::not(self.pred_unary()?));
        }
        if self.is_sym("-") {
            self.bump();
            return Ok(match self.pred_unary()? {
                Pred::Int(n) => Pred::Int(-n),
                p => Pred::Un(UnOp::Neg, Box::new(p)),
            });
        }
        self.pred_atom()
    }

    fn pred_atom(&mut self) -> Result<Pred, SyntaxError> {
        match self.cur().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Pred::Int(n))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Pred::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Pred::Bool(false))
            }
            Tok::Upper(s) if s == "True" || s == "False" => {
                self.bump();
                Ok(Pred::Bool(s == "True"))
            }
            Tok::Ident(_) => Ok(Pred::Var(self.ident()?)),
            Tok::LParen => {
                self.bump();
                if self.cur() == &Tok::RParen {
                    self.bump();
                    return Ok(Pred::Unit);
                }
                let p = self.pred(0)?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            t => Err(self.error(format!("expected a refinement term, found {}", describe(&t)))),
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<SExpr, SyntaxError> {
        let span = self.span();
        match self.cur().clone() {
            Tok::Backslash => {
                self.bump();
                let mut params = vec![(self.ident()?, span)];
                while !self.is_sym("->") {
                    params.push((self.ident()?, self.span()));
                }
                self.bump();
                let mut body = self.expr()?;
                for (x, s) in params.into_iter().rev() {
                    body = SExpr::new(SKind::Lam(x, Box::new(body)), s);
                }
                Ok(body)
            }
            Tok::Ident(k) if k == "let" => {
                let (x, t, rhs) = self.let_binding()?;
                self.expect_kw("in")?;
                let body = self.expr()?;
                Ok(SExpr::new(SKind::Let(x, t, Box::new(rhs), Box::new(body)), span))
            }
            Tok::Ident(k) if k == "if" => {
                self.bump();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let a = self.expr()?;
                self.expect_kw("else")?;
                let b = self.expr()?;
                Ok(SExpr::new(SKind::If(Box::new(c), Box::new(a), Box::new(b)), span))
            }
            Tok::Ident(k) if k == "do" => {
                self.bump();
                self.do_block()
            }
            _ => self.op_expr(0),
        }
    }

    fn let_binding(&mut self) -> Result<(Name, Option<Type>, SExpr), SyntaxError> {
        self.expect_kw("let")?;
        let x = self.ident()?;
        let t = if self.is_sym("::") {
            self.bump();
            Some(self.ty()?)
        } else {
            None
        };
        let mut params = Vec::new();
        while !self.is_sym("=") {
            params.push((self.ident()?, self.span()));
        }
        self.bump();
        let mut rhs = self.expr()?;
        for (p, s) in params.into_iter().rev() {
            rhs = SExpr::new(SKind::Lam(p, Box::new(rhs)), s);
        }
        Ok((x, t, rhs))
    }

    fn starts_open_expr(&self) -> bool {
        matches!(self.cur(), Tok::Backslash) || ["let", "if", "do"].iter().any(|k| self.is_kw(k))
    }

    fn op_expr(&mut self, min: u8) -> Result<SExpr, SyntaxError> {
        let mut lhs = self.app_expr()?;
        loop {
            let Tok::Sym(op) = self.cur().clone() else { break };
            if RESERVED_SYMS.contains(&op.as_str()) && op != "=" {
                break;
            }
            let (prec, assoc) = term_op(&op);
            if prec < min {
                break;
            }
            if op == "/=" {
                return Err(self.error("use `not (a = b)` instead of `/=`"));
            }
            let span = self.span();
            self.bump();
            let rhs = if self.starts_open_expr() {
                self.expr()?
            } else {
                self.op_expr(if assoc == Assoc::Right { prec } else { prec + 1 })?
            };
            let name = if op == "==" { "=" } else { op.as_str() };
            lhs = SExpr::app(SExpr::app(SExpr::var(name, span), lhs), rhs);
            if assoc == Assoc::Non {
                if let Tok::Sym(s) = self.cur() {
                    if (s == "=" || !RESERVED_SYMS.contains(&s.as_str())) && term_op(s).0 == prec {
                        return Err(self.error("comparison operators do not associate"));
                    }
                }
            }
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.cur() {
            Tok::Ident(s) => !KEYWORDS.contains(&s.as_str()),
            Tok::Upper(s) => s == "True" || s == "False",
            Tok::Int(_) | Tok::LParen => true,
            _ => false,
        }
    }

    fn app_expr(&mut self) -> Result<SExpr, SyntaxError> {
        let mut f = self.atom()?;
        loop {
            if self.starts_atom() {
                let a = self.atom()?;
                f = SExpr::app(f, a);
            } else if self.starts_open_expr() && !self.is_kw("let") {
                let a = self.expr()?;
                f = SExpr::app(f, a);
            } else {
                break;
            }
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<SExpr, SyntaxError> {
        let span = self.span();
        let kind = match self.cur().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                SKind::Var(Name::from(s))
            }
            Tok::Upper(s) if s == "True" || s == "False" => {
                self.bump();
                SKind::Bool(s == "True")
            }
            Tok::Int(n) => {
                self.bump();
                SKind::Int(n)
            }
            Tok::LParen => {
                self.bump();
                match (self.cur().clone(), self.peek(1).clone()) {
                    (Tok::RParen, _) => {
                        self.bump();
                        SKind::Unit
                    }
                    (Tok::Sym(op), Tok::RParen) if op == "-" => {
                        return Err(self.error("`(-)` is ambiguous; write `\\a b -> a - b`"));
                    }
                    (Tok::Sym(op), Tok::Int(n)) if op == "-" => {
                        self.pos += 2;
                        self.expect(Tok::RParen)?;
                        SKind::Int(-n)
                    }
                    (Tok::Sym(op), Tok::RParen) => {
                        self.pos += 2;
                        SKind::Var(Name::from(if op == "==" { "=".to_string() } else { op }))
                    }
                    _ => {
                        let saved = std::mem::replace(&mut self.layout, vec![(0, usize::MAX)]);
                        let e = self.expr();
                        self.layout = saved;
                        let e = e?;
                        self.expect(Tok::RParen)?;
                        return Ok(e);
                    }
                }
            }
            t => return Err(self.error(format!("expected an expression, found {}", describe(&t)))),
        };
        Ok(SExpr::new(kind, span))
    }

    // ---- do blocks ----

    fn do_block(&mut self) -> Result<SExpr, SyntaxError> {
        let mut stmts = Vec::new();
        if self.cur() == &Tok::LBrace {
            self.bump();
            self.layout.push((0, usize::MAX));
            loop {
                stmts.push(self.stmt()?);
                if self.cur() == &Tok::Semi {
                    self.bump();
                    continue;
                }
                break;
            }
            self.layout.pop();
            self.expect(Tok::RBrace)?;
        } else {
            if self.cur() == &Tok::Eof {
                return Err(self.error("empty `do` block"));
            }
            let col = self.toks[self.pos].col;
            loop {
                self.layout.push((col, self.pos));
                let s = self.stmt();
                self.layout.pop();
                stmts.push(s?);
                let t = &self.toks[self.pos];
                let continues = t.tok != Tok::Eof && t.line_start && t.col == col;
                if !continues {
                    break;
                }
            }
        }
        desugar_do(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let span = self.span();
        if self.is_kw("let") {
            let (x, t, rhs) = self.let_binding()?;
            if self.is_kw("in") {
                self.bump();
                let body = self.expr()?;
                return Ok(Stmt::Expr(SExpr::new(SKind::Let(x, t, Box::new(rhs), Box::new(body)), span)));
            }
            return Ok(Stmt::Let(x, t, rhs, span));
        }
        if let (Tok::Ident(_), Tok::Sym(s)) = (self.cur().clone(), self.peek(1).clone()) {
            if s == "<-" {
                let x = self.ident()?;
                self.bump();
                return Ok(Stmt::Bind(x, self.expr()?, span));
            }
        }
        Ok(Stmt::Expr(self.expr()?))
    }
}

enum Stmt {
    Bind(Name, SExpr, Span),
    Let(Name, Option<Type>, SExpr, Span),
    Expr(SExpr),
}

fn desugar_do(stmts: Vec<Stmt>) -> Result<SExpr, SyntaxError> {
    let mut it = stmts.into_iter().rev();
    let mut acc = match it.next() {
        Some(Stmt::Expr(e)) => e,
        Some(Stmt::Bind(_, _, s)) | Some(Stmt::Let(_, _, _, s)) => {
            return Err(SyntaxError::new(s.line, s.col, "the last statement of a `do` block must be an expression"))
        }
        None => unreachable!("do blocks have at least one statement"),
    };
    for s in it {
        acc = match s {
            Stmt::Expr(e) => {
                let span = e.span;
                SExpr::app(SExpr::app(SExpr::var(">>", span), e), acc)
            }
            Stmt::Bind(x, e, span) => {
                let k = SExpr::new(SKind::Lam(x, Box::new(acc)), span);
                SExpr::app(SExpr::app(SExpr::var(">>=", span), e), k)
            }
            Stmt::Let(x, t, e, span) => SExpr::new(SKind::Let(x, t, Box::new(e), Box::new(acc)), span),
        };
    }
    Ok(acc)
}

fn free_tyvars(t: &Type, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
    match t {
        Type::Var(a) => {
            if !bound.contains(a) && !out.contains(a) {
                out.push(a.clone());
            }
        }
        Type::Base { .. } => {}
        Type::Fun { dom, cod, .. } | Type::ImplFun { dom, cod, .. } | Type::ImplPair { fst: dom, snd: cod, .. } => {
            free_tyvars(dom, bound, out);
            free_tyvars(cod, bound, out);
        }
        Type::Forall(a, body) => {
            bound.push(a.clone());
            free_tyvars(body, bound, out);
            bound.pop();
        }
        Type::Con(_, args) => args.iter().for_each(|a| free_tyvars(a, bound, out)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_type(src: &str) -> Type {
        match parse(src).unwrap().decls.last().unwrap() {
            Decl::Sig { ty, .. } | Decl::Assume { ty, .. } => ty.clone(),
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn foo_signature() {
        let t = one_type("foo :: [n:Int] -> (Bool -> {v:Int|v=n}) -> ()");
        match &t {
            Type::ImplFun { x, dom, .. } => {
                assert_eq!(x.as_str(), "n");
                assert_eq!(**dom, Type::trivial(BaseSort::Int));
            }
            t => panic!("{t}"),
        }
        assert_eq!(crate::ast::shape(&t).to_string(), "(Bool -> Int) -> Unit");
    }

    #[test]
    fn empty_program() {
        assert_eq!(parse("").unwrap(), Program::default());
        assert_eq!(parse("-- nothing\n\n").unwrap(), Program::default());
    }

    #[test]
    fn malformed_let() {
        let e = parse("x = let x = in x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 13));
    }

    #[test]
    fn aliases_expand() {
        let t = one_type("type SInt n = {v:Int | v = n}\ninc :: [n:Int] -> SInt n -> SInt (n + 1)");
        assert_eq!(t.to_string(), "[n:Int] -> _1:{v:Int | (= v n)} -> {v:Int | (= v (+ n 1))}");
    }

    #[test]
    fn generalizes_free_type_variables() {
        let t = one_type("data T + +\nassume pure :: x:a -> T {v:Int | v = 0} a");
        assert!(t.to_string().starts_with("forall a. x:a -> T"), "{t}");
    }

    #[test]
    fn implicit_pairs_and_multi_binders() {
        let t = one_type("bar :: () -> [n:Int]. (Bool -> {v:Int | v = n})");
        assert_eq!(crate::ast::shape(&t).to_string(), "Unit -> Bool -> Int");
        let t = one_type("sum :: [n:Int, m:Int] -> Int");
        assert!(matches!(t, Type::ImplFun { ref cod, .. } if matches!(**cod, Type::ImplFun { .. })));
    }

    #[test]
    fn do_blocks_desugar() {
        let braces = parse("f = do { n <- get; put (n + 1); return n }").unwrap();
        let layout = parse("f = do\n  n <- get\n  put (n + 1)\n  return n\ng = 1").unwrap();
        assert_eq!(layout.decls.len(), 2);
        let body = |p: &Program| match &p.decls[0] {
            Decl::Def { body, .. } => body.to_string(),
            _ => unreachable!(),
        };
        assert_eq!(body(&braces), body(&layout));
        assert_eq!(body(&braces), "((>>= get) (\\n -> ((>> (put ((+ n) 1))) (return n))))");
    }

    #[test]
    fn operators_and_application() {
        let p = parse("f = g x + h 1 = 3 && b").unwrap();
        let Decl::Def { body, .. } = &p.decls[0] else { panic!() };
        assert_eq!(body.to_string(), "((&& ((= ((+ (g x)) (h 1))) 3)) b)");
        let p = parse("f = m >>= \\x -> k x >> k x").unwrap();
        let Decl::Def { body, .. } = &p.decls[0] else { panic!() };
        assert_eq!(body.to_string(), "((>>= m) (\\x -> ((>> (k x)) (k x))))");
    }

    #[test]
    fn definitions_with_parameters_and_operator_names() {
        let p = parse("assume (>>=) :: Int\nfoo n f = assert (f True = f False)").unwrap();
        assert!(matches!(&p.decls[0], Decl::Assume { name, .. } if name.as_str() == ">>="));
        let Decl::Def { body, .. } = &p.decls[1] else { panic!() };
        assert_eq!(body.to_string(), "(\\n -> (\\f -> (assert ((= (f True)) (f False)))))");
    }

    #[test]
    fn declarations_must_start_at_column_one() {
        assert!(parse("  f = 1").is_err());
        assert!(parse("f = 1\n  + 2").is_ok());
    }
}
