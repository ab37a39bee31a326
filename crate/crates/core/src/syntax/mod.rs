//! Surface language: a small Haskell-flavoured syntax with refinement type
//! signatures. `do` blocks are desugared by the parser; everything else is
//! left for the elaborator.

mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::ast::{Type, Variance};
use crate::name::Name;

pub use parser::parse;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: syntax error: {msg}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl SyntaxError {
    pub fn new(line: u32, col: u32, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { line, col, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SKind,
    pub span: Span,
}

/// Operators and primitive names (`+`, `assert`, `not`) are plain variables
/// here; the elaborator resolves them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SKind {
    Var(Name),
    Int(i64),
    Bool(bool),
    Unit,
    Lam(Name, Box<SExpr>),
    App(Box<SExpr>, Box<SExpr>),
    Let(Name, Option<Type>, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
}

impl SExpr {
    pub fn new(kind: SKind, span: Span) -> SExpr {
        SExpr { kind, span }
    }

    pub fn app(f: SExpr, a: SExpr) -> SExpr {
        let span = f.span;
        SExpr::new(SKind::App(Box::new(f), Box::new(a)), span)
    }

    pub fn var(x: &str, span: Span) -> SExpr {
        SExpr::new(SKind::Var(Name::new(x)), span)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    /// Trusted signature; the name has no checked definition.
    Assume { name: Name, ty: Type, span: Span },
    Sig { name: Name, ty: Type, span: Span },
    Def { name: Name, body: SExpr, span: Span },
    Data { name: Name, variances: Vec<Variance>, span: Span },
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Assume { span, .. } | Decl::Sig { span, .. } | Decl::Def { span, .. } | Decl::Data { span, .. } => {
                *span
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SKind::Var(x) => write!(f, "{x}"),
            SKind::Int(n) => write!(f, "{n}"),
            SKind::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            SKind::Unit => write!(f, "()"),
            SKind::Lam(x, e) => write!(f, "(\\{x} -> {e})"),
            SKind::App(a, b) => write!(f, "({a} {b})"),
            SKind::Let(x, None, a, b) => write!(f, "(let {x} = {a} in {b})"),
            SKind::Let(x, Some(t), a, b) => write!(f, "(let {x} :: {t} = {a} in {b})"),
            SKind::If(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
        }
    }
}
