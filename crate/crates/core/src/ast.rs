//! Core language: refinement types, elaborated terms and typing contexts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::name::{capture_avoiding, Fresh, Name};
use crate::pred::{sort_of, BaseSort, BinOp, Pred, SortError, UnOp};

/// Variance of a type-constructor parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variance {
    Co,
    Contra,
    Inv,
}

impl Variance {
    pub fn symbol(self) -> char {
        match self {
            Variance::Co => '+',
            Variance::Contra => '-',
            Variance::Inv => '=',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Type {
    Base { v: Name, sort: BaseSort, r: Pred },
    Fun { x: Name, dom: Box<Type>, cod: Box<Type> },
    ImplFun { x: Name, dom: Box<Type>, cod: Box<Type> },
    ImplPair { x: Name, fst: Box<Type>, snd: Box<Type> },
    Var(Name),
    Forall(Name, Box<Type>),
    /// Abstract type constructor applied to arguments, e.g. a state monad
    /// indexed by pre/post refinements.
    Con(Name, Vec<Type>),
}

impl Type {
    pub fn base(v: &str, sort: BaseSort, r: Pred) -> Type {
        Type::Base { v: Name::new(v), sort, r }
    }

    pub fn trivial(sort: BaseSort) -> Type {
        Type::Base { v: Name::new("v"), sort, r: crate::pred::TRUE }
    }

    pub fn fun(x: &str, dom: Type, cod: Type) -> Type {
        Type::Fun { x: Name::new(x), dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn impl_fun(x: &str, dom: Type, cod: Type) -> Type {
        Type::ImplFun { x: Name::new(x), dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn impl_pair(x: &str, fst: Type, snd: Type) -> Type {
        Type::ImplPair { x: Name::new(x), fst: Box::new(fst), snd: Box::new(snd) }
    }

    pub fn as_base(&self) -> Option<(&Name, BaseSort, &Pred)> {
        match self {
            Type::Base { v, sort, r } => Some((v, *sort, r)),
            _ => None,
        }
    }

    /// Refinement of a base type with its value binder replaced by `x`.
    pub fn reft_at(&self, x: &Name) -> Option<Pred> {
        self.as_base().map(|(v, _, r)| r.rename(v, x))
    }
}

/// Unrefined type skeleton. `Meta` only occurs during elaboration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Base(BaseSort),
    Fun(Box<Shape>, Box<Shape>),
    Var(Name),
    Forall(Name, Box<Shape>),
    Con(Name, Vec<Shape>),
    Meta(u32),
}

impl Shape {
    pub fn fun(a: Shape, b: Shape) -> Shape {
        Shape::Fun(Box::new(a), Box::new(b))
    }
}

/// Erase refinements and implicit binders.
pub fn shape(t: &Type) -> Shape {
    match t {
        Type::Base { sort, .. } => Shape::Base(*sort),
        Type::Fun { dom, cod, .. } => Shape::fun(shape(dom), shape(cod)),
        Type::ImplFun { cod, .. } => shape(cod),
        Type::ImplPair { snd, .. } => shape(snd),
        Type::Var(a) => Shape::Var(a.clone()),
        Type::Forall(a, t) => Shape::Forall(a.clone(), Box::new(shape(t))),
        Type::Con(c, args) => Shape::Con(c.clone(), args.iter().map(shape).collect()),
    }
}

/// The trivially refined type of a shape.
pub fn trivial_type(s: &Shape, fresh: &Fresh) -> Type {
    match s {
        Shape::Base(b) => Type::Base { v: fresh.name("v"), sort: *b, r: crate::pred::TRUE },
        Shape::Fun(a, b) => Type::Fun {
            x: fresh.name("x"),
            dom: Box::new(trivial_type(a, fresh)),
            cod: Box::new(trivial_type(b, fresh)),
        },
        Shape::Var(a) => Type::Var(a.clone()),
        Shape::Forall(a, t) => Type::Forall(a.clone(), Box::new(trivial_type(t, fresh))),
        Shape::Con(c, args) => Type::Con(c.clone(), args.iter().map(|a| trivial_type(a, fresh)).collect()),
        Shape::Meta(_) => Type::trivial(BaseSort::Unit),
    }
}

/// Capture-avoiding simultaneous substitution of refinement-level terms for
/// variables, applied to every refinement in `t`.
pub fn subst_type_map(t: &Type, s: &HashMap<Name, Pred>) -> Type {
    if s.is_empty() {
        return t.clone();
    }
    // Rename binder `x` if it would capture; drop it from `s` if it shadows.
    let bind = |x: &Name, s: &HashMap<Name, Pred>| -> (Name, HashMap<Name, Pred>) {
        let mut inner = s.clone();
        inner.remove(x);
        if inner.values().any(|p| p.mentions(x)) {
            let y = capture_avoiding(x);
            inner.insert(x.clone(), Pred::Var(y.clone()));
            (y, inner)
        } else {
            (x.clone(), inner)
        }
    };
    match t {
        Type::Base { v, sort, r } => {
            let (v2, inner) = bind(v, s);
            Type::Base { v: v2, sort: *sort, r: r.subst(&inner) }
        }
        Type::Fun { x, dom, cod } | Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
            let dom2 = subst_type_map(dom, s);
            let (x2, inner) = bind(x, s);
            let cod2 = subst_type_map(cod, &inner);
            rebuild_binder(t, x2, dom2, cod2)
        }
        Type::Var(_) => t.clone(),
        Type::Forall(a, body) => Type::Forall(a.clone(), Box::new(subst_type_map(body, s))),
        Type::Con(c, args) => Type::Con(c.clone(), args.iter().map(|a| subst_type_map(a, s)).collect()),
    }
}

fn rebuild_binder(like: &Type, x: Name, a: Type, b: Type) -> Type {
    let (a, b) = (Box::new(a), Box::new(b));
    match like {
        Type::Fun { .. } => Type::Fun { x, dom: a, cod: b },
        Type::ImplFun { .. } => Type::ImplFun { x, dom: a, cod: b },
        Type::ImplPair { .. } => Type::ImplPair { x, fst: a, snd: b },
        _ => unreachable!("rebuild_binder on non-binder type"),
    }
}

/// `t[e/x]` on refinements.
pub fn subst_type(t: &Type, x: &Name, e: &Pred) -> Type {
    let mut s = HashMap::new();
    s.insert(x.clone(), e.clone());
    subst_type_map(t, &s)
}

/// Replace a type variable by a type. Binders of `t` that occur free in
/// `by` are renamed so later substitutions for them cannot reach into `by`.
pub fn subst_tyvar(t: &Type, a: &Name, by: &Type) -> Type {
    match t {
        Type::Var(b) if b == a => by.clone(),
        Type::Var(_) | Type::Base { .. } => t.clone(),
        Type::Fun { x, dom, cod } | Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
            let (x2, cod) = if type_free_vars(by).contains(x) {
                let y = capture_avoiding(x);
                let cod = subst_type(cod, x, &Pred::Var(y.clone()));
                (y, cod)
            } else {
                (x.clone(), (**cod).clone())
            };
            rebuild_binder(t, x2, subst_tyvar(dom, a, by), subst_tyvar(&cod, a, by))
        }
        Type::Forall(b, _) if b == a => t.clone(),
        Type::Forall(b, body) => Type::Forall(b.clone(), Box::new(subst_tyvar(body, a, by))),
        Type::Con(c, args) => Type::Con(c.clone(), args.iter().map(|x| subst_tyvar(x, a, by)).collect()),
    }
}

/// Alpha-rename every binder in `t` to a fresh name.
pub fn freshen(t: &Type, fresh: &Fresh) -> Type {
    fn go(t: &Type, fresh: &Fresh, s: &HashMap<Name, Pred>) -> Type {
        match t {
            Type::Base { v, sort, r } => {
                let v2 = fresh.rename(v);
                let mut inner = s.clone();
                inner.insert(v.clone(), Pred::Var(v2.clone()));
                Type::Base { v: v2, sort: *sort, r: r.subst(&inner) }
            }
            Type::Fun { x, dom, cod } | Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
                let dom2 = go(dom, fresh, s);
                let x2 = fresh.rename(x);
                let mut inner = s.clone();
                inner.insert(x.clone(), Pred::Var(x2.clone()));
                let cod2 = go(cod, fresh, &inner);
                rebuild_binder(t, x2, dom2, cod2)
            }
            Type::Var(_) => t.clone(),
            Type::Forall(a, body) => Type::Forall(a.clone(), Box::new(go(body, fresh, s))),
            Type::Con(c, args) => Type::Con(c.clone(), args.iter().map(|a| go(a, fresh, s)).collect()),
        }
    }
    go(t, fresh, &HashMap::new())
}

/// Free refinement variables of a type.
pub fn type_free_vars(t: &Type) -> std::collections::BTreeSet<Name> {
    let mut out = std::collections::BTreeSet::new();
    fn go(t: &Type, bound: &mut Vec<Name>, out: &mut std::collections::BTreeSet<Name>) {
        match t {
            Type::Base { v, r, .. } => {
                for x in r.free_vars() {
                    if &x != v && !bound.contains(&x) {
                        out.insert(x);
                    }
                }
            }
            Type::Fun { x, dom, cod } | Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
                go(dom, bound, out);
                bound.push(x.clone());
                go(cod, bound, out);
                bound.pop();
            }
            Type::Var(_) => {}
            Type::Forall(_, body) => go(body, bound, out),
            Type::Con(_, args) => args.iter().for_each(|a| go(a, bound, out)),
        }
    }
    go(t, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prim {
    Add,
    Sub,
    Eq(BaseSort),
    Le,
    Lt,
    Ge,
    Gt,
    And,
    Or,
    Not,
    Assert,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "(+)",
            Prim::Sub => "(-)",
            Prim::Eq(_) => "(=)",
            Prim::Le => "(<=)",
            Prim::Lt => "(<)",
            Prim::Ge => "(>=)",
            Prim::Gt => "(>)",
            Prim::And => "(&&)",
            Prim::Or => "(||)",
            Prim::Not => "not",
            Prim::Assert => "assert",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Const {
    Int(i64),
    Bool(bool),
    Unit,
    Prim(Prim),
}

/// Lambda and let binders are annotated either with a refinement type to be
/// checked or with a bare shape whose refinements are inferred.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Annot {
    Shape(Shape),
    Type(Type),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(Const),
    Var(Name),
    Lam(Name, Annot, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Let(Name, Annot, Box<Expr>, Box<Expr>),
    ImplLam(Name, Type, Box<Expr>),
    /// `unpack (ghost, corp) = scrutinee in body`
    Unpack(Name, Name, Box<Expr>, Box<Expr>),
    TyLam(Name, Box<Expr>),
    TyApp(Box<Expr>, Shape),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(Name::new(x))
    }

    pub fn prim(p: Prim) -> Expr {
        Expr::Const(Const::Prim(p))
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Const::Int(n))
    }
}

/// Trusted signature of a constant.
pub fn const_type(c: &Const) -> Type {
    use crate::pred::Pred as P;
    let v = || P::Var(Name::new("v"));
    let x = || P::Var(Name::new("x"));
    let y = || P::Var(Name::new("y"));
    let boolean = || Type::trivial(BaseSort::Bool);
    let binop = |dom: BaseSort, res: BaseSort, body: P| {
        Type::fun(
            "x",
            Type::trivial(dom),
            Type::fun("y", Type::trivial(dom), Type::base("v", res, P::eq(v(), body))),
        )
    };
    match c {
        Const::Int(n) => Type::base("v", BaseSort::Int, P::eq(v(), P::Int(*n))),
        Const::Bool(true) => Type::base("v", BaseSort::Bool, v()),
        Const::Bool(false) => Type::base("v", BaseSort::Bool, P::not(v())),
        Const::Unit => Type::base("v", BaseSort::Unit, P::eq(v(), P::Unit)),
        Const::Prim(p) => match p {
            Prim::Add => binop(BaseSort::Int, BaseSort::Int, P::bin(BinOp::Add, x(), y())),
            Prim::Sub => binop(BaseSort::Int, BaseSort::Int, P::bin(BinOp::Sub, x(), y())),
            Prim::Eq(s) => binop(*s, BaseSort::Bool, P::eq(x(), y())),
            Prim::Le => binop(BaseSort::Int, BaseSort::Bool, P::bin(BinOp::Le, x(), y())),
            Prim::Lt => binop(BaseSort::Int, BaseSort::Bool, P::bin(BinOp::Lt, x(), y())),
            Prim::Ge => binop(BaseSort::Int, BaseSort::Bool, P::bin(BinOp::Ge, x(), y())),
            Prim::Gt => binop(BaseSort::Int, BaseSort::Bool, P::bin(BinOp::Gt, x(), y())),
            Prim::And => binop(BaseSort::Bool, BaseSort::Bool, P::And(vec![x(), y()])),
            Prim::Or => binop(BaseSort::Bool, BaseSort::Bool, P::Or(vec![x(), y()])),
            Prim::Not => Type::fun("x", boolean(), Type::base("v", BaseSort::Bool, P::eq(v(), P::Un(UnOp::Not, Box::new(x()))))),
            Prim::Assert => Type::fun(
                "x",
                Type::base("v", BaseSort::Bool, v()),
                Type::trivial(BaseSort::Unit),
            ),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Corporeal(Name, Type),
    Ghost(Name, Type),
    TyVar(Name),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ctx {
    pub entries: Vec<Entry>,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn push(&self, e: Entry) -> Ctx {
        let mut c = self.clone();
        c.entries.push(e);
        c
    }

    pub fn corp(&self, x: &Name, t: &Type) -> Ctx {
        self.push(Entry::Corporeal(x.clone(), t.clone()))
    }

    pub fn ghost(&self, x: &Name, t: &Type) -> Ctx {
        self.push(Entry::Ghost(x.clone(), t.clone()))
    }

    pub fn tyvar(&self, a: &Name) -> Ctx {
        self.push(Entry::TyVar(a.clone()))
    }

    /// Corporeal lookup; ghosts are invisible to terms.
    pub fn lookup_corp(&self, x: &Name) -> Option<&Type> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Corporeal(y, t) if y == x => Some(t),
            _ => None,
        })
    }

    pub fn is_ghost(&self, x: &Name) -> bool {
        self.entries.iter().any(|e| matches!(e, Entry::Ghost(y, _) if y == x))
    }

    pub fn has_tyvar(&self, a: &Name) -> bool {
        self.entries.iter().any(|e| matches!(e, Entry::TyVar(b) if b == a))
    }

    /// Sort of a base-typed binder, corporeal or ghost.
    pub fn sort_of(&self, x: &Name) -> Option<BaseSort> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Corporeal(y, t) | Entry::Ghost(y, t) if y == x => t.as_base().map(|b| b.1),
            _ => None,
        })
    }

    /// Base-sorted binders in context order.
    pub fn base_vars(&self) -> Vec<(Name, BaseSort)> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                Entry::Corporeal(x, t) | Entry::Ghost(x, t) => t.as_base().map(|b| (x.clone(), b.1)),
                Entry::TyVar(_) => None,
            })
            .collect()
    }
}

pub fn forget_implicits(ctx: &Ctx) -> Ctx {
    Ctx {
        entries: ctx
            .entries
            .iter()
            .map(|e| match e {
                Entry::Ghost(x, t) => Entry::Corporeal(x.clone(), t.clone()),
                e => e.clone(),
            })
            .collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WfError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("unbound type variable `{0}`")]
    UnboundTypeVariable(Name),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("implicit parameter `{0}` must have a refined base type")]
    NonBaseImplicit(Name),
    #[error("refinement `{0}` is not boolean")]
    NotBoolean(String),
}

/// Well-formedness of `t` under `ctx`: refinements sort-check to Bool over
/// the base binders in scope, implicit parameters are refined base types and
/// type variables are bound.
pub fn wf(ctx: &Ctx, t: &Type) -> Result<(), WfError> {
    fn go(ctx: &Ctx, t: &Type, extra: &mut Vec<(Name, BaseSort)>) -> Result<(), WfError> {
        match t {
            Type::Base { v, sort, r } => {
                let env = |x: &Name| -> Option<BaseSort> {
                    if x == v {
                        return Some(*sort);
                    }
                    extra.iter().rev().find(|(y, _)| y == x).map(|p| p.1).or_else(|| ctx.sort_of(x))
                };
                match sort_of(r, &env) {
                    Ok(BaseSort::Bool) => Ok(()),
                    Ok(_) => Err(WfError::NotBoolean(r.to_string())),
                    Err(SortError::Unbound(x)) => Err(WfError::UnboundVariable(x)),
                    Err(e) => Err(WfError::SortMismatch(e.to_string())),
                }
            }
            Type::Fun { x, dom, cod } => {
                go(ctx, dom, extra)?;
                bind_and(ctx, x, dom, cod, extra)
            }
            Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
                if dom.as_base().is_none() {
                    return Err(WfError::NonBaseImplicit(x.clone()));
                }
                go(ctx, dom, extra)?;
                bind_and(ctx, x, dom, cod, extra)
            }
            Type::Var(a) => {
                if ctx.has_tyvar(a) {
                    Ok(())
                } else {
                    Err(WfError::UnboundTypeVariable(a.clone()))
                }
            }
            Type::Forall(a, body) => go(&ctx.tyvar(a), body, extra),
            Type::Con(_, args) => args.iter().try_for_each(|a| go(ctx, a, extra)),
        }
    }
    fn bind_and(ctx: &Ctx, x: &Name, dom: &Type, cod: &Type, extra: &mut Vec<(Name, BaseSort)>) -> Result<(), WfError> {
        let pushed = if let Some((_, s, _)) = dom.as_base() {
            extra.push((x.clone(), s));
            true
        } else {
            false
        };
        let r = go(ctx, cod, extra);
        if pushed {
            extra.pop();
        }
        r
    }
    go(ctx, t, &mut Vec::new())
}

/// Declared type constructors and their parameter variances.
pub type DataDecls = BTreeMap<Name, Vec<Variance>>;

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base { v, sort, r } => {
                if r.is_true() {
                    write!(f, "{sort}")
                } else {
                    write!(f, "{{{v}:{sort} | {r}}}")
                }
            }
            Type::Fun { x, dom, cod } => write!(f, "{x}:{} -> {cod}", Paren(dom)),
            Type::ImplFun { x, dom, cod } => write!(f, "[{x}:{dom}] -> {cod}"),
            Type::ImplPair { x, fst, snd } => write!(f, "[{x}:{fst}]. {snd}"),
            Type::Var(a) => write!(f, "{a}"),
            Type::Forall(a, t) => write!(f, "forall {a}. {t}"),
            Type::Con(c, args) => {
                write!(f, "{c}")?;
                for a in args {
                    write!(f, " {}", Paren(a))?;
                }
                Ok(())
            }
        }
    }
}

struct Paren<'a>(&'a Type);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Type::Base { .. } | Type::Var(_) => write!(f, "{}", self.0),
            Type::Con(_, args) if args.is_empty() => write!(f, "{}", self.0),
            t => write!(f, "({t})"),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Base(b) => write!(f, "{b}"),
            Shape::Fun(a, b) => match **a {
                Shape::Fun(..) | Shape::Forall(..) => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
            Shape::Var(a) => write!(f, "{a}"),
            Shape::Forall(a, t) => write!(f, "forall {a}. {t}"),
            Shape::Con(c, args) => {
                write!(f, "{c}")?;
                for a in args {
                    match a {
                        Shape::Base(_) | Shape::Var(_) | Shape::Meta(_) => write!(f, " {a}")?,
                        _ => write!(f, " ({a})")?,
                    }
                }
                Ok(())
            }
            Shape::Meta(m) => write!(f, "?{m}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(Const::Int(n)) => write!(f, "{n}"),
            Expr::Const(Const::Bool(b)) => write!(f, "{}", if *b { "True" } else { "False" }),
            Expr::Const(Const::Unit) => write!(f, "()"),
            Expr::Const(Const::Prim(p)) => write!(f, "{}", p.name()),
            Expr::Var(x) => write!(f, "{x}"),
            Expr::Lam(x, Annot::Shape(s), e) => write!(f, "(\\{x}:{s} -> {e})"),
            Expr::Lam(x, Annot::Type(t), e) => write!(f, "(\\{x}:{{{t}}} -> {e})"),
            Expr::App(a, b) => write!(f, "({a} {b})"),
            Expr::Let(x, Annot::Shape(s), a, b) => write!(f, "(let {x}:{s} = {a} in {b})"),
            Expr::Let(x, Annot::Type(t), a, b) => write!(f, "(let {x} :: {t} = {a} in {b})"),
            Expr::ImplLam(x, t, e) => write!(f, "(\\[{x}:{t}] -> {e})"),
            Expr::Unpack(g, y, a, b) => write!(f, "(unpack ({g}, {y}) = {a} in {b})"),
            Expr::TyLam(a, e) => write!(f, "(/\\{a}. {e})"),
            Expr::TyApp(e, s) => write!(f, "{e} @({s})"),
            Expr::If(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
        }
    }
}
