//! Elaboration of surface programs into core terms.
//!
//! Shapes are inferred by first-order unification. Polymorphic globals get
//! explicit type applications, definitions checked against a signature get
//! implicit lambdas for its implicit parameters, and a separate pass unpacks
//! every implicit-pair-typed term in evaluation position.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{
    const_type, shape, subst_type, subst_tyvar, trivial_type, wf, Annot, Const, Ctx, DataDecls, Entry, Expr, Prim,
    Shape, Type, WfError,
};
use crate::name::{Fresh, Name};
use crate::pred::{BaseSort, Pred};
use crate::syntax::{Decl, Program, SExpr, SKind, Span};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElabError {
    #[error("{span}: `{name}` is defined more than once")]
    DuplicateDefinition { name: Name, span: Span },
    #[error("{span}: `{name}` has a signature but no definition")]
    MissingDefinition { name: Name, span: Span },
    #[error("{span}: ill-formed signature for `{name}`: {err}")]
    Wf { name: Name, span: Span, err: WfError },
    #[error("{span}: unbound variable `{name}`")]
    UnboundVariable { name: Name, span: Span },
    #[error("{span}: shape mismatch: expected `{expected}`, found `{found}`")]
    ShapeMismatch { expected: String, found: String, span: Span },
    #[error("{span}: `{name}` is recursive and needs a type signature")]
    RecursiveWithoutSignature { name: Name, span: Span },
    #[error("{span}: `forall` may only appear at the front of the signature of `{name}`")]
    NestedForall { name: Name, span: Span },
    #[error("{span}: type constructor `{name}` expects {expected} arguments")]
    ConstructorArity { name: Name, expected: usize, span: Span },
}

impl ElabError {
    pub fn span(&self) -> Span {
        match self {
            ElabError::DuplicateDefinition { span, .. }
            | ElabError::MissingDefinition { span, .. }
            | ElabError::Wf { span, .. }
            | ElabError::UnboundVariable { span, .. }
            | ElabError::ShapeMismatch { span, .. }
            | ElabError::RecursiveWithoutSignature { span, .. }
            | ElabError::NestedForall { span, .. }
            | ElabError::ConstructorArity { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Global {
    pub name: Name,
    pub ty: Type,
    /// Assumed rather than checked.
    pub trusted: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: Name,
    /// `None` for definitions without a signature; their body is only
    /// synthesized.
    pub sig: Option<Type>,
    pub body: Expr,
    /// Globals in scope: signatures declared before the definition, plus
    /// its own.
    pub scope: Ctx,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Elaborated {
    pub data: DataDecls,
    pub globals: Vec<Global>,
    pub defs: Vec<Definition>,
}

fn prim_named(x: &str) -> Option<Prim> {
    Some(match x {
        "+" => Prim::Add,
        "-" => Prim::Sub,
        "=" => Prim::Eq(BaseSort::Int),
        "<=" => Prim::Le,
        "<" => Prim::Lt,
        ">=" => Prim::Ge,
        ">" => Prim::Gt,
        "&&" => Prim::And,
        "||" => Prim::Or,
        "not" => Prim::Not,
        "assert" => Prim::Assert,
        _ => return None,
    })
}

/// Trusted and checked signatures as corporeal bindings, in declaration
/// order. Each signature must be well formed under the ones before it.
pub fn load_signatures(prog: &Program) -> Result<Ctx, ElabError> {
    Ok(signatures(prog)?.0)
}

fn signatures(prog: &Program) -> Result<(Ctx, Vec<Global>, DataDecls), ElabError> {
    let mut ctx = Ctx::new();
    let mut globals: Vec<Global> = Vec::new();
    let mut data = DataDecls::new();
    let mut defined: BTreeSet<Name> = BTreeSet::new();
    for d in &prog.decls {
        match d {
            Decl::Data { name, variances, span } => {
                if data.insert(name.clone(), variances.clone()).is_some() {
                    return Err(ElabError::DuplicateDefinition { name: name.clone(), span: *span });
                }
            }
            Decl::Assume { name, ty, span } | Decl::Sig { name, ty, span } => {
                if globals.iter().any(|g| &g.name == name) {
                    return Err(ElabError::DuplicateDefinition { name: name.clone(), span: *span });
                }
                check_signature(&ctx, &data, name, ty, *span)?;
                ctx = ctx.corp(name, ty);
                globals.push(Global { name: name.clone(), ty: ty.clone(), trusted: matches!(d, Decl::Assume { .. }), span: *span });
            }
            Decl::Def { name, span, .. } => {
                if !defined.insert(name.clone()) || globals.iter().any(|g| &g.name == name && g.trusted) {
                    return Err(ElabError::DuplicateDefinition { name: name.clone(), span: *span });
                }
            }
        }
    }
    for g in &globals {
        if !g.trusted && !defined.contains(&g.name) {
            return Err(ElabError::MissingDefinition { name: g.name.clone(), span: g.span });
        }
    }
    Ok((ctx, globals, data))
}

fn check_signature(ctx: &Ctx, data: &DataDecls, name: &Name, ty: &Type, span: Span) -> Result<(), ElabError> {
    fn walk(t: &Type, top: bool, data: &DataDecls, name: &Name, span: Span) -> Result<(), ElabError> {
        match t {
            Type::Forall(_, body) if top => walk(body, true, data, name, span),
            Type::Forall(..) => Err(ElabError::NestedForall { name: name.clone(), span }),
            Type::Base { .. } | Type::Var(_) => Ok(()),
            Type::Fun { dom, cod, .. } | Type::ImplFun { dom, cod, .. } | Type::ImplPair { fst: dom, snd: cod, .. } => {
                walk(dom, false, data, name, span)?;
                walk(cod, false, data, name, span)
            }
            Type::Con(c, args) => {
                let expected = data.get(c).map_or(usize::MAX, Vec::len);
                if expected != args.len() {
                    return Err(ElabError::ConstructorArity { name: c.clone(), expected, span });
                }
                args.iter().try_for_each(|a| walk(a, false, data, name, span))
            }
        }
    }
    walk(ty, true, data, name, span)?;
    wf(ctx, ty).map_err(|err| ElabError::Wf { name: name.clone(), span, err })
}

pub fn elaborate(prog: &Program, fresh: &Fresh) -> Result<Elaborated, ElabError> {
    let (_, globals, data) = signatures(prog)?;
    let mut scope = Ctx::new();
    let mut defs = Vec::new();
    let mut exported: Vec<Global> = Vec::new();
    for d in &prog.decls {
        match d {
            Decl::Assume { name, ty, .. } | Decl::Sig { name, ty, .. } => scope = scope.corp(name, ty),
            Decl::Def { name, body, span } => {
                let sig = globals.iter().find(|g| &g.name == name).map(|g| g.ty.clone());
                if sig.is_none() && mentions_free(body, name) {
                    return Err(ElabError::RecursiveWithoutSignature { name: name.clone(), span: *span });
                }
                let mut el = Elab::new(fresh, &scope);
                let (core, synthesized) = match &sig {
                    Some(t) => (el.check(body, t)?, None),
                    None => {
                        let (e, s) = el.synth(body)?;
                        (e, Some(el.zonk(&s)))
                    }
                };
                let core = el.zonk_expr(&core);
                let core = insert_unpacks(&core, &scope, fresh);
                defs.push(Definition { name: name.clone(), sig, body: core, scope: scope.clone(), span: *span });
                if let Some(s) = synthesized {
                    let ty = trivial_type(&s, fresh);
                    exported.push(Global { name: name.clone(), ty: ty.clone(), trusted: false, span: *span });
                    scope = scope.corp(name, &ty);
                }
            }
            Decl::Data { .. } => {}
        }
    }
    let mut all = globals;
    all.extend(exported);
    Ok(Elaborated { data, globals: all, defs })
}

fn mentions_free(e: &SExpr, x: &Name) -> bool {
    match &e.kind {
        SKind::Var(y) => y == x,
        SKind::Int(_) | SKind::Bool(_) | SKind::Unit => false,
        SKind::Lam(y, b) => y != x && mentions_free(b, x),
        SKind::App(a, b) => mentions_free(a, x) || mentions_free(b, x),
        SKind::Let(y, _, a, b) => (y != x && mentions_free(a, x)) || (y != x && mentions_free(b, x)),
        SKind::If(c, a, b) => mentions_free(c, x) || mentions_free(a, x) || mentions_free(b, x),
    }
}

struct Local {
    surface: Name,
    core: Name,
    shape: Shape,
}

struct Elab<'a> {
    fresh: &'a Fresh,
    globals: &'a Ctx,
    metas: Vec<Option<Shape>>,
    locals: Vec<Local>,
    /// Every name bound so far, including ghosts, so binders can be renamed
    /// apart.
    taken: BTreeSet<Name>,
    span: Span,
}

impl<'a> Elab<'a> {
    fn new(fresh: &'a Fresh, globals: &'a Ctx) -> Elab<'a> {
        let taken = globals
            .entries
            .iter()
            .filter_map(|e| match e {
                Entry::Corporeal(x, _) | Entry::Ghost(x, _) => Some(x.clone()),
                Entry::TyVar(_) => None,
            })
            .collect();
        Elab { fresh, globals, metas: Vec::new(), locals: Vec::new(), taken, span: Span::default() }
    }

    fn meta(&mut self) -> Shape {
        self.metas.push(None);
        Shape::Meta(self.metas.len() as u32 - 1)
    }

    /// A binder name that does not clash with anything in scope.
    fn bind_name(&mut self, x: &Name) -> Name {
        let y = if self.taken.contains(x) { self.fresh.rename(x) } else { x.clone() };
        self.taken.insert(y.clone());
        y
    }

    fn with_local<T>(&mut self, surface: &Name, core: &Name, s: Shape, f: impl FnOnce(&mut Self) -> T) -> T {
        self.locals.push(Local { surface: surface.clone(), core: core.clone(), shape: s });
        let r = f(self);
        self.locals.pop();
        r
    }

    fn resolve(&self, s: &Shape) -> Shape {
        match s {
            Shape::Meta(m) => match &self.metas[*m as usize] {
                Some(t) => self.resolve(t),
                None => s.clone(),
            },
            _ => s.clone(),
        }
    }

    fn zonk(&self, s: &Shape) -> Shape {
        match self.resolve(s) {
            Shape::Meta(_) => Shape::Base(BaseSort::Int),
            Shape::Fun(a, b) => Shape::fun(self.zonk(&a), self.zonk(&b)),
            Shape::Forall(a, t) => Shape::Forall(a, Box::new(self.zonk(&t))),
            Shape::Con(c, args) => Shape::Con(c, args.iter().map(|a| self.zonk(a)).collect()),
            s => s,
        }
    }

    fn zonk_expr(&self, e: &Expr) -> Expr {
        let z = |e: &Expr| Box::new(self.zonk_expr(e));
        let annot = |a: &Annot| match a {
            Annot::Shape(s) => Annot::Shape(self.zonk(s)),
            Annot::Type(t) => Annot::Type(t.clone()),
        };
        match e {
            Expr::TyApp(f, s) if matches!(**f, Expr::Const(Const::Prim(Prim::Eq(_)))) => match self.zonk(s) {
                Shape::Base(b) => Expr::prim(Prim::Eq(b)),
                _ => Expr::prim(Prim::Eq(BaseSort::Int)),
            },
            Expr::Const(_) | Expr::Var(_) => e.clone(),
            Expr::Lam(x, a, b) => Expr::Lam(x.clone(), annot(a), z(b)),
            Expr::App(a, b) => Expr::App(z(a), z(b)),
            Expr::Let(x, a, e1, e2) => Expr::Let(x.clone(), annot(a), z(e1), z(e2)),
            Expr::ImplLam(x, t, b) => Expr::ImplLam(x.clone(), t.clone(), z(b)),
            Expr::Unpack(g, y, a, b) => Expr::Unpack(g.clone(), y.clone(), z(a), z(b)),
            Expr::TyLam(a, b) => Expr::TyLam(a.clone(), z(b)),
            Expr::TyApp(f, s) => Expr::TyApp(z(f), self.zonk(s)),
            Expr::If(c, a, b) => Expr::If(z(c), z(a), z(b)),
        }
    }

    fn occurs(&self, m: u32, s: &Shape) -> bool {
        match self.resolve(s) {
            Shape::Meta(n) => n == m,
            Shape::Fun(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            Shape::Forall(_, t) => self.occurs(m, &t),
            Shape::Con(_, args) => args.iter().any(|a| self.occurs(m, a)),
            _ => false,
        }
    }

    fn mismatch(&self, expected: &Shape, found: &Shape) -> ElabError {
        ElabError::ShapeMismatch {
            expected: self.zonk_display(expected),
            found: self.zonk_display(found),
            span: self.span,
        }
    }

    fn zonk_display(&self, s: &Shape) -> String {
        fn go(el: &Elab, s: &Shape) -> Shape {
            match el.resolve(s) {
                Shape::Fun(a, b) => Shape::fun(go(el, &a), go(el, &b)),
                Shape::Forall(a, t) => Shape::Forall(a, Box::new(go(el, &t))),
                Shape::Con(c, args) => Shape::Con(c, args.iter().map(|a| go(el, a)).collect()),
                s => s,
            }
        }
        go(self, s).to_string()
    }

    fn unify(&mut self, expected: &Shape, found: &Shape) -> Result<(), ElabError> {
        let (a, b) = (self.resolve(expected), self.resolve(found));
        match (&a, &b) {
            (Shape::Meta(m), Shape::Meta(n)) if m == n => Ok(()),
            (Shape::Meta(m), t) | (t, Shape::Meta(m)) => {
                if self.occurs(*m, t) {
                    return Err(self.mismatch(expected, found));
                }
                self.metas[*m as usize] = Some(t.clone());
                Ok(())
            }
            (Shape::Base(x), Shape::Base(y)) if x == y => Ok(()),
            (Shape::Var(x), Shape::Var(y)) if x == y => Ok(()),
            (Shape::Fun(a1, b1), Shape::Fun(a2, b2)) => {
                self.unify(a1, a2).map_err(|_| self.mismatch(expected, found))?;
                self.unify(b1, b2).map_err(|_| self.mismatch(expected, found))
            }
            (Shape::Con(c, xs), Shape::Con(d, ys)) if c == d && xs.len() == ys.len() => {
                for (x, y) in xs.iter().zip(ys) {
                    self.unify(x, y).map_err(|_| self.mismatch(expected, found))?;
                }
                Ok(())
            }
            _ => Err(self.mismatch(expected, found)),
        }
    }

    /// Elaborate `e` against a refinement type, inserting type and implicit
    /// lambdas for its leading quantifiers and descending under lambdas.
    fn check(&mut self, e: &SExpr, t: &Type) -> Result<Expr, ElabError> {
        self.span = e.span;
        match (t, &e.kind) {
            (Type::Forall(a, body), _) => Ok(Expr::TyLam(a.clone(), Box::new(self.check(e, body)?))),
            (Type::ImplFun { x, dom, cod }, _) => {
                let x2 = self.bind_name(x);
                let cod = subst_type(cod, x, &Pred::Var(x2.clone()));
                Ok(Expr::ImplLam(x2, (**dom).clone(), Box::new(self.check(e, &cod)?)))
            }
            (Type::Fun { x, dom, cod }, SKind::Lam(p, body)) => {
                let p2 = self.bind_name(p);
                let cod = subst_type(cod, x, &Pred::Var(p2.clone()));
                let body = self.with_local(p, &p2, shape(dom), |el| el.check(body, &cod))?;
                Ok(Expr::Lam(p2, Annot::Type((**dom).clone()), Box::new(body)))
            }
            (_, SKind::Let(x, None, e1, e2)) => {
                let (e1, s1) = self.synth(e1)?;
                let x2 = self.bind_name(x);
                let e2 = self.with_local(x, &x2, s1.clone(), |el| el.check(e2, t))?;
                Ok(Expr::Let(x2, Annot::Shape(s1), Box::new(e1), Box::new(e2)))
            }
            (_, SKind::If(c, a, b)) => {
                let c = self.check_shape(c, &Shape::Base(BaseSort::Bool))?;
                let a = self.check(a, t)?;
                let b = self.check(b, t)?;
                Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
            }
            _ => {
                let (e2, s) = self.synth(e)?;
                self.span = e.span;
                self.unify(&shape(t), &s)?;
                Ok(e2)
            }
        }
    }

    fn check_shape(&mut self, e: &SExpr, s: &Shape) -> Result<Expr, ElabError> {
        if let (SKind::Lam(x, body), Shape::Fun(d, c)) = (&e.kind, self.resolve(s)) {
            let x2 = self.bind_name(x);
            let body = self.with_local(x, &x2, (*d).clone(), |el| el.check_shape(body, &c))?;
            return Ok(Expr::Lam(x2, Annot::Shape(*d), Box::new(body)));
        }
        let (e2, found) = self.synth(e)?;
        self.span = e.span;
        self.unify(s, &found)?;
        Ok(e2)
    }

    fn synth(&mut self, e: &SExpr) -> Result<(Expr, Shape), ElabError> {
        self.span = e.span;
        match &e.kind {
            SKind::Int(n) => Ok((Expr::int(*n), Shape::Base(BaseSort::Int))),
            SKind::Bool(b) => Ok((Expr::Const(Const::Bool(*b)), Shape::Base(BaseSort::Bool))),
            SKind::Unit => Ok((Expr::Const(Const::Unit), Shape::Base(BaseSort::Unit))),
            SKind::Var(x) => self.var(x, e.span),
            SKind::Lam(x, body) => {
                let m = self.meta();
                let x2 = self.bind_name(x);
                let (b, s) = self.with_local(x, &x2, m.clone(), |el| el.synth(body))?;
                Ok((Expr::Lam(x2, Annot::Shape(m.clone()), Box::new(b)), Shape::fun(m, s)))
            }
            SKind::App(f, a) => {
                let (ef, sf) = self.synth(f)?;
                let (dom, res) = match self.resolve(&sf) {
                    Shape::Fun(d, r) => (*d, *r),
                    other => {
                        let (d, r) = (self.meta(), self.meta());
                        self.span = f.span;
                        self.unify(&Shape::fun(d.clone(), r.clone()), &other)?;
                        (d, r)
                    }
                };
                let ea = self.check_shape(a, &dom)?;
                Ok((Expr::app(ef, ea), res))
            }
            SKind::Let(x, None, e1, e2) => {
                let (e1, s1) = self.synth(e1)?;
                let x2 = self.bind_name(x);
                let (e2, s2) = self.with_local(x, &x2, s1.clone(), |el| el.synth(e2))?;
                Ok((Expr::Let(x2, Annot::Shape(s1), Box::new(e1), Box::new(e2)), s2))
            }
            SKind::Let(x, Some(t), e1, e2) => {
                let x2 = self.bind_name(x);
                let t = subst_type(t, x, &Pred::Var(x2.clone()));
                let e1 = self.with_local(x, &x2, shape(&t), |el| el.check(e1, &t))?;
                let (e2, s2) = self.with_local(x, &x2, shape(&t), |el| el.synth(e2))?;
                Ok((Expr::Let(x2, Annot::Type(t), Box::new(e1), Box::new(e2)), s2))
            }
            SKind::If(c, a, b) => {
                let c = self.check_shape(c, &Shape::Base(BaseSort::Bool))?;
                let (a, s) = self.synth(a)?;
                let b = self.check_shape(b, &s)?;
                Ok((Expr::If(Box::new(c), Box::new(a), Box::new(b)), s))
            }
        }
    }

    fn var(&mut self, x: &Name, span: Span) -> Result<(Expr, Shape), ElabError> {
        if let Some(l) = self.locals.iter().rev().find(|l| &l.surface == x) {
            return Ok((Expr::Var(l.core.clone()), l.shape.clone()));
        }
        if let Some(t) = self.globals.lookup_corp(x) {
            let mut s = shape(t);
            let mut e = Expr::Var(x.clone());
            while let Shape::Forall(a, body) = s {
                let m = self.meta();
                e = Expr::TyApp(Box::new(e), m.clone());
                s = subst_shape(&body, &a, &m);
            }
            return Ok((e, s));
        }
        match prim_named(x.as_str()) {
            Some(Prim::Eq(_)) => {
                let m = self.meta();
                let bool_ = Shape::Base(BaseSort::Bool);
                let e = Expr::TyApp(Box::new(Expr::prim(Prim::Eq(BaseSort::Int))), m.clone());
                Ok((e, Shape::fun(m.clone(), Shape::fun(m, bool_))))
            }
            Some(p) => Ok((Expr::prim(p), shape(&const_type(&Const::Prim(p))))),
            None => Err(ElabError::UnboundVariable { name: x.clone(), span }),
        }
    }
}

fn subst_shape(s: &Shape, a: &Name, by: &Shape) -> Shape {
    match s {
        Shape::Var(b) if b == a => by.clone(),
        Shape::Fun(x, y) => Shape::fun(subst_shape(x, a, by), subst_shape(y, a, by)),
        Shape::Forall(b, t) if b != a => Shape::Forall(b.clone(), Box::new(subst_shape(t, a, by))),
        Shape::Con(c, args) => Shape::Con(c.clone(), args.iter().map(|x| subst_shape(x, a, by)).collect()),
        _ => s.clone(),
    }
}

/// Wrap `e` in implicit lambdas for the leading implicit parameters of `t`,
/// continuing under explicit lambdas that match its function layers.
pub fn insert_implicit_lambdas(e: &Expr, t: &Type) -> Expr {
    match (t, e) {
        (Type::Forall(a, body), Expr::TyLam(b, inner)) if a == b => {
            Expr::TyLam(a.clone(), Box::new(insert_implicit_lambdas(inner, body)))
        }
        (Type::Forall(a, body), _) => Expr::TyLam(a.clone(), Box::new(insert_implicit_lambdas(e, body))),
        (Type::ImplFun { x, dom, cod }, Expr::ImplLam(y, _, inner)) if x == y => {
            Expr::ImplLam(x.clone(), (**dom).clone(), Box::new(insert_implicit_lambdas(inner, cod)))
        }
        (Type::ImplFun { x, dom, cod }, _) => {
            Expr::ImplLam(x.clone(), (**dom).clone(), Box::new(insert_implicit_lambdas(e, cod)))
        }
        (Type::Fun { x, cod, .. }, Expr::Lam(p, a, body)) => {
            let cod = subst_type(cod, x, &Pred::Var(p.clone()));
            Expr::Lam(p.clone(), a.clone(), Box::new(insert_implicit_lambdas(body, &cod)))
        }
        _ => e.clone(),
    }
}

// ---- implicit pair unpacking ----

fn peel_impl_funs(t: &Type) -> &Type {
    match t {
        Type::ImplFun { cod, .. } => peel_impl_funs(cod),
        t => t,
    }
}

/// Type of `e` computed from signatures and annotations alone, enough to tell
/// where implicit pairs occur. Refinements are not meaningful.
fn pair_oracle(e: &Expr, env: &mut Vec<(Name, Type)>, globals: &Ctx, fresh: &Fresh) -> Option<Type> {
    let annot_type = |a: &Annot| match a {
        Annot::Shape(s) => trivial_type(s, fresh),
        Annot::Type(t) => t.clone(),
    };
    let scoped = |env: &mut Vec<(Name, Type)>, x: &Name, t: Type, body: &Expr| {
        env.push((x.clone(), t));
        let r = pair_oracle(body, env, globals, fresh);
        env.pop();
        r
    };
    match e {
        Expr::Const(c) => Some(const_type(c)),
        Expr::Var(x) => env.iter().rev().find(|(y, _)| y == x).map(|p| p.1.clone()).or_else(|| globals.lookup_corp(x).cloned()),
        Expr::Lam(x, a, body) => {
            let dom = annot_type(a);
            let cod = scoped(env, x, dom.clone(), body)?;
            Some(Type::Fun { x: x.clone(), dom: Box::new(dom), cod: Box::new(cod) })
        }
        Expr::App(f, _) => match strip_pairs(peel_impl_funs(&pair_oracle(f, env, globals, fresh)?)) {
            Type::Fun { cod, .. } => Some((**cod).clone()),
            _ => None,
        },
        Expr::Let(x, a, e1, e2) => {
            let t = match a {
                Annot::Type(t) => t.clone(),
                Annot::Shape(_) => pair_oracle(e1, env, globals, fresh).unwrap_or_else(|| annot_type(a)),
            };
            scoped(env, x, t, e2)
        }
        Expr::ImplLam(x, t, body) => {
            let cod = scoped(env, x, t.clone(), body)?;
            Some(Type::ImplFun { x: x.clone(), dom: Box::new(t.clone()), cod: Box::new(cod) })
        }
        Expr::Unpack(_, y, s, body) => {
            let t = strip_one_pair(&pair_oracle(s, env, globals, fresh)?).clone();
            scoped(env, y, t, body)
        }
        Expr::TyLam(a, body) => Some(Type::Forall(a.clone(), Box::new(pair_oracle(body, env, globals, fresh)?))),
        Expr::TyApp(f, s) => match pair_oracle(f, env, globals, fresh)? {
            Type::Forall(a, body) => Some(subst_tyvar(&body, &a, &trivial_type(s, fresh))),
            _ => None,
        },
        Expr::If(_, a, _) => pair_oracle(a, env, globals, fresh),
    }
}

fn strip_one_pair(t: &Type) -> &Type {
    match t {
        Type::ImplPair { snd, .. } => snd,
        t => t,
    }
}

fn strip_pairs(t: &Type) -> &Type {
    match t {
        Type::ImplPair { snd, .. } => strip_pairs(snd),
        t => t,
    }
}

/// Replace every implicit-pair-typed term in evaluation position (function,
/// argument, let-bound right-hand side) by a variable bound with `unpack`.
/// Unpacks wrap the whole application spine, in left-to-right order.
pub fn insert_unpacks(e: &Expr, globals: &Ctx, fresh: &Fresh) -> Expr {
    Unpacker { globals, fresh, env: Vec::new() }.go(e)
}

struct Unpacker<'a> {
    globals: &'a Ctx,
    fresh: &'a Fresh,
    env: Vec<(Name, Type)>,
}

type Pending = Vec<(Name, Name, Expr)>;

impl Unpacker<'_> {
    fn ty(&mut self, e: &Expr) -> Option<Type> {
        pair_oracle(e, &mut self.env, self.globals, self.fresh)
    }

    /// Bind `e` through as many unpacks as its type has pair layers.
    fn unpack_all(&mut self, mut e: Expr, pending: &mut Pending, pushed: &mut usize) -> Expr {
        while let Some(Type::ImplPair { x, snd, .. }) = self.ty(&e) {
            let g = self.fresh.rename(&x);
            let y = self.fresh.name("p");
            pending.push((g, y.clone(), e));
            self.env.push((y.clone(), (*snd).clone()));
            *pushed += 1;
            e = Expr::Var(y);
        }
        e
    }

    fn scoped(&mut self, x: &Name, t: Type, body: &Expr) -> Expr {
        self.env.push((x.clone(), t));
        let r = self.go(body);
        self.env.pop();
        r
    }

    fn go(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::App(..) => {
                let mut args = Vec::new();
                let mut head = e;
                while let Expr::App(f, a) = head {
                    args.push(&**a);
                    head = f;
                }
                args.reverse();
                let (mut pending, mut pushed) = (Vec::new(), 0);
                let head = self.go(head);
                let mut cur = self.unpack_all(head, &mut pending, &mut pushed);
                let last = args.len() - 1;
                for (i, a) in args.into_iter().enumerate() {
                    let a = self.go(a);
                    let a = self.unpack_all(a, &mut pending, &mut pushed);
                    cur = Expr::app(cur, a);
                    // The full application is in tail position; only partial
                    // applications are unpacked.
                    if i < last {
                        cur = self.unpack_all(cur, &mut pending, &mut pushed);
                    }
                }
                self.env.truncate(self.env.len() - pushed);
                wrap(pending, cur)
            }
            Expr::Let(x, a @ Annot::Shape(s), e1, e2) => {
                let e1 = self.go(e1);
                let (mut pending, mut pushed) = (Vec::new(), 0);
                self.unpack_all(e1.clone(), &mut pending, &mut pushed);
                match pending.pop() {
                    // Bind `x` directly by the innermost unpack.
                    Some((g, _, scrut)) => {
                        let (_, t) = self.env.pop().expect("pushed by unpack_all");
                        let body = self.scoped(x, t, e2);
                        self.env.truncate(self.env.len() - (pushed - 1));
                        wrap(pending, Expr::Unpack(g, x.clone(), Box::new(scrut), Box::new(body)))
                    }
                    None => {
                        let t = self.ty(&e1).unwrap_or_else(|| trivial_type(s, self.fresh));
                        Expr::Let(x.clone(), a.clone(), Box::new(e1), Box::new(self.scoped(x, t, e2)))
                    }
                }
            }
            Expr::Let(x, Annot::Type(t), e1, e2) => {
                self.env.push((x.clone(), t.clone()));
                let e1 = self.go(e1);
                let e2 = self.go(e2);
                self.env.pop();
                Expr::Let(x.clone(), Annot::Type(t.clone()), Box::new(e1), Box::new(e2))
            }
            Expr::Lam(x, a, body) => {
                let t = match a {
                    Annot::Shape(s) => trivial_type(s, self.fresh),
                    Annot::Type(t) => t.clone(),
                };
                Expr::Lam(x.clone(), a.clone(), Box::new(self.scoped(x, t, body)))
            }
            Expr::ImplLam(x, t, body) => Expr::ImplLam(x.clone(), t.clone(), Box::new(self.scoped(x, t.clone(), body))),
            Expr::Unpack(g, y, s, body) => {
                let s = self.go(s);
                let t = self.ty(&s).map(|t| strip_one_pair(&t).clone()).unwrap_or_else(|| Type::trivial(BaseSort::Unit));
                Expr::Unpack(g.clone(), y.clone(), Box::new(s), Box::new(self.scoped(y, t, body)))
            }
            Expr::TyLam(a, body) => Expr::TyLam(a.clone(), Box::new(self.go(body))),
            Expr::TyApp(f, s) => Expr::TyApp(Box::new(self.go(f)), s.clone()),
            Expr::If(c, a, b) => Expr::If(Box::new(self.go(c)), Box::new(self.go(a)), Box::new(self.go(b))),
            Expr::Const(_) | Expr::Var(_) => e.clone(),
        }
    }
}

fn wrap(pending: Pending, body: Expr) -> Expr {
    pending.into_iter().rev().fold(body, |acc, (g, y, s)| Expr::Unpack(g, y, Box::new(s), Box::new(acc)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn elab(src: &str) -> Elaborated {
        elaborate(&parse(src).unwrap(), &Fresh::new(1)).unwrap()
    }

    fn body(src: &str, name: &str) -> String {
        elab(src).defs.iter().find(|d| d.name.as_str() == name).unwrap().body.to_string()
    }

    const FOO: &str = "foo :: [n:Int] -> (Bool -> {v:Int | v = n}) -> ()\nfoo f = assert (f True = f False)\n";

    #[test]
    fn implicit_lambda_inserted_for_foo() {
        let b = body(FOO, "foo");
        assert_eq!(b, "(\\[n:Int] -> (\\f:{_1:Bool -> {v:Int | (= v n)}} -> (assert (((=) (f True)) (f False)))))");
    }

    #[test]
    fn equality_sort_is_inferred() {
        let b = body("f :: Bool -> Bool -> Bool\nf x y = x = y", "f");
        assert!(b.contains("(=)"), "{b}");
        let e = elab("f :: Bool -> Bool -> Bool\nf x y = x = y");
        fn find_eq(e: &Expr) -> Option<BaseSort> {
            match e {
                Expr::Const(Const::Prim(Prim::Eq(s))) => Some(*s),
                Expr::App(a, b) => find_eq(a).or_else(|| find_eq(b)),
                Expr::Lam(_, _, b) => find_eq(b),
                _ => None,
            }
        }
        assert_eq!(find_eq(&e.defs[0].body), Some(BaseSort::Bool));
    }

    #[test]
    fn lambdas_get_shapes_and_type_applications_are_inserted() {
        let src = "assume id :: a -> a\nt = id (\\x -> x + 1)";
        let b = body(src, "t");
        assert_eq!(b, "(id @(Int -> Int) (\\x:Int -> (((+) x) 1)))");
    }

    #[test]
    fn unpack_inserted_for_pair_argument() {
        let src = "assume bar :: () -> [n:Int]. (Bool -> {v:Int | v = n})\nt = let f = bar () in assert (f True = f False)";
        let b = body(src, "t");
        assert_eq!(b, "(unpack (n.1, f) = (bar ()) in (assert (((=) (f True)) (f False))))");
    }

    #[test]
    fn unpack_hoists_around_spine() {
        let src = "assume mk :: Int -> [n:Int]. {v:Int | v = n}\nassume use :: Int -> Int -> Int\nt = use (mk 1) (mk 2)";
        let b = body(src, "t");
        assert_eq!(b, "(unpack (n.1, p.2) = (mk 1) in (unpack (n.3, p.4) = (mk 2) in ((use p.2) p.4)))");
        let e = &elab(src).defs[0];
        assert_eq!(insert_unpacks(&e.body, &e.scope, &Fresh::new(100)), e.body, "idempotent");
    }

    #[test]
    fn no_pairs_no_change() {
        let e = &elab(FOO).defs[0];
        assert_eq!(insert_unpacks(&e.body, &e.scope, &Fresh::new(100)), e.body);
    }

    #[test]
    fn implicit_lambda_examples() {
        let t = parse("f :: [a:Int] -> [b:Int] -> Int -> Int\nf x = x").unwrap();
        let Decl::Sig { ty, .. } = &t.decls[0] else { panic!() };
        let id = Expr::Lam(Name::new("x"), Annot::Shape(Shape::Base(BaseSort::Int)), Box::new(Expr::var("x")));
        assert_eq!(insert_implicit_lambdas(&id, ty).to_string(), "(\\[a:Int] -> (\\[b:Int] -> (\\x:Int -> x)))");
        assert_eq!(insert_implicit_lambdas(&id, &Type::trivial(BaseSort::Int)), id);
    }

    #[test]
    fn errors() {
        let p = |s: &str| elaborate(&parse(s).unwrap(), &Fresh::new(1)).unwrap_err();
        assert!(matches!(p("f :: Int\nf = 1\nf = 2"), ElabError::DuplicateDefinition { .. }));
        assert!(matches!(p("f :: Int"), ElabError::MissingDefinition { .. }));
        assert!(matches!(p("f = g"), ElabError::UnboundVariable { .. }));
        assert!(matches!(p("f = f"), ElabError::RecursiveWithoutSignature { .. }));
        assert!(matches!(p("f :: Int\nf = True"), ElabError::ShapeMismatch { .. }));
        assert!(matches!(p("f :: {v:Int | v = m}\nf = 1"), ElabError::Wf { .. }));
        assert!(load_signatures(&Program::default()).unwrap().entries.is_empty());
    }
}
