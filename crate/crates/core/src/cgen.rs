//! Bidirectional constraint generation: elaborated terms to existential
//! Horn constraints.

use std::cell::RefCell;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{const_type, shape, subst_type, subst_tyvar, Annot, Const, Ctx, DataDecls, Entry, Expr, Shape, Type, Variance};
use crate::ehc::normal::forced_true;
use crate::ehc::Constraint;
use crate::name::{Fresh, Name};
use crate::pred::{BaseSort, PKind, Pred, TRUE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CgenError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("implicit parameter `{0}` used as a term")]
    GhostInTermPosition(Name),
    #[error("shape mismatch between `{0}` and `{1}`")]
    ShapeMismatch(String, String),
    #[error("`{0}` is not a function type")]
    NotAFunction(String),
    #[error("`{0}` is not an implicit pair type")]
    NotAPair(String),
    #[error("type application to non-polymorphic `{0}`")]
    NotPolymorphic(String),
}

/// A refinement variable and the base-sorted binders it ranges over, value
/// binder last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaInfo {
    pub name: Name,
    pub scope: Vec<(Name, BaseSort)>,
    /// Replaced by `true` before solving.
    pub presolved: bool,
}

#[derive(Clone, Debug)]
pub struct CgenOutput {
    pub constraint: Constraint,
    /// Synthesized type for definitions without a signature.
    pub ty: Option<Type>,
    pub kappas: Vec<KappaInfo>,
}

type R<T> = Result<T, CgenError>;

/// `x::t ⇒ c`: a universally quantified implication for refined base types,
/// `c` itself otherwise.
pub fn genimp(x: &Name, t: &Type, c: Constraint) -> Constraint {
    match t.reft_at(x) {
        Some(r) => Constraint::forall(x, t.as_base().unwrap().1, r, c),
        None => c,
    }
}

/// `∃x::t. c`, dual of [`genimp`].
pub fn genexists(x: &Name, t: &Type, c: Constraint) -> Constraint {
    match t.reft_at(x) {
        Some(r) => Constraint::exists(x, t.as_base().unwrap().1, Constraint::And(vec![Constraint::Head(r), c])),
        None => c,
    }
}

/// Quantify `c` over every base-sorted binder of `ctx`, outermost first.
pub fn embed_ctx(ctx: &Ctx, c: Constraint) -> Constraint {
    ctx.entries.iter().rev().fold(c, |c, e| match e {
        Entry::Corporeal(x, t) | Entry::Ghost(x, t) => genimp(x, t, c),
        Entry::TyVar(_) => c,
    })
}

fn head_kvars(c: &Constraint, out: &mut BTreeSet<Name>) {
    match c {
        Constraint::Head(p) => out.extend(p.kapps().into_iter().filter(|a| a.kind == PKind::Kappa).map(|a| a.name.clone())),
        Constraint::And(cs) => cs.iter().for_each(|c| head_kvars(c, out)),
        Constraint::Forall(_, _, _, c) | Constraint::Exists(_, _, c) => head_kvars(c, out),
    }
}

/// Replace refinement variables whose solution is forced to be `true`
/// (those without any head occurrence, or with an unguarded head over
/// distinct universally bound arguments) by `true`. Returns the replaced
/// variables.
pub fn presolve(c: &Constraint) -> (Constraint, BTreeSet<Name>) {
    let mut c = c.clone();
    let mut done = BTreeSet::new();
    loop {
        let mut heads = BTreeSet::new();
        head_kvars(&c, &mut heads);
        let mut drop: BTreeSet<Name> = c.kvars().difference(&heads).cloned().collect();
        drop.extend(forced_true(&c).into_iter().filter(|(k, _)| *k == PKind::Kappa).map(|(_, n)| n));
        if drop.is_empty() {
            return (c, done);
        }
        c = c.map_preds(&mut |p| p.map_kapps(&mut |a| (a.kind == PKind::Kappa && drop.contains(&a.name)).then_some(TRUE)));
        done.extend(drop);
    }
}

pub struct Cgen<'a> {
    fresh: &'a Fresh,
    data: &'a DataDecls,
    kappas: RefCell<Vec<KappaInfo>>,
}

fn binds(ctx: &Ctx, x: &Name) -> bool {
    ctx.entries.iter().any(|e| match e {
        Entry::Corporeal(y, _) | Entry::Ghost(y, _) => y == x,
        Entry::TyVar(_) => false,
    })
}

fn mismatch(t1: &Type, t2: &Type) -> CgenError {
    CgenError::ShapeMismatch(t1.to_string(), t2.to_string())
}

impl<'a> Cgen<'a> {
    pub fn new(fresh: &'a Fresh, data: &'a DataDecls) -> Cgen<'a> {
        Cgen { fresh, data, kappas: RefCell::new(Vec::new()) }
    }

    pub fn kappas(&self) -> Vec<KappaInfo> {
        self.kappas.borrow().clone()
    }

    /// `x` unless it is already bound in `ctx`, in which case a fresh variant.
    fn binder(&self, ctx: &Ctx, x: &Name) -> Name {
        if binds(ctx, x) {
            self.fresh.rename(x)
        } else {
            x.clone()
        }
    }

    fn kappa(&self, ctx: &Ctx, sort: BaseSort) -> Type {
        let mut scope: Vec<(Name, BaseSort)> = Vec::new();
        for (x, s) in ctx.base_vars() {
            scope.retain(|(y, _)| *y != x);
            scope.push((x, s));
        }
        let v = self.binder(ctx, &Name::new("v"));
        scope.push((v.clone(), sort));
        let k = self.fresh.name("k");
        let args = scope.iter().map(|(x, _)| Pred::var(x)).collect();
        self.kappas.borrow_mut().push(KappaInfo { name: k.clone(), scope, presolved: false });
        Type::Base { v, sort, r: Pred::kapp(PKind::Kappa, &k, args) }
    }

    /// Template of shape `s`: every base position refined by a fresh
    /// refinement variable over the base binders in scope.
    pub fn fresh_shape(&self, ctx: &Ctx, s: &Shape) -> Type {
        match s {
            Shape::Base(b) => self.kappa(ctx, *b),
            Shape::Fun(a, b) => {
                let x = self.binder(ctx, &Name::new("z"));
                let dom = self.fresh_shape(ctx, a);
                let cod = self.fresh_shape(&ctx.corp(&x, &dom), b);
                Type::Fun { x, dom: Box::new(dom), cod: Box::new(cod) }
            }
            Shape::Var(a) => Type::Var(a.clone()),
            Shape::Forall(a, t) => Type::Forall(a.clone(), Box::new(self.fresh_shape(&ctx.tyvar(a), t))),
            Shape::Con(c, args) => Type::Con(c.clone(), args.iter().map(|a| self.fresh_shape(ctx, a)).collect()),
            Shape::Meta(_) => self.kappa(ctx, BaseSort::Int),
        }
    }

    /// Template with the implicit structure of `t` mirrored.
    pub fn fresh_type(&self, ctx: &Ctx, t: &Type) -> Type {
        match t {
            Type::Base { sort, .. } => self.kappa(ctx, *sort),
            Type::Fun { x, dom, cod } | Type::ImplFun { x, dom, cod } | Type::ImplPair { x, fst: dom, snd: cod } => {
                let y = self.binder(ctx, x);
                let dom2 = self.fresh_type(ctx, dom);
                let inner = if matches!(t, Type::Fun { .. }) { ctx.corp(&y, &dom2) } else { ctx.ghost(&y, &dom2) };
                let cod2 = Box::new(self.fresh_type(&inner, cod));
                let dom2 = Box::new(dom2);
                match t {
                    Type::Fun { .. } => Type::Fun { x: y, dom: dom2, cod: cod2 },
                    Type::ImplFun { .. } => Type::ImplFun { x: y, dom: dom2, cod: cod2 },
                    _ => Type::ImplPair { x: y, fst: dom2, snd: cod2 },
                }
            }
            Type::Var(_) => t.clone(),
            Type::Forall(a, body) => Type::Forall(a.clone(), Box::new(self.fresh_type(&ctx.tyvar(a), body))),
            Type::Con(c, args) => Type::Con(c.clone(), args.iter().map(|a| self.fresh_type(ctx, a)).collect()),
        }
    }

    pub fn sub(&self, ctx: &Ctx, t1: &Type, t2: &Type) -> R<Constraint> {
        use Type as T;
        match (t1, t2) {
            (T::Base { v: v1, sort: b1, r: r1 }, T::Base { v: v2, sort: b2, r: r2 }) => {
                if b1 != b2 {
                    return Err(mismatch(t1, t2));
                }
                let clash = r2.mentions(v1) && v1 != v2;
                let (x, r1) = if clash { let x = self.fresh.rename(v1); (x.clone(), r1.rename(v1, &x)) } else { (v1.clone(), r1.clone()) };
                Ok(Constraint::forall(&x, *b1, r1, Constraint::Head(r2.rename(v2, &x))))
            }
            (T::Var(a), T::Var(b)) if a == b => Ok(Constraint::And(vec![])),
            (T::Forall(a, s1), T::Forall(b, s2)) => {
                let s2 = if a == b { (**s2).clone() } else { subst_tyvar(s2, b, &T::Var(a.clone())) };
                self.sub(&ctx.tyvar(a), s1, &s2)
            }
            (_, T::ImplFun { x, dom, cod }) => {
                let z = self.binder(ctx, x);
                let cod = subst_type(cod, x, &Pred::var(&z));
                Ok(genimp(&z, dom, self.sub(&ctx.ghost(&z, dom), t1, &cod)?))
            }
            (T::ImplPair { x, fst, snd }, _) => {
                let z = self.binder(ctx, x);
                let snd = subst_type(snd, x, &Pred::var(&z));
                Ok(genimp(&z, fst, self.sub(&ctx.ghost(&z, fst), &snd, t2)?))
            }
            (T::ImplFun { x, dom, cod }, _) => {
                let z = self.fresh.rename(x);
                let cod = subst_type(cod, x, &Pred::var(&z));
                Ok(genexists(&z, dom, self.sub(&ctx.ghost(&z, dom), &cod, t2)?))
            }
            (_, T::ImplPair { x, fst, snd }) => {
                let z = self.fresh.rename(x);
                let snd = subst_type(snd, x, &Pred::var(&z));
                Ok(genexists(&z, fst, self.sub(&ctx.ghost(&z, fst), t1, &snd)?))
            }
            (T::Fun { x: x1, dom: d1, cod: c1 }, T::Fun { x: x2, dom: d2, cod: c2 }) => {
                let contra = self.sub(ctx, d2, d1)?;
                let z = self.binder(ctx, x2);
                let c1 = subst_type(c1, x1, &Pred::var(&z));
                let c2 = subst_type(c2, x2, &Pred::var(&z));
                let co = self.sub(&ctx.corp(&z, d2), &c1, &c2)?;
                Ok(Constraint::and([contra, genimp(&z, d2, co)]))
            }
            (T::Con(c, xs), T::Con(d, ys)) if c == d && xs.len() == ys.len() => {
                let vars = self.data.get(c).cloned().unwrap_or_else(|| vec![Variance::Inv; xs.len()]);
                let mut cs = Vec::new();
                for ((a, b), var) in xs.iter().zip(ys).zip(vars) {
                    if var != Variance::Contra {
                        cs.push(self.sub(ctx, a, b)?);
                    }
                    if var != Variance::Co {
                        cs.push(self.sub(ctx, b, a)?);
                    }
                }
                Ok(Constraint::and(cs))
            }
            _ => Err(mismatch(t1, t2)),
        }
    }

    pub fn check(&self, ctx: &Ctx, e: &Expr, t: &Type) -> R<Constraint> {
        match (e, t) {
            (Expr::TyLam(a, body), Type::Forall(b, s)) => {
                let s = if a == b { (**s).clone() } else { subst_tyvar(s, b, &Type::Var(a.clone())) };
                self.check(&ctx.tyvar(a), body, &s)
            }
            (Expr::ImplLam(x, tx, body), Type::ImplFun { x: y, dom, cod }) => {
                let pre = if **dom == *tx { Constraint::And(vec![]) } else { self.sub(ctx, dom, tx)? };
                let cod = subst_type(cod, y, &Pred::var(x));
                Ok(Constraint::and([pre, genimp(x, tx, self.check(&ctx.ghost(x, tx), body, &cod)?)]))
            }
            (Expr::Lam(x, annot, body), Type::Fun { x: y, dom, cod }) => {
                let (tx, pre) = match annot {
                    Annot::Type(tx) if tx != &**dom => (tx.clone(), self.sub(ctx, dom, tx)?),
                    Annot::Type(_) => ((**dom).clone(), Constraint::And(vec![])),
                    Annot::Shape(s) => {
                        if *s != shape(dom) {
                            return Err(CgenError::ShapeMismatch(s.to_string(), shape(dom).to_string()));
                        }
                        ((**dom).clone(), Constraint::And(vec![]))
                    }
                };
                let cod = subst_type(cod, y, &Pred::var(x));
                Ok(Constraint::and([pre, genimp(x, &tx, self.check(&ctx.corp(x, &tx), body, &cod)?)]))
            }
            (Expr::Let(x, Annot::Shape(s), e1, e2), _) => {
                let tx = self.fresh_shape(ctx, s);
                let c1 = self.check(ctx, e1, &tx)?;
                let c2 = self.check(&ctx.corp(x, &tx), e2, t)?;
                Ok(Constraint::and([c1, genimp(x, &tx, c2)]))
            }
            (Expr::Let(x, Annot::Type(tx), e1, e2), _) => {
                let inner = ctx.corp(x, tx);
                let c1 = self.check(&inner, e1, tx)?;
                let c2 = self.check(&inner, e2, t)?;
                Ok(genimp(x, tx, Constraint::and([c1, c2])))
            }
            (Expr::Unpack(g, y, e1, e2), _) => {
                let (c1, t1) = self.synth(ctx, e1)?;
                let (fst, snd) = self.open_pair(&t1, g)?;
                let inner = ctx.ghost(g, &fst).corp(y, &snd);
                let c2 = self.check(&inner, e2, t)?;
                Ok(Constraint::and([c1, genimp(g, &fst, genimp(y, &snd, c2))]))
            }
            (Expr::App(f, a), _) => {
                let (c1, tf) = self.synth(ctx, f)?;
                let c2 = self.app_check(ctx, &tf, a, t)?;
                Ok(Constraint::and([c1, c2]))
            }
            (Expr::If(c, a, b), _) => self.branch(ctx, c, |ctx| self.check(ctx, a, t), |ctx| self.check(ctx, b, t)),
            _ => {
                let (c, s) = self.synth(ctx, e)?;
                Ok(Constraint::and([c, self.sub(ctx, &s, t)?]))
            }
        }
    }

    /// Both branches of a conditional, each under a ghost recording the
    /// outcome of the test.
    fn branch(
        &self,
        ctx: &Ctx,
        cond: &Expr,
        then: impl FnOnce(&Ctx) -> R<Constraint>,
        other: impl FnOnce(&Ctx) -> R<Constraint>,
    ) -> R<Constraint> {
        let (cc, tc) = self.synth(ctx, cond)?;
        let Some((v, BaseSort::Bool, r)) = tc.as_base() else {
            return Err(mismatch(&tc, &Type::trivial(BaseSort::Bool)));
        };
        let g = self.fresh.name("b");
        let r = r.rename(v, &g);
        let guard = |p: Pred| Type::Base { v: g.clone(), sort: BaseSort::Bool, r: Pred::and([r.clone(), p]) };
        let (tt, tf) = (guard(Pred::var(&g)), guard(Pred::not(Pred::var(&g))));
        let c1 = genimp(&g, &tt, then(&ctx.ghost(&g, &tt))?);
        let c2 = genimp(&g, &tf, other(&ctx.ghost(&g, &tf))?);
        Ok(Constraint::and([cc, c1, c2]))
    }

    fn open_pair(&self, t: &Type, g: &Name) -> R<(Type, Type)> {
        match t {
            Type::ImplPair { x, fst, snd } => Ok(((**fst).clone(), subst_type(snd, x, &Pred::var(g)))),
            _ => Err(CgenError::NotAPair(t.to_string())),
        }
    }

    pub fn synth(&self, ctx: &Ctx, e: &Expr) -> R<(Constraint, Type)> {
        let none = || Constraint::And(vec![]);
        match e {
            Expr::Const(c) => Ok((none(), const_type(c))),
            Expr::Var(x) => {
                let Some(t) = ctx.lookup_corp(x) else {
                    return Err(if binds(ctx, x) { CgenError::GhostInTermPosition(x.clone()) } else { CgenError::UnboundVariable(x.clone()) });
                };
                Ok((none(), self.selfify(ctx, x, t)))
            }
            Expr::Lam(x, annot, body) => {
                let tx = match annot {
                    Annot::Shape(s) => self.fresh_shape(ctx, s),
                    Annot::Type(t) => t.clone(),
                };
                let (c, t) = self.synth(&ctx.corp(x, &tx), body)?;
                Ok((genimp(x, &tx, c), Type::Fun { x: x.clone(), dom: Box::new(tx), cod: Box::new(t) }))
            }
            Expr::ImplLam(x, tx, body) => {
                let (c, t) = self.synth(&ctx.ghost(x, tx), body)?;
                Ok((genimp(x, tx, c), Type::ImplFun { x: x.clone(), dom: Box::new(tx.clone()), cod: Box::new(t) }))
            }
            Expr::App(f, a) => {
                let (c1, tf) = self.synth(ctx, f)?;
                let (c2, t) = self.app_synth(ctx, &tf, a)?;
                Ok((Constraint::and([c1, c2]), t))
            }
            Expr::TyLam(a, body) => {
                let (c, t) = self.synth(&ctx.tyvar(a), body)?;
                Ok((c, Type::Forall(a.clone(), Box::new(t))))
            }
            Expr::TyApp(f, s) => {
                let (c, t) = self.synth(ctx, f)?;
                match t {
                    Type::Forall(a, body) => Ok((c, subst_tyvar(&body, &a, &self.fresh_shape(ctx, s)))),
                    t => Err(CgenError::NotPolymorphic(t.to_string())),
                }
            }
            Expr::Let(x, annot, e1, e2) => {
                let tx = match annot {
                    Annot::Shape(s) => self.fresh_shape(ctx, s),
                    Annot::Type(tx) => tx.clone(),
                };
                let inner = ctx.corp(x, &tx);
                let c1 = self.check(if matches!(annot, Annot::Type(_)) { &inner } else { ctx }, e1, &tx)?;
                let (c2, t2) = self.synth(&inner, e2)?;
                let t = self.fresh_type(ctx, &t2);
                let c3 = self.sub(&inner, &t2, &t)?;
                let c = match annot {
                    Annot::Shape(_) => Constraint::and([c1, genimp(x, &tx, Constraint::and([c2, c3]))]),
                    Annot::Type(_) => genimp(x, &tx, Constraint::and([c1, c2, c3])),
                };
                Ok((c, t))
            }
            Expr::Unpack(g, y, e1, e2) => {
                let (c1, t1) = self.synth(ctx, e1)?;
                let (fst, snd) = self.open_pair(&t1, g)?;
                let inner = ctx.ghost(g, &fst).corp(y, &snd);
                let (c2, t2) = self.synth(&inner, e2)?;
                let t = self.fresh_type(ctx, &t2);
                let c3 = self.sub(&inner, &t2, &t)?;
                Ok((Constraint::and([c1, genimp(g, &fst, genimp(y, &snd, Constraint::and([c2, c3])))]), t))
            }
            Expr::If(c, a, b) => {
                let t = RefCell::new(None);
                let con = self.branch(
                    ctx,
                    c,
                    |inner| {
                        let (ca, ta) = self.synth(inner, a)?;
                        let tmpl = self.fresh_type(ctx, &ta);
                        let c = Constraint::and([ca, self.sub(inner, &ta, &tmpl)?]);
                        *t.borrow_mut() = Some(tmpl);
                        Ok(c)
                    },
                    |inner| self.check(inner, b, t.borrow().as_ref().expect("then branch first")),
                )?;
                Ok((con, t.into_inner().expect("set by then branch")))
            }
        }
    }

    /// Variables of base type synthesize their singleton type.
    fn selfify(&self, ctx: &Ctx, x: &Name, t: &Type) -> Type {
        match t.as_base() {
            Some((v, sort, r)) => {
                let v2 = if v == x || binds(ctx, v) { self.fresh.rename(v) } else { v.clone() };
                Type::Base { v: v2.clone(), sort, r: Pred::and([r.rename(v, &v2), Pred::eq(Pred::var(&v2), Pred::var(x))]) }
            }
            None => t.clone(),
        }
    }

    /// Refinement-level term for arguments that can be substituted directly.
    fn atom(&self, ctx: &Ctx, e: &Expr) -> Option<Pred> {
        match e {
            Expr::Var(x) if ctx.lookup_corp(x).is_some_and(|t| t.as_base().is_some()) => Some(Pred::var(x)),
            Expr::Const(Const::Int(n)) => Some(Pred::Int(*n)),
            Expr::Const(Const::Bool(b)) => Some(Pred::Bool(*b)),
            Expr::Const(Const::Unit) => Some(Pred::Unit),
            _ => None,
        }
    }

    pub fn app_check(&self, ctx: &Ctx, tf: &Type, arg: &Expr, t_out: &Type) -> R<Constraint> {
        match tf {
            Type::ImplFun { x, dom, cod } => {
                let z = self.fresh.rename(x);
                let cod = subst_type(cod, x, &Pred::var(&z));
                Ok(genexists(&z, dom, self.app_check(&ctx.ghost(&z, dom), &cod, arg, t_out)?))
            }
            Type::Fun { x, dom, cod } => {
                if let Some(p) = self.atom(ctx, arg) {
                    let c1 = self.check(ctx, arg, dom)?;
                    return Ok(Constraint::and([c1, self.sub(ctx, &subst_type(cod, x, &p), t_out)?]));
                }
                if matches!(arg, Expr::Var(_)) || !crate::ast::type_free_vars(cod).contains(x) {
                    let c1 = self.check(ctx, arg, dom)?;
                    return Ok(Constraint::and([c1, self.sub(ctx, cod, t_out)?]));
                }
                let (c1, te) = self.synth(ctx, arg)?;
                let c2 = self.sub(ctx, &te, dom)?;
                let y = self.fresh.name("y");
                let cod = subst_type(cod, x, &Pred::var(&y));
                let c3 = self.sub(&ctx.ghost(&y, &te), &cod, t_out)?;
                Ok(Constraint::and([c1, c2, genimp(&y, &te, c3)]))
            }
            t => Err(CgenError::NotAFunction(t.to_string())),
        }
    }

    pub fn app_synth(&self, ctx: &Ctx, tf: &Type, arg: &Expr) -> R<(Constraint, Type)> {
        match tf {
            Type::ImplFun { x, dom, cod } => {
                let z = self.fresh.rename(x);
                let cod = subst_type(cod, x, &Pred::var(&z));
                let inner = ctx.ghost(&z, dom);
                let (c, t) = self.app_synth(&inner, &cod, arg)?;
                let tmpl = self.fresh_type(ctx, &t);
                let c3 = self.sub(&inner, &t, &tmpl)?;
                Ok((genexists(&z, dom, Constraint::and([c, c3])), tmpl))
            }
            Type::Fun { x, dom, cod } => {
                if let Some(p) = self.atom(ctx, arg) {
                    return Ok((self.check(ctx, arg, dom)?, subst_type(cod, x, &p)));
                }
                if matches!(arg, Expr::Var(_)) || !crate::ast::type_free_vars(cod).contains(x) {
                    return Ok((self.check(ctx, arg, dom)?, (**cod).clone()));
                }
                let (c1, te) = self.synth(ctx, arg)?;
                let c2 = self.sub(ctx, &te, dom)?;
                let y = self.fresh.name("y");
                let cod = subst_type(cod, x, &Pred::var(&y));
                let tmpl = self.fresh_type(ctx, &cod);
                let c3 = self.sub(&ctx.ghost(&y, &te), &cod, &tmpl)?;
                Ok((Constraint::and([c1, c2, genimp(&y, &te, c3)]), tmpl))
            }
            t => Err(CgenError::NotAFunction(t.to_string())),
        }
    }
}

/// Constraint for one top-level definition: checked against its signature
/// if it has one, synthesized otherwise, closed over the globals in scope
/// and presolved.
pub fn definition_constraint(
    scope: &Ctx,
    data: &DataDecls,
    body: &Expr,
    sig: Option<&Type>,
    fresh: &Fresh,
) -> R<CgenOutput> {
    let cg = Cgen::new(fresh, data);
    let (c, ty) = match sig {
        Some(t) => (cg.check(scope, body, t)?, None),
        None => {
            let (c, t) = cg.synth(scope, body)?;
            (c, Some(t))
        }
    };
    let (constraint, presolved) = presolve(&embed_ctx(scope, c));
    let mut kappas = cg.kappas();
    for k in &mut kappas {
        k.presolved = presolved.contains(&k.name);
    }
    Ok(CgenOutput { constraint, ty, kappas })
}
