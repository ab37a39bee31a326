//! Existential Horn constraints: representation, substitution, dependency
//! analysis and separation.

pub mod normal;
pub mod oracle;
pub mod random;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::name::{capture_avoiding, Name};
use crate::pred::{BaseSort, KApp, PKind, Pred, TRUE};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    Exists(Name, BaseSort, Box<Constraint>),
    Forall(Name, BaseSort, Pred, Box<Constraint>),
    And(Vec<Constraint>),
    Head(Pred),
}

pub const CTRUE: Constraint = Constraint::Head(TRUE);

impl Constraint {
    pub fn head(p: Pred) -> Constraint {
        Constraint::Head(p)
    }

    pub fn forall(x: &Name, s: BaseSort, p: Pred, c: Constraint) -> Constraint {
        Constraint::Forall(x.clone(), s, p, Box::new(c))
    }

    pub fn exists(x: &Name, s: BaseSort, c: Constraint) -> Constraint {
        Constraint::Exists(x.clone(), s, Box::new(c))
    }

    /// Conjunction that flattens nested `And`s and drops `true` heads.
    pub fn and(cs: impl IntoIterator<Item = Constraint>) -> Constraint {
        let mut out = Vec::new();
        for c in cs {
            match c {
                Constraint::And(inner) => out.extend(inner),
                Constraint::Head(p) if p.is_true() => {}
                c => out.push(c),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Constraint::And(out)
        }
    }

    pub fn is_true(&self) -> bool {
        match self {
            Constraint::Head(p) => p.is_true(),
            Constraint::And(cs) => cs.iter().all(Constraint::is_true),
            _ => false,
        }
    }

    pub fn has_exists(&self) -> bool {
        match self {
            Constraint::Exists(..) => true,
            Constraint::Forall(_, _, _, c) => c.has_exists(),
            Constraint::And(cs) => cs.iter().any(Constraint::has_exists),
            Constraint::Head(_) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let mut add = |p: &Pred, bound: &Vec<Name>| {
            for x in p.free_vars() {
                if !bound.contains(&x) {
                    out.insert(x);
                }
            }
        };
        match self {
            Constraint::Head(p) => add(p, bound),
            Constraint::And(cs) => cs.iter().for_each(|c| c.collect_free(bound, out)),
            Constraint::Forall(x, _, p, c) => {
                bound.push(x.clone());
                add(p, bound);
                c.collect_free(bound, out);
                bound.pop();
            }
            Constraint::Exists(x, _, c) => {
                bound.push(x.clone());
                c.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every predicate-variable application, in guard or head position.
    pub fn kapps(&self) -> Vec<&KApp> {
        let mut out = Vec::new();
        self.visit_preds(&mut |p| out.extend(p.kapps()));
        out
    }

    pub fn visit_preds<'a>(&'a self, f: &mut impl FnMut(&'a Pred)) {
        match self {
            Constraint::Head(p) => f(p),
            Constraint::And(cs) => cs.iter().for_each(|c| c.visit_preds(f)),
            Constraint::Forall(_, _, p, c) => {
                f(p);
                c.visit_preds(f)
            }
            Constraint::Exists(_, _, c) => c.visit_preds(f),
        }
    }

    /// Names of predicate variables of the given kind.
    pub fn pvars(&self, kind: PKind) -> BTreeSet<Name> {
        self.kapps().into_iter().filter(|k| k.kind == kind).map(|k| k.name.clone()).collect()
    }

    pub fn kvars(&self) -> BTreeSet<Name> {
        self.pvars(PKind::Kappa)
    }

    /// Capture-avoiding first-order substitution.
    pub fn subst_fo(&self, s: &HashMap<Name, Pred>) -> Constraint {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Constraint::Head(p) => Constraint::Head(p.subst(s)),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| c.subst_fo(s)).collect()),
            Constraint::Forall(x, sort, p, c) => {
                let (y, inner) = bind(x, s);
                Constraint::Forall(y, *sort, p.subst(&inner), Box::new(c.subst_fo(&inner)))
            }
            Constraint::Exists(x, sort, c) => {
                let (y, inner) = bind(x, s);
                Constraint::Exists(y, *sort, Box::new(c.subst_fo(&inner)))
            }
        }
    }

    pub fn subst1(&self, x: &Name, e: &Pred) -> Constraint {
        let mut s = HashMap::new();
        s.insert(x.clone(), e.clone());
        self.subst_fo(&s)
    }

    /// Second-order substitution of predicate variables by lambda-bound
    /// predicates. Solutions must be closed apart from their parameters.
    pub fn subst_so(&self, sol: &HashMap<Name, (Vec<Name>, Pred)>) -> Constraint {
        self.map_preds(&mut |p| subst_so_pred(p, sol))
    }

    pub fn map_preds(&self, f: &mut impl FnMut(&Pred) -> Pred) -> Constraint {
        match self {
            Constraint::Head(p) => Constraint::Head(f(p)),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| c.map_preds(f)).collect()),
            Constraint::Forall(x, s, p, c) => Constraint::Forall(x.clone(), *s, f(p), Box::new(c.map_preds(f))),
            Constraint::Exists(x, s, c) => Constraint::Exists(x.clone(), *s, Box::new(c.map_preds(f))),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Constraint::Head(_) => 1,
            Constraint::And(cs) => 1 + cs.iter().map(Constraint::size).sum::<usize>(),
            Constraint::Forall(_, _, _, c) | Constraint::Exists(_, _, c) => 1 + c.size(),
        }
    }
}

fn bind(x: &Name, s: &HashMap<Name, Pred>) -> (Name, HashMap<Name, Pred>) {
    let mut inner = s.clone();
    inner.remove(x);
    if inner.values().any(|p| p.mentions(x)) {
        let y = capture_avoiding(x);
        inner.insert(x.clone(), Pred::Var(y.clone()));
        (y, inner)
    } else {
        (x.clone(), inner)
    }
}

pub fn subst_so_pred(p: &Pred, sol: &HashMap<Name, (Vec<Name>, Pred)>) -> Pred {
    p.map_kapps(&mut |k| {
        sol.get(&k.name).map(|(params, body)| {
            let s: HashMap<Name, Pred> = params.iter().cloned().zip(k.args.iter().cloned()).collect();
            body.subst(&s)
        })
    })
}

/// Sorts of each predicate variable's parameters, inferred from the sorts of
/// its arguments at the first application.
pub fn pvar_sorts(c: &Constraint) -> BTreeMap<(PKind, Name), Vec<BaseSort>> {
    fn go(c: &Constraint, env: &mut Vec<(Name, BaseSort)>, out: &mut BTreeMap<(PKind, Name), Vec<BaseSort>>) {
        let mut record = |p: &Pred, env: &Vec<(Name, BaseSort)>| {
            for k in p.kapps() {
                let key = (k.kind, k.name.clone());
                if out.contains_key(&key) {
                    continue;
                }
                let lookup = |x: &Name| env.iter().rev().find(|(y, _)| y == x).map(|b| b.1);
                let sorts = k
                    .args
                    .iter()
                    .map(|a| crate::pred::sort_of(a, &lookup).unwrap_or(BaseSort::Int))
                    .collect();
                out.insert(key, sorts);
            }
        };
        match c {
            Constraint::Head(p) => record(p, env),
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, env, out)),
            Constraint::Forall(x, s, p, c) => {
                env.push((x.clone(), *s));
                record(p, env);
                go(c, env, out);
                env.pop();
            }
            Constraint::Exists(x, s, c) => {
                env.push((x.clone(), *s));
                go(c, env, out);
                env.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    go(c, &mut Vec::new(), &mut out);
    out
}

/// Dependency edges `k1 -> k2`: `k1` occurs in a guard dominating a head
/// that mentions `k2`.
pub fn deps(c: &Constraint) -> BTreeSet<(Name, Name)> {
    fn go(c: &Constraint, guards: &mut Vec<Name>, out: &mut BTreeSet<(Name, Name)>) {
        match c {
            Constraint::Head(p) => {
                for k in p.kapps().into_iter().filter(|k| k.kind == PKind::Kappa) {
                    for g in guards.iter() {
                        out.insert((g.clone(), k.name.clone()));
                    }
                }
            }
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, guards, out)),
            Constraint::Forall(_, _, p, c) => {
                let ks: Vec<Name> = p.kapps().into_iter().filter(|k| k.kind == PKind::Kappa).map(|k| k.name.clone()).collect();
                let n = ks.len();
                guards.extend(ks);
                go(c, guards, out);
                guards.truncate(guards.len() - n);
            }
            Constraint::Exists(_, _, c) => go(c, guards, out),
        }
    }
    let mut out = BTreeSet::new();
    go(c, &mut Vec::new(), &mut out);
    out
}

/// Predicate variables that lie on a dependency cycle (including self-loops).
pub fn cyclic_kvars(c: &Constraint) -> BTreeSet<Name> {
    let edges = deps(c);
    let mut succ: BTreeMap<Name, Vec<Name>> = BTreeMap::new();
    for (a, b) in &edges {
        succ.entry(a.clone()).or_default().push(b.clone());
    }
    let reaches = |from: &Name, to: &Name| -> bool {
        let mut stack = vec![from.clone()];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            for m in succ.get(&n).into_iter().flatten() {
                if m == to {
                    return true;
                }
                if seen.insert(m.clone()) {
                    stack.push(m.clone());
                }
            }
        }
        false
    };
    c.kvars().into_iter().filter(|k| reaches(k, k)).collect()
}

pub fn is_acyclic(c: &Constraint) -> bool {
    cyclic_kvars(c).is_empty()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparateError {
    #[error("cyclic predicate variable `{0}` occurs under an existential binder")]
    NotSeparable(Name),
}

/// Split `c` into an existential part free of cyclic predicate variables and
/// a Horn part holding every cyclic one. Acyclic constraints separate as
/// `(c, true)`.
pub fn separate(c: &Constraint) -> Result<(Constraint, Constraint), SeparateError> {
    let cyclic = cyclic_kvars(c);
    if cyclic.is_empty() {
        return Ok((c.clone(), CTRUE));
    }
    fn check(c: &Constraint, cyclic: &BTreeSet<Name>, under: bool) -> Result<(), SeparateError> {
        let hit = |p: &Pred| p.kapps().into_iter().find(|k| cyclic.contains(&k.name)).map(|k| k.name.clone());
        match c {
            Constraint::Head(p) if under => hit(p).map_or(Ok(()), |k| Err(SeparateError::NotSeparable(k))),
            Constraint::Head(_) => Ok(()),
            Constraint::And(cs) => cs.iter().try_for_each(|c| check(c, cyclic, under)),
            Constraint::Forall(_, _, p, body) => {
                if under || body.has_exists() {
                    if let Some(k) = hit(p) {
                        return Err(SeparateError::NotSeparable(k));
                    }
                }
                check(body, cyclic, under)
            }
            Constraint::Exists(_, _, body) => check(body, cyclic, true),
        }
    }
    check(c, &cyclic, false)?;
    Ok((crate::solver::simplify(&sides_of(c)), noside_of(c)))
}

/// Drop existential subtrees.
pub fn noside_of(c: &Constraint) -> Constraint {
    match c {
        Constraint::Exists(..) => CTRUE,
        Constraint::Forall(x, s, p, body) => Constraint::forall(x, *s, p.clone(), noside_of(body)),
        Constraint::And(cs) => Constraint::And(cs.iter().map(noside_of).collect()),
        Constraint::Head(_) => c.clone(),
    }
}

/// Keep only existential subtrees, with their dominating guards.
pub fn sides_of(c: &Constraint) -> Constraint {
    match c {
        Constraint::Exists(..) => c.clone(),
        Constraint::Forall(x, s, p, body) => Constraint::forall(x, *s, p.clone(), sides_of(body)),
        Constraint::And(cs) => Constraint::And(cs.iter().map(sides_of).collect()),
        Constraint::Head(_) => CTRUE,
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        pretty(self, 0, f)
    }
}

const WIDTH: usize = 88;

fn flat(c: &Constraint) -> String {
    match c {
        Constraint::Head(p) => p.to_string(),
        Constraint::And(cs) if cs.is_empty() => "true".to_string(),
        Constraint::And(cs) => format!("(and {})", cs.iter().map(flat).collect::<Vec<_>>().join(" ")),
        Constraint::Forall(x, s, p, body) => format!("(forall ({x} {s}) {p} {})", flat(body)),
        Constraint::Exists(x, s, body) => format!("(exists ({x} {s}) {})", flat(body)),
    }
}

fn pretty(c: &Constraint, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let one = flat(c);
    if one.len() + indent <= WIDTH {
        return f.write_str(&one);
    }
    let pad = " ".repeat(indent + 2);
    match c {
        Constraint::Head(_) => f.write_str(&one),
        Constraint::And(cs) => {
            f.write_str("(and")?;
            for c in cs {
                write!(f, "\n{pad}")?;
                pretty(c, indent + 2, f)?;
            }
            f.write_str(")")
        }
        Constraint::Forall(x, s, p, body) => {
            write!(f, "(forall ({x} {s}) {p}\n{pad}")?;
            pretty(body, indent + 2, f)?;
            f.write_str(")")
        }
        Constraint::Exists(x, s, body) => {
            write!(f, "(exists ({x} {s})\n{pad}")?;
            pretty(body, indent + 2, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(name: &str, args: &[&str]) -> Pred {
        Pred::kapp(PKind::Kappa, &Name::new(name), args.iter().map(|a| Pred::var(&Name::new(a))).collect())
    }

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn and_flattens() {
        let c = Constraint::and([CTRUE, Constraint::And(vec![Constraint::head(k("k", &["x"]))]), CTRUE]);
        assert_eq!(c, Constraint::head(k("k", &["x"])));
        assert!(Constraint::and([CTRUE, CTRUE]).is_true());
    }

    #[test]
    fn deps_and_cycles() {
        // forall x. k1(x) => k2(x);  forall y. k2(y) => k1(y)
        let c = Constraint::And(vec![
            Constraint::forall(&n("x"), BaseSort::Int, k("k1", &["x"]), Constraint::head(k("k2", &["x"]))),
            Constraint::forall(&n("y"), BaseSort::Int, k("k2", &["y"]), Constraint::head(k("k1", &["y"]))),
        ]);
        assert_eq!(deps(&c).len(), 2);
        assert!(!is_acyclic(&c));
        assert_eq!(cyclic_kvars(&c).len(), 2);
        let (side, horn) = separate(&c).unwrap();
        assert!(side.is_true() || !side.has_exists());
        assert_eq!(horn, c);
    }

    #[test]
    fn separate_rejects_cycle_under_exists() {
        let c = Constraint::forall(
            &n("x"),
            BaseSort::Int,
            k("k1", &["x"]),
            Constraint::exists(&n("z"), BaseSort::Int, Constraint::head(k("k1", &["z"]))),
        );
        assert!(matches!(separate(&c), Err(SeparateError::NotSeparable(_))));
    }

    #[test]
    fn subst_fo_avoids_capture() {
        let c = Constraint::forall(&n("x"), BaseSort::Int, TRUE, Constraint::head(Pred::eq(Pred::var(&n("x")), Pred::var(&n("y")))));
        let r = c.subst1(&n("y"), &Pred::var(&n("x")));
        assert!(r.free_vars().contains(&n("x")));
    }

    #[test]
    fn subst_so_instantiates_params() {
        let c = Constraint::forall(&n("a"), BaseSort::Int, k("k", &["a"]), CTRUE);
        let mut sol = HashMap::new();
        sol.insert(n("k"), (vec![n("p")], Pred::eq(Pred::var(&n("p")), Pred::Int(3))));
        let r = c.subst_so(&sol);
        assert_eq!(r.to_string(), "(forall (a Int) (= a 3) true)");
    }
}
