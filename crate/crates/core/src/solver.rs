//! Solving acyclic existential Horn constraints.
//!
//! The pipeline is: skolemize existentials into predicate variables `pi`
//! with inhabitation side conditions (`poke`), eliminate refinement
//! unknowns `kappa` one at a time by their strongest solutions, solve each
//! `pi` from its defining constraint with a quantifier-elimination
//! procedure, and finally eliminate the remaining existential side
//! conditions to obtain a verification condition.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::ehc::{deps, noside_of, sides_of, Constraint, CTRUE};
use crate::name::{capture_avoiding, Fresh, Name};
use crate::pred::{BaseSort, KApp, PKind, Pred, FALSE, TRUE};
use crate::qe::{QeProcedure, SkolemSolution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("cyclic refinement variables: {}", .0.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "))]
    CyclicKappa(Vec<Name>),
}

/// Strongest solution of a `kappa`: existentially quantified conjunctions
/// and disjunctions over equalities with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sol {
    Exists(Name, BaseSort, Pred, Box<Sol>),
    Or(Vec<Sol>),
    Pred(Pred),
}

impl Sol {
    fn exists(x: &Name, s: BaseSort, p: Pred, body: Sol) -> Sol {
        if p.is_false() || body.is_false() {
            return Sol::Pred(FALSE);
        }
        Sol::Exists(x.clone(), s, p, Box::new(body))
    }

    fn or(ss: impl IntoIterator<Item = Sol>) -> Sol {
        let mut out = Vec::new();
        for s in ss {
            match s {
                s if s.is_false() => {}
                Sol::Or(inner) => out.extend(inner),
                s => out.push(s),
            }
        }
        match out.len() {
            0 => Sol::Pred(FALSE),
            1 => out.pop().unwrap(),
            _ => Sol::Or(out),
        }
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Sol::Pred(p) if p.is_false())
    }

    /// Freshen every binder and instantiate parameters with arguments.
    pub fn instantiate(&self, params: &[Name], args: &[Pred], fresh: &Fresh) -> Sol {
        let s: HashMap<Name, Pred> = params.iter().cloned().zip(args.iter().cloned()).collect();
        self.rename(&s, fresh)
    }

    fn rename(&self, s: &HashMap<Name, Pred>, fresh: &Fresh) -> Sol {
        match self {
            Sol::Pred(p) => Sol::Pred(p.subst(s)),
            Sol::Or(ss) => Sol::Or(ss.iter().map(|x| x.rename(s, fresh)).collect()),
            Sol::Exists(y, sort, p, body) => {
                let y2 = fresh.rename(y);
                let mut inner = s.clone();
                inner.insert(y.clone(), Pred::Var(y2.clone()));
                Sol::Exists(y2, *sort, p.subst(&inner), Box::new(body.rename(&inner, fresh)))
            }
        }
    }

    /// Rendering with binders renamed `b0, b1, ...` in order of appearance.
    pub fn canonical(&self) -> String {
        fn go(s: &Sol, map: &HashMap<Name, Pred>, counter: &mut usize) -> Sol {
            match s {
                Sol::Pred(p) => Sol::Pred(p.subst(map)),
                Sol::Or(ss) => Sol::Or(ss.iter().map(|x| go(x, map, counter)).collect()),
                Sol::Exists(y, sort, p, body) => {
                    let b = Name::from(format!("b{counter}"));
                    *counter += 1;
                    let mut inner = map.clone();
                    inner.insert(y.clone(), Pred::Var(b.clone()));
                    Sol::Exists(b, *sort, p.subst(&inner), Box::new(go(body, &inner, counter)))
                }
            }
        }
        go(self, &HashMap::new(), &mut 0).to_string()
    }
}

impl fmt::Display for Sol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sol::Pred(p) => write!(f, "{p}"),
            Sol::Or(ss) => {
                f.write_str("(or")?;
                for s in ss {
                    write!(f, " {s}")?;
                }
                f.write_str(")")
            }
            Sol::Exists(y, s, p, body) => write!(f, "(exists ({y} {s}) (and {p} {body}))"),
        }
    }
}

/// A Skolem predicate introduced for an existential binder, with its
/// parameters: the binder itself followed by the variables in scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiInfo {
    pub name: Name,
    pub params: Vec<(Name, BaseSort)>,
}

/// Replace each `exists n. c` by `(forall n. pi(n, ys) => c) /\ exists n. pi(n, ys)`
/// where `ys` are the binders in scope.
pub fn poke(c: &Constraint, fresh: &Fresh) -> (Constraint, Vec<PiInfo>) {
    fn go(c: &Constraint, scope: &mut Vec<(Name, BaseSort)>, fresh: &Fresh, pis: &mut Vec<PiInfo>) -> Constraint {
        match c {
            Constraint::Exists(n, s, body) => {
                let pi = fresh.name(&format!("pi_{}", n.stem()));
                let mut params = vec![(n.clone(), *s)];
                params.extend(scope.iter().cloned());
                let app = Pred::kapp(PKind::Pi, &pi, params.iter().map(|(x, _)| Pred::Var(x.clone())).collect());
                pis.push(PiInfo { name: pi, params });
                scope.push((n.clone(), *s));
                let inner = go(body, scope, fresh, pis);
                scope.pop();
                Constraint::And(vec![
                    Constraint::forall(n, *s, app.clone(), inner),
                    Constraint::exists(n, *s, Constraint::Head(app)),
                ])
            }
            Constraint::Forall(x, s, p, body) => {
                scope.push((x.clone(), *s));
                let inner = go(body, scope, fresh, pis);
                scope.pop();
                Constraint::forall(x, *s, p.clone(), inner)
            }
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| go(c, scope, fresh, pis)).collect()),
            Constraint::Head(_) => c.clone(),
        }
    }
    let mut pis = Vec::new();
    let out = go(c, &mut Vec::new(), fresh, &mut pis);
    (out, pis)
}

pub fn noside(c: &Constraint) -> Constraint {
    noside_of(c)
}

pub fn sides(c: &Constraint) -> Constraint {
    sides_of(c)
}

fn mentions_pvar(c: &Constraint, k: &Name) -> bool {
    let mut hit = false;
    c.visit_preds(&mut |p| hit |= p.has_pvar(k));
    hit
}

/// Smallest subconstraint containing every occurrence of `k`, descending
/// through guards that do not mention it.
pub fn scoped<'a>(k: &Name, c: &'a Constraint) -> &'a Constraint {
    match c {
        Constraint::And(cs) => {
            let with: Vec<&Constraint> = cs.iter().filter(|c| mentions_pvar(c, k)).collect();
            if with.len() == 1 {
                scoped(k, with[0])
            } else {
                c
            }
        }
        Constraint::Forall(_, _, p, body) if !p.has_pvar(k) => scoped(k, body),
        _ => c,
    }
}

/// Strongest solution of `k` from the clauses in `c` that have it as head.
pub fn sol_k(k: &Name, params: &[Name], c: &Constraint) -> Sol {
    match c {
        Constraint::Forall(x, s, p, body) => Sol::exists(x, *s, p.clone(), sol_k(k, params, body)),
        Constraint::And(cs) => Sol::or(cs.iter().map(|c| sol_k(k, params, c))),
        Constraint::Head(p) => Sol::or(p.conjuncts().into_iter().map(|q| match q {
            Pred::KApp(app) if &app.name == k => {
                Sol::Pred(Pred::and(params.iter().zip(&app.args).map(|(x, y)| Pred::eq(Pred::Var(x.clone()), y.clone()))))
            }
            _ => Sol::Pred(FALSE),
        })),
        Constraint::Exists(..) => Sol::Pred(FALSE),
    }
}

/// Split the first application of `k` out of a guard's conjuncts.
fn split_app(p: &Pred, k: &Name) -> Option<(KApp, Pred)> {
    let cs = p.conjuncts();
    let i = cs.iter().position(|q| matches!(q, Pred::KApp(a) if &a.name == k))?;
    let Pred::KApp(app) = cs[i] else { unreachable!() };
    let rest = Pred::and(cs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| (*q).clone()));
    Some((app.clone(), rest))
}

/// Push a guard solution `sol` for binder `x` outward as universal binders.
pub fn demorgan(x: &Name, s: BaseSort, rest: &Pred, sol: &Sol, body: Constraint) -> Constraint {
    match sol {
        Sol::Exists(y, sy, p, inner) => Constraint::forall(y, *sy, p.clone(), demorgan(x, s, rest, inner, body)),
        Sol::Or(ss) => Constraint::And(ss.iter().map(|b| demorgan(x, s, rest, b, body.clone())).collect()),
        Sol::Pred(p) => Constraint::forall(x, s, Pred::and([p.clone(), rest.clone()]), body),
    }
}

fn elim_sol(k: &Name, params: &[Name], sol: &Sol, c: &Constraint, fresh: &Fresh) -> Constraint {
    match c {
        Constraint::Forall(x, s, p, body) => {
            let body = elim_sol(k, params, sol, body, fresh);
            match split_app(p, k) {
                Some((app, rest)) => {
                    let inst = sol.instantiate(params, &app.args, fresh);
                    let out = demorgan(x, *s, &rest, &inst, body);
                    if rest.has_pvar(k) {
                        elim_sol(k, params, sol, &out, fresh)
                    } else {
                        out
                    }
                }
                None => Constraint::forall(x, *s, p.clone(), body),
            }
        }
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| elim_sol(k, params, sol, c, fresh)).collect()),
        Constraint::Head(p) => Constraint::Head(p.map_kapps(&mut |a| (&a.name == k).then_some(TRUE))),
        Constraint::Exists(..) => c.clone(),
    }
}

/// Parameters for a predicate variable: fresh names, one per argument.
fn fresh_params(k: &Name, c: &Constraint, fresh: &Fresh) -> Vec<Name> {
    let arity = c.kapps().into_iter().find(|a| &a.name == k).map_or(0, |a| a.args.len());
    (0..arity).map(|i| fresh.name(&format!("{}_a{i}", k.stem()))).collect()
}

/// Eliminate one acyclic `k`, returning its solution and the new constraint.
pub fn elim_k(k: &Name, c: &Constraint, fresh: &Fresh) -> (Vec<Name>, Sol, Constraint) {
    let params = fresh_params(k, c, fresh);
    let scope = scoped(k, c);
    let sol = sol_k(k, &params, &noside(scope));
    let out = elim_sol(k, &params, &sol, c, fresh);
    (params, sol, out)
}

/// Topological order of the refinement variables, sources first.
pub fn kappa_order(c: &Constraint) -> Result<Vec<Name>, SolveError> {
    let ks = c.kvars();
    let edges = deps(c);
    let mut indeg: BTreeMap<Name, usize> = ks.iter().map(|k| (k.clone(), 0)).collect();
    for (_, b) in &edges {
        *indeg.get_mut(b).unwrap() += 1;
    }
    let mut order = Vec::new();
    let mut ready: BTreeSet<Name> = indeg.iter().filter(|(_, d)| **d == 0).map(|(k, _)| k.clone()).collect();
    while let Some(k) = ready.pop_first() {
        order.push(k.clone());
        for (a, b) in &edges {
            if a == &k {
                let d = indeg.get_mut(b).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(b.clone());
                }
            }
        }
    }
    if order.len() < ks.len() {
        let stuck = crate::ehc::cyclic_kvars(c).into_iter().collect();
        return Err(SolveError::CyclicKappa(stuck));
    }
    Ok(order)
}

/// Eliminate the given refinement variables in order.
pub fn elims(order: &[Name], c: &Constraint, fresh: &Fresh) -> (Constraint, Vec<(Name, Vec<Name>, Sol)>) {
    let mut c = c.clone();
    let mut sols = Vec::new();
    for k in order {
        let (params, sol, next) = elim_k(k, &c, fresh);
        sols.push((k.clone(), params, sol));
        c = simplify(&next);
    }
    (c, sols)
}

/// Defining constraint of `pi`: the conjunction of every `c` guarded by it,
/// expressed over `params`.
pub fn def_constr(pi: &Name, params: &[Name], c: &Constraint) -> Constraint {
    match c {
        Constraint::Forall(n, _, p, body) => match split_app(p, pi) {
            Some((app, rest)) => {
                let mut ren = HashMap::new();
                ren.insert(n.clone(), Pred::Var(params[0].clone()));
                for (a, x) in app.args.iter().zip(params).skip(1) {
                    if let Pred::Var(y) = a {
                        if y != x {
                            ren.insert(y.clone(), Pred::Var(x.clone()));
                        }
                    }
                }
                let body = if rest.is_true() {
                    (**body).clone()
                } else {
                    Constraint::forall(&capture_avoiding(&Name::new("g")), BaseSort::Unit, rest, (**body).clone())
                };
                body.subst_fo(&ren)
            }
            None => def_constr(pi, params, body),
        },
        Constraint::And(cs) => Constraint::and(cs.iter().map(|c| def_constr(pi, params, c))),
        Constraint::Head(_) | Constraint::Exists(..) => CTRUE,
    }
}

pub type Sigma = BTreeMap<Name, (Vec<(Name, BaseSort)>, Constraint)>;

/// Skolem solving with memoization: nested guards are solved once per set
/// of enclosing predicates rather than once per occurrence.
struct PiSolver<'a> {
    sigma: &'a Sigma,
    qe: &'a dyn QeProcedure,
    memo: RefCell<HashMap<(Name, BTreeSet<Name>), SkolemSolution>>,
}

impl PiSolver<'_> {
    fn solve_pi(&self, pi: &Name, seen: &BTreeSet<Name>) -> SkolemSolution {
        let key = (pi.clone(), seen.clone());
        if let Some(sol) = self.memo.borrow().get(&key) {
            return sol.clone();
        }
        let (params, def) = &self.sigma[pi];
        let mut seen = seen.clone();
        seen.insert(pi.clone());
        let body = self.sol_p(&seen, def);
        let sol = self.qe.solve_skolem(&params[0].0, &params[1..], &simplify(&body));
        self.memo.borrow_mut().insert(key, sol.clone());
        sol
    }

    fn sol_p(&self, seen: &BTreeSet<Name>, c: &Constraint) -> Constraint {
        match c {
            Constraint::Forall(n, s, p, body) => {
                let first = p.kapps().into_iter().find(|a| a.kind == PKind::Pi).map(|a| a.name.clone());
                match first.and_then(|pi| split_app(p, &pi)) {
                    Some((app, rest)) => {
                        let g = if seen.contains(&app.name) || !self.sigma.contains_key(&app.name) {
                            TRUE
                        } else {
                            let sol = self.solve_pi(&app.name, seen);
                            instantiate(&sol.guard, &self.sigma[&app.name].0, &app.args)
                        };
                        let out = Constraint::forall(n, *s, Pred::and([g, rest]), (**body).clone());
                        match &out {
                            Constraint::Forall(n, s, p, body) if p.kapps().iter().any(|a| a.kind == PKind::Pi) => {
                                self.sol_p(seen, &Constraint::forall(n, *s, p.clone(), (**body).clone()))
                            }
                            Constraint::Forall(n, s, p, body) => Constraint::forall(n, *s, p.clone(), self.sol_p(seen, body)),
                            _ => unreachable!(),
                        }
                    }
                    None => Constraint::forall(n, *s, p.clone(), self.sol_p(seen, body)),
                }
            }
            Constraint::Exists(x, s, body) => Constraint::exists(x, *s, self.sol_p(seen, body)),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| self.sol_p(seen, c)).collect()),
            Constraint::Head(_) => c.clone(),
        }
    }
}

fn instantiate(p: &Pred, params: &[(Name, BaseSort)], args: &[Pred]) -> Pred {
    let s: HashMap<Name, Pred> = params.iter().map(|(x, _)| x.clone()).zip(args.iter().cloned()).collect();
    p.subst(&s)
}

/// Replace nested Skolem guards in a defining constraint by their solutions;
/// guards already being solved are dropped.
pub fn sol_p(seen: &BTreeSet<Name>, sigma: &Sigma, c: &Constraint, qe: &dyn QeProcedure) -> Constraint {
    PiSolver { sigma, qe, memo: RefCell::new(HashMap::new()) }.sol_p(seen, c)
}

fn subst_pi(c: &Constraint, pi: &Name, params: &[(Name, BaseSort)], sol: &SkolemSolution, in_side: bool) -> Constraint {
    let map = |p: &Pred, side: bool| {
        p.map_kapps(&mut |a| (&a.name == pi).then(|| instantiate(if side { &sol.side } else { &sol.guard }, params, &a.args)))
    };
    match c {
        Constraint::Forall(x, s, p, body) => {
            Constraint::forall(x, *s, map(p, false), subst_pi(body, pi, params, sol, in_side))
        }
        Constraint::Exists(x, s, body) => Constraint::exists(x, *s, subst_pi(body, pi, params, sol, true)),
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| subst_pi(c, pi, params, sol, in_side)).collect()),
        Constraint::Head(p) => Constraint::Head(map(p, in_side)),
    }
}

/// Solve and substitute every Skolem predicate. The result is left
/// unsimplified: a false side condition would otherwise absorb the main
/// constraint it is conjoined with.
pub fn elim_qe(pis: &[Name], sigma: &Sigma, c: &Constraint, qe: &dyn QeProcedure) -> (Constraint, Vec<(Name, SkolemSolution)>) {
    let solver = PiSolver { sigma, qe, memo: RefCell::new(HashMap::new()) };
    let mut c = c.clone();
    let mut sols = Vec::new();
    for pi in pis {
        let sol = solver.solve_pi(pi, &BTreeSet::new());
        c = subst_pi(&c, pi, &sigma[pi].0, &sol, false);
        sols.push((pi.clone(), sol));
    }
    (c, sols)
}

/// Eliminate the remaining existential binders.
pub fn elim_e(c: &Constraint, qe: &dyn QeProcedure) -> Constraint {
    match c {
        Constraint::Forall(x, s, p, body) => Constraint::forall(x, *s, p.clone(), elim_e(body, qe)),
        Constraint::Exists(x, s, body) => qe.eliminate_exists(x, *s, &simplify(&elim_e(body, qe))),
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| elim_e(c, qe)).collect()),
        Constraint::Head(_) => c.clone(),
    }
}

/// Local simplifications that preserve validity.
pub fn simplify(c: &Constraint) -> Constraint {
    match c {
        Constraint::Head(p) => Constraint::Head(p.simplify()),
        Constraint::And(cs) => {
            let cs: Vec<Constraint> = cs.iter().map(simplify).collect();
            if cs.iter().any(|c| matches!(c, Constraint::Head(p) if p.is_false())) {
                return Constraint::Head(FALSE);
            }
            let mut out = Constraint::and(cs);
            if let Constraint::And(v) = &out {
                if v.is_empty() {
                    out = CTRUE;
                }
            }
            out
        }
        Constraint::Forall(x, s, p, body) => {
            let p = p.simplify();
            if p.is_false() {
                return CTRUE;
            }
            let body = simplify(body);
            if body.is_true() {
                return CTRUE;
            }
            if p.is_true() && !body.free_vars().contains(x) {
                return body;
            }
            Constraint::forall(x, *s, p, body)
        }
        Constraint::Exists(x, s, body) => {
            let body = simplify(body);
            if body.is_true() || !body.free_vars().contains(x) {
                return body;
            }
            Constraint::exists(x, *s, body)
        }
    }
}

/// Every intermediate stage of solving one constraint.
#[derive(Clone, Debug)]
pub struct Solved {
    /// After skolemization.
    pub nnf: Constraint,
    pub pis: Vec<PiInfo>,
    pub kappa_sols: Vec<(Name, Vec<Name>, Sol)>,
    /// After eliminating every refinement variable.
    pub kappa_free: Constraint,
    pub skolem_sols: Vec<(Name, SkolemSolution)>,
    /// After eliminating every Skolem predicate, unsimplified.
    pub pi_free: Constraint,
    /// Verification condition for the Horn part.
    pub vc_main: Constraint,
    /// Verification condition for the inhabitation side conditions.
    pub vc_side: Constraint,
}

impl Solved {
    pub fn vc(&self) -> Constraint {
        simplify(&Constraint::and([self.vc_main.clone(), self.vc_side.clone()]))
    }
}

/// Parameters of Skolem predicates that were not introduced by `poke`,
/// read off their first guard occurrence.
fn foreign_pis(c: &Constraint, known: &[PiInfo]) -> Vec<PiInfo> {
    let sorts = crate::ehc::pvar_sorts(c);
    let mut out: Vec<PiInfo> = Vec::new();
    for a in c.kapps() {
        if a.kind != PKind::Pi || known.iter().chain(out.iter()).any(|p| p.name == a.name) {
            continue;
        }
        let ss = &sorts[&(PKind::Pi, a.name.clone())];
        let params = a
            .args
            .iter()
            .zip(ss)
            .enumerate()
            .map(|(i, (arg, s))| match arg {
                Pred::Var(x) => (x.clone(), *s),
                _ => (Name::from(format!("{}_a{i}", a.name.stem())), *s),
            })
            .collect();
        out.push(PiInfo { name: a.name.clone(), params });
    }
    out
}

pub fn solve(c: &Constraint, qe: &dyn QeProcedure, fresh: &Fresh) -> Result<Solved, SolveError> {
    let (nnf, mut pis) = poke(c, fresh);
    let order = kappa_order(&nnf)?;
    let (kappa_free, kappa_sols) = elims(&order, &nnf, fresh);
    pis.extend(foreign_pis(&nnf, &pis));
    let sigma: Sigma = pis
        .iter()
        .map(|pi| {
            let names: Vec<Name> = pi.params.iter().map(|p| p.0.clone()).collect();
            (pi.name.clone(), (pi.params.clone(), simplify(&def_constr(&pi.name, &names, &kappa_free))))
        })
        .collect();
    let names: Vec<Name> = pis.iter().map(|p| p.name.clone()).collect();
    let (pi_free, skolem_sols) = elim_qe(&names, &sigma, &kappa_free, qe);
    let vc_main = simplify(&elim_e(&noside(&pi_free), qe));
    let vc_side = simplify(&elim_e(&sides(&pi_free), qe));
    Ok(Solved { nnf, pis, kappa_sols, kappa_free, skolem_sols, pi_free, vc_main, vc_side })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehc::text::parse_constraint;
    use crate::qe::CcQe;

    const EXAMPLE: &str = "(and (forall (z Bool) true (forall (v Int) (= v 1) (kapp k v)))
                              (exists (n Int) (forall (v Int) (kapp k v) (= v n))))";

    #[test]
    fn poke_introduces_skolem() {
        let c = parse_constraint(EXAMPLE).unwrap();
        let (nnf, pis) = poke(&c, &Fresh::new(0));
        assert_eq!(pis.len(), 1);
        assert_eq!(pis[0].params.len(), 1);
        assert!(!noside(&nnf).has_exists());
        assert!(sides(&nnf).has_exists());
    }

    #[test]
    fn sol_k_on_example() {
        let c = parse_constraint(EXAMPLE).unwrap();
        let (nnf, _) = poke(&c, &Fresh::new(0));
        let k = Name::new("k");
        let x = vec![Name::new("x")];
        let sol = sol_k(&k, &x, &noside(scoped(&k, &nnf)));
        assert_eq!(sol.canonical(), "(exists (b0 Bool) (and true (exists (b1 Int) (and (= b1 1) (= x b1)))))");
    }

    #[test]
    fn example_is_safe() {
        let c = parse_constraint(EXAMPLE).unwrap();
        let s = solve(&c, &CcQe, &Fresh::new(0)).unwrap();
        assert_eq!(s.skolem_sols[0].1.guard.to_string(), "(= n 1)");
        assert!(s.kappa_free.kvars().is_empty());
        assert!(s.vc_side.to_string().contains("(= 1 1)") || s.vc_side.is_true());
    }

    #[test]
    fn cyclic_is_rejected() {
        let c = parse_constraint("(and (forall (x Int) (kapp k x) (kapp k x)))").unwrap();
        assert!(matches!(solve(&c, &CcQe, &Fresh::new(0)), Err(SolveError::CyclicKappa(_))));
    }

    #[test]
    fn simplify_rules() {
        let c = parse_constraint("(and (forall (x Int) false (= x 1)) (forall (y Int) true (= 1 1)) (exists (z Int) true))").unwrap();
        assert!(simplify(&c).is_true());
        let keep = parse_constraint("(forall (x Int) true (= x 1))").unwrap();
        assert_eq!(simplify(&keep), keep);
    }
}
