//! Quantifier elimination for Skolem predicates and existential side
//! conditions, by congruence closure over equalities.

use std::collections::{BTreeSet, HashMap};

use crate::ehc::Constraint;
use crate::name::Name;
use crate::pred::{BaseSort, BinOp, Pred, UnOp, FALSE, TRUE};

/// Solution for a Skolem predicate `pi(n, scope)`: `guard` replaces it in
/// guard positions, `side` inside its inhabitation side condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemSolution {
    pub guard: Pred,
    pub side: Pred,
}

pub trait QeProcedure: Send + Sync {
    fn name(&self) -> &'static str;
    /// Every solution it returns implies the eliminated formula.
    fn is_strengthening(&self) -> bool;
    /// Every solution it returns is implied by the eliminated formula.
    fn is_weakening(&self) -> bool;
    /// Solve `pi(n, scope)` from its defining constraint.
    fn solve_skolem(&self, n: &Name, scope: &[(Name, BaseSort)], def: &Constraint) -> SkolemSolution;
    /// Eliminate `exists x:sort. body`.
    fn eliminate_exists(&self, x: &Name, sort: BaseSort, body: &Constraint) -> Constraint;
}

pub const MAX_TERM_DEPTH: usize = 8;

/// Union-find over hash-consed terms with congruence and a few boolean and
/// arithmetic propagation rules.
#[derive(Default, Debug)]
pub struct CongruenceClosure {
    terms: Vec<Pred>,
    kids: Vec<Vec<usize>>,
    index: HashMap<Pred, usize>,
    parent: Vec<usize>,
}

impl CongruenceClosure {
    pub fn new() -> CongruenceClosure {
        let mut cc = CongruenceClosure::default();
        cc.add(&TRUE);
        cc.add(&FALSE);
        cc
    }

    pub fn add(&mut self, p: &Pred) -> usize {
        if let Some(&i) = self.index.get(p) {
            return i;
        }
        let kids: Vec<usize> = match p {
            Pred::Un(_, a) => vec![self.add(a)],
            Pred::Bin(_, a, b) => vec![self.add(a), self.add(b)],
            Pred::And(ps) | Pred::Or(ps) => ps.iter().map(|q| self.add(q)).collect(),
            Pred::KApp(k) => k.args.iter().map(|q| self.add(q)).collect(),
            _ => vec![],
        };
        let i = self.terms.len();
        self.terms.push(p.clone());
        self.kids.push(kids);
        self.parent.push(i);
        self.index.insert(p.clone(), i);
        i
    }

    pub fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn equal(&mut self, a: &Pred, b: &Pred) {
        let (i, j) = (self.add(a), self.add(b));
        self.union(i, j);
    }

    /// Record that the boolean atom `p` holds (or fails).
    pub fn assume(&mut self, p: &Pred, holds: bool) {
        match (p, holds) {
            (Pred::And(ps), true) => ps.iter().for_each(|q| self.assume(q, true)),
            (Pred::Or(ps), false) => ps.iter().for_each(|q| self.assume(q, false)),
            (Pred::Un(UnOp::Not, q), _) => self.assume(q, !holds),
            (Pred::Bin(BinOp::Eq, a, b), true) => self.equal(a, b),
            (Pred::Bool(b), _) if *b == holds => {}
            _ => {
                let lit = if holds { TRUE } else { FALSE };
                self.equal(p, &lit);
            }
        }
    }

    fn literal_of(&self, i: usize) -> Option<&Pred> {
        let r = self.find(i);
        (0..self.terms.len()).find(|&j| self.find(j) == r && self.terms[j].is_literal()).map(|j| &self.terms[j])
    }

    /// Saturate under congruence and propagation.
    pub fn close(&mut self) {
        let (t, f) = (self.index[&TRUE], self.index[&FALSE]);
        loop {
            let mut changed = false;
            let n = self.terms.len();
            let mut sig: HashMap<(String, Vec<usize>), usize> = HashMap::new();
            for i in 0..n {
                if self.kids[i].is_empty() {
                    continue;
                }
                let key = (op_key(&self.terms[i]), self.kids[i].iter().map(|&k| self.find(k)).collect());
                match sig.get(&key) {
                    Some(&j) => changed |= self.union(i, j),
                    None => {
                        sig.insert(key, i);
                    }
                }
            }
            for i in 0..n {
                let term = self.terms[i].clone();
                let kids = self.kids[i].clone();
                match &term {
                    Pred::Bin(BinOp::Eq, ..) => {
                        let (a, b) = (kids[0], kids[1]);
                        if self.find(i) == self.find(t) {
                            changed |= self.union(a, b);
                        }
                        if self.find(a) == self.find(b) {
                            changed |= self.union(i, t);
                        } else if let (Some(x), Some(y)) = (self.literal_of(a), self.literal_of(b)) {
                            if x != y {
                                changed |= self.union(i, f);
                            }
                        }
                    }
                    Pred::Un(UnOp::Not, _) => {
                        let q = kids[0];
                        for (from, to) in [(t, f), (f, t)] {
                            if self.find(q) == self.find(from) {
                                changed |= self.union(i, to);
                            }
                            if self.find(i) == self.find(from) {
                                changed |= self.union(q, to);
                            }
                        }
                    }
                    Pred::And(_) => {
                        if self.find(i) == self.find(t) {
                            for k in kids {
                                changed |= self.union(k, t);
                            }
                        } else if kids.iter().all(|&k| self.find(k) == self.find(t)) {
                            changed |= self.union(i, t);
                        }
                    }
                    Pred::Bin(op, ..) => {
                        if let (Some(Pred::Int(x)), Some(Pred::Int(y))) =
                            (self.literal_of(kids[0]).cloned(), self.literal_of(kids[1]).cloned())
                        {
                            if let Some(v) = fold(*op, x, y) {
                                let j = self.add(&v);
                                changed |= self.union(i, j);
                            }
                        }
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Two distinct literals share a class.
    pub fn inconsistent(&self) -> bool {
        let mut lit: HashMap<usize, &Pred> = HashMap::new();
        for (i, p) in self.terms.iter().enumerate() {
            if p.is_literal() {
                if let Some(q) = lit.insert(self.find(i), p) {
                    if q != p {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Cheapest term of every class built only from literals and `allowed`
    /// variables, rebuilding compound members from their children's picks.
    fn extract(&self, allowed: &dyn Fn(&Name) -> bool) -> HashMap<usize, Pred> {
        let cost = |q: &Pred| (!q.is_literal(), q.to_string().len());
        let mut best: HashMap<usize, Pred> = HashMap::new();
        loop {
            let mut changed = false;
            for i in 0..self.terms.len() {
                let kid = |k: &usize| best.get(&self.find(*k)).cloned().map(Box::new);
                let cand = match &self.terms[i] {
                    Pred::Var(x) if allowed(x) => Some(self.terms[i].clone()),
                    q if q.is_literal() => Some(q.clone()),
                    Pred::Un(op, _) => kid(&self.kids[i][0]).map(|a| Pred::Un(*op, a)),
                    Pred::Bin(op, ..) => match (kid(&self.kids[i][0]), kid(&self.kids[i][1])) {
                        (Some(a), Some(b)) => Some(Pred::Bin(*op, a, b)),
                        _ => None,
                    },
                    _ => None,
                };
                let Some(cand) = cand.filter(|q| depth(q) <= MAX_TERM_DEPTH) else { continue };
                let r = self.find(i);
                if best.get(&r).is_none_or(|old| cost(&cand) < cost(old)) {
                    best.insert(r, cand);
                    changed = true;
                }
            }
            if !changed {
                return best;
            }
        }
    }

    /// Terms equal to `p` whose free variables lie in `allowed`, best first:
    /// literals, then smaller terms.
    pub fn equals_of(&mut self, p: &Pred, allowed: &dyn Fn(&Name) -> bool) -> Vec<Pred> {
        let i = self.add(p);
        let r = self.find(i);
        let mut out: Vec<Pred> = (0..self.terms.len())
            .filter(|&j| self.find(j) == r && j != i)
            .map(|j| self.terms[j].clone())
            .filter(|q| depth(q) <= MAX_TERM_DEPTH && !q.has_kapp() && q.free_vars().iter().all(allowed))
            .collect();
        if let Some(t) = self.extract(allowed).remove(&r) {
            if &t != p && !out.contains(&t) {
                out.push(t);
            }
        }
        out.sort_by_key(|q| (!q.is_literal(), q.to_string().len(), q.to_string()));
        out.dedup();
        out
    }
}

fn op_key(p: &Pred) -> String {
    match p {
        Pred::Un(op, _) => format!("{op:?}"),
        Pred::Bin(op, ..) => format!("{op:?}"),
        Pred::And(ps) => format!("and{}", ps.len()),
        Pred::Or(ps) => format!("or{}", ps.len()),
        Pred::KApp(k) => format!("{:?}{}", k.kind, k.name),
        _ => String::new(),
    }
}

fn fold(op: BinOp, x: i64, y: i64) -> Option<Pred> {
    Some(match op {
        BinOp::Add => Pred::Int(x.checked_add(y)?),
        BinOp::Sub => Pred::Int(x.checked_sub(y)?),
        BinOp::Mul => Pred::Int(x.checked_mul(y)?),
        BinOp::Lt => Pred::Bool(x < y),
        BinOp::Le => Pred::Bool(x <= y),
        BinOp::Gt => Pred::Bool(x > y),
        BinOp::Ge => Pred::Bool(x >= y),
        _ => return None,
    })
}

fn depth(p: &Pred) -> usize {
    match p {
        Pred::Un(_, a) => 1 + depth(a),
        Pred::Bin(_, a, b) => 1 + depth(a).max(depth(b)),
        Pred::And(ps) | Pred::Or(ps) => 1 + ps.iter().map(depth).max().unwrap_or(0),
        Pred::KApp(k) => 1 + k.args.iter().map(depth).max().unwrap_or(0),
        _ => 0,
    }
}

/// A root-to-leaf path through a constraint: the conjunction of the guards
/// on the way down and the head at the leaf. Existential subtrees are
/// skipped.
#[derive(Clone, Debug)]
pub struct Path {
    pub guards: Vec<Pred>,
    pub head: Pred,
}

pub fn paths(c: &Constraint) -> Vec<Path> {
    fn go(c: &Constraint, guards: &mut Vec<Pred>, out: &mut Vec<Path>) {
        match c {
            Constraint::Head(p) => out.push(Path { guards: guards.clone(), head: p.clone() }),
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, guards, out)),
            Constraint::Forall(_, _, p, body) => {
                guards.push(p.clone());
                go(body, guards, out);
                guards.pop();
            }
            Constraint::Exists(..) => {}
        }
    }
    let mut out = Vec::new();
    go(c, &mut Vec::new(), &mut out);
    out
}

/// Congruence-closure quantifier elimination.
#[derive(Clone, Copy, Debug, Default)]
pub struct CcQe;

impl CcQe {
    /// Equalities `n = t` implied on one path, or `None` if the guards alone
    /// are contradictory. A contradiction with the head yields `false`.
    fn path_equalities(&self, n: &Name, allowed: &BTreeSet<Name>, path: &Path) -> Option<Vec<Pred>> {
        let mut cc = CongruenceClosure::new();
        for g in &path.guards {
            cc.assume(g, true);
        }
        cc.close();
        if cc.inconsistent() {
            return None;
        }
        cc.assume(&path.head, true);
        cc.close();
        if cc.inconsistent() {
            return Some(vec![FALSE]);
        }
        let nv = Pred::Var(n.clone());
        let ok = |x: &Name| x != n && allowed.contains(x);
        let eqs = cc.equals_of(&nv, &ok);
        Some(match eqs.first() {
            Some(t) if t.is_literal() => vec![Pred::eq(nv, t.clone())],
            _ => eqs.into_iter().map(|t| Pred::eq(nv.clone(), t)).collect(),
        })
    }
}

fn defines(n: &Name, p: &Pred) -> bool {
    p.conjuncts().iter().any(|q| match q {
        Pred::Bin(BinOp::Eq, a, b) => {
            (matches!(&**a, Pred::Var(x) if x == n) && !b.mentions(n))
                || (matches!(&**b, Pred::Var(x) if x == n) && !a.mentions(n))
        }
        _ => false,
    })
}

impl QeProcedure for CcQe {
    fn name(&self) -> &'static str {
        "cc"
    }

    fn is_strengthening(&self) -> bool {
        true
    }

    fn is_weakening(&self) -> bool {
        false
    }

    fn solve_skolem(&self, n: &Name, scope: &[(Name, BaseSort)], def: &Constraint) -> SkolemSolution {
        let allowed: BTreeSet<Name> = scope.iter().map(|(x, _)| x.clone()).collect();
        let all = paths(def);
        let mut conj: Vec<Pred> = Vec::new();
        let mut refuting = Vec::new();
        for path in &all {
            match self.path_equalities(n, &allowed, path) {
                Some(eqs) if eqs == [FALSE] => refuting.push(path),
                Some(eqs) => {
                    for e in eqs {
                        if !conj.contains(&e) {
                            conj.push(e);
                        }
                    }
                }
                None => {}
            }
        }
        // A path whose head contradicts its guards holds only where the
        // guards fail; keep it out of the solution if the equalities chosen
        // for the other paths already make them fail.
        for path in refuting {
            let mut cc = CongruenceClosure::new();
            conj.iter().chain(&path.guards).for_each(|g| cc.assume(g, true));
            cc.close();
            if !cc.inconsistent() {
                conj.push(FALSE);
                break;
            }
        }
        let guard = Pred::and(conj);
        let side = if defines(n, &guard) || guard.is_false() || !def.free_vars().contains(n) {
            guard.clone()
        } else {
            FALSE
        };
        SkolemSolution { guard, side }
    }

    fn eliminate_exists(&self, x: &Name, sort: BaseSort, body: &Constraint) -> Constraint {
        if !body.free_vars().contains(x) {
            return body.clone();
        }
        if sort == BaseSort::Unit {
            return body.subst1(x, &Pred::Unit);
        }
        let mut facts = Vec::new();
        collect_facts(body, &mut facts);
        let mut cc = CongruenceClosure::new();
        for f in &facts {
            cc.assume(f, true);
        }
        cc.close();
        let ok = |y: &Name| y != x;
        match cc.equals_of(&Pred::Var(x.clone()), &ok).into_iter().find(|t| !t.mentions(x)) {
            Some(t) => body.subst1(x, &t),
            None => Constraint::Head(FALSE),
        }
    }
}

/// Top-level conjuncts of a constraint that are plain predicates.
fn collect_facts(c: &Constraint, out: &mut Vec<Pred>) {
    match c {
        Constraint::Head(p) => out.extend(p.conjuncts().into_iter().cloned()),
        Constraint::And(cs) => cs.iter().for_each(|c| collect_facts(c, out)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehc::text::{parse_constraint, parse_pred};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn running_example_skolem() {
        let def = parse_constraint("(forall (z Bool) true (forall (v1 Int) (= v1 1) (forall (v Int) (= v v1) (= v n))))").unwrap();
        let sol = CcQe.solve_skolem(&n("n"), &[], &def);
        assert_eq!(sol.guard, parse_pred("(= n 1)").unwrap());
        assert_eq!(sol.side, sol.guard);
    }

    #[test]
    fn union_across_paths() {
        let def = parse_constraint("(and (forall (v Int) (= v 1) (= v n)) (forall (v Int) (= v 2) (= v n)))").unwrap();
        let sol = CcQe.solve_skolem(&n("n"), &[], &def);
        assert_eq!(sol.guard.to_string(), "(and (= n 1) (= n 2))");
    }

    #[test]
    fn vacuous_paths_are_skipped() {
        let def = parse_constraint("(and (forall (v Int) (and (= v 1) (= v 2)) (= v n)) (forall (v Int) (= v 3) (= v n)))").unwrap();
        assert_eq!(CcQe.solve_skolem(&n("n"), &[], &def).guard.to_string(), "(= n 3)");
    }

    #[test]
    fn unreachable_paths_are_discharged() {
        let def = parse_constraint(
            "(and (forall (v Int) (= v 0) (= v n)) (forall (b Bool) (and (= b (= n 0)) (not b)) (forall (v Bool) (not v) v)))",
        )
        .unwrap();
        assert_eq!(CcQe.solve_skolem(&n("n"), &[], &def).guard.to_string(), "(= n 0)");
        let reachable = parse_constraint("(and (forall (v Int) (= v 0) (= v n)) (forall (v Bool) (not v) v))").unwrap();
        assert!(CcQe.solve_skolem(&n("n"), &[], &reachable).guard.is_false());
    }

    #[test]
    fn no_defining_equality_fails_side() {
        let def = parse_constraint("(forall (v Int) (= v 0) (> n 3))").unwrap();
        let sol = CcQe.solve_skolem(&n("n"), &[], &def);
        assert!(sol.guard.is_true());
        assert!(sol.side.is_false());
        let free = parse_constraint("(forall (v Int) (= v 0) (> v (- 1)))").unwrap();
        assert!(CcQe.solve_skolem(&n("n"), &[], &free).side.is_true());
    }

    #[test]
    fn scope_limits_equalities() {
        let def = parse_constraint("(forall (v Int) (= v x) (= v n))").unwrap();
        let sol = CcQe.solve_skolem(&n("n"), &[(n("x"), BaseSort::Int)], &def);
        assert_eq!(sol.guard.to_string(), "(= n x)");
        assert!(CcQe.solve_skolem(&n("n"), &[], &def).side.is_false());
    }

    #[test]
    fn congruence_and_folding() {
        let mut cc = CongruenceClosure::new();
        cc.assume(&parse_pred("(and (= a 10) (= b 1) (= c (+ a b)))").unwrap(), true);
        cc.close();
        let eqs = cc.equals_of(&Pred::Var(n("c")), &|_| true);
        assert_eq!(eqs[0], Pred::Int(11));
        let mut rebuilt = CongruenceClosure::new();
        rebuilt.assume(&parse_pred("(and (= a 0) (= b n) (= c (+ a b)))").unwrap(), true);
        rebuilt.close();
        assert_eq!(rebuilt.equals_of(&Pred::Var(n("c")), &|x| x.as_str() == "n"), vec![parse_pred("(+ 0 n)").unwrap()]);
        let mut bad = CongruenceClosure::new();
        bad.assume(&parse_pred("(and b (not b))").unwrap(), true);
        bad.close();
        assert!(bad.inconsistent());
    }

    #[test]
    fn witness_elimination() {
        let body = parse_constraint("(and (= n 1) (< n 2))").unwrap();
        assert_eq!(CcQe.eliminate_exists(&n("n"), BaseSort::Int, &body).to_string(), "(and (= 1 1) (< 1 2))");
        let none = parse_constraint("(> n 3)").unwrap();
        assert!(matches!(CcQe.eliminate_exists(&n("n"), BaseSort::Int, &none), Constraint::Head(p) if p.is_false()));
        let vacuous = parse_constraint("true").unwrap();
        assert!(CcQe.eliminate_exists(&n("n"), BaseSort::Int, &vacuous).is_true());
    }
}
