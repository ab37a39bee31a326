//! Random constraint generators for property tests.
//!
//! Instances stay small enough for the brute-force oracle: integers range
//! over `{0, 1}`, refinement variables are unary, and an existential is only
//! placed under at most one binder so Skolem predicates have arity <= 2.

use rand::seq::SliceRandom;
use rand::Rng;

use super::Constraint;
use crate::name::Name;
use crate::pred::{BaseSort, BinOp, PKind, Pred, TRUE};

/// Integer values used by generated atoms and by the matching oracle domain.
pub const INTS: [i64; 2] = [0, 1];

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    /// Upper bound on refinement plus Skolem predicate variables.
    pub max_pvars: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_depth: 5, max_pvars: 3 }
    }
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    kappas: usize,
    exists_left: usize,
    next: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self, stem: &str) -> Name {
        self.next += 1;
        Name::from(format!("{stem}{}", self.next))
    }

    fn kappa(i: usize) -> Name {
        Name::from(format!("k{i}"))
    }

    fn int_term(&mut self, scope: &[(Name, BaseSort)]) -> Pred {
        let ints: Vec<&Name> = scope.iter().filter(|(_, s)| *s == BaseSort::Int).map(|(x, _)| x).collect();
        if !ints.is_empty() && self.rng.gen_bool(0.7) {
            Pred::var(ints.choose(self.rng).unwrap())
        } else {
            Pred::Int(*INTS.choose(self.rng).unwrap())
        }
    }

    /// A quantifier-free atom, preferring ones that mention `focus`.
    fn atom(&mut self, scope: &[(Name, BaseSort)], focus: Option<&(Name, BaseSort)>) -> Pred {
        if let Some((x, BaseSort::Bool)) = focus {
            return if self.rng.gen_bool(0.5) { Pred::var(x) } else { Pred::not(Pred::var(x)) };
        }
        let bools: Vec<&Name> = scope.iter().filter(|(_, s)| *s == BaseSort::Bool).map(|(x, _)| x).collect();
        match self.rng.gen_range(0..10) {
            0 => Pred::Bool(self.rng.gen_bool(0.7)),
            1 if !bools.is_empty() => Pred::var(bools.choose(self.rng).unwrap()),
            n => {
                let a = match focus {
                    Some((x, _)) => Pred::var(x),
                    None => self.int_term(scope),
                };
                let b = self.int_term(scope);
                let op = match n {
                    2..=5 => BinOp::Eq,
                    6 => BinOp::Lt,
                    7 => BinOp::Le,
                    _ => return Pred::not(Pred::eq(a, b)),
                };
                Pred::bin(op, a, b)
            }
        }
    }

    /// `min_head`: refinement variables with a smaller index guard this
    /// position, so only later ones may appear as heads (keeps it acyclic).
    fn constraint(&mut self, depth: usize, scope: &mut Vec<(Name, BaseSort)>, min_head: usize) -> Constraint {
        if depth == 0 {
            return self.head(scope, min_head);
        }
        match self.rng.gen_range(0..10) {
            0..=1 => self.head(scope, min_head),
            2..=3 => {
                let a = self.constraint(depth - 1, scope, min_head);
                let b = self.constraint(depth - 1, scope, min_head);
                Constraint::And(vec![a, b])
            }
            7..=9 if self.exists_left > 0 && scope.len() <= 1 => {
                self.exists_left -= 1;
                let n = self.fresh("n");
                scope.push((n.clone(), BaseSort::Int));
                let body = self.constraint(depth - 1, scope, min_head);
                scope.pop();
                Constraint::exists(&n, BaseSort::Int, body)
            }
            _ => {
                let sort = if self.rng.gen_bool(0.85) { BaseSort::Int } else { BaseSort::Bool };
                let x = self.fresh("x");
                let (guard, min) = if sort == BaseSort::Int && self.kappas > 0 && self.rng.gen_bool(0.45) {
                    let i = self.rng.gen_range(0..self.kappas);
                    (Pred::kapp(PKind::Kappa, &Self::kappa(i), vec![Pred::var(&x)]), min_head.max(i + 1))
                } else {
                    let focus = (x.clone(), sort);
                    (self.atom(scope, Some(&focus)), min_head)
                };
                scope.push((x.clone(), sort));
                let body = self.constraint(depth - 1, scope, min);
                scope.pop();
                Constraint::forall(&x, sort, guard, body)
            }
        }
    }

    fn head(&mut self, scope: &[(Name, BaseSort)], min_head: usize) -> Constraint {
        if min_head < self.kappas && self.rng.gen_bool(0.5) {
            let j = self.rng.gen_range(min_head..self.kappas);
            let t = self.int_term(scope);
            return Constraint::Head(Pred::kapp(PKind::Kappa, &Self::kappa(j), vec![t]));
        }
        Constraint::Head(self.atom(scope, None))
    }
}

/// A random acyclic constraint with refinement variables `k0, k1, ...`,
/// where a guard `k_i` only dominates heads `k_j` with `j > i`.
pub fn acyclic_ehc(rng: &mut impl Rng, cfg: &GenConfig) -> Constraint {
    let kappas = rng.gen_range(0..=cfg.max_pvars.min(2));
    let exists_left = rng.gen_range(0..=(cfg.max_pvars - kappas).min(2));
    let mut g = Gen { rng, kappas, exists_left, next: 0 };
    let depth = cfg.max_depth.max(1);
    let a = g.constraint(depth - 1, &mut Vec::new(), 0);
    let b = g.constraint(depth - 1, &mut Vec::new(), 0);
    Constraint::And(vec![a, b])
}

/// A constraint free of predicate variables and existentials whose atoms
/// range over `scope`, used as a Skolem defining constraint.
pub fn body_over(rng: &mut impl Rng, scope: &[(Name, BaseSort)], depth: usize) -> Constraint {
    let mut g = Gen { rng, kappas: 0, exists_left: 0, next: 0 };
    g.constraint(depth, &mut scope.to_vec(), 0)
}

/// Inclusive bounds of the integer range a closed verification condition
/// quantifies over.
pub const VC_RANGE: (i64, i64) = (0, 2);

/// A random closed constraint without predicate variables or existentials.
/// Every integer binder is guarded by `VC_RANGE`, so validity over the
/// integers coincides with validity over the finite range.
pub fn closed_vc(rng: &mut impl Rng, depth: usize) -> Constraint {
    fn term(rng: &mut impl Rng, ints: &[Name]) -> Pred {
        let leaf = |rng: &mut dyn rand::RngCore| {
            if !ints.is_empty() && rng.gen_bool(0.7) {
                Pred::var(&ints[rng.gen_range(0..ints.len())])
            } else {
                Pred::Int(rng.gen_range(VC_RANGE.0..=VC_RANGE.1 + 1))
            }
        };
        match rng.gen_range(0..6) {
            0 => Pred::bin(BinOp::Add, leaf(rng), leaf(rng)),
            1 => Pred::bin(BinOp::Sub, leaf(rng), leaf(rng)),
            _ => leaf(rng),
        }
    }
    fn atom(rng: &mut impl Rng, ints: &[Name], bools: &[Name]) -> Pred {
        match rng.gen_range(0usize..10) {
            0 if !bools.is_empty() => Pred::var(&bools[rng.gen_range(0..bools.len())]),
            1 => Pred::Bool(rng.gen_bool(0.5)),
            2 => Pred::or([atom(rng, ints, bools), atom(rng, ints, bools)]),
            3 => Pred::not(atom(rng, ints, bools)),
            n => {
                let op = [BinOp::Eq, BinOp::Eq, BinOp::Lt, BinOp::Le, BinOp::Ge, BinOp::Gt][n.saturating_sub(4)];
                Pred::bin(op, term(rng, ints), term(rng, ints))
            }
        }
    }
    fn go(rng: &mut impl Rng, depth: usize, ints: &mut Vec<Name>, bools: &mut Vec<Name>, next: &mut usize) -> Constraint {
        if depth == 0 || rng.gen_bool(0.2) {
            return Constraint::Head(atom(rng, ints, bools));
        }
        if rng.gen_bool(0.3) {
            let a = go(rng, depth - 1, ints, bools, next);
            let b = go(rng, depth - 1, ints, bools, next);
            return Constraint::And(vec![a, b]);
        }
        *next += 1;
        let x = Name::from(format!("y{next}"));
        if rng.gen_bool(0.2) {
            let g = if rng.gen_bool(0.5) { TRUE } else { atom(rng, ints, bools) };
            bools.push(x.clone());
            let body = go(rng, depth - 1, ints, bools, next);
            bools.pop();
            return Constraint::forall(&x, BaseSort::Bool, g, body);
        }
        let range = Pred::and([
            Pred::bin(BinOp::Le, Pred::Int(VC_RANGE.0), Pred::var(&x)),
            Pred::bin(BinOp::Le, Pred::var(&x), Pred::Int(VC_RANGE.1)),
        ]);
        ints.push(x.clone());
        let extra = if rng.gen_bool(0.5) { atom(rng, ints, bools) } else { TRUE };
        let body = go(rng, depth - 1, ints, bools, next);
        ints.pop();
        Constraint::forall(&x, BaseSort::Int, Pred::and([range, extra]), body)
    }
    go(rng, depth, &mut Vec::new(), &mut Vec::new(), &mut 0)
}
