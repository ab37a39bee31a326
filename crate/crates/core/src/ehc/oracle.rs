//! Finite-domain semantics of constraints and an exhaustive satisfiability
//! search over predicate-variable interpretations. Used as a test oracle.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{pvar_sorts, Constraint};
use crate::name::Name;
use crate::pred::{eval, BaseSort, EvalError, KApp, PKind, Value};

#[derive(Clone, Debug)]
pub struct Domain {
    pub ints: Vec<i64>,
}

impl Domain {
    pub fn ints(ints: impl IntoIterator<Item = i64>) -> Domain {
        Domain { ints: ints.into_iter().collect() }
    }

    pub fn values(&self, s: BaseSort) -> Vec<Value> {
        match s {
            BaseSort::Int => self.ints.iter().map(|&n| Value::Int(n)).collect(),
            BaseSort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            BaseSort::Unit => vec![Value::Unit],
        }
    }
}

/// Extension of each predicate variable: the argument tuples it holds on.
pub type Interp = BTreeMap<(PKind, Name), BTreeSet<Vec<Value>>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of 2^{0} interpretations exceeds the budget")]
    BudgetExceeded(u32),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Truth of `c` under `env`, quantifying over the finite domain. Predicate
/// variables not in `interp`, and tuples outside the domain, are false.
pub fn holds(c: &Constraint, dom: &Domain, interp: &Interp, env: &mut Vec<(Name, Value)>) -> Result<bool, EvalError> {
    match c {
        Constraint::Head(p) => truth(p, interp, env),
        Constraint::And(cs) => {
            for c in cs {
                if !holds(c, dom, interp, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Constraint::Forall(x, s, p, body) => {
            for v in dom.values(*s) {
                env.push((x.clone(), v));
                let ok = !truth(p, interp, env)? || holds(body, dom, interp, env)?;
                env.pop();
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Constraint::Exists(x, s, body) => {
            for v in dom.values(*s) {
                env.push((x.clone(), v));
                let ok = holds(body, dom, interp, env)?;
                env.pop();
                if ok {
                    return Ok(true);
                }
            }
            Ok(false)
        }
    }
}

fn truth(p: &crate::pred::Pred, interp: &Interp, env: &[(Name, Value)]) -> Result<bool, EvalError> {
    let lookup = |x: &Name| env.iter().rev().find(|(y, _)| y == x).map(|b| b.1);
    let kapp = |k: &KApp, args: &[Value]| interp.get(&(k.kind, k.name.clone())).is_some_and(|ext| ext.contains(args));
    match eval(p, &lookup, &kapp)? {
        Value::Bool(b) => Ok(b),
        _ => Err(EvalError::IllSorted(p.to_string())),
    }
}

/// Truth of a closed constraint; free variables are read universally.
pub fn holds_closed(c: &Constraint, dom: &Domain, interp: &Interp) -> Result<bool, EvalError> {
    let free: Vec<Name> = c.free_vars().into_iter().collect();
    let sorts = free_var_sorts(c);
    fn all(
        c: &Constraint,
        dom: &Domain,
        interp: &Interp,
        free: &[Name],
        sorts: &BTreeMap<Name, BaseSort>,
        env: &mut Vec<(Name, Value)>,
    ) -> Result<bool, EvalError> {
        let Some((x, rest)) = free.split_first() else {
            return holds(c, dom, interp, env);
        };
        for v in dom.values(*sorts.get(x).unwrap_or(&BaseSort::Int)) {
            env.push((x.clone(), v));
            let ok = all(c, dom, interp, rest, sorts, env)?;
            env.pop();
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
    all(c, dom, interp, &free, &sorts, &mut Vec::new())
}

fn free_var_sorts(c: &Constraint) -> BTreeMap<Name, BaseSort> {
    let mut out = BTreeMap::new();
    let no = |_: &Name| None;
    c.visit_preds(&mut |p| crate::pred::infer_var_sorts(p, &no, &mut out));
    out
}

/// Search for an interpretation of the predicate variables making `c` true.
/// `budget` bounds the number of candidate interpretations.
pub fn brute_force_sat(c: &Constraint, dom: &Domain, budget: u64) -> Result<Option<Interp>, OracleError> {
    let sigs = pvar_sorts(c);
    let mut slots: Vec<((PKind, Name), Vec<Value>)> = Vec::new();
    for (key, sorts) in &sigs {
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for s in sorts {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    dom.values(*s).into_iter().map(move |v| {
                        let mut t = t.clone();
                        t.push(v);
                        t
                    })
                })
                .collect();
        }
        slots.extend(tuples.into_iter().map(|t| (key.clone(), t)));
    }
    let bits = slots.len() as u32;
    if bits >= 63 || (1u64 << bits) > budget {
        return Err(OracleError::BudgetExceeded(bits));
    }
    for mask in 0..(1u64 << bits) {
        let mut interp: Interp = sigs.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        for (i, (key, tuple)) in slots.iter().enumerate() {
            if mask >> i & 1 == 1 {
                interp.get_mut(key).unwrap().insert(tuple.clone());
            }
        }
        if holds_closed(c, dom, &interp)? {
            return Ok(Some(interp));
        }
    }
    Ok(None)
}

/// Validity of a predicate-variable-free constraint over the domain.
pub fn brute_force_valid(c: &Constraint, dom: &Domain) -> Result<bool, EvalError> {
    holds_closed(c, dom, &Interp::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehc::text::parse_constraint;

    fn dom() -> Domain {
        Domain::ints([0, 1, 2])
    }

    #[test]
    fn exists_needs_witness() {
        let c = parse_constraint("(exists (n Int) (forall (v Int) (= v 1) (= v n)))").unwrap();
        assert!(brute_force_valid(&c, &dom()).unwrap());
        let c = parse_constraint("(exists (n Int) (and (forall (v Int) (= v 1) (= v n)) (forall (v Int) (= v 2) (= v n))))").unwrap();
        assert!(!brute_force_valid(&c, &dom()).unwrap());
    }

    #[test]
    fn finds_kappa_interpretation() {
        let c = parse_constraint("(and (forall (v Int) (= v 1) (kapp k v)) (forall (v Int) (kapp k v) (< v 2)))").unwrap();
        let sol = brute_force_sat(&c, &dom(), 1 << 12).unwrap().unwrap();
        let ext = &sol[&(PKind::Kappa, Name::new("k"))];
        assert!(ext.contains(&vec![Value::Int(1)]));
        assert!(!ext.contains(&vec![Value::Int(2)]));
        let unsat = parse_constraint("(and (forall (v Int) (= v 2) (kapp k v)) (forall (v Int) (kapp k v) (< v 2)))").unwrap();
        assert_eq!(brute_force_sat(&unsat, &dom(), 1 << 12).unwrap(), None);
    }

    #[test]
    fn budget_is_enforced() {
        let c = parse_constraint("(forall (a Int) true (forall (b Int) true (forall (c Int) true (kapp k a b c))))").unwrap();
        assert!(matches!(brute_force_sat(&c, &dom(), 1 << 10), Err(OracleError::BudgetExceeded(27))));
    }
}
