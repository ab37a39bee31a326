//! Property bodies shared by the randomized suite and the acceptance run.
//! Each takes a seed and returns a description of the counterexample.

#![allow(dead_code)]

use std::collections::BTreeSet;

use irt::ehc::oracle::{brute_force_sat, brute_force_valid, holds_closed, Domain, Interp};
use irt::ehc::random::{acyclic_ehc, body_over, GenConfig, INTS};
use irt::ehc::text::parse_constraint;
use irt::ehc::{is_acyclic, separate, Constraint, SeparateError};
use irt::name::{Fresh, Name};
use irt::pred::{BaseSort, PKind, Pred, Value, TRUE};
use irt::qe::{CcQe, QeProcedure};
use irt::solver::{elims, kappa_order, noside, poke, sides, solve};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub const BUDGET: u64 = 1 << 12;

pub type Outcome = Result<(), String>;

pub type Property = fn(u64) -> Outcome;

#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

pub fn dom() -> Domain {
    Domain::ints(INTS)
}

pub fn instance(seed: u64) -> Constraint {
    acyclic_ehc(&mut StdRng::seed_from_u64(seed), &GenConfig::default())
}

pub fn sat(c: &Constraint) -> bool {
    brute_force_sat(c, &dom(), BUDGET).unwrap_or_else(|e| panic!("{e} on {c}")).is_some()
}

/// Heads and guards carrying a Skolem predicate, split by position.
fn pi_positions(c: &Constraint, guards: &mut Vec<Name>, heads: &mut Vec<Name>) {
    let pis = |p: &Pred| p.kapps().into_iter().filter(|a| a.kind == PKind::Pi).map(|a| a.name.clone()).collect::<Vec<_>>();
    match c {
        Constraint::Forall(_, _, p, body) => {
            guards.extend(pis(p));
            pi_positions(body, guards, heads);
        }
        Constraint::Exists(_, _, body) => pi_positions(body, guards, heads),
        Constraint::And(cs) => cs.iter().for_each(|c| pi_positions(c, guards, heads)),
        Constraint::Head(p) => heads.extend(pis(p)),
    }
}

/// Replace occurrences of a Skolem predicate nested under a guard of the
/// same predicate by `true`, whatever their arguments.
pub fn drop_recursive_pis(c: &Constraint, outer: &BTreeSet<Name>) -> Constraint {
    let strip = |p: &Pred| p.map_kapps(&mut |a| (a.kind == PKind::Pi && outer.contains(&a.name)).then_some(TRUE));
    match c {
        Constraint::Forall(x, s, p, body) => {
            let p2 = strip(p);
            let mut inner = outer.clone();
            inner.extend(p.kapps().into_iter().filter(|a| a.kind == PKind::Pi).map(|a| a.name.clone()));
            Constraint::forall(x, *s, p2, drop_recursive_pis(body, &inner))
        }
        Constraint::Exists(x, s, body) => Constraint::exists(x, *s, drop_recursive_pis(body, outer)),
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| drop_recursive_pis(c, outer)).collect()),
        Constraint::Head(p) => Constraint::Head(strip(p)),
    }
}

/// Conjoin `app` onto random guards and heads.
fn sprinkle(c: &Constraint, app: &Pred, rng: &mut StdRng) -> Constraint {
    use rand::Rng;
    match c {
        Constraint::Forall(x, s, p, body) => {
            let p = if rng.gen_bool(0.4) { Pred::and([p.clone(), app.clone()]) } else { p.clone() };
            Constraint::forall(x, *s, p, sprinkle(body, app, rng))
        }
        Constraint::Exists(x, s, body) => Constraint::exists(x, *s, sprinkle(body, app, rng)),
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| sprinkle(c, app, rng)).collect()),
        Constraint::Head(p) if rng.gen_bool(0.3) => Constraint::Head(Pred::and([p.clone(), app.clone()])),
        Constraint::Head(_) => c.clone(),
    }
}

/// Every extension of an integer predicate of the given arity.
fn all_interps(pi: &Name, arity: u32) -> Vec<Interp> {
    let tuples: Vec<Vec<Value>> = (0..INTS.len().pow(arity))
        .map(|mut i| {
            (0..arity)
                .map(|_| {
                    let v = Value::Int(INTS[i % INTS.len()]);
                    i /= INTS.len();
                    v
                })
                .collect()
        })
        .collect();
    (0..1u32 << tuples.len())
        .map(|mask| {
            let ext = tuples.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, t)| t.clone()).collect();
            Interp::from([((PKind::Pi, pi.clone()), ext)])
        })
        .collect()
}

/// Horn and side parts of the skolemized constraint after eliminating every
/// refinement variable from both.
pub fn kappa_free(c: &Constraint) -> (Constraint, Constraint) {
    let fresh = Fresh::new(1);
    let (hc, _) = poke(c, &fresh);
    let order = kappa_order(&hc).expect("generator yields acyclic constraints");
    let (free, _) = elims(&order, &hc, &fresh);
    (noside(&free), sides(&free))
}

/// (a) Skolemization preserves satisfiability.
pub fn poke_is_equisatisfiable(seed: u64) -> Outcome {
    let c = instance(seed);
    let (hc, _) = poke(&c, &Fresh::new(1));
    ensure!(sat(&c) == sat(&hc), "{c}\n--\n{hc}");
    Ok(())
}

/// (b) The Horn part is existential-free and Skolem predicates occur only
/// as guards, one per existential.
pub fn noside_is_existential_free_nnf(seed: u64) -> Outcome {
    let c = instance(seed);
    let (hc, pis) = poke(&c, &Fresh::new(1));
    let nnf = noside(&hc);
    ensure!(!nnf.has_exists(), "existential left in {nnf}");
    let (mut guards, mut heads) = (Vec::new(), Vec::new());
    pi_positions(&nnf, &mut guards, &mut heads);
    ensure!(heads.is_empty(), "pi in head position: {nnf}");
    let mut introduced: Vec<Name> = pis.iter().map(|p| p.name.clone()).collect();
    introduced.sort();
    guards.sort();
    ensure!(guards == introduced, "guards {guards:?} vs introduced {introduced:?}");
    Ok(())
}

/// (c) Splitting into Horn part and side conditions preserves satisfiability.
pub fn noside_and_sides_decompose(seed: u64) -> Outcome {
    let c = instance(seed);
    let (hc, _) = poke(&c, &Fresh::new(1));
    let split = Constraint::And(vec![noside(&hc), sides(&hc)]);
    ensure!(sat(&hc) == sat(&split), "{hc}");
    Ok(())
}

/// (d) Eliminating refinement variables preserves satisfiability.
pub fn kappa_elimination_is_equisatisfiable(seed: u64) -> Outcome {
    let c = instance(seed);
    let (hc, _) = poke(&c, &Fresh::new(1));
    let (free, side) = kappa_free(&c);
    ensure!(free.kvars().is_empty(), "refinement variable left in {free}");
    let eliminated = Constraint::And(vec![free.clone(), side]);
    ensure!(sat(&hc) == sat(&eliminated), "{hc}\n--\n{free}");
    Ok(())
}

/// (e) Under a guard `pi(n, a)`, further occurrences of `pi` are redundant,
/// for every interpretation of `pi`.
pub fn recursive_skolems_are_redundant(seed: u64) -> Outcome {
    let mut rng = StdRng::seed_from_u64(seed);
    let (n, a, pi) = (Name::new("n"), Name::new("a"), Name::new("pi_n"));
    let app = Pred::kapp(PKind::Pi, &pi, vec![Pred::var(&n), Pred::var(&a)]);
    let body = body_over(&mut rng, &[(n.clone(), BaseSort::Int), (a.clone(), BaseSort::Int)], 4);
    let body = sprinkle(&body, &app, &mut rng);
    let close = |c: Constraint| Constraint::forall(&a, BaseSort::Int, TRUE, Constraint::forall(&n, BaseSort::Int, app.clone(), c));
    let with = close(body.clone());
    let without = close(body.map_preds(&mut |p| p.map_kapps(&mut |k| (k.name == pi).then_some(TRUE))));
    for interp in all_interps(&pi, 2) {
        ensure!(holds_closed(&with, &dom(), &interp).unwrap() == holds_closed(&without, &dom(), &interp).unwrap(), "{with}");
    }
    Ok(())
}

/// (e) on generated constraints: cutting nested Skolem occurrences only
/// strengthens.
pub fn cutting_nested_skolems_strengthens(seed: u64) -> Outcome {
    let c = instance(seed);
    let (free, side) = kappa_free(&c);
    let with = Constraint::And(vec![free.clone(), side.clone()]);
    let without = Constraint::And(vec![drop_recursive_pis(&free, &BTreeSet::new()), side]);
    ensure!(!sat(&without) || sat(&with), "{free}");
    Ok(())
}

/// (f) A valid VC implies the original constraint is satisfiable.
pub fn safe_is_sound(seed: u64) -> Outcome {
    let c = instance(seed);
    let solved = solve(&c, &CcQe, &Fresh::new(1)).map_err(|e| e.to_string())?;
    let vc = solved.vc();
    ensure!(
        vc.pvars(PKind::Kappa).is_empty() && vc.pvars(PKind::Pi).is_empty() && !vc.has_exists(),
        "VC not first order: {vc}"
    );
    if brute_force_valid(&vc, &dom()).unwrap() {
        ensure!(sat(&c), "valid VC {vc} for unsatisfiable {c}");
    }
    Ok(())
}

/// (g) A discharged congruence-closure solution witnesses the existential.
pub fn cc_qe_strengthens(seed: u64) -> Outcome {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = Name::new("n");
    let scope = vec![(Name::new("a"), BaseSort::Int)];
    let mut full = scope.clone();
    full.insert(0, (n.clone(), BaseSort::Int));
    let def = body_over(&mut rng, &full, 4);
    let sol = CcQe.solve_skolem(&n, &scope, &def);
    // forall a. (forall n. guard => def) /\ (exists n. side), with the
    // existential discharged the same way the pipeline does.
    let a = &scope[0].0;
    let uses = Constraint::forall(&n, BaseSort::Int, sol.guard.clone(), def.clone());
    let side = CcQe.eliminate_exists(&n, BaseSort::Int, &Constraint::Head(sol.side.clone()));
    let obligations = Constraint::forall(a, BaseSort::Int, TRUE, Constraint::And(vec![uses, side]));
    if brute_force_valid(&obligations, &dom()).unwrap() {
        let goal = Constraint::forall(a, BaseSort::Int, TRUE, Constraint::exists(&n, BaseSort::Int, def.clone()));
        ensure!(brute_force_valid(&goal, &dom()).unwrap(), "{def} solved by {sol:?}");
    }
    Ok(())
}

/// Every property, labelled as in the acceptance list.
pub const ALL: [(&str, Property); 8] = [
    ("a", poke_is_equisatisfiable),
    ("b", noside_is_existential_free_nnf),
    ("c", noside_and_sides_decompose),
    ("d", kappa_elimination_is_equisatisfiable),
    ("e", recursive_skolems_are_redundant),
    ("e'", cutting_nested_skolems_strengthens),
    ("f", safe_is_sound),
    ("g", cc_qe_strengthens),
];

pub type SeparabilityCase = (&'static str, bool, Option<&'static str>);

/// Constructed separability instances: source, whether it is acyclic, and
/// the refinement variable that blocks separation, if any.
pub const SEPARABILITY: [SeparabilityCase; 7] = [
    (
        "(and (forall (z Bool) true (forall (v Int) (= v 1) (kapp k v)))
              (exists (n Int) (forall (v Int) (kapp k v) (= v n))))",
        true,
        None,
    ),
    ("(and (forall (x Int) (= x 0) (kapp k x)) (forall (x Int) (kapp k x) (kapp k x)))", false, None),
    (
        "(and (forall (x Int) (kapp k x) (kapp k x))
              (forall (x Int) (= x 1) (kapp j x))
              (exists (n Int) (forall (v Int) (kapp j v) (= v n))))",
        false,
        None,
    ),
    (
        "(and (forall (x Int) (kapp k x) (kapp k x))
              (exists (n Int) (forall (v Int) (= v n) (kapp k v))))",
        false,
        Some("k"),
    ),
    (
        "(and (forall (x Int) (kapp k x) (kapp k x))
              (exists (n Int) (forall (v Int) (kapp k v) (= v n))))",
        false,
        Some("k"),
    ),
    (
        "(and (forall (x Int) (kapp k1 x) (kapp k2 x))
              (exists (n Int) (forall (v Int) (kapp k2 v) (and (kapp k1 v) (= v n)))))",
        false,
        Some("k2"),
    ),
    ("(forall (x Int) (kapp k x) (and (kapp k x) (exists (n Int) (= n x))))", false, Some("k")),
];

/// A separable instance splits into an existential part without cyclic
/// refinement variables and an existential-free Horn part whose conjunction
/// is equisatisfiable with the input; any other instance is rejected naming
/// the offending variable.
pub fn separability_case(src: &str, acyclic: bool, blocker: Option<&str>) -> Outcome {
    let c = parse_constraint(src).map_err(|e| e.to_string())?;
    ensure!(is_acyclic(&c) == acyclic, "is_acyclic = {} on {c}", !acyclic);
    match (separate(&c), blocker) {
        (Ok((ex, horn)), None) => {
            ensure!(!horn.has_exists(), "Horn part has an existential: {horn}");
            let cyclic = irt::ehc::cyclic_kvars(&c);
            ensure!(ex.kvars().is_disjoint(&cyclic), "cyclic variable in existential part: {ex}");
            let joined = Constraint::And(vec![ex, horn]);
            ensure!(sat(&c) == sat(&joined), "split changes satisfiability of {c}");
            Ok(())
        }
        (Err(SeparateError::NotSeparable(k)), Some(b)) => {
            ensure!(k.as_str() == b, "blamed {k}, expected {b}");
            Ok(())
        }
        (got, want) => Err(format!("separate gave {got:?}, expected blocker {want:?} on {c}")),
    }
}

/// Generated instances are acyclic and separate trivially.
pub fn generated_instances_separate(seed: u64) -> Outcome {
    let c = instance(seed);
    ensure!(is_acyclic(&c), "generated instance is cyclic: {c}");
    let (ex, horn) = separate(&c).map_err(|e| e.to_string())?;
    ensure!(horn.is_true() && ex == c, "acyclic instance split nontrivially: {c}");
    Ok(())
}
