//! Canonical forms used to compare constraints up to alpha-renaming,
//! administrative refinement variables and clause order.
//!
//! Normalization runs four passes: simplify; replace refinement variables
//! forced to `true` (a head `k(xs)` over distinct, unguarded universal
//! binders) until nothing changes; drop parameters that every guard
//! occurrence passes an otherwise unused binder; simplify again. The result
//! is flattened into clauses and printed with canonical binder and
//! predicate-variable names.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::Constraint;
use crate::name::Name;
use crate::pred::{BaseSort, BinOp, KApp, PKind, Pred, TRUE};
use crate::solver::simplify;

const MAX_PERMUTED: usize = 7;

pub fn normalize(c: &Constraint) -> Constraint {
    let mut c = simplify(&rename_apart(c, &mut BTreeSet::new()));
    loop {
        let forced = forced_true(&c);
        if forced.is_empty() {
            break;
        }
        c = simplify(&c.map_preds(&mut |p| p.map_kapps(&mut |a| forced.contains(&(a.kind, a.name.clone())).then_some(TRUE))));
    }
    c = drop_irrelevant_params(&c);
    simplify(&c)
}

/// Predicate variables with a head `k(xs)` where `xs` are distinct
/// universally bound variables and every guard on the way is `true`.
pub(crate) fn forced_true(c: &Constraint) -> BTreeSet<(PKind, Name)> {
    fn go(c: &Constraint, free: &mut Vec<Name>, blocked: bool, out: &mut BTreeSet<(PKind, Name)>) {
        match c {
            Constraint::Head(p) => {
                if blocked {
                    return;
                }
                for q in p.conjuncts() {
                    if let Pred::KApp(a) = q {
                        let vars: Vec<&Name> = a.args.iter().filter_map(|x| if let Pred::Var(x) = x { Some(x) } else { None }).collect();
                        let distinct: BTreeSet<&Name> = vars.iter().copied().collect();
                        if vars.len() == a.args.len() && distinct.len() == vars.len() && vars.iter().all(|x| free.contains(x)) {
                            out.insert((a.kind, a.name.clone()));
                        }
                    }
                }
            }
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, free, blocked, out)),
            Constraint::Forall(x, _, p, body) => {
                free.push(x.clone());
                go(body, free, blocked || !p.is_true(), out);
                free.pop();
            }
            Constraint::Exists(x, _, body) => {
                // An existential binder is not an arbitrary value.
                let saved: Vec<Name> = free.iter().filter(|y| *y != x).cloned().collect();
                let mut inner = saved;
                go(body, &mut inner, blocked, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(c, &mut Vec::new(), false, &mut out);
    out
}

/// Give every binder a distinct name so that per-binder counts are exact.
fn rename_apart(c: &Constraint, seen: &mut BTreeSet<Name>) -> Constraint {
    let fresh_for = |x: &Name, seen: &mut BTreeSet<Name>| {
        let mut y = x.clone();
        let mut i = 0;
        while seen.contains(&y) {
            i += 1;
            y = Name::from(format!("{}'{i}", x.as_str()));
        }
        seen.insert(y.clone());
        y
    };
    match c {
        Constraint::Head(_) => c.clone(),
        Constraint::And(cs) => Constraint::And(cs.iter().map(|c| rename_apart(c, seen)).collect()),
        Constraint::Forall(x, s, p, body) => {
            let y = fresh_for(x, seen);
            let (p, body) = if &y == x { (p.clone(), (**body).clone()) } else { (p.rename(x, &y), body.subst1(x, &Pred::Var(y.clone()))) };
            Constraint::forall(&y, *s, p, rename_apart(&body, seen))
        }
        Constraint::Exists(x, s, body) => {
            let y = fresh_for(x, seen);
            let body = if &y == x { (**body).clone() } else { body.subst1(x, &Pred::Var(y.clone())) };
            Constraint::exists(&y, *s, rename_apart(&body, seen))
        }
    }
}

/// Number of occurrences of each binder within its own scope. Names bound
/// more than once are reported as `usize::MAX`.
fn binder_uses(c: &Constraint) -> HashMap<Name, usize> {
    fn count(c: &Constraint, x: &Name) -> usize {
        let mut n = 0;
        c.visit_preds(&mut |p| n += occurrences(p, x));
        n
    }
    fn go(c: &Constraint, out: &mut HashMap<Name, usize>) {
        match c {
            Constraint::Head(_) => {}
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, out)),
            Constraint::Forall(x, _, p, body) => {
                let n = occurrences(p, x) + count(body, x);
                let e = out.entry(x.clone()).or_insert(0);
                *e = if *e == 0 { n } else { usize::MAX };
                go(body, out);
            }
            Constraint::Exists(x, _, body) => {
                out.insert(x.clone(), usize::MAX);
                go(body, out);
            }
        }
    }
    let mut out = HashMap::new();
    go(c, &mut out);
    out
}

fn occurrences(p: &Pred, x: &Name) -> usize {
    match p {
        Pred::Var(y) => usize::from(y == x),
        Pred::Un(_, a) => occurrences(a, x),
        Pred::Bin(_, a, b) => occurrences(a, x) + occurrences(b, x),
        Pred::And(ps) | Pred::Or(ps) => ps.iter().map(|q| occurrences(q, x)).sum(),
        Pred::KApp(k) => k.args.iter().map(|q| occurrences(q, x)).sum(),
        _ => 0,
    }
}

fn drop_irrelevant_params(c: &Constraint) -> Constraint {
    let uses = binder_uses(c);
    let mut guard_apps: BTreeMap<(PKind, Name), Vec<KApp>> = BTreeMap::new();
    fn guards(c: &Constraint, out: &mut BTreeMap<(PKind, Name), Vec<KApp>>) {
        match c {
            Constraint::Forall(_, _, p, body) => {
                for a in p.kapps() {
                    out.entry((a.kind, a.name.clone())).or_default().push(a.clone());
                }
                guards(body, out);
            }
            Constraint::And(cs) => cs.iter().for_each(|c| guards(c, out)),
            Constraint::Exists(_, _, body) => guards(body, out),
            Constraint::Head(_) => {}
        }
    }
    guards(c, &mut guard_apps);
    let mut drop: BTreeMap<(PKind, Name), BTreeSet<usize>> = BTreeMap::new();
    for (key, apps) in &guard_apps {
        let arity = apps[0].args.len();
        let idx: BTreeSet<usize> = (0..arity)
            .filter(|&i| apps.iter().all(|a| matches!(&a.args[i], Pred::Var(x) if uses.get(x) == Some(&1))))
            .collect();
        if !idx.is_empty() {
            drop.insert(key.clone(), idx);
        }
    }
    if drop.is_empty() {
        return c.clone();
    }
    c.map_preds(&mut |p| {
        p.map_kapps(&mut |a| {
            drop.get(&(a.kind, a.name.clone())).map(|idx| {
                let args = a.args.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, x)| x.clone()).collect();
                Pred::KApp(KApp { kind: a.kind, name: a.name.clone(), args })
            })
        })
    })
}

/// A flattened clause: universal binders, guard conjuncts and a body.
#[derive(Clone, Debug)]
struct Clause {
    binders: Vec<(Name, BaseSort)>,
    guards: Vec<Pred>,
    body: Body,
}

#[derive(Clone, Debug)]
enum Body {
    Pred(Pred),
    Exists(Name, BaseSort, Vec<Clause>),
}

fn flatten(c: &Constraint) -> Vec<Clause> {
    match c {
        Constraint::Head(p) => p
            .conjuncts()
            .into_iter()
            .filter(|q| !q.is_true())
            .map(|q| Clause { binders: vec![], guards: vec![], body: Body::Pred(q.clone()) })
            .collect(),
        Constraint::And(cs) => cs.iter().flat_map(flatten).collect(),
        Constraint::Forall(x, s, p, body) => flatten(body)
            .into_iter()
            .map(|mut cl| {
                cl.binders.insert(0, (x.clone(), *s));
                let mut gs: Vec<Pred> = p.conjuncts().into_iter().filter(|q| !q.is_true()).cloned().collect();
                gs.extend(cl.guards);
                cl.guards = gs;
                cl
            })
            .collect(),
        Constraint::Exists(x, s, body) => {
            vec![Clause { binders: vec![], guards: vec![], body: Body::Exists(x.clone(), *s, flatten(body)) }]
        }
    }
}

fn clause_mentions(cl: &Clause, x: &Name) -> bool {
    cl.guards.iter().any(|g| g.mentions(x))
        || match &cl.body {
            Body::Pred(p) => p.mentions(x),
            Body::Exists(y, _, cs) => y != x && cs.iter().any(|c| c.binders.iter().all(|(b, _)| b != x) && clause_mentions(c, x)),
        }
}

fn render_pred(p: &Pred, ren: &HashMap<Name, Pred>, kren: &dyn Fn(&KApp) -> String) -> String {
    match p {
        Pred::Var(x) => ren.get(x).map_or_else(|| x.to_string(), |q| q.to_string()),
        Pred::KApp(a) => {
            let args: Vec<String> = a.args.iter().map(|q| render_pred(q, ren, kren)).collect();
            format!("({} {})", kren(a), args.join(" "))
        }
        Pred::Bin(op, a, b) => {
            let (x, y) = (render_pred(a, ren, kren), render_pred(b, ren, kren));
            let (x, y) = if *op == BinOp::Eq && y < x { (y, x) } else { (x, y) };
            format!("({} {x} {y})", op.symbol())
        }
        Pred::Un(op, a) => {
            let name = if *op == crate::pred::UnOp::Not { "not" } else { "-" };
            format!("({name} {})", render_pred(a, ren, kren))
        }
        Pred::And(ps) | Pred::Or(ps) => {
            let tag = if matches!(p, Pred::And(_)) { "and" } else { "or" };
            let mut items: Vec<String> = ps.iter().map(|q| render_pred(q, ren, kren)).collect();
            items.sort();
            format!("({tag} {})", items.join(" "))
        }
        _ => p.to_string(),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn render_clause(cl: &Clause, level: usize, ren: &HashMap<Name, Pred>, kren: &dyn Fn(&KApp) -> String) -> String {
    let binders: Vec<(Name, BaseSort)> = cl.binders.iter().filter(|(x, _)| clause_mentions(cl, x)).cloned().collect();
    let perms = if binders.len() <= MAX_PERMUTED {
        permutations(binders.len())
    } else {
        vec![(0..binders.len()).collect()]
    };
    let mut best: Option<String> = None;
    for perm in perms {
        let mut r = ren.clone();
        let mut heads = Vec::new();
        for (slot, &i) in perm.iter().enumerate() {
            let (x, s) = &binders[i];
            let canon = format!("x{level}_{slot}");
            r.insert(x.clone(), Pred::Var(Name::new(&canon)));
            heads.push(format!("({canon} {s})"));
        }
        let mut guards: Vec<String> = cl.guards.iter().map(|g| render_pred(g, &r, kren)).collect();
        guards.sort();
        guards.dedup();
        let body = match &cl.body {
            Body::Pred(p) => render_pred(p, &r, kren),
            Body::Exists(n, s, inner) => {
                let canon = format!("e{level}");
                let mut r2 = r.clone();
                r2.insert(n.clone(), Pred::Var(Name::new(&canon)));
                let mut items: Vec<String> = inner.iter().map(|c| render_clause(c, level + 1, &r2, kren)).collect();
                items.sort();
                items.dedup();
                format!("(exists ({canon} {s}) (and {}))", items.join(" "))
            }
        };
        let text = if heads.is_empty() && guards.is_empty() {
            body
        } else {
            format!("(forall ({}) (and {}) {body})", heads.join(" "), guards.join(" "))
        };
        if best.as_ref().is_none_or(|b| &text < b) {
            best = Some(text);
        }
    }
    best.unwrap_or_default()
}

/// Canonical text of a constraint after normalization. Two constraints with
/// equal canonical text are equivalent up to renaming.
pub fn canonical(c: &Constraint) -> String {
    let n = normalize(c);
    let clauses = flatten(&n);
    let anon = |a: &KApp| format!("{:?}{}", a.kind, a.args.len());
    let mut first: Vec<(String, usize)> = clauses.iter().enumerate().map(|(i, cl)| (render_clause(cl, 0, &HashMap::new(), &anon), i)).collect();
    first.sort();
    // Name predicate variables by first appearance in the anonymous order.
    let mut names: BTreeMap<(PKind, Name), String> = BTreeMap::new();
    let mut counts = [0usize; 2];
    for (_, i) in &first {
        let mut apps = Vec::new();
        collect_apps(&clauses[*i], &mut apps);
        for a in apps {
            let key = (a.kind, a.name.clone());
            if let std::collections::btree_map::Entry::Vacant(e) = names.entry(key) {
                let slot = usize::from(a.kind == PKind::Pi);
                let tag = if a.kind == PKind::Pi { "p" } else { "k" };
                e.insert(format!("{tag}{}", counts[slot]));
                counts[slot] += 1;
            }
        }
    }
    let named = |a: &KApp| names.get(&(a.kind, a.name.clone())).cloned().unwrap_or_else(|| a.name.to_string());
    let mut items: Vec<String> = first.iter().map(|(_, i)| render_clause(&clauses[*i], 0, &HashMap::new(), &named)).collect();
    items.sort();
    items.dedup();
    items.join("\n")
}

fn collect_apps(cl: &Clause, out: &mut Vec<KApp>) {
    for g in &cl.guards {
        out.extend(g.kapps().into_iter().cloned());
    }
    match &cl.body {
        Body::Pred(p) => out.extend(p.kapps().into_iter().cloned()),
        Body::Exists(_, _, cs) => cs.iter().for_each(|c| collect_apps(c, out)),
    }
}

pub fn alpha_equivalent(a: &Constraint, b: &Constraint) -> bool {
    canonical(a) == canonical(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehc::text::parse_constraint;

    #[test]
    fn administrative_kappas_normalize_away() {
        let raw = parse_constraint(
            "(and (forall (v Bool) (kapp k1 v) (kapp k3 v))
                  (forall (z Bool) (kapp k1 z) (forall (v Int) (= v 1) (kapp k2 z v)))
                  (forall (z Bool) (kapp k3 z) true)
                  (exists (n Int) (and (forall (v Bool) true (kapp k1 v))
                                       (forall (x Bool) true (forall (v Int) (kapp k2 x v) (= v n))))))",
        )
        .unwrap();
        let fig = parse_constraint(
            "(and (forall (z Bool) true (forall (v Int) (= v 1) (kapp k v)))
                  (exists (n Int) (forall (v Int) (kapp k v) (= n v))))",
        )
        .unwrap();
        assert_eq!(canonical(&raw), canonical(&fig));
    }

    #[test]
    fn binder_order_and_names_do_not_matter() {
        let a = parse_constraint("(forall (x Int) true (forall (y Int) (= x 1) (= y x)))").unwrap();
        let b = parse_constraint("(forall (q Int) true (forall (p Int) (= 1 p) (= p q)))").unwrap();
        assert!(alpha_equivalent(&a, &b));
        let c = parse_constraint("(forall (q Int) true (forall (p Int) (= 2 p) (= p q)))").unwrap();
        assert!(!alpha_equivalent(&a, &c));
    }
}
