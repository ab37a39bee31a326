//! Refinement predicates: the quantifier-free background theory (linear
//! integer arithmetic, booleans, equality) plus applications of predicate
//! variables, which only ever occur as whole atoms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::name::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BaseSort {
    Int,
    Bool,
    Unit,
}

impl BaseSort {
    pub fn smt_name(self) -> &'static str {
        match self {
            BaseSort::Int => "Int",
            BaseSort::Bool => "Bool",
            BaseSort::Unit => "Unit",
        }
    }

    pub fn from_name(s: &str) -> Option<BaseSort> {
        match s {
            "Int" => Some(BaseSort::Int),
            "Bool" => Some(BaseSort::Bool),
            "Unit" | "()" => Some(BaseSort::Unit),
            _ => None,
        }
    }
}

impl fmt::Display for BaseSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.smt_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    Imp,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Imp => "=>",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "=" => BinOp::Eq,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "=>" => BinOp::Imp,
            _ => return None,
        })
    }
}

/// The two classes of predicate variables: refinement unknowns introduced
/// by templates, and Skolem predicates introduced for existential binders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PKind {
    Kappa,
    Pi,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KApp {
    pub kind: PKind,
    pub name: Name,
    pub args: Vec<Pred>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Var(Name),
    Int(i64),
    Bool(bool),
    Unit,
    Un(UnOp, Box<Pred>),
    Bin(BinOp, Box<Pred>, Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    KApp(KApp),
}

pub const TRUE: Pred = Pred::Bool(true);
pub const FALSE: Pred = Pred::Bool(false);

impl Pred {
    pub fn var(x: &Name) -> Pred {
        Pred::Var(x.clone())
    }

    pub fn bin(op: BinOp, a: Pred, b: Pred) -> Pred {
        Pred::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Pred, b: Pred) -> Pred {
        Pred::bin(BinOp::Eq, a, b)
    }

    pub fn kapp(kind: PKind, name: &Name, args: Vec<Pred>) -> Pred {
        Pred::KApp(KApp { kind, name: name.clone(), args })
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Pred::Bool(true)) || matches!(self, Pred::And(v) if v.is_empty())
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Pred::Bool(false)) || matches!(self, Pred::Or(v) if v.is_empty())
    }

    /// Conjunction with flattening and unit/zero simplification.
    pub fn and(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Pred::And(qs) => out.extend(qs),
                p if p.is_true() => {}
                p if p.is_false() => return FALSE,
                p => out.push(p),
            }
        }
        match out.len() {
            0 => TRUE,
            1 => out.pop().unwrap(),
            _ => Pred::And(out),
        }
    }

    pub fn or(ps: impl IntoIterator<Item = Pred>) -> Pred {
        let mut out = Vec::new();
        for p in ps {
            match p {
                Pred::Or(qs) => out.extend(qs),
                p if p.is_false() => {}
                p if p.is_true() => return TRUE,
                p => out.push(p),
            }
        }
        match out.len() {
            0 => FALSE,
            1 => out.pop().unwrap(),
            _ => Pred::Or(out),
        }
    }

    pub fn not(p: Pred) -> Pred {
        match p {
            Pred::Bool(b) => Pred::Bool(!b),
            Pred::Un(UnOp::Not, q) => *q,
            p => Pred::Un(UnOp::Not, Box::new(p)),
        }
    }

    /// Top-level conjuncts (a non-conjunction is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Pred> {
        match self {
            Pred::And(ps) => ps.iter().flat_map(|p| p.conjuncts()).collect(),
            p if p.is_true() => vec![],
            p => vec![p],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Pred::Var(x) => {
                out.insert(x.clone());
            }
            Pred::Int(_) | Pred::Bool(_) | Pred::Unit => {}
            Pred::Un(_, p) => p.collect_vars(out),
            Pred::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            Pred::KApp(k) => k.args.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn mentions(&self, x: &Name) -> bool {
        match self {
            Pred::Var(y) => y == x,
            Pred::Int(_) | Pred::Bool(_) | Pred::Unit => false,
            Pred::Un(_, p) => p.mentions(x),
            Pred::Bin(_, a, b) => a.mentions(x) || b.mentions(x),
            Pred::And(ps) | Pred::Or(ps) => ps.iter().any(|p| p.mentions(x)),
            Pred::KApp(k) => k.args.iter().any(|p| p.mentions(x)),
        }
    }

    /// Predicate variables applied anywhere in this predicate.
    pub fn kapps(&self) -> Vec<&KApp> {
        let mut out = Vec::new();
        self.collect_kapps(&mut out);
        out
    }

    fn collect_kapps<'a>(&'a self, out: &mut Vec<&'a KApp>) {
        match self {
            Pred::KApp(k) => out.push(k),
            Pred::Un(_, p) => p.collect_kapps(out),
            Pred::Bin(_, a, b) => {
                a.collect_kapps(out);
                b.collect_kapps(out);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|p| p.collect_kapps(out)),
            _ => {}
        }
    }

    pub fn has_kapp(&self) -> bool {
        !self.kapps().is_empty()
    }

    pub fn has_pvar(&self, name: &Name) -> bool {
        self.kapps().iter().any(|k| &k.name == name)
    }

    /// Simultaneous first-order substitution. Predicates are quantifier-free,
    /// so there is no capture to avoid.
    pub fn subst(&self, s: &HashMap<Name, Pred>) -> Pred {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            Pred::Var(x) => s.get(x).cloned().unwrap_or_else(|| self.clone()),
            Pred::Int(_) | Pred::Bool(_) | Pred::Unit => self.clone(),
            Pred::Un(op, p) => Pred::Un(*op, Box::new(p.subst(s))),
            Pred::Bin(op, a, b) => Pred::bin(*op, a.subst(s), b.subst(s)),
            Pred::And(ps) => Pred::And(ps.iter().map(|p| p.subst(s)).collect()),
            Pred::Or(ps) => Pred::Or(ps.iter().map(|p| p.subst(s)).collect()),
            Pred::KApp(k) => Pred::KApp(KApp {
                kind: k.kind,
                name: k.name.clone(),
                args: k.args.iter().map(|p| p.subst(s)).collect(),
            }),
        }
    }

    pub fn subst1(&self, x: &Name, r: &Pred) -> Pred {
        let mut s = HashMap::new();
        s.insert(x.clone(), r.clone());
        self.subst(&s)
    }

    pub fn rename(&self, x: &Name, y: &Name) -> Pred {
        self.subst1(x, &Pred::Var(y.clone()))
    }

    /// Replace predicate-variable applications by `f(app)` where it returns
    /// `Some`.
    pub fn map_kapps(&self, f: &mut impl FnMut(&KApp) -> Option<Pred>) -> Pred {
        match self {
            Pred::KApp(k) => f(k).unwrap_or_else(|| self.clone()),
            Pred::Un(op, p) => Pred::Un(*op, Box::new(p.map_kapps(f))),
            Pred::Bin(op, a, b) => Pred::bin(*op, a.map_kapps(f), b.map_kapps(f)),
            Pred::And(ps) => Pred::and(ps.iter().map(|p| p.map_kapps(f))),
            Pred::Or(ps) => Pred::or(ps.iter().map(|p| p.map_kapps(f))),
            _ => self.clone(),
        }
    }

    /// Bottom-up constant folding of the boolean connectives.
    pub fn simplify(&self) -> Pred {
        match self {
            Pred::And(ps) => Pred::and(ps.iter().map(Pred::simplify)),
            Pred::Or(ps) => Pred::or(ps.iter().map(Pred::simplify)),
            Pred::Un(UnOp::Not, p) => Pred::not(p.simplify()),
            Pred::Bin(BinOp::Imp, a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if a.is_false() || b.is_true() {
                    TRUE
                } else if a.is_true() {
                    b
                } else {
                    Pred::bin(BinOp::Imp, a, b)
                }
            }
            Pred::Bin(BinOp::Eq, a, b) if a == b => TRUE,
            _ => self.clone(),
        }
    }

    /// Is this an atom that is a literal (constant) term?
    pub fn is_literal(&self) -> bool {
        matches!(self, Pred::Int(_) | Pred::Bool(_) | Pred::Unit)
            || matches!(self, Pred::Un(UnOp::Neg, p) if matches!(**p, Pred::Int(_)))
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Var(x) => write!(f, "{x}"),
            Pred::Int(n) if *n < 0 => write!(f, "(- {})", -(*n as i128)),
            Pred::Int(n) => write!(f, "{n}"),
            Pred::Bool(b) => write!(f, "{b}"),
            Pred::Unit => f.write_str("unit"),
            Pred::Un(UnOp::Not, p) => write!(f, "(not {p})"),
            Pred::Un(UnOp::Neg, p) => write!(f, "(- {p})"),
            Pred::Bin(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
            Pred::And(ps) if ps.is_empty() => f.write_str("true"),
            Pred::Or(ps) if ps.is_empty() => f.write_str("false"),
            Pred::And(ps) | Pred::Or(ps) => {
                f.write_str(if matches!(self, Pred::And(_)) { "(and" } else { "(or" })?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Pred::KApp(k) => write!(f, "{k}"),
        }
    }
}

impl fmt::Display for KApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match self.kind {
            PKind::Kappa => "kapp",
            PKind::Pi => "papp",
        };
        write!(f, "({head} {}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("unbound variable `{0}` in refinement")]
    Unbound(Name),
    #[error("sort mismatch in `{pred}`: expected {expected}, found {found}")]
    Mismatch { pred: String, expected: BaseSort, found: BaseSort },
}

/// Sort-check `p` against an environment. Predicate-variable applications
/// are Bool-sorted and their arguments are only required to be well-sorted.
pub fn sort_of(p: &Pred, env: &dyn Fn(&Name) -> Option<BaseSort>) -> Result<BaseSort, SortError> {
    let expect = |q: &Pred, s: BaseSort| -> Result<(), SortError> {
        let found = sort_of(q, env)?;
        if found == s {
            Ok(())
        } else {
            Err(SortError::Mismatch { pred: q.to_string(), expected: s, found })
        }
    };
    match p {
        Pred::Var(x) => env(x).ok_or_else(|| SortError::Unbound(x.clone())),
        Pred::Int(_) => Ok(BaseSort::Int),
        Pred::Bool(_) => Ok(BaseSort::Bool),
        Pred::Unit => Ok(BaseSort::Unit),
        Pred::Un(UnOp::Not, q) => expect(q, BaseSort::Bool).map(|_| BaseSort::Bool),
        Pred::Un(UnOp::Neg, q) => expect(q, BaseSort::Int).map(|_| BaseSort::Int),
        Pred::Bin(op, a, b) => match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                expect(a, BaseSort::Int)?;
                expect(b, BaseSort::Int)?;
                Ok(BaseSort::Int)
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                expect(a, BaseSort::Int)?;
                expect(b, BaseSort::Int)?;
                Ok(BaseSort::Bool)
            }
            BinOp::Imp => {
                expect(a, BaseSort::Bool)?;
                expect(b, BaseSort::Bool)?;
                Ok(BaseSort::Bool)
            }
            BinOp::Eq => {
                let sa = sort_of(a, env)?;
                expect(b, sa)?;
                Ok(BaseSort::Bool)
            }
        },
        Pred::And(ps) | Pred::Or(ps) => {
            for q in ps {
                expect(q, BaseSort::Bool)?;
            }
            Ok(BaseSort::Bool)
        }
        Pred::KApp(k) => {
            for a in &k.args {
                sort_of(a, env)?;
            }
            Ok(BaseSort::Bool)
        }
    }
}

/// Best-effort sort inference for free variables of a predicate, used when
/// declaring symbols for an external solver. Variables whose sort is not
/// determined by their use default to `Int`.
pub fn infer_var_sorts(p: &Pred, known: &dyn Fn(&Name) -> Option<BaseSort>, out: &mut BTreeMap<Name, BaseSort>) {
    fn term_sort(p: &Pred, known: &dyn Fn(&Name) -> Option<BaseSort>, out: &BTreeMap<Name, BaseSort>) -> Option<BaseSort> {
        match p {
            Pred::Var(x) => known(x).or_else(|| out.get(x).copied()),
            Pred::Int(_) | Pred::Un(UnOp::Neg, _) => Some(BaseSort::Int),
            Pred::Bin(BinOp::Add | BinOp::Sub | BinOp::Mul, _, _) => Some(BaseSort::Int),
            Pred::Unit => Some(BaseSort::Unit),
            _ => Some(BaseSort::Bool),
        }
    }
    fn go(p: &Pred, want: Option<BaseSort>, known: &dyn Fn(&Name) -> Option<BaseSort>, out: &mut BTreeMap<Name, BaseSort>) {
        match p {
            Pred::Var(x) => {
                if known(x).is_none() && !out.contains_key(x) {
                    if let Some(s) = want {
                        out.insert(x.clone(), s);
                    }
                }
            }
            Pred::Int(_) | Pred::Bool(_) | Pred::Unit => {}
            Pred::Un(UnOp::Not, q) => go(q, Some(BaseSort::Bool), known, out),
            Pred::Un(UnOp::Neg, q) => go(q, Some(BaseSort::Int), known, out),
            Pred::Bin(BinOp::Eq, a, b) => {
                let s = term_sort(a, known, out)
                    .filter(|_| !matches!(**a, Pred::Var(_)) || known(var_name(a)).is_some() || out.contains_key(var_name(a)))
                    .or_else(|| term_sort(b, known, out).filter(|_| !matches!(**b, Pred::Var(_)) || known(var_name(b)).is_some() || out.contains_key(var_name(b))));
                go(a, s, known, out);
                go(b, s, known, out);
            }
            Pred::Bin(BinOp::Imp, a, b) => {
                go(a, Some(BaseSort::Bool), known, out);
                go(b, Some(BaseSort::Bool), known, out);
            }
            Pred::Bin(_, a, b) => {
                go(a, Some(BaseSort::Int), known, out);
                go(b, Some(BaseSort::Int), known, out);
            }
            Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|q| go(q, Some(BaseSort::Bool), known, out)),
            Pred::KApp(k) => k.args.iter().for_each(|q| go(q, None, known, out)),
        }
    }
    fn var_name(p: &Pred) -> &Name {
        match p {
            Pred::Var(x) => x,
            _ => unreachable!(),
        }
    }
    go(p, Some(BaseSort::Bool), known, out);
}

/// Ground values of the base sorts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
}

impl Value {
    pub fn to_pred(self) -> Pred {
        match self {
            Value::Int(n) => Pred::Int(n),
            Value::Bool(b) => Pred::Bool(b),
            Value::Unit => Pred::Unit,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("ill-sorted predicate `{0}`")]
    IllSorted(String),
    #[error("arithmetic overflow")]
    Overflow,
}

/// Evaluate a predicate over the integers, with predicate-variable
/// applications answered by `kapp`.
pub fn eval(
    p: &Pred,
    env: &dyn Fn(&Name) -> Option<Value>,
    kapp: &dyn Fn(&KApp, &[Value]) -> bool,
) -> Result<Value, EvalError> {
    let int = |q: &Pred| -> Result<i64, EvalError> {
        match eval(q, env, kapp)? {
            Value::Int(n) => Ok(n),
            _ => Err(EvalError::IllSorted(q.to_string())),
        }
    };
    let boolean = |q: &Pred| -> Result<bool, EvalError> {
        match eval(q, env, kapp)? {
            Value::Bool(b) => Ok(b),
            _ => Err(EvalError::IllSorted(q.to_string())),
        }
    };
    Ok(match p {
        Pred::Var(x) => env(x).ok_or_else(|| EvalError::Unbound(x.clone()))?,
        Pred::Int(n) => Value::Int(*n),
        Pred::Bool(b) => Value::Bool(*b),
        Pred::Unit => Value::Unit,
        Pred::Un(UnOp::Not, q) => Value::Bool(!boolean(q)?),
        Pred::Un(UnOp::Neg, q) => Value::Int(int(q)?.checked_neg().ok_or(EvalError::Overflow)?),
        Pred::Bin(op, a, b) => match op {
            BinOp::Add => Value::Int(int(a)?.checked_add(int(b)?).ok_or(EvalError::Overflow)?),
            BinOp::Sub => Value::Int(int(a)?.checked_sub(int(b)?).ok_or(EvalError::Overflow)?),
            BinOp::Mul => Value::Int(int(a)?.checked_mul(int(b)?).ok_or(EvalError::Overflow)?),
            BinOp::Lt => Value::Bool(int(a)? < int(b)?),
            BinOp::Le => Value::Bool(int(a)? <= int(b)?),
            BinOp::Gt => Value::Bool(int(a)? > int(b)?),
            BinOp::Ge => Value::Bool(int(a)? >= int(b)?),
            BinOp::Imp => Value::Bool(!boolean(a)? || boolean(b)?),
            BinOp::Eq => Value::Bool(eval(a, env, kapp)? == eval(b, env, kapp)?),
        },
        Pred::And(ps) => {
            for q in ps {
                if !boolean(q)? {
                    return Ok(Value::Bool(false));
                }
            }
            Value::Bool(true)
        }
        Pred::Or(ps) => {
            for q in ps {
                if boolean(q)? {
                    return Ok(Value::Bool(true));
                }
            }
            Value::Bool(false)
        }
        Pred::KApp(k) => {
            let vals = k.args.iter().map(|a| eval(a, env, kapp)).collect::<Result<Vec<_>, _>>()?;
            Value::Bool(kapp(k, &vals))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Pred {
        Pred::Var(Name::new(s))
    }

    #[test]
    fn and_flattens_and_drops_true() {
        let p = Pred::and([TRUE, Pred::and([v("a"), v("b")]), v("c")]);
        assert_eq!(p, Pred::And(vec![v("a"), v("b"), v("c")]));
        assert_eq!(Pred::and([v("a"), FALSE]), FALSE);
        assert_eq!(Pred::and(Vec::<Pred>::new()), TRUE);
    }

    #[test]
    fn subst_replaces_inside_kapps() {
        let p = Pred::kapp(PKind::Kappa, &Name::new("k"), vec![v("x"), v("y")]);
        let q = p.subst1(&Name::new("x"), &Pred::Int(3));
        assert_eq!(q.to_string(), "(kapp k 3 y)");
    }

    #[test]
    fn sort_errors() {
        let env = |x: &Name| (x.as_str() == "n").then_some(BaseSort::Int);
        assert_eq!(sort_of(&Pred::eq(v("n"), Pred::Int(1)), &env), Ok(BaseSort::Bool));
        assert!(matches!(sort_of(&v("m"), &env), Err(SortError::Unbound(_))));
        assert!(matches!(
            sort_of(&Pred::eq(v("n"), Pred::Bool(true)), &env),
            Err(SortError::Mismatch { .. })
        ));
    }

    #[test]
    fn eval_arith() {
        let env = |x: &Name| (x.as_str() == "n").then_some(Value::Int(2));
        let p = Pred::eq(Pred::bin(BinOp::Add, v("n"), Pred::Int(1)), Pred::Int(3));
        assert_eq!(eval(&p, &env, &|_, _| false), Ok(Value::Bool(true)));
    }
}
