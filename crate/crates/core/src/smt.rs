//! SMT-LIB2 embedding of verification conditions and validity checking via
//! an external solver process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::ehc::Constraint;
use crate::name::Name;
use crate::pred::{infer_var_sorts, BaseSort, Pred, UnOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmtError {
    #[error("predicate variable application `{0}` cannot be sent to the solver")]
    UnsupportedAtom(String),
    #[error("failed to start solver `{cmd}`: {msg}")]
    SolverSpawnFailure { cmd: String, msg: String },
    #[error("unexpected solver output: {0}")]
    MalformedSolverOutput(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtConfig {
    pub argv: Vec<String>,
    pub timeout_ms: u64,
    pub logic: String,
    pub seed: u64,
}

impl Default for SmtConfig {
    /// `z3 -in -smt2`, or the whitespace-separated command in `IRT_SMT_CMD`.
    fn default() -> SmtConfig {
        let argv = std::env::var("IRT_SMT_CMD")
            .ok()
            .map(|s| s.split_whitespace().map(String::from).collect::<Vec<_>>())
            .filter(|v| !v.is_empty())
            .unwrap_or_else(|| vec!["z3".into(), "-in".into(), "-smt2".into()]);
        SmtConfig { argv, timeout_ms: 10_000, logic: "ALL".into(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmtResult {
    Valid,
    /// Counter-model as printed by the solver.
    Invalid(String),
    Unknown(String),
    Timeout,
}

fn symbol(x: &Name) -> String {
    let s = x.as_str();
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        s.to_string()
    } else {
        format!("|{}|", s.replace(['|', '\\'], "_"))
    }
}

fn pred(p: &Pred, out: &mut String) -> Result<(), SmtError> {
    match p {
        Pred::Var(x) => out.push_str(&symbol(x)),
        Pred::Int(n) if *n < 0 => write!(out, "(- {})", -(*n as i128)).unwrap(),
        Pred::Int(n) => write!(out, "{n}").unwrap(),
        Pred::Bool(b) => write!(out, "{b}").unwrap(),
        Pred::Unit => out.push_str("unit"),
        Pred::Un(op, a) => {
            out.push_str(if *op == UnOp::Not { "(not " } else { "(- " });
            pred(a, out)?;
            out.push(')');
        }
        Pred::Bin(op, a, b) => {
            write!(out, "({} ", op.symbol()).unwrap();
            pred(a, out)?;
            out.push(' ');
            pred(b, out)?;
            out.push(')');
        }
        Pred::And(ps) | Pred::Or(ps) if ps.is_empty() => out.push_str(if matches!(p, Pred::And(_)) { "true" } else { "false" }),
        Pred::And(ps) | Pred::Or(ps) => {
            out.push_str(if matches!(p, Pred::And(_)) { "(and" } else { "(or" });
            for q in ps {
                out.push(' ');
                pred(q, out)?;
            }
            out.push(')');
        }
        Pred::KApp(k) => return Err(SmtError::UnsupportedAtom(k.to_string())),
    }
    Ok(())
}

fn constraint(c: &Constraint, out: &mut String) -> Result<(), SmtError> {
    match c {
        Constraint::Head(p) => pred(p, out)?,
        Constraint::And(cs) if cs.is_empty() => out.push_str("true"),
        Constraint::And(cs) => {
            out.push_str("(and");
            for c in cs {
                out.push(' ');
                constraint(c, out)?;
            }
            out.push(')');
        }
        Constraint::Forall(x, s, p, body) => {
            write!(out, "(forall (({} {})) (=> ", symbol(x), s.smt_name()).unwrap();
            pred(p, out)?;
            out.push(' ');
            constraint(body, out)?;
            out.push_str("))");
        }
        Constraint::Exists(x, s, body) => {
            write!(out, "(exists (({} {})) ", symbol(x), s.smt_name()).unwrap();
            constraint(body, out)?;
            out.push(')');
        }
    }
    Ok(())
}

/// Sorts of the free variables of `c`, Int where nothing constrains them.
fn free_sorts(c: &Constraint) -> BTreeMap<Name, BaseSort> {
    fn go(c: &Constraint, bound: &mut Vec<(Name, BaseSort)>, out: &mut BTreeMap<Name, BaseSort>) {
        let visit = |p: &Pred, bound: &Vec<(Name, BaseSort)>, out: &mut BTreeMap<Name, BaseSort>| {
            let known = |x: &Name| bound.iter().rev().find(|(y, _)| y == x).map(|b| b.1);
            let mut found = BTreeMap::new();
            infer_var_sorts(p, &known, &mut found);
            for (x, s) in found {
                if known(&x).is_none() {
                    out.entry(x).or_insert(s);
                }
            }
        };
        match c {
            Constraint::Head(p) => visit(p, bound, out),
            Constraint::And(cs) => cs.iter().for_each(|c| go(c, bound, out)),
            Constraint::Forall(x, s, p, body) => {
                bound.push((x.clone(), *s));
                visit(p, bound, out);
                go(body, bound, out);
                bound.pop();
            }
            Constraint::Exists(x, s, body) => {
                bound.push((x.clone(), *s));
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    for x in c.free_vars() {
        out.insert(x, BaseSort::Int);
    }
    let mut inferred = BTreeMap::new();
    go(c, &mut Vec::new(), &mut inferred);
    for (x, s) in inferred {
        if let Some(slot) = out.get_mut(&x) {
            *slot = s;
        }
    }
    out
}

fn mentions_unit(c: &Constraint) -> bool {
    let text = c.to_string();
    text.contains("Unit") || text.contains("unit")
}

/// Script asserting the negation of `vc`: `unsat` means `vc` is valid.
pub fn embed_smt(vc: &Constraint, cfg: &SmtConfig) -> Result<String, SmtError> {
    let mut body = String::new();
    constraint(vc, &mut body)?;
    let mut out = String::new();
    writeln!(out, "(set-logic {})", cfg.logic).unwrap();
    if mentions_unit(vc) {
        out.push_str("(declare-datatypes ((Unit 0)) (((unit))))\n");
    }
    for (x, s) in free_sorts(vc) {
        writeln!(out, "(declare-const {} {})", symbol(&x), s.smt_name()).unwrap();
    }
    writeln!(out, "(assert (not {body}))").unwrap();
    out.push_str("(check-sat)\n");
    Ok(out)
}

pub fn check_valid(vc: &Constraint, cfg: &SmtConfig) -> Result<SmtResult, SmtError> {
    let mut script = format!("(set-option :produce-models true)\n(set-option :random-seed {})\n", cfg.seed);
    script.push_str(&embed_smt(vc, cfg)?);
    script.push_str("(get-model)\n(exit)\n");
    run_script(&script, cfg)
}

/// Feed `script` to the configured solver, honouring the timeout.
pub fn run_script(script: &str, cfg: &SmtConfig) -> Result<SmtResult, SmtError> {
    let cmd = cfg.argv.join(" ");
    let spawn_err = |msg: String| SmtError::SolverSpawnFailure { cmd: cmd.clone(), msg };
    let (prog, args) = cfg.argv.split_first().ok_or_else(|| spawn_err("empty command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| spawn_err(e.to_string()))?;
    let mut stdin = child.stdin.take().expect("piped");
    let input = script.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + Duration::from_millis(cfg.timeout_ms.max(1));
    loop {
        match child.try_wait().map_err(|e| spawn_err(e.to_string()))? {
            Some(_) => break,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SmtResult::Timeout);
            }
            None => std::thread::sleep(Duration::from_millis(2)),
        }
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(SmtResult::Valid),
        Some("sat") => Ok(SmtResult::Invalid(lines.collect::<Vec<_>>().join("\n"))),
        Some("unknown") => Ok(SmtResult::Unknown(lines.collect::<Vec<_>>().join("\n"))),
        Some("timeout") => Ok(SmtResult::Timeout),
        other => Err(SmtError::MalformedSolverOutput(format!("{}{}", other.unwrap_or("<no output>"), if err.is_empty() { String::new() } else { format!(" / {}", err.trim()) }))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehc::text::parse_constraint;

    fn c(s: &str) -> Constraint {
        parse_constraint(s).unwrap()
    }

    #[test]
    fn script_shape() {
        let s = embed_smt(&c("(forall (v Int) (= v 1) (= v 1))"), &SmtConfig::default()).unwrap();
        assert_eq!(s, "(set-logic ALL)\n(assert (not (forall ((v Int)) (=> (= v 1) (= v 1)))))\n(check-sat)\n");
    }

    #[test]
    fn free_variables_are_declared_with_their_sorts() {
        let s = embed_smt(&c("(and (= x 1) b (= u unit))"), &SmtConfig::default()).unwrap();
        assert!(s.contains("(declare-const x Int)"), "{s}");
        assert!(s.contains("(declare-const b Bool)"), "{s}");
        assert!(s.contains("(declare-const u Unit)") && s.contains("declare-datatypes"), "{s}");
    }

    #[test]
    fn odd_names_are_quoted() {
        assert_eq!(symbol(&Name::new("x'1")), "|x'1|");
        assert_eq!(symbol(&Name::new("n.3")), "n.3");
    }

    #[test]
    fn predicate_variables_are_rejected() {
        assert!(matches!(embed_smt(&c("(kapp k x)"), &SmtConfig::default()), Err(SmtError::UnsupportedAtom(_))));
    }

    #[test]
    fn deterministic() {
        let vc = c("(forall (a Int) true (forall (b Bool) b (or b (= a a))))");
        let cfg = SmtConfig::default();
        assert_eq!(embed_smt(&vc, &cfg).unwrap(), embed_smt(&vc, &cfg).unwrap());
    }

    #[test]
    fn missing_solver_is_reported() {
        let cfg = SmtConfig { argv: vec!["/nonexistent/solver".into()], ..SmtConfig::default() };
        assert!(matches!(check_valid(&c("true"), &cfg), Err(SmtError::SolverSpawnFailure { .. })));
    }
}
