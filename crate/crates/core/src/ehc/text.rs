//! S-expression text format for constraints.
//!
//! ```text
//! (forall (n Int) true
//!   (and (exists (z Bool) (kapp k z))
//!        (forall (v Int) (= v 1) (papp p v n))))
//! ```

use thiserror::Error;

use super::Constraint;
use crate::name::Name;
use crate::pred::{BaseSort, BinOp, PKind, Pred, UnOp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, msg: msg.into() })
}

fn read_all(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 1)];
    let mut line = 1;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                stack.push((Vec::new(), line));
            }
            ')' => {
                chars.next();
                if stack.len() == 1 {
                    return err(line, "unbalanced `)`");
                }
                let (items, l) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, l));
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, line));
            }
        }
    }
    if stack.len() != 1 {
        return err(line, "unbalanced `(`");
    }
    Ok(stack.pop().unwrap().0)
}

pub fn parse_constraint(src: &str) -> Result<Constraint, ParseError> {
    let items = read_all(src)?;
    match items.len() {
        0 => err(1, "empty input"),
        1 => constraint(&items[0]),
        _ => Ok(Constraint::And(items.iter().map(constraint).collect::<Result<_, _>>()?)),
    }
}

pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    let items = read_all(src)?;
    match items.as_slice() {
        [one] => pred(one),
        _ => err(1, "expected a single predicate"),
    }
}

fn binder(s: &Sexp) -> Result<(Name, BaseSort), ParseError> {
    match s {
        Sexp::List(items, l) => match items.as_slice() {
            [Sexp::Atom(x, _), Sexp::Atom(sort, _)] => {
                let sort = BaseSort::from_name(sort).ok_or(ParseError { line: *l, msg: format!("unknown sort `{sort}`") })?;
                Ok((Name::new(x), sort))
            }
            _ => err(*l, "expected `(name Sort)` binder"),
        },
        _ => err(s.line(), "expected `(name Sort)` binder"),
    }
}

fn constraint(s: &Sexp) -> Result<Constraint, ParseError> {
    if let Sexp::List(items, l) = s {
        if let Some(Sexp::Atom(head, _)) = items.first() {
            match head.as_str() {
                "and" => return Ok(Constraint::And(items[1..].iter().map(constraint).collect::<Result<_, _>>()?)),
                "forall" => {
                    if items.len() != 4 {
                        return err(*l, "forall takes a binder, a guard and a body");
                    }
                    let (x, sort) = binder(&items[1])?;
                    return Ok(Constraint::Forall(x, sort, pred(&items[2])?, Box::new(constraint(&items[3])?)));
                }
                "exists" => {
                    if items.len() != 3 {
                        return err(*l, "exists takes a binder and a body");
                    }
                    let (x, sort) = binder(&items[1])?;
                    return Ok(Constraint::Exists(x, sort, Box::new(constraint(&items[2])?)));
                }
                _ => {}
            }
        }
    }
    Ok(Constraint::Head(pred(s)?))
}

fn pred(s: &Sexp) -> Result<Pred, ParseError> {
    match s {
        Sexp::Atom(a, l) => atom(a, *l),
        Sexp::List(items, l) => {
            let Some(Sexp::Atom(head, _)) = items.first() else {
                return err(*l, "expected an operator");
            };
            let args = &items[1..];
            let ps = || args.iter().map(pred).collect::<Result<Vec<_>, _>>();
            match head.as_str() {
                "and" => Ok(Pred::And(ps()?)),
                "or" => Ok(Pred::Or(ps()?)),
                "not" => match ps()?.as_slice() {
                    [p] => Ok(Pred::Un(UnOp::Not, Box::new(p.clone()))),
                    _ => err(*l, "`not` takes one argument"),
                },
                "-" if args.len() == 1 => match pred(&args[0])? {
                    Pred::Int(n) => Ok(Pred::Int(-n)),
                    p => Ok(Pred::Un(UnOp::Neg, Box::new(p))),
                },
                "kapp" | "papp" => {
                    let kind = if head == "kapp" { PKind::Kappa } else { PKind::Pi };
                    match args.split_first() {
                        Some((Sexp::Atom(k, _), rest)) => {
                            Ok(Pred::kapp(kind, &Name::new(k), rest.iter().map(pred).collect::<Result<_, _>>()?))
                        }
                        _ => err(*l, format!("`{head}` needs a predicate-variable name")),
                    }
                }
                op => match BinOp::from_symbol(op) {
                    Some(op) => match ps()?.as_slice() {
                        [a, b] => Ok(Pred::Bin(op, Box::new(a.clone()), Box::new(b.clone()))),
                        _ => err(*l, format!("`{}` takes two arguments", op.symbol())),
                    },
                    None => err(*l, format!("unknown operator `{op}`")),
                },
            }
        }
    }
}

fn atom(a: &str, line: usize) -> Result<Pred, ParseError> {
    match a {
        "true" => Ok(Pred::Bool(true)),
        "false" => Ok(Pred::Bool(false)),
        "unit" => Ok(Pred::Unit),
        _ if a.bytes().all(|b| b.is_ascii_digit()) => {
            a.parse().map(Pred::Int).or_else(|_| err(line, format!("integer literal `{a}` out of range")))
        }
        _ => Ok(Pred::Var(Name::new(a))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_simple() {
        let src = "(forall (n Int) true (and (exists (z Bool) (kapp k z)) (forall (v Int) (= v (- 1)) (papp p v))))";
        let c = parse_constraint(src).unwrap();
        assert_eq!(c.to_string().split_whitespace().collect::<Vec<_>>(), src.split_whitespace().collect::<Vec<_>>());
        assert_eq!(parse_constraint(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn comments_and_errors() {
        assert!(parse_constraint("; header\n(and true)").is_ok());
        let e = parse_constraint("(forall (x Real) true true)").unwrap_err();
        assert!(e.msg.contains("Real"));
        assert!(parse_constraint("(and").is_err());
        assert!(parse_constraint("(frob 1 2)").is_err());
    }
}
