//! End-to-end checking: source files, constraint files and corpora.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::cgen::{definition_constraint, CgenOutput};
use crate::ehc::text::parse_constraint;
use crate::ehc::Constraint;
use crate::elab::{elaborate, Definition, Elaborated};
use crate::name::Fresh;
use crate::qe::CcQe;
use crate::smt::{check_valid, embed_smt, SmtConfig, SmtResult};
use crate::solver::{simplify, solve, SolveError, Solved};
use crate::syntax::parse;

#[derive(Clone, Debug)]
pub struct Options {
    /// First value of the fresh-name counter; dumps are reproducible for a
    /// fixed seed.
    pub seed: u64,
    pub jobs: usize,
    pub smt: SmtConfig,
    /// Keep intermediate stages in the report.
    pub keep_stages: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options { seed: 0, jobs: 1, smt: SmtConfig::default(), keep_stages: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailReason {
    /// An inhabitation side condition of a Skolem predicate is not valid.
    FailedSideCondition,
    FailedVC,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum Verdict {
    Valid,
    /// `clause` is the first top-level clause of the failing condition that
    /// the solver refutes.
    Invalid { reason: FailReason, clause: String },
    Unknown { detail: String },
    Error { kind: String, message: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Text of every pipeline stage for one definition.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Stages {
    pub constraint: String,
    pub nnf: String,
    pub vc: String,
    /// Scripts sent to the solver, labelled `main` or `side`.
    pub smt: Vec<(String, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefReport {
    pub name: String,
    pub line: u32,
    pub col: u32,
    pub verdict: Verdict,
    pub millis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<Stages>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub path: String,
    pub defs: Vec<DefReport>,
    /// Errors not attributable to a single definition.
    pub diagnostics: Vec<String>,
}

impl Report {
    fn failed(path: &str, kind: &str, message: String) -> Report {
        let verdict = Verdict::Error { kind: kind.into(), message: message.clone() };
        let def = DefReport { name: String::new(), line: 0, col: 0, verdict, millis: 0.0, stages: None };
        Report { path: path.into(), defs: vec![def], diagnostics: vec![message] }
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.defs.iter().map(|d| &d.verdict))
    }

    pub fn is_safe(&self) -> bool {
        self.defs.iter().all(|d| d.verdict.is_valid())
    }
}

/// 0 when everything is valid, 2 on any error, otherwise 1 on any invalid
/// verdict and 3 on any unknown one.
pub fn exit_code<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> i32 {
    let vs: Vec<&Verdict> = verdicts.into_iter().collect();
    if vs.iter().any(|v| matches!(v, Verdict::Error { .. })) {
        2
    } else if vs.iter().any(|v| matches!(v, Verdict::Invalid { .. })) {
        1
    } else if vs.iter().any(|v| matches!(v, Verdict::Unknown { .. })) {
        3
    } else {
        0
    }
}

/// Parse and elaborate; the fresh supply continues from the seed.
pub fn elaborate_source(src: &str, fresh: &Fresh) -> Result<Elaborated, String> {
    let prog = parse(src).map_err(|e| e.to_string())?;
    elaborate(&prog, fresh).map_err(|e| e.to_string())
}

/// Constraint of every definition, in declaration order.
pub fn definition_constraints(src: &str, seed: u64) -> Result<Vec<(String, CgenOutput)>, String> {
    let fresh = Fresh::new(seed);
    let el = elaborate_source(src, &fresh)?;
    el.defs
        .iter()
        .map(|d| {
            let f = Fresh::new(fresh.peek());
            definition_constraint(&d.scope, &el.data, &d.body, d.sig.as_ref(), &f)
                .map(|o| (d.name.to_string(), o))
                .map_err(|e| format!("{}: in `{}`: {e}", d.span, d.name))
        })
        .collect()
}

/// Top-level clauses of a condition, with universal prefixes distributed
/// over conjunctions.
fn clauses(c: &Constraint) -> Vec<Constraint> {
    match c {
        Constraint::And(cs) => cs.iter().flat_map(clauses).collect(),
        Constraint::Forall(x, s, p, body) => {
            clauses(body).into_iter().map(|b| Constraint::forall(x, *s, p.clone(), b)).collect()
        }
        c => vec![c.clone()],
    }
}

enum Decided {
    Valid,
    Invalid(String),
    Unknown(String),
}

fn decide(vc: &Constraint, label: &str, opts: &Options, stages: &mut Stages) -> Result<Decided, String> {
    let vc = simplify(vc);
    if vc.is_true() {
        return Ok(Decided::Valid);
    }
    stages.smt.push((label.into(), embed_smt(&vc, &opts.smt).map_err(|e| e.to_string())?));
    match check_valid(&vc, &opts.smt).map_err(|e| e.to_string())? {
        SmtResult::Valid => Ok(Decided::Valid),
        SmtResult::Invalid(_) => {
            for cl in clauses(&vc) {
                if let Ok(SmtResult::Invalid(_)) = check_valid(&cl, &opts.smt) {
                    return Ok(Decided::Invalid(cl.to_string()));
                }
            }
            Ok(Decided::Invalid(vc.to_string()))
        }
        SmtResult::Unknown(m) => Ok(Decided::Unknown(format!("solver returned unknown {m}"))),
        SmtResult::Timeout => Ok(Decided::Unknown(format!("solver timed out after {} ms", opts.smt.timeout_ms))),
    }
}

/// Verdict for one constraint: solve, then discharge the main and side
/// conditions.
pub fn verdict_for(c: &Constraint, opts: &Options, fresh: &Fresh, stages: &mut Stages) -> Verdict {
    let solved: Solved = match solve(c, &CcQe, fresh) {
        Ok(s) => s,
        Err(e @ SolveError::CyclicKappa(_)) => return Verdict::Error { kind: "cyclic".into(), message: e.to_string() },
    };
    stages.nnf = solved.nnf.to_string();
    stages.vc = solved.vc().to_string();
    let main = match decide(&solved.vc_main, "main", opts, stages) {
        Ok(d) => d,
        Err(message) => return Verdict::Error { kind: "smt".into(), message },
    };
    let side = match decide(&solved.vc_side, "side", opts, stages) {
        Ok(d) => d,
        Err(message) => return Verdict::Error { kind: "smt".into(), message },
    };
    // A failed instantiation also weakens the main condition, so the side
    // condition is reported first as the root cause.
    match (main, side) {
        (_, Decided::Invalid(clause)) => Verdict::Invalid { reason: FailReason::FailedSideCondition, clause },
        (Decided::Invalid(clause), _) => Verdict::Invalid { reason: FailReason::FailedVC, clause },
        (Decided::Unknown(detail), _) | (_, Decided::Unknown(detail)) => Verdict::Unknown { detail },
        (Decided::Valid, Decided::Valid) => Verdict::Valid,
    }
}

fn check_definition(el: &Elaborated, d: &Definition, seed: u64, opts: &Options) -> DefReport {
    let start = Instant::now();
    let fresh = Fresh::new(seed);
    let mut stages = Stages::default();
    let verdict = match definition_constraint(&d.scope, &el.data, &d.body, d.sig.as_ref(), &fresh) {
        Err(e) => Verdict::Error { kind: "cgen".into(), message: format!("{}: {e}", d.span) },
        Ok(out) => {
            stages.constraint = out.constraint.to_string();
            verdict_for(&out.constraint, opts, &fresh, &mut stages)
        }
    };
    DefReport {
        name: d.name.to_string(),
        line: d.span.line,
        col: d.span.col,
        verdict,
        millis: start.elapsed().as_secs_f64() * 1e3,
        stages: opts.keep_stages.then_some(stages),
    }
}

pub fn check_source(path: &str, src: &str, opts: &Options) -> Report {
    let fresh = Fresh::new(opts.seed);
    let prog = match parse(src) {
        Ok(p) => p,
        Err(e) => return Report::failed(path, "syntax", e.to_string()),
    };
    let el = match elaborate(&prog, &fresh) {
        Ok(el) => el,
        Err(e) => return Report::failed(path, "elaboration", e.to_string()),
    };
    let seed = fresh.peek();
    let slots: Vec<Mutex<Option<DefReport>>> = el.defs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.clamp(1, el.defs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(d) = el.defs.get(i) else { break };
                let r = check_definition(&el, d, seed, opts);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let defs = slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot filled")).collect();
    Report { path: path.into(), defs, diagnostics: Vec::new() }
}

pub fn check_file(path: &Path, opts: &Options) -> Report {
    match std::fs::read_to_string(path) {
        Ok(src) => check_source(&path.display().to_string(), &src, opts),
        Err(e) => Report::failed(&path.display().to_string(), "io", e.to_string()),
    }
}

/// Solve a constraint written in the textual format.
pub fn solve_source(path: &str, src: &str, opts: &Options) -> Report {
    let start = Instant::now();
    let c = match parse_constraint(src) {
        Ok(c) => c,
        Err(e) => return Report::failed(path, "syntax", e.to_string()),
    };
    let mut stages = Stages { constraint: c.to_string(), ..Stages::default() };
    let verdict = verdict_for(&c, opts, &Fresh::new(opts.seed), &mut stages);
    let def = DefReport {
        name: "constraint".into(),
        line: 1,
        col: 1,
        verdict,
        millis: start.elapsed().as_secs_f64() * 1e3,
        stages: opts.keep_stages.then_some(stages),
    };
    Report { path: path.into(), defs: vec![def], diagnostics: Vec::new() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Expect {
    Safe,
    Unsafe(Option<FailReason>),
}

/// The `-- EXPECT: safe` or `-- EXPECT: unsafe [FailedVC|FailedSideCondition]`
/// header of a corpus file.
pub fn expectation(src: &str) -> Option<Expect> {
    src.lines().find_map(|l| {
        let rest = l.trim().strip_prefix("--")?.trim().strip_prefix("EXPECT:")?;
        let mut words = rest.split_whitespace();
        match (words.next()?, words.next()) {
            ("safe", None) => Some(Expect::Safe),
            ("unsafe", None) => Some(Expect::Unsafe(None)),
            ("unsafe", Some("FailedVC")) => Some(Expect::Unsafe(Some(FailReason::FailedVC))),
            ("unsafe", Some("FailedSideCondition")) => Some(Expect::Unsafe(Some(FailReason::FailedSideCondition))),
            _ => None,
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub expected: Option<Expect>,
    /// `safe`, `unsafe`, `unknown` or `error`.
    pub actual: String,
    pub reason: Option<FailReason>,
    pub ok: bool,
    pub millis: f64,
    pub report: Report,
}

fn first_reason(r: &Report) -> Option<FailReason> {
    r.defs.iter().find_map(|d| match &d.verdict {
        Verdict::Invalid { reason, .. } => Some(*reason),
        _ => None,
    })
}

pub fn corpus_row(path: &Path, opts: &Options) -> CorpusRow {
    let start = Instant::now();
    let src = std::fs::read_to_string(path).unwrap_or_default();
    let expected = expectation(&src);
    let report = check_file(path, opts);
    let reason = first_reason(&report);
    let actual = match report.exit_code() {
        0 => "safe",
        1 => "unsafe",
        3 => "unknown",
        _ => "error",
    };
    let ok = match expected {
        Some(Expect::Safe) => actual == "safe",
        Some(Expect::Unsafe(None)) => actual == "unsafe",
        Some(Expect::Unsafe(Some(r))) => actual == "unsafe" && reason == Some(r),
        None => false,
    };
    CorpusRow {
        file: path.display().to_string(),
        expected,
        actual: actual.into(),
        reason,
        ok,
        millis: start.elapsed().as_secs_f64() * 1e3,
        report,
    }
}

/// Every `.irt` file under `dir`, sorted by path.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            out.extend(corpus_files(&p)?);
        } else if p.extension().is_some_and(|e| e == "irt") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn run_corpus(dir: &Path, opts: &Options) -> std::io::Result<Vec<CorpusRow>> {
    Ok(corpus_files(dir)?.iter().map(|p| corpus_row(p, opts)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let inv = Verdict::Invalid { reason: FailReason::FailedVC, clause: String::new() };
        let unk = Verdict::Unknown { detail: String::new() };
        let err = Verdict::Error { kind: String::new(), message: String::new() };
        assert_eq!(exit_code([&Verdict::Valid]), 0);
        assert_eq!(exit_code([&Verdict::Valid, &inv, &unk]), 1);
        assert_eq!(exit_code([&Verdict::Valid, &unk]), 3);
        assert_eq!(exit_code([&inv, &err]), 2);
        assert_eq!(exit_code([]), 0);
    }

    #[test]
    fn expectation_headers() {
        assert_eq!(expectation("-- EXPECT: safe\nf = 1"), Some(Expect::Safe));
        assert_eq!(expectation("-- EXPECT: unsafe FailedSideCondition"), Some(Expect::Unsafe(Some(FailReason::FailedSideCondition))));
        assert_eq!(expectation("f = 1"), None);
    }

    #[test]
    fn clauses_distribute_foralls() {
        let c = parse_constraint("(forall (x Int) (= x 1) (and (= x 1) (> x 0)))").unwrap();
        assert_eq!(clauses(&c).len(), 2);
    }
}
