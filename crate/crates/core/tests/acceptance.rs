//! One PASS/FAIL line per acceptance criterion.
//!
//! A criterion listed in `KNOWN_FAILURES` is reported as FAIL and the test
//! then requires its failure message to carry the recorded diagnosis, so a
//! change in behaviour in either direction is noticed.

#[macro_use]
mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use irt::driver::{self, check_source, definition_constraints, solve_source, Expect, FailReason, Options, Verdict};
use irt::ehc::normal::canonical;
use irt::ehc::oracle::{brute_force_sat, brute_force_valid, Domain};
use irt::ehc::random::{closed_vc, VC_RANGE};
use irt::ehc::text::parse_constraint;
use irt::ehc::Constraint;
use irt::name::{Fresh, Name};
use irt::pred::{BaseSort, Pred, TRUE};
use irt::qe::CcQe;
use irt::smt::{check_valid, SmtConfig, SmtResult};
use irt::solver::{noside, poke, scoped, sol_k, solve, Sol};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::Outcome;

const EXAMPLE: &str = "
foo :: [n:Int] -> (Bool -> {v:Int | v = n}) -> ()
foo f = assert (f True = f False)

test = let y = \\z -> 1 in foo y
";

const EXPECTED_EHC: &str = "
(and (forall (z Bool) true (forall (v Int) (= v 1) (kapp k v)))
     (exists (n Int) (forall (v Int) (kapp k v) (= v n))))";

const EXPECTED_HC: &str = "
(and (forall (z Bool) true (forall (v Int) (= v 1) (kapp k v)))
     (forall (n Int) (papp p n) (forall (v Int) (kapp k v) (= v n)))
     (exists (n Int) (papp p n)))";

// Horn part after eliminating `k`: its solution is pushed out of the guard
// as the binders `z` and `v1`.
const STEP2: &str = "
(and (forall (n Int) (papp p n)
       (forall (v Int) true (forall (z Bool) true (forall (v1 Int) (and (= v1 1) (= v1 v)) (= v n)))))
     (exists (n Int) (papp p n)))";

/// Criteria whose failure is understood, with a fragment of the expected
/// failure message.
const KNOWN_FAILURES: [(u32, &str); 1] = [(4, "verbatim tick EHC is unsatisfiable")];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn parse(src: &str) -> Constraint {
    parse_constraint(src).unwrap_or_else(|e| panic!("{e}: {src}"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn golden_pipeline() -> Outcome {
    let start = Instant::now();
    let defs = definition_constraints(EXAMPLE, 0)?;
    let (_, out) = defs.iter().find(|(n, _)| n == "test").ok_or("no `test` definition")?;
    let ehc = &out.constraint;
    ensure!(canonical(ehc) == canonical(&parse(EXPECTED_EHC)), "EHC differs from the expected one:\n{ehc}");

    // The remaining stages run on the generated constraint and on the
    // expected constraint it was just shown equivalent to. The generated refinement
    // variable also ranges over the unused `z`, which survives into its
    // solution, so the intermediate stages are compared on the latter.
    let expected = parse(EXPECTED_EHC);
    for c in [ehc, &expected] {
        let (hc, pis) = poke(c, &Fresh::new(100));
        ensure!(pis.len() == 1, "expected one Skolem predicate, got {pis:?}");
        ensure!(canonical(&hc) == canonical(&parse(EXPECTED_HC)), "poke output differs:\n{hc}");
        let solved = solve(c, &CcQe, &Fresh::new(100)).map_err(|e| e.to_string())?;
        ensure!(
            c != &expected || canonical(&solved.kappa_free) == canonical(&parse(STEP2)),
            "after eliminating refinement variables:\n{}",
            solved.kappa_free
        );
        let n = &solved.pis[0].params[0].0;
        let guard = &solved.skolem_sols[0].1.guard;
        ensure!(*guard == Pred::eq(Pred::var(n), Pred::Int(1)), "pi({n}) := {guard}");
    }

    let (hc, _) = poke(&expected, &Fresh::new(100));
    let k = Name::new("k");
    let x = Name::new("x");
    let sol = sol_k(&k, std::slice::from_ref(&x), &noside(scoped(&k, &hc)));
    // Equalities from heads are oriented parameter first.
    let (z1, v1) = (Name::new("z'"), Name::new("v'"));
    let want = Sol::Exists(
        z1,
        BaseSort::Bool,
        TRUE,
        Box::new(Sol::Exists(
            v1.clone(),
            BaseSort::Int,
            Pred::eq(Pred::var(&v1), Pred::Int(1)),
            Box::new(Sol::Pred(Pred::eq(Pred::var(&x), Pred::var(&v1)))),
        )),
    );
    ensure!(sol.canonical() == want.canonical(), "sol_k = {sol}");

    let report = check_source("example", EXAMPLE, &Options::default());
    ensure!(report.is_safe(), "verdicts {:?}", report.defs.iter().map(|d| &d.verdict).collect::<Vec<_>>());
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(())
}

fn corpus_verdicts() -> Outcome {
    let want: [(&str, Expect); 6] = [
        ("incr.irt", Expect::Safe),
        ("sum.irt", Expect::Safe),
        ("foobar.irt", Expect::Safe),
        ("incrState.irt", Expect::Safe),
        ("tick.irt", Expect::Safe),
        ("d2.irt", Expect::Unsafe(Some(FailReason::FailedSideCondition))),
    ];
    let dir = root().join("corpus");
    let mut problems = Vec::new();
    for (file, expect) in want {
        let path = dir.join(file);
        let src = std::fs::read_to_string(&path).map_err(|e| format!("{file}: {e}"))?;
        if driver::expectation(&src) != Some(expect) {
            problems.push(format!("{file}: header disagrees with {expect:?}"));
        }
        let row = driver::corpus_row(&path, &Options::default());
        if !row.ok {
            problems.push(format!("{file}: {} {:?}", row.actual, row.reason));
        }
        if row.millis >= 5000.0 {
            problems.push(format!("{file}: {:.0} ms", row.millis));
        }
    }
    let rows = driver::run_corpus(&dir, &Options::default()).map_err(|e| e.to_string())?;
    problems.extend(rows.iter().filter(|r| !r.ok).map(|r| format!("{}: {} {:?}", r.file, r.actual, r.reason)));
    ensure!(problems.is_empty(), "{}", problems.join("; "));
    Ok(())
}

fn rejections() -> Outcome {
    let dir = root().join("corpus");
    let src = std::fs::read_to_string(dir.join("foo_bad.irt")).map_err(|e| e.to_string())?;
    let report = check_source("foo_bad.irt", &src, &Options::default());
    let bad = report.defs.iter().find(|d| d.name == "bad").ok_or("no `bad` definition")?;
    ensure!(matches!(bad.verdict, Verdict::Invalid { .. }), "bad: {:?}", bad.verdict);
    let defs = definition_constraints(&src, 0)?;
    let (_, out) = defs.iter().find(|(n, _)| n == "bad").ok_or("no `bad` constraint")?;
    let sat = brute_force_sat(&out.constraint, &Domain::ints(0..=2), 1 << 16).map_err(|e| e.to_string())?;
    ensure!(sat.is_none(), "oracle finds a solution for {}", out.constraint);
    for file in ["tokens_reuse.irt", "tocker_wrong.irt"] {
        let report = driver::check_file(&dir.join(file), &Options::default());
        ensure!(report.exit_code() == 1, "{file}: exit {}", report.exit_code());
    }
    Ok(())
}

fn solve_fixture(name: &str) -> Result<(Verdict, Duration), String> {
    let path = root().join("fixtures").join(name);
    let src = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
    let (report, took) = timed(|| solve_source(name, &src, &Options::default()));
    Ok((report.defs[0].verdict.clone(), took))
}

fn tick_fixture() -> Outcome {
    let (verdict, took) = solve_fixture("tick.ehc")?;
    ensure!(took < Duration::from_secs(5), "tick.ehc took {took:?}");
    if verdict.is_valid() {
        return Ok(());
    }
    // The chain `true => k9 => k14 => k17 => v = n` alone has no solution,
    // so no solver can validate the verbatim transcription.
    let chain = parse(
        "(forall (n Int) true (and (forall (v Int) true (kapp k9 v))
                                   (forall (v Int) (kapp k9 v) (kapp k14 v))
                                   (forall (v Int) (kapp k14 v) (kapp k17 v))
                                   (forall (v Int) (kapp k17 v) (= v n))))",
    );
    let chain_sat = brute_force_sat(&chain, &Domain::ints(0..=2), 1 << 12).map_err(|e| e.to_string())?;
    ensure!(chain_sat.is_none(), "sub-chain is satisfiable; diagnosis no longer holds");
    let (fixed, _) = solve_fixture("tick_fixed.ehc")?;
    ensure!(fixed.is_valid(), "corrected transcription is {fixed:?}");
    Err(format!("verbatim tick EHC is unsatisfiable ({verdict:?}); corrected transcription is Valid"))
}

fn properties() -> Outcome {
    let start = Instant::now();
    for (label, prop) in common::ALL {
        for seed in 0..100 {
            prop(seed).map_err(|e| format!("({label}) seed {seed}: {e}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(())
}

fn separability() -> Outcome {
    for (i, (src, acyclic, blocker)) in common::SEPARABILITY.into_iter().enumerate() {
        common::separability_case(src, acyclic, blocker).map_err(|e| format!("instance {i}: {e}"))?;
    }
    for seed in 0..100 {
        common::generated_instances_separate(seed)?;
    }
    Ok(())
}

fn smt_integration() -> Outcome {
    let cfg = SmtConfig::default();
    let opts = Options { keep_stages: true, ..Options::default() };
    let rows = driver::run_corpus(&root().join("corpus"), &opts).map_err(|e| e.to_string())?;
    let mut scripts = 0;
    for row in &rows {
        for d in &row.report.defs {
            for (label, script) in d.stages.iter().flat_map(|s| &s.smt) {
                scripts += 1;
                let out = std::process::Command::new(&cfg.argv[0])
                    .args(&cfg.argv[1..])
                    .stdin(std::process::Stdio::piped())
                    .stdout(std::process::Stdio::piped())
                    .stderr(std::process::Stdio::piped())
                    .spawn()
                    .and_then(|mut child| {
                        use std::io::Write;
                        child.stdin.take().unwrap().write_all(script.as_bytes())?;
                        child.wait_with_output()
                    })
                    .map_err(|e| format!("{}: {e}", cfg.argv.join(" ")))?;
                let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
                ensure!(!text.contains("error"), "{} {} {label}: {text}", row.file, d.name);
            }
        }
    }
    ensure!(scripts > 0, "no solver scripts were produced");

    let dom = Domain::ints(VC_RANGE.0..=VC_RANGE.1);
    let mut rng = StdRng::seed_from_u64(0xacce);
    for _ in 0..50 {
        let vc = closed_vc(&mut rng, 5);
        let expected = brute_force_valid(&vc, &dom).map_err(|e| e.to_string())?;
        let agrees = match check_valid(&vc, &cfg).map_err(|e| e.to_string())? {
            SmtResult::Valid => expected,
            SmtResult::Invalid(_) => !expected,
            other => return Err(format!("{other:?} on {vc}")),
        };
        ensure!(agrees, "solver and evaluator disagree on {vc}");
    }
    Ok(())
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        (1, "golden pipeline on the running example", golden_pipeline),
        (2, "corpus verdicts", corpus_verdicts),
        (3, "rejection tests", rejections),
        (4, "tick EHC fixture solves to Valid", tick_fixture),
        (5, "property suite", properties),
        (6, "separability", separability),
        (7, "SMT integration", smt_integration),
    ];
    let mut unexpected = Vec::new();
    for (id, title, check) in criteria {
        let (outcome, took) = timed(check);
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        match &outcome {
            Ok(()) => println!("PASS {id} {title} [{took:.2?}]"),
            Err(e) => println!("FAIL {id} {title} [{took:.2?}]: {e}"),
        }
        match (outcome, known) {
            (Ok(()), None) => {}
            (Err(e), Some(why)) if e.contains(why) => {}
            (Ok(()), Some(_)) => unexpected.push(format!("criterion {id} now passes; update KNOWN_FAILURES")),
            (Err(e), _) => unexpected.push(format!("criterion {id}: {e}")),
        }
    }
    assert!(unexpected.is_empty(), "{}", unexpected.join("\n"));
}
