use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use irt::driver::{self, CorpusRow, DefReport, Options, Report, Verdict};
use irt::smt::SmtConfig;

#[derive(Parser)]
#[command(name = "irt", version, about = "Refinement type checker with implicit function and pair types")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check every definition of a source file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a constraint written in the textual EHC format.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check every `.irt` file under a directory against its EXPECT header.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Qe {
    /// Congruence closure with existential witness search.
    Cc,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    dump_constraints: bool,
    #[arg(long)]
    dump_nnf: bool,
    #[arg(long)]
    dump_vc: bool,
    /// Write every solver script to this directory.
    #[arg(long, value_name = "DIR")]
    dump_smt: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cc")]
    qe: Qe,
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// First fresh-name index; fixes the names in dumps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

impl Common {
    fn options(&self) -> Options {
        let Qe::Cc = self.qe;
        let smt = SmtConfig { timeout_ms: self.timeout_ms, seed: self.seed, ..SmtConfig::default() };
        Options { seed: self.seed, jobs: self.jobs, smt, keep_stages: self.wants_stages() }
    }

    fn wants_stages(&self) -> bool {
        self.dump_constraints || self.dump_nnf || self.dump_vc || self.dump_smt.is_some()
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

/// Writes the solver scripts and returns their paths.
fn dump_smt(dir: &Path, stem: &str, report: &Report) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for d in &report.defs {
        let Some(st) = &d.stages else { continue };
        let name = if d.name.is_empty() { "file" } else { d.name.as_str() };
        let name: String = name.chars().map(|c| if c.is_alphanumeric() || c == '_' { c } else { '_' }).collect();
        for (i, (label, script)) in st.smt.iter().enumerate() {
            let p = dir.join(format!("{stem}.{name}.{label}{i}.smt2"));
            std::fs::write(&p, script)?;
            paths.push(p);
        }
    }
    Ok(paths)
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Valid => "valid".into(),
        Verdict::Invalid { reason, clause } => format!("invalid ({reason:?}): {clause}"),
        Verdict::Unknown { detail } => format!("unknown: {detail}"),
        Verdict::Error { kind, message } => format!("error ({kind}): {message}"),
    }
}

fn print_def(d: &DefReport, c: &Common) {
    let at = if d.line > 0 { format!(" at {}:{}", d.line, d.col) } else { String::new() };
    println!("{}{at}: {} [{:.1} ms]", if d.name.is_empty() { "<file>" } else { &d.name }, verdict_text(&d.verdict), d.millis);
    if let Some(st) = &d.stages {
        if c.dump_constraints {
            println!("-- constraint\n{}", st.constraint);
        }
        if c.dump_nnf {
            println!("-- nnf\n{}", st.nnf);
        }
        if c.dump_vc {
            println!("-- vc\n{}", st.vc);
        }
    }
}

fn report_out(report: &Report, c: &Common, dumped: &[PathBuf]) {
    if c.json {
        let mut v = serde_json::to_value(report).expect("report serializes");
        v["exit_code"] = report.exit_code().into();
        v["dumped"] = dumped.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().into();
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        return;
    }
    println!("{}", report.path);
    for d in &report.defs {
        print_def(d, c);
    }
    for p in dumped {
        println!("wrote {}", p.display());
    }
}

fn single(file: &Path, c: &Common, solve: bool) -> i32 {
    let opts = c.options();
    let report = if solve {
        match std::fs::read_to_string(file) {
            Ok(src) => driver::solve_source(&file.display().to_string(), &src, &opts),
            Err(e) => {
                eprintln!("irt: {}: {e}", file.display());
                return 2;
            }
        }
    } else {
        driver::check_file(file, &opts)
    };
    let dumped = match &c.dump_smt {
        Some(dir) => match dump_smt(dir, &file_stem(file), &report) {
            Ok(ps) => ps,
            Err(e) => {
                eprintln!("irt: {}: {e}", dir.display());
                return 2;
            }
        },
        None => Vec::new(),
    };
    report_out(&report, c, &dumped);
    report.exit_code()
}

fn corpus(dir: &Path, c: &Common) -> i32 {
    let rows: Vec<CorpusRow> = match driver::run_corpus(dir, &c.options()) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("irt: {}: {e}", dir.display());
            return 2;
        }
    };
    if c.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
    } else {
        println!("{:<40} {:<28} {:<28} {:>9}  ok", "file", "expected", "actual", "ms");
        for r in &rows {
            let expected = r.expected.map(|e| format!("{e:?}")).unwrap_or_else(|| "<no header>".into());
            let actual = match r.reason {
                Some(reason) => format!("{} ({reason:?})", r.actual),
                None => r.actual.clone(),
            };
            println!("{:<40} {:<28} {:<28} {:>9.1}  {}", r.file, expected, actual, r.millis, if r.ok { "yes" } else { "NO" });
        }
        let bad = rows.iter().filter(|r| !r.ok).count();
        println!("{} files, {} mismatches", rows.len(), bad);
    }
    if rows.iter().all(|r| r.ok) {
        0
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.cmd {
        Cmd::Check { file, common } => single(file, common, false),
        Cmd::Solve { file, common } => single(file, common, true),
        Cmd::Corpus { dir, common } => corpus(dir, common),
    };
    ExitCode::from(code as u8)
}
