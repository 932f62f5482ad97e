use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rigid_hk::chart::Window;
use rigid_hk::log::LogBranch;
use rigid_hk::padic::parse::parse_element;
use rigid_hk::pipeline::diff::report_diff;
use rigid_hk::pipeline::expansion::format_expansion;
use rigid_hk::pipeline::job::parse_branch;
use rigid_hk::pipeline::{run_suite, run_tate_job, JobSpec, SuiteName};
use rigid_hk::{Exec, HkError};

#[derive(Parser)]
#[command(name = "hk", version, about = "Hyodo-Kato cohomology of Tate curves at finite p-adic precision")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 20)]
    prec: i64,
    /// Eisenstein polynomial, e.g. `s^2-5`; omitted means `K = Q_p`.
    #[arg(long, visible_alias = "field", allow_hyphen_values = true)]
    eisenstein: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the filtered (phi, N)-module of the Tate curve with period pi^r.
    Tate {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// Branch parameter of the logarithm.
        #[arg(long, default_value = "pi")]
        q: String,
        /// Truncation window `S,T,U`.
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
        /// Verification suites to run alongside, comma separated or `all`.
        #[arg(long, value_delimiter = ',')]
        suites: Vec<String>,
        /// Persistent rank estimates of the Hyodo-Kato complex.
        #[arg(long)]
        ranks: bool,
        /// Skip the rerun at the enlarged window.
        #[arg(long)]
        no_stability: bool,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the branch log_q at an element.
    Log {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "pi")]
        q: String,
        #[arg(long)]
        eval: String,
    },
    /// Run one verification suite.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value = "pi")]
        q: String,
    },
    /// Compare two reports entrywise up to their stated precision.
    ReportDiff {
        a: PathBuf,
        b: PathBuf,
        /// Compare at most this many p-adic digits.
        #[arg(long)]
        tol: Option<i64>,
    },
}

fn parse_window(s: &str) -> Result<Window, String> {
    let v: Vec<u32> = s.split(',').map(|x| x.trim().parse::<u32>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v[..] {
        [s, t, u] => Ok(Window { s, t, u }),
        _ => Err("expected S,T,U".into()),
    }
}

fn parse_suites(names: &[String]) -> Result<Vec<SuiteName>, HkError> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(SuiteName::ALL);
        } else {
            out.push(n.parse()?);
        }
    }
    Ok(out)
}

fn base_spec(f: &FieldArgs) -> JobSpec {
    JobSpec { p: f.p, precision: f.prec, eisenstein: f.eisenstein.clone(), ..Default::default() }
}

enum Failure {
    Usage(String),
    Certification(String),
}

impl From<HkError> for Failure {
    fn from(e: HkError) -> Self {
        match e {
            HkError::Parse(_)
            | HkError::NotPrime(_)
            | HkError::NotEisenstein(_)
            | HkError::Invalid(_) | HkError::BadPrecision(_) | HkError::BadBranch(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Certification(e.to_string()),
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Tate { field, r, q, window, suites, ranks, no_stability, sequential, out } => {
            let spec = JobSpec {
                r,
                q,
                window,
                ranks,
                stability: !no_stability,
                suites: parse_suites(&suites)?,
                exec: if sequential { Exec::Sequential } else { Exec::Parallel },
                ..base_spec(&field)
            };
            let report = run_tate_job(&spec)?;
            let json = report.to_json();
            match out {
                Some(path) => std::fs::write(&path, json + "\n")
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
                None => println!("{json}"),
            }
            if !report.all_passed() {
                return Err(Failure::Certification("some certificates failed; see the report".into()));
            }
        }
        Cmd::Log { field, q, eval } => {
            let k = base_spec(&field).field()?;
            let branch = LogBranch::new(&parse_branch(&q, &k)?)?;
            let x = parse_element(&eval, &k)?;
            println!("{}", format_expansion(&branch.eval(&x)?));
        }
        Cmd::Verify { field, suite, r, q } => {
            let name: SuiteName = suite.parse()?;
            let spec = JobSpec { r, q, ..base_spec(&field) };
            spec.validate()?;
            let record = run_suite(name, &spec)?;
            println!("{}", serde_json::to_string_pretty(&record).expect("records serialize"));
            if !record.passed {
                return Err(Failure::Certification(format!("suite {name} failed")));
            }
        }
        Cmd::ReportDiff { a, b, tol } => {
            let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())));
            let diffs = report_diff(&read(&a)?, &read(&b)?, tol)?;
            for d in &diffs {
                println!("{d}");
            }
            if !diffs.is_empty() {
                return Err(Failure::Certification(format!("{} entries differ", diffs.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Certification(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}
