//! `wpdrv`: verify annotated C against its specs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use wpdrv_core::frontend::{self, Diagnostic};
use wpdrv_core::interpreter::oracle_check;
use wpdrv_core::pipeline::{self, VerifyOptions};
use wpdrv_core::solver::{export_smtlib, smt2_file_name, Budget};
use wpdrv_core::translator::{dump_ir, Program};

const EXIT_REJECTED: u8 = 3;
/// What a shell reports for a process killed by SIGPIPE.
const EXIT_BROKEN_PIPE: u8 = 141;

macro_rules! out {
    ($($arg:tt)*) => { write!(std::io::stdout().lock(), $($arg)*)? };
}

macro_rules! outln {
    ($($arg:tt)*) => { writeln!(std::io::stdout().lock(), $($arg)*)? };
}

#[derive(Parser)]
#[command(name = "wpdrv", version, about = "Weakest-precondition verifier for an annotated C subset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and discharge every VC; exit 0 proved, 1 counterexample, 2 unknown, 3 rejected.
    Verify(Common),
    /// Run the frontend and print diagnostics.
    Parse(Common),
    /// Print the deep and monadic translation.
    DumpIr(Common),
    /// Print the verification conditions.
    Vcs(Common),
    /// Write one SMT-LIB 2 file per VC.
    Smtlib {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check specs against random concrete executions.
    Oracle(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Preprocessed C source.
    file: PathBuf,
    /// Only this spec.
    #[arg(long)]
    spec: Option<String>,
    /// Extra annotation file; `<dir>/specs/<stem>.spec` is read when present.
    #[arg(long = "spec-file")]
    spec_files: Vec<PathBuf>,
    /// Demand termination for every spec.
    #[arg(long)]
    total: bool,
    /// Replace wrapping arithmetic by guarded integer arithmetic.
    #[arg(long)]
    abstract_words: bool,
    /// Count unknown VCs as assumed instead of failing.
    #[arg(long)]
    assume_unproved: bool,
    /// Havoc all globals at contract calls instead of using modifies sets.
    #[arg(long)]
    skip_modifies: bool,
    /// Solver threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-VC time budget in seconds.
    #[arg(long, env = "WPDRV_BUDGET", default_value_t = 10.0)]
    budget: f64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
    /// Oracle seed.
    #[arg(long, env = "WPDRV_SEED", default_value_t = 0)]
    seed: u64,
    /// Oracle trials (verify runs the oracle only when this is set).
    #[arg(long)]
    trials: Option<usize>,
    /// Include per-VC solver times in the report.
    #[arg(long)]
    timings: bool,
}

struct Input {
    path: String,
    source: String,
    specs: Vec<(PathBuf, String)>,
}

impl Input {
    fn read(c: &Common) -> Result<Input> {
        let source = std::fs::read_to_string(&c.file).with_context(|| format!("reading {}", c.file.display()))?;
        let mut paths = Vec::new();
        if let (Some(dir), Some(stem)) = (c.file.parent(), c.file.file_stem()) {
            let p = dir.join("specs").join(Path::new(stem).with_extension("spec"));
            if p.is_file() {
                paths.push(p);
            }
        }
        paths.extend(c.spec_files.iter().cloned());
        let specs = paths
            .into_iter()
            .map(|p| std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display())).map(|s| (p, s)))
            .collect::<Result<_>>()?;
        Ok(Input { path: c.file.display().to_string(), source, specs })
    }

    fn spec_sources(&self) -> Vec<&str> {
        self.specs.iter().map(|(_, s)| s.as_str()).collect()
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.source.as_bytes());
        for (_, s) in &self.specs {
            h.update([0u8]);
            h.update(s.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn report(&self, diags: &[Diagnostic]) {
        for d in diags {
            eprintln!("{}", d.render(&self.path));
        }
    }
}

fn options(c: &Common) -> VerifyOptions {
    let jobs = c.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    VerifyOptions {
        spec: c.spec.clone(),
        total: c.total,
        abstract_words: c.abstract_words,
        assume_unproved: c.assume_unproved,
        skip_modifies: c.skip_modifies,
        jobs,
        budget: Budget { time: Duration::from_secs_f64(c.budget.max(0.001)), ..Budget::default() },
        trials: c.trials.unwrap_or(0),
        seed: c.seed,
        timings: c.timings,
    }
}

fn load(input: &Input, opts: &VerifyOptions) -> Result<Program, ExitCode> {
    pipeline::load_program(&input.source, &input.spec_sources(), opts.translate_options()).map_err(|d| {
        input.report(&d);
        ExitCode::from(EXIT_REJECTED)
    })
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Parse(c) => {
            let input = Input::read(&c)?;
            let a = frontend::analyze(&input.source, &input.spec_sources());
            input.report(&a.diagnostics);
            if c.json {
                outln!("{}", serde_json::to_string_pretty(&a.diagnostics)?);
            }
            Ok(if a.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_REJECTED) })
        }
        Command::DumpIr(c) => {
            let input = Input::read(&c)?;
            let prog = match load(&input, &options(&c)) {
                Ok(p) => p,
                Err(code) => return Ok(code),
            };
            out!("{}", dump_ir(&prog));
            Ok(ExitCode::SUCCESS)
        }
        Command::Vcs(c) => {
            let input = Input::read(&c)?;
            let opts = options(&c);
            let prog = match load(&input, &opts) {
                Ok(p) => p,
                Err(code) => return Ok(code),
            };
            match pipeline::generate(&prog, &opts) {
                Ok(groups) => {
                    for (_, vcs) in groups {
                        for v in vcs {
                            out!("{v}");
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(d) => {
                    input.report(&d);
                    Ok(ExitCode::from(EXIT_REJECTED))
                }
            }
        }
        Command::Smtlib { common: c, out } => {
            let input = Input::read(&c)?;
            let opts = options(&c);
            let prog = match load(&input, &opts) {
                Ok(p) => p,
                Err(code) => return Ok(code),
            };
            let groups = match pipeline::generate(&prog, &opts) {
                Ok(g) => g,
                Err(d) => {
                    input.report(&d);
                    return Ok(ExitCode::from(EXIT_REJECTED));
                }
            };
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            for (_, vcs) in groups {
                for v in vcs.iter().filter(|v| v.unprovable.is_none()) {
                    let p = out.join(smt2_file_name(v));
                    std::fs::write(&p, export_smtlib(v)).with_context(|| format!("writing {}", p.display()))?;
                    outln!("{}", p.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(c) => {
            let input = Input::read(&c)?;
            let opts = options(&c);
            let prog = match load(&input, &opts) {
                Ok(p) => p,
                Err(code) => return Ok(code),
            };
            let specs: Vec<_> = match &c.spec {
                Some(name) => match prog.spec(name) {
                    Some(s) => vec![s],
                    None => {
                        eprintln!("{}: error[unknown-spec]: no spec named `{name}`", input.path);
                        return Ok(ExitCode::from(EXIT_REJECTED));
                    }
                },
                None => prog.specs.iter().collect(),
            };
            let trials = c.trials.unwrap_or(10_000);
            let reports: Vec<_> = specs.iter().map(|s| oracle_check(&prog, s, trials, c.seed)).collect();
            if c.json {
                outln!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    outln!(
                        "{} ({}): {} trials, {} vacuous, {} diverged, {} violations, {} faults",
                        r.spec,
                        r.function,
                        r.trials,
                        r.vacuous,
                        r.diverged,
                        r.violations.len(),
                        r.faults.len()
                    );
                    for w in r.violations.iter().chain(&r.faults).take(3) {
                        outln!("  trial {}: {}", w.trial, w.detail);
                    }
                }
            }
            Ok(if reports.iter().all(|r| r.clean()) { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Verify(c) => {
            let input = Input::read(&c)?;
            let opts = options(&c);
            let prog = match load(&input, &opts) {
                Ok(p) => p,
                Err(code) => return Ok(code),
            };
            let mut report = match pipeline::verify(&prog, &input.path, &opts) {
                Ok(r) => r,
                Err(d) => {
                    input.report(&d);
                    return Ok(ExitCode::from(EXIT_REJECTED));
                }
            };
            report.input_digest = input.digest();
            if c.json {
                outln!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                out!("{}", report.render_text());
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::from(EXIT_BROKEN_PIPE)
        }
        Err(e) => {
            eprintln!("wpdrv: {e:#}");
            ExitCode::from(EXIT_REJECTED)
        }
    }
}
