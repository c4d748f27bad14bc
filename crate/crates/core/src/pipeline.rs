//! End-to-end verification: translate, generate VCs, discharge them and
//! assemble a report.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::frontend::{self, Diagnostic, Loc};
use crate::interpreter::{oracle_check, OracleReport};
use crate::logic::{vcgen, Provenance, Vc, WpError, WpOptions};
use crate::solver::{prove_vc, Budget, ProofResult};
use crate::translator::{translate, Program, TranslateOptions};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Only this spec (by name); all specs when `None`.
    pub spec: Option<String>,
    pub total: bool,
    pub abstract_words: bool,
    pub assume_unproved: bool,
    pub skip_modifies: bool,
    pub jobs: usize,
    pub budget: Budget,
    /// Oracle trials per fully proved spec; 0 disables the oracle.
    pub trials: usize,
    pub seed: u64,
    /// Record per-VC wall-clock times in the report.
    pub timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            spec: None,
            total: false,
            abstract_words: false,
            assume_unproved: false,
            skip_modifies: false,
            jobs: 1,
            budget: Budget::default(),
            trials: 0,
            seed: 0,
            timings: false,
        }
    }
}

impl VerifyOptions {
    pub fn translate_options(&self) -> TranslateOptions {
        TranslateOptions { abstract_words: self.abstract_words }
    }

    pub fn wp_options(&self) -> WpOptions {
        WpOptions { total: self.total, skip_modifies: self.skip_modifies }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Proved,
    Counterexample,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VcReport {
    pub index: usize,
    pub provenance: Provenance,
    pub detail: String,
    pub loc: Loc,
    pub result: Outcome,
    /// Counterexample values, rendered as `0x..#width`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// An unknown result accepted because of `--assume-unproved`.
    pub assumed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecReport {
    pub spec: String,
    pub function: String,
    pub total: bool,
    pub vc_count: usize,
    pub vcs: Vec<VcReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub specs: usize,
    pub vcs: usize,
    pub proved: usize,
    pub counterexamples: usize,
    pub unknown: usize,
    pub assumed: usize,
    pub oracle_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub input: String,
    /// Filled in by the caller (hash of the source and spec files).
    pub input_digest: String,
    pub specs: Vec<SpecReport>,
    pub summary: Summary,
}

impl Report {
    /// 0 all proved (or assumed), 1 a counterexample or oracle violation,
    /// 2 an unknown that was not assumed.
    pub fn exit_code(&self) -> i32 {
        let s = &self.summary;
        if s.counterexamples > 0 || s.oracle_violations > 0 {
            1
        } else if s.unknown > s.assumed {
            2
        } else {
            0
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.specs {
            out.push_str(&format!(
                "spec {} ({}{}): {} VCs\n",
                s.spec,
                s.function,
                if s.total { ", total" } else { "" },
                s.vc_count
            ));
            for v in &s.vcs {
                let res = match v.result {
                    Outcome::Proved => "proved".to_string(),
                    Outcome::Counterexample => {
                        let a = v.assignment.iter().flatten().map(|(k, x)| format!("{k}={x}")).collect::<Vec<_>>();
                        format!("counterexample {}", a.join(" "))
                    }
                    Outcome::Unknown => format!(
                        "unknown{} ({})",
                        if v.assumed { ", assumed" } else { "" },
                        v.reason.as_deref().unwrap_or("")
                    ),
                };
                let t = v.millis.map(|m| format!(" [{m:.1} ms]")).unwrap_or_default();
                out.push_str(&format!(
                    "  {:>3} {:<20} {:>7}  {}{}\n",
                    v.index,
                    v.provenance.tag(),
                    v.loc.to_string(),
                    res,
                    t
                ));
            }
            if let Some(o) = &s.oracle {
                out.push_str(&format!(
                    "  oracle: {} trials, {} vacuous, {} violations, {} faults\n",
                    o.trials,
                    o.vacuous,
                    o.violations.len(),
                    o.faults.len()
                ));
            }
        }
        let m = &self.summary;
        out.push_str(&format!(
            "{} specs, {} VCs: {} proved, {} counterexamples, {} unknown ({} assumed)\n",
            m.specs, m.vcs, m.proved, m.counterexamples, m.unknown, m.assumed
        ));
        out
    }
}

/// Frontend plus translation of one unit.
pub fn load_program(src: &str, spec_sources: &[&str], opts: TranslateOptions) -> Result<Program, Vec<Diagnostic>> {
    let ast = frontend::load(src, spec_sources)?;
    translate(&ast, opts)
}

pub fn wp_diagnostic(e: &WpError) -> Diagnostic {
    match e {
        WpError::MissingInvariant { function, loc } => Diagnostic::error(
            "missing-invariant",
            *loc,
            format!("loop in `{function}` has no invariant, required for total correctness"),
        ),
        WpError::MissingMeasure { function, loc } => Diagnostic::error(
            "missing-measure",
            *loc,
            format!("loop in `{function}` has no measure, required for total correctness"),
        ),
        WpError::NoFunction(s) => Diagnostic::error(
            "no-function",
            Loc::default(),
            format!("spec `{s}` targets a function that was not translated"),
        ),
    }
}

/// Generate the VCs of the selected specs, failing with diagnostics when
/// a spec is unknown or malformed.
pub fn generate(prog: &Program, opts: &VerifyOptions) -> Result<Vec<(String, Vec<Vc>)>, Vec<Diagnostic>> {
    let specs: Vec<_> = match &opts.spec {
        Some(name) => match prog.spec(name) {
            Some(s) => vec![s],
            None => {
                return Err(vec![Diagnostic::error("unknown-spec", Loc::default(), format!("no spec named `{name}`"))])
            }
        },
        None => prog.specs.iter().collect(),
    };
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for s in specs {
        match vcgen(prog, s, opts.wp_options()) {
            Ok(v) => out.push((s.name.clone(), v)),
            Err(e) => diags.push(wp_diagnostic(&e)),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}

/// Discharge VCs on `jobs` threads; results come back in input order.
pub fn discharge(vcs: &[Vc], budget: &Budget, jobs: usize) -> Vec<(ProofResult, f64)> {
    let slots: Vec<Mutex<Option<(ProofResult, f64)>>> = vcs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= vcs.len() {
            break;
        }
        let t = Instant::now();
        let r = prove_vc(&vcs[i], budget);
        *slots[i].lock().unwrap() = Some((r, t.elapsed().as_secs_f64() * 1000.0));
    };
    let jobs = jobs.clamp(1, vcs.len().max(1));
    if jobs == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(work);
            }
        });
    }
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every VC discharged")).collect()
}

/// Run the whole pipeline on a translated program.
pub fn verify(prog: &Program, input: &str, opts: &VerifyOptions) -> Result<Report, Vec<Diagnostic>> {
    let groups = generate(prog, opts)?;
    let mut specs = Vec::new();
    let mut summary = Summary::default();
    for (name, vcs) in groups {
        let spec = prog.spec(&name).expect("generated from this program");
        let results = discharge(&vcs, &opts.budget, opts.jobs);
        let mut reports = Vec::new();
        for (vc, (r, ms)) in vcs.iter().zip(results) {
            let (result, assignment, reason) = match r {
                ProofResult::Proved => (Outcome::Proved, None, None),
                ProofResult::Counterexample(a) => {
                    let mut m: BTreeMap<String, String> =
                        a.vars.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
                    for (h, cells) in &a.heaps {
                        for (addr, v) in cells {
                            m.insert(format!("{h}[{addr:#x}]"), format!("{v:#x}"));
                        }
                    }
                    (Outcome::Counterexample, Some(m), None)
                }
                ProofResult::Unknown(r) => (Outcome::Unknown, None, Some(r)),
            };
            let assumed = result == Outcome::Unknown && opts.assume_unproved;
            match result {
                Outcome::Proved => summary.proved += 1,
                Outcome::Counterexample => summary.counterexamples += 1,
                Outcome::Unknown => summary.unknown += 1,
            }
            summary.assumed += assumed as usize;
            reports.push(VcReport {
                index: vc.index,
                provenance: vc.provenance,
                detail: vc.detail.clone(),
                loc: vc.loc,
                result,
                assignment,
                reason,
                assumed,
                millis: opts.timings.then_some(ms),
            });
        }
        let all_proved = reports.iter().all(|r| r.result == Outcome::Proved);
        let oracle = (opts.trials > 0 && all_proved).then(|| oracle_check(prog, spec, opts.trials, opts.seed));
        if let Some(o) = &oracle {
            summary.oracle_violations += o.violations.len() + o.faults.len();
        }
        summary.vcs += reports.len();
        summary.specs += 1;
        specs.push(SpecReport {
            spec: name,
            function: spec.function.clone(),
            total: spec.total || opts.total,
            vc_count: reports.len(),
            vcs: reports,
            oracle,
        });
    }
    Ok(Report {
        tool: "wpdrv".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: input.into(),
        input_digest: String::new(),
        specs,
        summary,
    })
}
