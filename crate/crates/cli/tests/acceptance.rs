//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

use wpdrv_core::frontend;
use wpdrv_core::interpreter::oracle_check;
use wpdrv_core::logic::{mask, to_signed, BinOp, CmpOp, HeapType, Provenance, Term, TypedHeapState, UnOp, Vc};
use wpdrv_core::pipeline::{self, VerifyOptions};
use wpdrv_core::solver::{prove_vc, Budget, ProofResult};
use wpdrv_core::translator::{translate, ModSet, Program};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn wpdrv(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpdrv")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(o: &Output) -> Result<Json, String> {
    serde_json::from_slice(&o.stdout).map_err(|e| format!("bad JSON: {e}"))
}

fn results(report: &Json, spec: &str) -> Vec<(String, String)> {
    report["specs"]
        .as_array()
        .into_iter()
        .flatten()
        .filter(|s| s["spec"] == spec)
        .flat_map(|s| s["vcs"].as_array().cloned().unwrap_or_default())
        .map(|v| (v["provenance"].as_str().unwrap_or("").to_string(), v["result"].as_str().unwrap_or("").to_string()))
        .collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// A copy of a corpus file with `edit` applied, in its own directory.
fn variant(name: &str, edit: impl Fn(&str) -> String) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus().join(name)).unwrap();
    let edited = edit(&src);
    assert_ne!(edited, src, "fixture edit for {name} did not apply");
    let p = dir.path().join(name);
    std::fs::write(&p, edited).unwrap();
    (dir, p)
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let o = wpdrv(&["verify", "octrng.c", "--spec", "octrng_attach", "--json"], &corpus());
    let secs = t.elapsed().as_secs_f64();
    ensure(code(&o) == 0, format!("exit {}", code(&o)))?;
    let r = results(&json(&o)?, "octrng_attach");
    let goals: Vec<_> = r.iter().filter(|(p, _)| p == "wp-goal").collect();
    ensure(goals.len() == 2 && goals.iter().all(|(_, x)| x == "proved"), format!("flag VCs: {goals:?}"))?;
    ensure(secs < 1.0, format!("took {secs:.2} s"))?;
    Ok(format!("{} VCs proved, both flag-bit goals, {secs:.2} s", r.len()))
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let o = wpdrv(&["verify", "octrng.c", "--spec", "octrng_rnd", "--json"], &corpus());
    let secs = t.elapsed().as_secs_f64();
    ensure(code(&o) == 0, format!("exit {}", code(&o)))?;
    let r = results(&json(&o)?, "octrng_rnd");
    ensure(!r.is_empty() && r.iter().all(|(_, x)| x == "proved"), format!("{r:?}"))?;
    let src = std::fs::read_to_string(corpus().join("octrng.c")).unwrap();
    let p = translate(&frontend::load(&src, &[]).map_err(|d| format!("{d:?}"))?, Default::default())
        .map_err(|d| format!("{d:?}"))?;
    let spec = p.spec("octrng_rnd").ok_or("no rnd spec")?;
    ensure(spec.total, "rnd spec is not total")?;
    ensure(
        spec.label_defs.get("a") == Some(&Term::bv_var("timer", 32)),
        format!("label a is not the timer: {:?}", spec.label_defs),
    )?;
    ensure(spec.post.iter().any(|c| c.text == "rand_value == a"), "post is not rand_value == a")?;
    ensure(secs < 1.0, format!("took {secs:.2} s"))?;
    Ok(format!("{} VCs proved, post rand_value == a with a = timer, {secs:.2} s", r.len()))
}

fn criterion_3() -> Check {
    let o = wpdrv(&["verify", "sched.c", "--spec", "idle_increases", "--json"], &corpus());
    ensure(code(&o) == 0, format!("exit {}", code(&o)))?;
    let r = results(&json(&o)?, "idle_increases");
    ensure(!r.is_empty() && r.iter().all(|(_, x)| x == "proved"), format!("{r:?}"))?;
    let (_d, path) = variant("sched.c", |s| s.replace("timer = timer + 1;", "timer = timer;"));
    let o = wpdrv(&["verify", path.to_str().unwrap(), "--spec", "idle_increases", "--json"], &corpus());
    ensure(code(&o) == 1, format!("mutant exit {}", code(&o)))?;
    let r = results(&json(&o)?, "idle_increases");
    ensure(r.iter().any(|(_, x)| x == "counterexample"), format!("mutant: {r:?}"))?;
    Ok("proved; without the +1 a counterexample is reported".into())
}

fn criterion_4() -> Check {
    let o = wpdrv(&["verify", "sched.c", "--spec", "main_function", "--total", "--json"], &corpus());
    let r = results(&json(&o)?, "main_function");
    let want = ["invariant-init", "invariant-preserved", "exit-implies-post", "measure-decreases", "measure-nonneg"];
    for w in want {
        ensure(r.iter().any(|(p, x)| p == w && x == "proved"), format!("{w} not proved: {r:?}"))?;
    }
    ensure(r.iter().all(|(_, x)| x == "proved"), format!("{r:?}"))?;
    ensure(code(&o) == 0, format!("exit {}", code(&o)))?;

    let (_d1, no_measure) = variant("sched.c", |s| s.replace("measure TIMEOUT - timer;", ""));
    let o = wpdrv(&["verify", no_measure.to_str().unwrap(), "--spec", "main_function", "--total"], &corpus());
    let err = String::from_utf8_lossy(&o.stderr);
    ensure(code(&o) == 3 && err.contains("missing-measure"), format!("no measure: exit {} {err}", code(&o)))?;

    let (_d2, weak) = variant("sched.c", |s| s.replace("invariant 0 <= timer && timer <= TIMEOUT;", "invariant true;"));
    let o = wpdrv(&["verify", weak.to_str().unwrap(), "--spec", "main_function", "--total", "--json"], &corpus());
    let r = results(&json(&o)?, "main_function");
    let exit = r.iter().find(|(p, _)| p == "exit-implies-post").ok_or("no exit obligation")?;
    ensure(exit.1 == "counterexample" || exit.1 == "unknown", format!("weak invariant exit VC: {}", exit.1))?;
    Ok(format!("5/5 loop obligations proved; missing measure exits 3; invariant `true` gives {} on exit", exit.1))
}

fn criterion_5() -> Check {
    let src = std::fs::read_to_string(corpus().join("pfun.c")).unwrap();
    let a = frontend::analyze(&src, &[]);
    let errors: Vec<_> = a.diagnostics.iter().filter(|d| d.is_error()).collect();
    ensure(errors.len() == 1 && errors[0].code == "indirect-call", format!("{errors:?}"))?;
    let call_line = src.lines().position(|l| l.contains("void call_function")).unwrap() as u32 + 1;
    let end_line =
        call_line + src.lines().skip(call_line as usize).position(|l| l.starts_with('}')).unwrap() as u32 + 1;
    let at = errors[0].loc.line;
    ensure((call_line..=end_line).contains(&at), format!("rejected at line {at}, not in call_function"))?;

    let marked = src.replace("void call_function", "/** DONT_TRANSLATE */\nvoid call_function");
    let ast = frontend::load(&marked, &[]).map_err(|d| format!("{d:?}"))?;
    let p = translate(&ast, Default::default()).map_err(|d| format!("{d:?}"))?;
    let translated: Vec<_> = p.functions.iter().filter(|f| !f.dont_translate).map(|f| f.name.as_str()).collect();
    ensure(translated.contains(&"foo") && translated.contains(&"set_function"), format!("{translated:?}"))?;
    let want = ModSet::Set(["counter".to_string()].into_iter().collect());
    ensure(p.modifies_of("foo") == want, format!("foo modifies {}", p.modifies_of("foo")))?;
    Ok(format!(
        "rejected at {}:{} with indirect-call; with DONT_TRANSLATE foo modifies {{counter}}",
        at, errors[0].loc.col
    ))
}

fn load(name: &str, specs: &[&str]) -> Program {
    let src = std::fs::read_to_string(corpus().join(name)).unwrap();
    let spec_srcs: Vec<String> = specs.iter().map(|s| std::fs::read_to_string(corpus().join(s)).unwrap()).collect();
    let refs: Vec<&str> = spec_srcs.iter().map(String::as_str).collect();
    pipeline::load_program(&src, &refs, Default::default()).unwrap()
}

fn criterion_6() -> Check {
    let mut checked = Vec::new();
    for (file, specs) in [("octrng.c", vec!["specs/octrng.spec"]), ("sched.c", vec![])] {
        let p = load(file, &specs);
        let opts = VerifyOptions { total: false, ..Default::default() };
        let report = pipeline::verify(&p, file, &opts).map_err(|d| format!("{d:?}"))?;
        for s in &report.specs {
            if !s.vcs.iter().all(|v| v.result == pipeline::Outcome::Proved) {
                continue;
            }
            let o = oracle_check(&p, p.spec(&s.spec).unwrap(), 10_000, 2024);
            ensure(o.violations.is_empty() && o.faults.is_empty(), format!("{}: {:?}", s.spec, o))?;
            checked.push(format!("{file}/{} {}/{}", s.spec, o.trials - o.vacuous, o.trials));
        }
    }
    ensure(checked.len() >= 4, format!("only {checked:?}"))?;
    Ok(format!("0 violations, 0 faults (non-vacuous/trials: {})", checked.join(", ")))
}

// Formula generator with its own evaluator, so the solver is checked
// against arithmetic written independently of the core crate.

#[derive(Clone, Debug)]
enum E {
    Var(usize),
    Const(u64),
    Un(UnOp, Box<E>),
    Bin(BinOp, Box<E>, Box<E>),
    Ite(Box<P>, Box<E>, Box<E>),
    /// zero- or sign-extended low `k+1` bits
    Low(bool, u32, Box<E>),
}

#[derive(Clone, Debug)]
enum P {
    Lit(bool),
    Cmp(CmpOp, E, E),
    Eq(E, E),
    Not(Box<P>),
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
    Imp(Box<P>, Box<P>),
}

const OPS: [BinOp; 13] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::UDiv,
    BinOp::URem,
    BinOp::SDiv,
    BinOp::SRem,
    BinOp::And,
    BinOp::Or,
    BinOp::Xor,
    BinOp::Shl,
    BinOp::LShr,
    BinOp::AShr,
];
const CMPS: [CmpOp; 4] = [CmpOp::Ult, CmpOp::Ule, CmpOp::Slt, CmpOp::Sle];

struct Gen {
    w: u32,
    vars: usize,
}

impl Gen {
    fn e(&self, r: &mut ChaCha8Rng, depth: u32) -> E {
        if depth == 0 || r.gen_range(0..4) == 0 {
            return if r.gen_bool(0.6) {
                E::Var(r.gen_range(0..self.vars))
            } else {
                E::Const(r.gen::<u64>() & mask(self.w))
            };
        }
        match r.gen_range(0..10) {
            0 => E::Un(if r.gen() { UnOp::Not } else { UnOp::Neg }, Box::new(self.e(r, depth - 1))),
            1 => E::Ite(Box::new(self.p(r, depth - 1)), Box::new(self.e(r, depth - 1)), Box::new(self.e(r, depth - 1))),
            2 if self.w > 1 => E::Low(r.gen(), r.gen_range(0..self.w - 1), Box::new(self.e(r, depth - 1))),
            _ => E::Bin(OPS[r.gen_range(0..OPS.len())], Box::new(self.e(r, depth - 1)), Box::new(self.e(r, depth - 1))),
        }
    }

    fn p(&self, r: &mut ChaCha8Rng, depth: u32) -> P {
        if depth == 0 || r.gen_range(0..3) == 0 {
            return match r.gen_range(0..9) {
                0 => P::Lit(r.gen()),
                1..=4 => P::Eq(self.e(r, depth), self.e(r, depth)),
                _ => P::Cmp(CMPS[r.gen_range(0..4)], self.e(r, depth), self.e(r, depth)),
            };
        }
        let a = Box::new(self.p(r, depth - 1));
        match r.gen_range(0..4) {
            0 => P::Not(a),
            1 => P::And(a, Box::new(self.p(r, depth - 1))),
            2 => P::Or(a, Box::new(self.p(r, depth - 1))),
            _ => P::Imp(a, Box::new(self.p(r, depth - 1))),
        }
    }
}

fn var_name(i: usize) -> String {
    ["x", "y", "z"][i].to_string()
}

impl E {
    fn term(&self, w: u32) -> Term {
        match self {
            E::Var(i) => Term::bv_var(var_name(*i), w),
            E::Const(c) => Term::bv(w, *c),
            E::Un(op, a) => Term::un(*op, a.term(w)),
            E::Bin(op, a, b) => Term::bin(*op, a.term(w), b.term(w)),
            E::Ite(c, a, b) => Term::ite(c.term(w), a.term(w), b.term(w)),
            E::Low(signed, k, a) => {
                let low = Term::extract(*k, 0, a.term(w));
                if *signed {
                    Term::sext(w - k - 1, low)
                } else {
                    Term::zext(w - k - 1, low)
                }
            }
        }
    }

    fn eval(&self, w: u32, env: &[u64]) -> u64 {
        let m = mask(w);
        let sign = |x: u64| (x >> (w - 1)) & 1 == 1;
        let neg = |x: u64| (m - x + 1) & m;
        match self {
            E::Var(i) => env[*i],
            E::Const(c) => *c,
            E::Un(UnOp::Not, a) => !a.eval(w, env) & m,
            E::Un(UnOp::Neg, a) => neg(a.eval(w, env)),
            E::Ite(c, a, b) => {
                if c.eval(w, env) {
                    a.eval(w, env)
                } else {
                    b.eval(w, env)
                }
            }
            E::Low(signed, k, a) => {
                let v = a.eval(w, env) & mask(k + 1);
                if *signed && (v >> k) & 1 == 1 {
                    (v | !mask(k + 1)) & m
                } else {
                    v
                }
            }
            E::Bin(op, a, b) => {
                let (x, y) = (a.eval(w, env), b.eval(w, env));
                let udiv = |x: u64, y: u64| x.checked_div(y).unwrap_or(m);
                let urem = |x: u64, y: u64| if y == 0 { x } else { x % y };
                let abs = |x: u64| if sign(x) { neg(x) } else { x };
                let r = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x + neg(y),
                    BinOp::Mul => x * y,
                    BinOp::UDiv => udiv(x, y),
                    BinOp::URem => urem(x, y),
                    BinOp::SDiv => {
                        let q = udiv(abs(x), abs(y));
                        if sign(x) != sign(y) {
                            neg(q)
                        } else {
                            q
                        }
                    }
                    BinOp::SRem => {
                        let r = urem(abs(x), abs(y));
                        if sign(x) {
                            neg(r)
                        } else {
                            r
                        }
                    }
                    BinOp::And => x & y,
                    BinOp::Or => x | y,
                    BinOp::Xor => x ^ y,
                    BinOp::Shl => (0..y.min(64)).fold(x, |v, _| (v << 1) & m),
                    BinOp::LShr => (0..y.min(64)).fold(x, |v, _| v >> 1),
                    BinOp::AShr => (0..y.min(64)).fold(x, |v, _| (v >> 1) | (v & (1 << (w - 1)))),
                    _ => unreachable!(),
                };
                r & m
            }
        }
    }
}

impl P {
    fn term(&self, w: u32) -> Term {
        match self {
            P::Lit(b) => Term::bool(*b),
            P::Cmp(op, a, b) => Term::cmp(*op, a.term(w), b.term(w)),
            P::Eq(a, b) => Term::eq(a.term(w), b.term(w)),
            P::Not(a) => Term::not(a.term(w)),
            P::And(a, b) => Term::and2(a.term(w), b.term(w)),
            P::Or(a, b) => Term::or(vec![a.term(w), b.term(w)]),
            P::Imp(a, b) => Term::implies(a.term(w), b.term(w)),
        }
    }

    fn eval(&self, w: u32, env: &[u64]) -> bool {
        match self {
            P::Lit(b) => *b,
            P::Cmp(op, a, b) => {
                let (x, y) = (a.eval(w, env), b.eval(w, env));
                let (sx, sy) = (to_signed(x, w), to_signed(y, w));
                match op {
                    CmpOp::Ult => x < y,
                    CmpOp::Ule => x <= y,
                    CmpOp::Slt => sx < sy,
                    CmpOp::Sle => sx <= sy,
                }
            }
            P::Eq(a, b) => a.eval(w, env) == b.eval(w, env),
            P::Not(a) => !a.eval(w, env),
            P::And(a, b) => a.eval(w, env) && b.eval(w, env),
            P::Or(a, b) => a.eval(w, env) || b.eval(w, env),
            P::Imp(a, b) => !a.eval(w, env) || b.eval(w, env),
        }
    }
}

fn assignments(w: u32, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let total = 1u64 << (w as usize * n);
    (0..total).map(move |k| (0..n).map(|i| (k >> (i as u32 * w)) & mask(w)).collect())
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = 10_000;
    let (mut valid, mut cex) = (0, 0);
    for case in 0..cases {
        let vars = rng.gen_range(1..=3);
        // keep exhaustive enumeration at or below 2^12 assignments
        let max_w = [8, 6, 4][vars - 1];
        let w = rng.gen_range(1..=max_w);
        let g = Gen { w, vars };
        let hyp = if rng.gen_bool(0.5) { P::Lit(true) } else { g.p(&mut rng, 2) };
        let goal = g.p(&mut rng, 3);
        let truth = assignments(w, vars).all(|env| !hyp.eval(w, &env) || goal.eval(w, &env));
        let vc = Vc {
            index: case,
            function: "gen".into(),
            spec: "gen".into(),
            provenance: Provenance::WpGoal,
            detail: String::new(),
            hypothesis: hyp.term(w),
            goal: goal.term(w),
            loc: Default::default(),
            unprovable: None,
        };
        match prove_vc(&vc, &Budget::default()) {
            ProofResult::Proved => {
                ensure(truth, format!("case {case}: proved but invalid: {hyp:?} => {goal:?}"))?;
                valid += 1;
            }
            ProofResult::Counterexample(a) => {
                ensure(!truth, format!("case {case}: counterexample for a valid VC"))?;
                let env: Vec<u64> =
                    (0..vars).map(|i| a.vars.get(&var_name(i)).map(|v| v.bits()).unwrap_or(0)).collect();
                ensure(hyp.eval(w, &env) && !goal.eval(w, &env), format!("case {case}: bad countermodel {env:?}"))?;
                cex += 1;
            }
            ProofResult::Unknown(r) => return Err(format!("case {case}: unknown ({r})")),
        }
    }
    Ok(format!("{cases} formulas agree with enumeration ({valid} valid, {cex} countermodels re-checked)"))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let types = [
        HeapType::Word { width: 8, signed: false },
        HeapType::Word { width: 16, signed: true },
        HeapType::Word { width: 32, signed: false },
        HeapType::Word { width: 32, signed: true },
        HeapType::Word { width: 64, signed: false },
        HeapType::Ptr,
    ];
    let cases = 10_000;
    for case in 0..cases {
        let addrs: Vec<u64> = (0..6).map(|_| rng.gen_range(0..8u64) * 8).collect();
        let mut h = TypedHeapState::new();
        for _ in 0..rng.gen_range(0..12) {
            let ty = types[rng.gen_range(0..types.len())];
            let _ = h.write(ty, addrs[rng.gen_range(0..addrs.len())], rng.gen());
        }
        let snapshot: BTreeMap<(usize, u64), u64> = types
            .iter()
            .enumerate()
            .flat_map(|(i, t)| addrs.iter().map(move |&a| ((i, a), *t)))
            .map(|((i, a), t)| ((i, a), h.peek(t, a)))
            .collect();
        let wi = rng.gen_range(0..types.len());
        let addr = if rng.gen_bool(0.9) { addrs[rng.gen_range(0..addrs.len())] } else { rng.gen_range(0..64) };
        let _ = h.write(types[wi], addr, rng.gen());
        for (i, t) in types.iter().enumerate().filter(|&(i, _)| i != wi) {
            for &a in &addrs {
                ensure(
                    h.peek(*t, a) == snapshot[&(i, a)],
                    format!("case {case}: write to {} changed {t}@{a:#x}", types[wi]),
                )?;
            }
        }
    }
    Ok(format!("{cases} random writes left every other heap unchanged"))
}

fn criterion_9() -> Check {
    let runs: [&[&str]; 4] = [
        &["dump-ir", "sched.c"],
        &["vcs", "sched.c"],
        &["verify", "sched.c", "--json", "--trials", "300", "--seed", "9"],
        &["verify", "octrng.c", "--json", "--trials", "300", "--seed", "9"],
    ];
    for args in runs {
        let a = wpdrv(args, &corpus());
        let b = wpdrv(args, &corpus());
        ensure(!a.stdout.is_empty(), format!("{args:?}: no output"))?;
        ensure(a.stdout == b.stdout, format!("{args:?}: outputs differ"))?;
    }
    Ok("dump-ir, vcs and verify --json byte-identical across runs".into())
}

fn criterion_10() -> Check {
    let z3 = ["/usr/local/bin/z3", "/usr/bin/z3"].into_iter().find(|p| Path::new(p).exists());
    let Some(z3) = z3 else {
        return Ok("SKIP: no external solver installed".into());
    };
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let jobs: [&[&str]; 4] = [
        &["smtlib", "octrng.c", "--spec", "octrng_attach", "--out", o],
        &["smtlib", "octrng.c", "--spec", "octrng_rnd", "--out", o],
        &["smtlib", "sched.c", "--spec", "idle_increases", "--out", o],
        &["smtlib", "sched.c", "--spec", "main_function", "--total", "--out", o],
    ];
    for args in jobs {
        let r = wpdrv(args, &corpus());
        ensure(code(&r) == 0, format!("{args:?}: exit {}", code(&r)))?;
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    ensure(files.len() >= 11, format!("only {} files", files.len()))?;
    for f in &files {
        let r = Command::new(z3).arg(f).output().map_err(|e| e.to_string())?;
        let answer = String::from_utf8_lossy(&r.stdout);
        ensure(answer.trim() == "unsat", format!("{}: {}", f.display(), answer.trim()))?;
    }
    Ok(format!("{} scripts, all unsat under {z3}", files.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "octrng_attach lemma", criterion_1),
        (2, "octrng_rnd lemma", criterion_2),
        (3, "idle_increases lemma", criterion_3),
        (4, "main_function loop obligations", criterion_4),
        (5, "subset enforcement", criterion_5),
        (6, "oracle soundness", criterion_6),
        (7, "solver cross-validation", criterion_7),
        (8, "typed-heap frame", criterion_8),
        (9, "determinism", criterion_9),
        (10, "SMT-LIB escape hatch", criterion_10),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let t = Instant::now();
        let r = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n:>2} {name}: PASS - {msg} [{secs:.1} s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL - {msg} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
