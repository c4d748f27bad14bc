use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn wpdrv(args: &[&str]) -> Output {
    wpdrv_env(args, &[])
}

fn wpdrv_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wpdrv"));
    c.args(args).current_dir(corpus()).env_remove("WPDRV_BUDGET").env_remove("WPDRV_SEED");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn proved_spec_exits_zero() {
    let o = wpdrv(&["verify", "octrng.c", "--spec", "octrng_attach"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("3 proved"));
}

#[test]
fn counterexample_exits_one() {
    let o = wpdrv(&["verify", "octrng.c", "--spec", "always_false", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert!(r["summary"]["counterexamples"].as_u64().unwrap() >= 1);
    let vc =
        &r["specs"][0]["vcs"].as_array().unwrap().iter().find(|v| v["result"] == "counterexample").unwrap().clone();
    assert!(vc["assignment"].is_object());
}

#[test]
fn unknown_exits_two_unless_assumed() {
    let o = wpdrv(&["verify", "sched.c"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wpdrv(&["verify", "sched.c", "--assume-unproved", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["summary"]["unknown"], r["summary"]["assumed"]);
    assert!(r["summary"]["assumed"].as_u64().unwrap() >= 1);
}

#[test]
fn rejected_input_exits_three() {
    for f in ["pfun.c", "bad_switch.c"] {
        let o = wpdrv(&["verify", f]);
        assert_eq!(o.status.code(), Some(3), "{f}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error["), "{f}");
    }
    let o = wpdrv(&["verify", "missing.c"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_spec_is_rejected() {
    let o = wpdrv(&["verify", "sched.c", "--spec", "no_such_spec"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown-spec"));
}

#[test]
fn json_report_has_summary_and_digest() {
    let r = report(&wpdrv(&["verify", "sched.c", "--json"]));
    assert_eq!(r["tool"], "wpdrv");
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
    let specs = r["specs"].as_array().unwrap();
    let vcs: u64 = specs.iter().map(|s| s["vc_count"].as_u64().unwrap()).sum();
    assert_eq!(r["summary"]["vcs"].as_u64(), Some(vcs));
    assert_eq!(r["summary"]["specs"].as_u64(), Some(specs.len() as u64));
    assert!(specs.iter().flat_map(|s| s["vcs"].as_array().unwrap()).all(|v| v.get("millis").is_none()));
}

#[test]
fn timings_are_opt_in() {
    let r = report(&wpdrv(&["verify", "sched.c", "--json", "--timings"]));
    assert!(r["specs"][0]["vcs"][0]["millis"].is_number());
}

#[test]
fn digest_covers_spec_files() {
    let a = report(&wpdrv(&["verify", "octrng.c", "--json"]));
    let b = report(&wpdrv(&["verify", "octrng.c", "--json", "--spec-file", "specs/octrng.spec"]));
    assert_ne!(a["input_digest"], b["input_digest"]);
}

#[test]
fn smtlib_files_follow_naming() {
    let out = tempfile::tempdir().unwrap();
    let o = wpdrv(&["smtlib", "sched.c", "--spec", "main_function", "--total", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> =
        std::fs::read_dir(out.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        [
            "main_exit-implies-post_0.smt2",
            "main_invariant-init_1.smt2",
            "main_invariant-preserved_2.smt2",
            "main_measure-decreases_3.smt2",
            "main_measure-nonneg_4.smt2",
        ]
    );
    let text = std::fs::read_to_string(out.path().join(&names[0])).unwrap();
    assert!(text.contains("(set-logic QF_"));
    assert!(text.trim_end().ends_with("(exit)"));
}

#[test]
fn seed_flag_overrides_environment() {
    let args = ["verify", "octrng.c", "--json", "--trials", "200"];
    let by_env = wpdrv_env(&args, &[("WPDRV_SEED", "5")]);
    let by_flag = wpdrv_env(&[&args[..], &["--seed", "5"]].concat(), &[("WPDRV_SEED", "6")]);
    assert_eq!(by_env.stdout, by_flag.stdout);
    let r = report(&by_env);
    assert_eq!(r["specs"][0]["oracle"]["trials"].as_u64(), Some(200));
}

#[test]
fn budget_from_environment_is_validated() {
    let o = wpdrv_env(&["verify", "octrng.c", "--spec", "octrng_attach"], &[("WPDRV_BUDGET", "not-a-number")]);
    assert_ne!(o.status.code(), Some(0));
    let o = wpdrv_env(&["verify", "octrng.c", "--spec", "octrng_attach"], &[("WPDRV_BUDGET", "2.5")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn dump_ir_and_vcs_are_deterministic() {
    for cmd in ["dump-ir", "vcs", "parse"] {
        let a = wpdrv(&[cmd, "octrng.c"]);
        let b = wpdrv(&[cmd, "octrng.c"]);
        assert_eq!(a.status.code(), Some(0), "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn oracle_subcommand_reports_clean_runs() {
    let o = wpdrv(&["oracle", "sched.c", "--trials", "300", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 4);
    assert!(text.lines().all(|l| l.contains("0 violations")));
}
