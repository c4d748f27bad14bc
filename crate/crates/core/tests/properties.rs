//! Randomised properties that tie the translation, the WP calculus and the
//! interpreter together.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpdrv_core::corpus;
use wpdrv_core::frontend;
use wpdrv_core::interpreter::{random_state, run_function_quiet, ConcreteState, ExecError, Mode, Run, ValueGen};
use wpdrv_core::logic::wp::wp;
use wpdrv_core::logic::{eval_bool, vcgen, CmpOp, HeapType, Sort, Term, TypedHeapState, Value, WpOptions};
use wpdrv_core::translator::{dump_ir, sort_of, translate, FunctionIr, Program};

const FUEL: u64 = 20_000;

fn programs() -> Vec<(&'static str, Program)> {
    let load = |src: &str, specs: &[&str]| translate(&frontend::load(src, specs).unwrap(), Default::default()).unwrap();
    vec![("octrng", load(corpus::OCTRNG_C, &[corpus::OCTRNG_SPEC])), ("sched", load(corpus::SCHED_C, &[]))]
}

fn runnable(p: &Program) -> impl Iterator<Item = &FunctionIr> {
    p.functions.iter().filter(|f| !f.dont_translate)
}

fn args(f: &FunctionIr, gen: &ValueGen, rng: &mut ChaCha8Rng) -> Vec<Value> {
    f.params.iter().map(|(_, ty)| gen.value(rng, ty).unwrap_or(Value::bv(64, 0))).collect()
}

/// What a run looks like from outside: final globals and heaps, or the
/// kind of failure.
#[derive(Debug, PartialEq)]
enum Observed {
    Done(BTreeMap<String, Value>, TypedHeapState, Option<Value>),
    Fault,
    OutOfFuel,
}

fn observe(r: Result<Run, ExecError>) -> Observed {
    match r {
        Ok(r) => Observed::Done(r.state.globals(), r.state.heap, r.result),
        Err(ExecError::Fault { .. }) => Observed::Fault,
        Err(ExecError::FuelExhausted(_)) => Observed::OutOfFuel,
    }
}

#[test]
fn deep_and_monadic_runs_agree() {
    for (name, p) in programs() {
        let gen = ValueGen::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in runnable(&p) {
            for trial in 0..1000 {
                let s = random_state(&p, &gen, &mut rng);
                let a = args(f, &gen, &mut rng);
                let deep = observe(run_function_quiet(&p, &f.name, a.clone(), s.clone(), FUEL, Mode::Deep));
                let mon = observe(run_function_quiet(&p, &f.name, a, s, FUEL, Mode::Monadic));
                assert_eq!(deep, mon, "{name}::{} trial {trial}", f.name);
            }
        }
    }
}

#[test]
fn runs_only_touch_declared_globals() {
    for (name, p) in programs() {
        let gen = ValueGen::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for f in runnable(&p) {
            let mods = p.modifies_of(&f.name);
            if mods.is_top() {
                continue;
            }
            for trial in 0..500 {
                let s = random_state(&p, &gen, &mut rng);
                let a = args(f, &gen, &mut rng);
                let Ok(r) = run_function_quiet(&p, &f.name, a, s.clone(), FUEL, Mode::Monadic) else {
                    continue;
                };
                for fld in &p.globals.fields {
                    if mods.contains(&fld.root) || mods.contains(&fld.name) {
                        continue;
                    }
                    assert_eq!(
                        s.get(&fld.name),
                        r.state.get(&fld.name),
                        "{name}::{} changed {} outside {mods} (trial {trial})",
                        f.name,
                        fld.name
                    );
                }
            }
        }
    }
}

/// Word-sorted global leaves, the atoms of the random postconditions.
fn word_globals(p: &Program) -> Vec<(String, u32)> {
    p.globals
        .fields
        .iter()
        .filter_map(|f| match sort_of(&f.ty) {
            Sort::Bv(w) => Some((f.name.clone(), w)),
            _ => None,
        })
        .collect()
}

fn random_post(atoms: &[(String, u32)], gen: &ValueGen, rng: &mut ChaCha8Rng) -> Term {
    let (name, w) = &atoms[rng.gen_range(0..atoms.len())];
    let v = Term::bv_var(name.clone(), *w);
    let c = Term::bv(*w, gen.word(rng, *w));
    match rng.gen_range(0..3) {
        0 => Term::eq(v, c),
        1 => Term::cmp(CmpOp::Ule, v, c),
        _ => Term::cmp(CmpOp::Ule, c, v),
    }
}

fn holds(t: &Term, s: &ConcreteState) -> bool {
    eval_bool(t, s).unwrap_or_else(|e| panic!("cannot evaluate {t}: {e}"))
}

#[test]
fn wp_is_sound_for_loop_free_bodies() {
    for (name, p) in programs() {
        let gen = ValueGen::new(&p);
        let atoms = word_globals(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for f in runnable(&p).filter(|f| p.loop_free(&f.name) && f.params.is_empty()) {
            let mut hits = 0;
            for trial in 0..300 {
                let q = random_post(&atoms, &gen, &mut rng);
                let pre = wp(&p, &f.monadic, &q).unwrap();
                let s = random_state(&p, &gen, &mut rng);
                if !holds(&pre, &s) {
                    continue;
                }
                hits += 1;
                let r = run_function_quiet(&p, &f.name, vec![], s, FUEL, Mode::Monadic)
                    .unwrap_or_else(|e| panic!("{name}::{} faulted under its wp (trial {trial}): {e}", f.name));
                assert!(holds(&q, &r.state), "{name}::{}: wp held but {q} fails (trial {trial})", f.name);
            }
            assert!(hits > 0, "{name}::{}: no state satisfied any wp", f.name);
        }
    }
}

#[test]
fn wp_is_monotone_and_conjunctive() {
    for (_, p) in programs() {
        let gen = ValueGen::new(&p);
        let atoms = word_globals(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for f in runnable(&p).filter(|f| p.loop_free(&f.name)) {
            for _ in 0..100 {
                let (q, r) = (random_post(&atoms, &gen, &mut rng), random_post(&atoms, &gen, &mut rng));
                let both = wp(&p, &f.monadic, &Term::and2(q.clone(), r.clone())).unwrap();
                let wq = wp(&p, &f.monadic, &q).unwrap();
                let wr = wp(&p, &f.monadic, &r).unwrap();
                let either = wp(&p, &f.monadic, &Term::or(vec![q.clone(), r.clone()])).unwrap();
                for _ in 0..10 {
                    let s = random_state(&p, &gen, &mut rng);
                    assert_eq!(holds(&both, &s), holds(&wq, &s) && holds(&wr, &s), "{}", f.name);
                    if holds(&wq, &s) {
                        assert!(holds(&either, &s), "{}: wp not monotone", f.name);
                    }
                }
            }
        }
    }
}

#[test]
fn translation_and_vcs_are_deterministic() {
    let (a, b) = (programs(), programs());
    for ((_, p), (_, q)) in a.iter().zip(&b) {
        assert_eq!(dump_ir(p), dump_ir(q));
        for s in &p.specs {
            let opts = WpOptions { total: s.total, ..Default::default() };
            let x: Vec<String> = vcgen(p, s, opts).unwrap().iter().map(|v| v.to_string()).collect();
            let y: Vec<String> =
                vcgen(q, q.spec(&s.name).unwrap(), opts).unwrap().iter().map(|v| v.to_string()).collect();
            assert_eq!(x, y);
        }
    }
}

fn heap_type() -> impl Strategy<Value = HeapType> {
    prop_oneof![
        (prop::sample::select(vec![8u32, 16, 32, 64]), any::<bool>())
            .prop_map(|(width, signed)| HeapType::Word { width, signed }),
        Just(HeapType::Ptr),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    /// A write changes exactly one cell of exactly one heap.
    #[test]
    fn heap_writes_are_framed(
        setup in prop::collection::vec((heap_type(), 1u64..9, any::<u64>()), 0..10),
        (ty, slot, value) in (heap_type(), 1u64..9, any::<u64>()),
        probes in prop::collection::vec((heap_type(), 1u64..9), 1..8),
    ) {
        let mut h = TypedHeapState::new();
        for (t, s, v) in setup {
            h.write(t, s * 8, v).unwrap();
        }
        let after = h.with_write(ty, slot * 8, value).unwrap();
        let read_back = after.read(ty, slot * 8).unwrap();
        let ty_mask = match ty {
            HeapType::Word { width, .. } => wpdrv_core::logic::mask(width),
            _ => u64::MAX,
        };
        prop_assert_eq!(read_back, value & ty_mask);
        for (t, s) in probes {
            if (t, s) != (ty, slot) {
                prop_assert_eq!(after.peek(t, s * 8), h.peek(t, s * 8));
            }
        }
    }
}
