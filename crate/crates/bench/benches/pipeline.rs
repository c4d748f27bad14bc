use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use wpdrv_bench::{pigeonhole, sched, sched_ast, sched_vcs};
use wpdrv_core::corpus;
use wpdrv_core::interpreter::{default_fuel, run_main, ConcreteState};
use wpdrv_core::solver::{prove_vc, sat_solve, Budget};
use wpdrv_core::translator::translate;

fn frontend(c: &mut Criterion) {
    c.bench_function("parse+check sched.c", |b| {
        b.iter(|| wpdrv_core::frontend::load(black_box(corpus::SCHED_C), &[]).unwrap())
    });
    let ast = sched_ast();
    c.bench_function("translate sched.c", |b| b.iter(|| translate(black_box(&ast), Default::default()).unwrap()));
}

fn vcs(c: &mut Criterion) {
    let p = sched();
    c.bench_function("vcgen sched.c", |b| b.iter(|| sched_vcs(black_box(&p))));
    let vcs = sched_vcs(&p);
    let budget = Budget::default();
    c.bench_function("prove all sched.c VCs", |b| {
        b.iter(|| vcs.iter().map(|v| prove_vc(v, &budget)).collect::<Vec<_>>())
    });
}

fn sat(c: &mut Criterion) {
    let cnf = pigeonhole(6);
    let budget = Budget::default();
    c.bench_function("pigeonhole 7 into 6", |b| b.iter(|| sat_solve(black_box(&cnf), &budget)));
}

fn interpreter(c: &mut Criterion) {
    let p = sched();
    let s0 = ConcreteState::initial(&p);
    c.bench_function("run main to timeout", |b| b.iter(|| run_main(&p, s0.clone(), default_fuel()).unwrap()));
}

criterion_group!(benches, frontend, vcs, sat, interpreter);
criterion_main!(benches);
