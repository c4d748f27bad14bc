//! Shared fixtures for the pipeline benchmarks.

use wpdrv_core::corpus;
use wpdrv_core::frontend::{self, Ast};
use wpdrv_core::logic::{vcgen, Vc, WpOptions};
use wpdrv_core::solver::Clauses;
use wpdrv_core::translator::{translate, Program};

/// The scheduler program with its device driver, already parsed.
pub fn sched_ast() -> Ast {
    frontend::load(corpus::SCHED_C, &[]).expect("corpus parses")
}

pub fn sched() -> Program {
    translate(&sched_ast(), Default::default()).expect("corpus translates")
}

/// Every VC of the scheduler, each spec in total-correctness mode when it
/// asks for it.
pub fn sched_vcs(p: &Program) -> Vec<Vc> {
    p.specs
        .iter()
        .flat_map(|s| vcgen(p, s, WpOptions { total: s.total, ..Default::default() }).expect("vcgen"))
        .collect()
}

/// `n + 1` pigeons into `n` holes: unsatisfiable, and hard for resolution.
pub fn pigeonhole(n: i32) -> Clauses {
    let var = |i: i32, j: i32| i * n + j + 1;
    let mut clauses: Vec<Vec<i32>> = (0..=n).map(|i| (0..n).map(|j| var(i, j)).collect()).collect();
    for j in 0..n {
        for a in 0..=n {
            for b in a + 1..=n {
                clauses.push(vec![-var(a, j), -var(b, j)]);
            }
        }
    }
    Clauses { num_vars: ((n + 1) * n) as u32, clauses }
}
