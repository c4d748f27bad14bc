//! Bit-vector decision procedure for VCs and SMT-LIB export.

pub mod bitblast;
pub mod prove;
pub mod sat;
pub mod simplify;
pub mod smtlib;

use std::time::Duration;

pub use bitblast::{bitblast, BlastError, Cnf};
pub use prove::{prove, prove_vc, ProofResult};
pub use sat::{sat_solve, Clauses, SatResult};
pub use simplify::simplify;
pub use smtlib::{export_smtlib, smt2_file_name};

/// Resource limit for one VC.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub time: Duration,
    pub conflicts: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { time: Duration::from_secs(10), conflicts: 1_000_000 }
    }
}
