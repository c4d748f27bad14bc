//! The driver and scheduler model shipped with the tool, plus the small
//! programs used to exercise the subset checker.

pub const OCTRNG_C: &str = include_str!("../corpus/octrng.c");
pub const OCTRNG_SPEC: &str = include_str!("../corpus/specs/octrng.spec");
pub const SCHED_C: &str = include_str!("../corpus/sched.c");
pub const PFUN_C: &str = include_str!("../corpus/pfun.c");
pub const BAD_SWITCH_C: &str = include_str!("../corpus/bad_switch.c");

/// Capacity of the task ring in the corpus.
pub const MAX_QUEUE: u64 = 8;
/// Scheduler timeout in the corpus.
pub const TIMEOUT: u64 = 100;
pub const CONTROL_ADDR: u64 = 0x0001_1800_4000_0000;
pub const ENTROPY_REG: u64 = 0;
pub const ENABLE_OUTPUT: u64 = 1 << 1;
pub const ENABLE_ENTROPY: u64 = 1;
