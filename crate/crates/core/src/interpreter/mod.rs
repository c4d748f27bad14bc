//! Concrete execution of translated programs: the scheduler and device
//! model run end to end, and the randomised oracle behind the verifier.

pub mod exec;
pub mod oracle;
pub mod state;

pub use exec::{
    exec_deep, exec_monadic, run_function, run_function_quiet, EventKind, ExecError, Machine, Mode, Run, TraceEvent,
};
pub use oracle::{oracle_check, OracleReport, Witness};
pub use state::{address_taken, random_state, ConcreteState, Task, ValueGen};

use crate::corpus::{CONTROL_ADDR, ENABLE_ENTROPY, ENABLE_OUTPUT, ENTROPY_REG, MAX_QUEUE, TIMEOUT};
use crate::frontend::Loc;
use crate::logic::Value;
use crate::translator::Program;

/// Default step budget: ten times the scheduler's total work.
pub fn default_fuel() -> u64 {
    10 * TIMEOUT * MAX_QUEUE
}

/// Reference model of the register file: the control register holds
/// whatever was last written; the entropy register yields the timer when
/// both enable flags are set and 0 otherwise.
pub fn device_get_register(s: &ConcreteState, addr: u64) -> Result<u32, ExecError> {
    let control = s.word("rng_regs.control_addr");
    match addr {
        CONTROL_ADDR => Ok(control as u32),
        ENTROPY_REG => {
            let enabled = ENABLE_OUTPUT | ENABLE_ENTROPY;
            Ok(if control & enabled == enabled { s.word("timer") as u32 } else { 0 })
        }
        _ => Err(ExecError::Fault { reason: format!("no device register at {addr:#x}"), loc: Loc::default() }),
    }
}

/// Run `main` from `s0` on the deep form, which includes functions
/// excluded from verification such as the task dispatcher.
pub fn run_main(prog: &Program, s0: ConcreteState, fuel: u64) -> Result<Run, ExecError> {
    run_function(prog, "main", Vec::new(), s0, fuel, Mode::Deep)
}

/// Result of the program's own `get_register` from state `s`.
pub fn program_get_register(prog: &Program, s: &ConcreteState, addr: u64) -> Result<u32, ExecError> {
    let r = run_function(prog, "get_register", vec![Value::bv(64, addr)], s.clone(), default_fuel(), Mode::Monadic)?;
    Ok(r.result.map(|v| v.bits() as u32).unwrap_or(0))
}
