//! Big-step execution of deep and monadic programs with a step budget.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::state::ConcreteState;
use crate::frontend::Loc;
use crate::logic::{eval, Env, EvalError, HeapType, Node, Sort, Term, Value};
use crate::translator::{Deep, GuardKind, Monadic, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Call,
    Modify,
    GuardPass,
    Fault,
    TaskRun,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Call => "call",
            EventKind::Modify => "modify",
            EventKind::GuardPass => "guard-pass",
            EventKind::Fault => "fault",
            EventKind::TaskRun => "task-run",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: u64,
    pub kind: EventKind,
    pub detail: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6} {} {}", self.step, self.kind, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("fault at {loc}: {reason}")]
    Fault { reason: String, loc: Loc },
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

/// Execution mode for calls: the deep body or the monadic body of each
/// callee.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Deep,
    Monadic,
}

/// An interpreter over one program. The state and trace are public so
/// callers can inspect them after a fault.
pub struct Machine<'p> {
    prog: &'p Program,
    pub state: ConcreteState,
    pub trace: Vec<TraceEvent>,
    pub record: bool,
    fuel: u64,
    steps: u64,
    /// Names bound by monadic `bind`, one frame per active call.
    frames: Vec<HashMap<String, Value>>,
    mode: Mode,
}

struct Scope<'a> {
    state: &'a ConcreteState,
    frame: Option<&'a HashMap<String, Value>>,
}

impl Env for Scope<'_> {
    fn var(&self, name: &str, sort: Sort) -> Option<Value> {
        self.frame.and_then(|f| f.get(name).copied()).or_else(|| self.state.var(name, sort))
    }

    fn heap(&self, heap: &str, ty: HeapType, addr: u64) -> u64 {
        self.state.heap(heap, ty, addr)
    }
}

impl<'p> Machine<'p> {
    pub fn new(prog: &'p Program, state: ConcreteState, fuel: u64, mode: Mode) -> Self {
        Machine { prog, state, trace: Vec::new(), record: true, fuel, steps: 0, frames: vec![HashMap::new()], mode }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn event(&mut self, kind: EventKind, detail: impl FnOnce() -> String) {
        if self.record || kind == EventKind::Fault {
            self.trace.push(TraceEvent { step: self.steps, kind, detail: detail() });
        }
    }

    fn tick(&mut self) -> Result<(), ExecError> {
        if self.steps >= self.fuel {
            return Err(ExecError::FuelExhausted(self.steps));
        }
        self.steps += 1;
        Ok(())
    }

    fn fault(&mut self, reason: String, loc: Loc) -> ExecError {
        let r = reason.clone();
        self.event(EventKind::Fault, || format!("{r} at {loc}"));
        ExecError::Fault { reason, loc }
    }

    fn eval(&mut self, t: &Term, loc: Loc) -> Result<Value, ExecError> {
        let scope = Scope { state: &self.state, frame: self.frames.last() };
        eval(t, &scope).map_err(|e| match e {
            EvalError::IntOverflow(w) => self.fault(format!("integer overflow at width {w}"), loc),
            e => self.fault(e.to_string(), loc),
        })
    }

    /// Apply a heap-valued term to the current heaps.
    fn eval_heap(&mut self, t: &Term, loc: Loc) -> Result<Vec<(HeapType, u64, u64)>, ExecError> {
        match t.node() {
            Node::Var { .. } => Ok(Vec::new()),
            Node::Store { heap, addr, value } => {
                let mut w = self.eval_heap(heap, loc)?;
                let ty = match heap.sort() {
                    Sort::Heap(ty) => ty,
                    _ => return Err(self.fault("store into a non-heap".into(), loc)),
                };
                let a = self.eval(addr, loc)?.bits();
                let v = self.eval(value, loc)?.bits();
                w.push((ty, a, v));
                Ok(w)
            }
            Node::Ite(c, a, b) => {
                if self.eval(c, loc)?.as_bool() {
                    self.eval_heap(a, loc)
                } else {
                    self.eval_heap(b, loc)
                }
            }
            _ => Err(self.fault("unsupported heap expression".into(), loc)),
        }
    }

    fn update(&mut self, u: &[(String, Term)], loc: Loc) -> Result<(), ExecError> {
        self.tick()?;
        let mut vals = Vec::new();
        let mut writes = Vec::new();
        for (x, t) in u {
            if let Sort::Heap(_) = t.sort() {
                writes.extend(self.eval_heap(t, loc)?);
            } else {
                vals.push((x, self.eval(t, loc)?));
            }
        }
        for (x, v) in vals {
            self.event(EventKind::Modify, || format!("{x} := {v}"));
            let frame = self.frames.last_mut().unwrap();
            if let Some(slot) = frame.get_mut(x.as_str()) {
                *slot = v;
            } else {
                self.state.set(x, v);
            }
        }
        for (ty, a, v) in writes {
            self.event(EventKind::Modify, || format!("heap_{ty}[{a:#x}] := {v:#x}"));
            if let Err(e) = self.state.heap.write(ty, a, v) {
                return Err(self.fault(e.to_string(), loc));
            }
        }
        Ok(())
    }

    fn guard(&mut self, kind: GuardKind, t: &Term, loc: Loc) -> Result<(), ExecError> {
        if self.eval(t, loc)?.as_bool() {
            self.event(EventKind::GuardPass, || format!("{kind} at {loc}"));
            Ok(())
        } else {
            Err(self.fault(format!("{kind} guard violated"), loc))
        }
    }

    /// Call a named function with evaluated arguments.
    pub fn call(&mut self, callee: &str, args: Vec<Value>, loc: Loc) -> Result<Option<Value>, ExecError> {
        self.tick()?;
        let prog = self.prog;
        let Some(f) = prog.function(callee) else {
            return Err(self.fault(format!("call of `{callee}`, which has no body"), loc));
        };
        self.event(EventKind::Call, || callee.to_string());
        for ((p, _), v) in f.params.iter().zip(args) {
            self.state.set(p, v);
        }
        match self.mode {
            Mode::Deep => {
                self.deep(&f.deep)?;
                Ok(f.ret_var.as_ref().and_then(|r| self.state.get(r)))
            }
            Mode::Monadic => {
                self.frames.push(HashMap::new());
                let r = self.monadic(&f.monadic);
                self.frames.pop();
                // A trailing expression statement must not leak out of a void function.
                r.map(|v| v.filter(|_| f.ret_var.is_some()))
            }
        }
    }

    fn call_ptr(&mut self, target: &Term, args: &[Term], loc: Loc) -> Result<Option<Value>, ExecError> {
        let addr = self.eval(target, loc)?.bits();
        if addr == 0 {
            return Err(self.fault("call through a null function pointer".into(), loc));
        }
        let Some(name) = self.prog.symtab.function_at(addr).map(str::to_string) else {
            return Err(self.fault(format!("call through {addr:#x}, which is not a function"), loc));
        };
        let vals = args.iter().map(|a| self.eval(a, loc)).collect::<Result<Vec<_>, _>>()?;
        self.event(EventKind::TaskRun, || name.clone());
        self.call(&name, vals, loc)
    }

    pub fn deep(&mut self, d: &Deep) -> Result<(), ExecError> {
        match d {
            Deep::Skip => Ok(()),
            Deep::Basic(u) => self.update(u, Loc::default()),
            Deep::Seq(a, b) => {
                self.deep(a)?;
                self.deep(b)
            }
            Deep::Cond(c, a, b) => {
                if self.eval(c, Loc::default())?.as_bool() {
                    self.deep(a)
                } else {
                    self.deep(b)
                }
            }
            Deep::Guard(k, t, loc, s) => {
                self.guard(*k, t, *loc)?;
                self.deep(s)
            }
            Deep::While { cond, body, loc, .. } => {
                while self.eval(cond, *loc)?.as_bool() {
                    self.tick()?;
                    self.deep(body)?;
                }
                Ok(())
            }
            Deep::Call { callee, args, ret, loc } => {
                let vals = args.iter().map(|a| self.eval(a, *loc)).collect::<Result<Vec<_>, _>>()?;
                let r = self.call(callee, vals, *loc)?;
                if let (Some(x), Some(v)) = (ret, r) {
                    self.state.set(x, v);
                }
                Ok(())
            }
            Deep::CallPtr { target, args, loc } => self.call_ptr(target, args, *loc).map(|_| ()),
            Deep::Fail => Err(self.fault("fail".into(), Loc::default())),
        }
    }

    pub fn monadic(&mut self, m: &Monadic) -> Result<Option<Value>, ExecError> {
        match m {
            Monadic::Return(None) => Ok(None),
            Monadic::Return(Some(t)) | Monadic::Gets(t) => self.eval(t, Loc::default()).map(Some),
            Monadic::Modify(u) => self.update(u, Loc::default()).map(|_| None),
            Monadic::Bind(a, x, b) => {
                let v = self.monadic(a)?;
                let frame = self.frames.last_mut().unwrap();
                let saved = match v {
                    Some(v) => frame.insert(x.clone(), v),
                    None => frame.remove(x),
                };
                let r = self.monadic(b);
                let frame = self.frames.last_mut().unwrap();
                match saved {
                    Some(old) => frame.insert(x.clone(), old),
                    None => frame.remove(x),
                };
                r
            }
            Monadic::Seq(ms) => {
                let mut last = None;
                for m in ms {
                    last = self.monadic(m)?;
                }
                Ok(last)
            }
            Monadic::Guard(k, t, loc) => self.guard(*k, t, *loc).map(|_| None),
            Monadic::Condition(c, a, b) => {
                if self.eval(c, Loc::default())?.as_bool() {
                    self.monadic(a)
                } else {
                    self.monadic(b)
                }
            }
            Monadic::While { cond, body, loc, .. } => {
                while self.eval(cond, *loc)?.as_bool() {
                    self.tick()?;
                    self.monadic(body)?;
                }
                Ok(None)
            }
            Monadic::Call { callee, args, loc } => {
                let vals = args.iter().map(|a| self.eval(a, *loc)).collect::<Result<Vec<_>, _>>()?;
                self.call(callee, vals, *loc)
            }
            Monadic::CallPtr { target, args, loc } => self.call_ptr(target, args, *loc),
            Monadic::Fail => Err(self.fault("fail".into(), Loc::default())),
        }
    }
}

/// Outcome of running one function to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub state: ConcreteState,
    pub result: Option<Value>,
    pub trace: Vec<TraceEvent>,
    pub steps: u64,
}

/// Run `function` from `state` with `args` bound to its parameters.
pub fn run_function(
    prog: &Program,
    function: &str,
    args: Vec<Value>,
    state: ConcreteState,
    fuel: u64,
    mode: Mode,
) -> Result<Run, ExecError> {
    let mut m = Machine::new(prog, state, fuel, mode);
    let result = m.call(function, args, Loc::default())?;
    Ok(Run { state: m.state, result, trace: m.trace, steps: m.steps })
}

/// [`run_function`] without recording a trace (faults are still logged).
pub fn run_function_quiet(
    prog: &Program,
    function: &str,
    args: Vec<Value>,
    state: ConcreteState,
    fuel: u64,
    mode: Mode,
) -> Result<Run, ExecError> {
    let mut m = Machine::new(prog, state, fuel, mode);
    m.record = false;
    let result = m.call(function, args, Loc::default())?;
    Ok(Run { state: m.state, result, trace: m.trace, steps: m.steps })
}

/// Run a statement directly (no call frame), for tests and tools.
pub fn exec_deep(prog: &Program, d: &Deep, state: ConcreteState, fuel: u64) -> Result<Run, ExecError> {
    let mut m = Machine::new(prog, state, fuel, Mode::Deep);
    m.deep(d)?;
    Ok(Run { state: m.state, result: None, trace: m.trace, steps: m.steps })
}

pub fn exec_monadic(prog: &Program, p: &Monadic, state: ConcreteState, fuel: u64) -> Result<Run, ExecError> {
    let mut m = Machine::new(prog, state, fuel, Mode::Monadic);
    let result = m.monadic(p)?;
    Ok(Run { state: m.state, result, trace: m.trace, steps: m.steps })
}

/// Values of globals after a run, for comparing executions.
pub fn globals_of(r: &Run) -> BTreeMap<String, Value> {
    r.state.globals()
}
