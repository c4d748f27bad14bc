//! Concrete program states and random state generation.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::frontend::CType;
use crate::logic::{mask, Env, HeapType, Node, Sort, TypedHeapState, Value};
use crate::translator::{sort_of, Program};

/// Valuation of every global and local state component plus the typed
/// heaps. Components never assigned hold 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConcreteState {
    pub vars: BTreeMap<String, Value>,
    pub heap: TypedHeapState,
}

/// One slot of the scheduler's task ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Task {
    pub timeout: u64,
    pub start: u64,
    /// Code address of the callback; 0 marks an empty slot.
    pub timeout_fun: u64,
}

fn zero(sort: Sort) -> Option<Value> {
    match sort {
        Sort::Bool => Some(Value::Bool(false)),
        Sort::Bv(w) => Some(Value::bv(w, 0)),
        Sort::Heap(_) => None,
    }
}

impl ConcreteState {
    /// Globals from their initialisers (0 otherwise), all locals 0.
    pub fn initial(prog: &Program) -> ConcreteState {
        let mut s = ConcreteState::default();
        for f in &prog.globals.fields {
            let sort = sort_of(&f.ty);
            let v = match prog.init.get(&f.name) {
                Some(t) => match t.node() {
                    Node::Const { width, value } => Value::bv(*width, *value),
                    Node::FnAddr { addr, .. } => Value::bv(64, *addr),
                    _ => zero(sort).unwrap(),
                },
                None => match zero(sort) {
                    Some(v) => v,
                    None => continue,
                },
            };
            s.vars.insert(f.name.clone(), v);
        }
        for f in &prog.functions {
            for (name, ty) in f.params.iter().chain(&f.locals) {
                if let Some(v) = zero(sort_of(ty)) {
                    s.vars.insert(name.clone(), v);
                }
            }
        }
        s
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.vars.get(name).copied()
    }

    /// Bits of a word component, 0 when absent.
    pub fn word(&self, name: &str) -> u64 {
        self.get(name).map(Value::bits).unwrap_or(0)
    }

    pub fn set(&mut self, name: &str, v: Value) {
        self.vars.insert(name.to_string(), v);
    }

    /// Global components only (locals carry the `function::` prefix).
    pub fn globals(&self) -> BTreeMap<String, Value> {
        self.vars.iter().filter(|(k, _)| !k.contains("::")).map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Slot `i` of the `tasks` ring.
    pub fn task(&self, i: u64) -> Task {
        Task {
            timeout: self.word(&format!("tasks[{i}].timeout")),
            start: self.word(&format!("tasks[{i}].start")),
            timeout_fun: self.word(&format!("tasks[{i}].timeout_fun")),
        }
    }
}

impl Env for ConcreteState {
    fn var(&self, name: &str, _sort: Sort) -> Option<Value> {
        self.get(name)
    }

    fn heap(&self, _heap: &str, ty: HeapType, addr: u64) -> u64 {
        self.heap.peek(ty, addr)
    }
}

/// Functions whose address is taken somewhere in the program. These are
/// the only values a function pointer can legitimately hold.
pub fn address_taken(prog: &Program) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in &prog.functions {
        f.monadic.walk(&mut |m| {
            for t in m.own_terms() {
                t.any(&mut |n| {
                    if let Node::FnAddr { name, .. } = n.node() {
                        out.insert(name.clone());
                    }
                    false
                });
            }
        });
    }
    for t in prog.init.values() {
        if let Node::FnAddr { name, .. } = t.node() {
            out.insert(name.clone());
        }
    }
    out
}

/// Value generator biased toward small numbers, so that preconditions
/// with equalities and ring bounds hold in a useful share of trials.
pub struct ValueGen {
    fn_addrs: Vec<u64>,
}

impl ValueGen {
    pub fn new(prog: &Program) -> Self {
        let mut fn_addrs = vec![0];
        fn_addrs.extend(address_taken(prog).iter().filter_map(|n| prog.symtab.addr(n)));
        ValueGen { fn_addrs }
    }

    pub fn word(&self, rng: &mut impl Rng, width: u32) -> u64 {
        match rng.gen_range(0..10) {
            0..=2 => 0,
            3..=5 => rng.gen_range(0..=16) & mask(width),
            6 => mask(width),
            _ => rng.gen::<u64>() & mask(width),
        }
    }

    pub fn value(&self, rng: &mut impl Rng, ty: &CType) -> Option<Value> {
        if ty.is_function_pointer() {
            let a = self.fn_addrs[rng.gen_range(0..self.fn_addrs.len())];
            return Some(Value::bv(64, a));
        }
        match sort_of(ty) {
            Sort::Bool => Some(Value::Bool(rng.gen())),
            Sort::Bv(w) => Some(Value::bv(w, self.word(rng, w))),
            Sort::Heap(_) => None,
        }
    }

    pub fn sort_value(&self, rng: &mut impl Rng, sort: Sort) -> Option<Value> {
        match sort {
            Sort::Bool => Some(Value::Bool(rng.gen())),
            Sort::Bv(w) => Some(Value::bv(w, self.word(rng, w))),
            Sort::Heap(_) => None,
        }
    }
}

/// A state with every global drawn from `gen`; locals 0, heaps empty.
pub fn random_state(prog: &Program, gen: &ValueGen, rng: &mut impl Rng) -> ConcreteState {
    let mut s = ConcreteState::initial(prog);
    for f in &prog.globals.fields {
        if let Some(v) = gen.value(rng, &f.ty) {
            s.set(&f.name, v);
        }
    }
    s
}
