//! Randomised differential check of a Hoare spec against execution.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::default_fuel;
use super::exec::{run_function_quiet, ExecError, Mode};
use super::state::{random_state, ConcreteState, ValueGen};
use crate::logic::{eval_bool, mask, Env, HeapType, HoareSpec, Node, Sort, Term, Value, RESULT};
use crate::translator::Program;

/// A trial that failed, with the pre-state that triggered it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub detail: String,
    pub state: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub spec: String,
    pub function: String,
    pub trials: usize,
    /// Trials whose random pre-state failed the precondition.
    pub vacuous: usize,
    /// Partial-correctness trials that ran out of fuel.
    pub diverged: usize,
    pub violations: Vec<Witness>,
    pub faults: Vec<Witness>,
}

impl OracleReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty() && self.faults.is_empty()
    }
}

struct WithLogic<'a> {
    state: &'a ConcreteState,
    logic: &'a HashMap<String, Value>,
}

impl Env for WithLogic<'_> {
    fn var(&self, name: &str, sort: Sort) -> Option<Value> {
        self.logic.get(name).copied().or_else(|| self.state.var(name, sort))
    }

    fn heap(&self, heap: &str, ty: HeapType, addr: u64) -> u64 {
        self.state.heap(heap, ty, addr)
    }
}

fn value_term(v: Value) -> Term {
    match v {
        Value::Bool(b) => Term::bool(b),
        Value::Bv { width, bits } => Term::bv(width, bits & mask(width)),
    }
}

fn witness(trial: usize, s: &ConcreteState, logic: &HashMap<String, Value>, detail: String) -> Witness {
    let mut state: BTreeMap<String, String> = s.globals().into_iter().map(|(k, v)| (k, v.to_string())).collect();
    state.extend(logic.iter().map(|(k, v)| (k.clone(), v.to_string())));
    Witness { trial, detail, state }
}

/// Draw `trials` random pre-states; for those satisfying the precondition
/// run the function and evaluate the postcondition.
pub fn oracle_check(prog: &Program, spec: &HoareSpec, trials: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = ValueGen::new(prog);
    let mut report = OracleReport { spec: spec.name.clone(), function: spec.function.clone(), ..Default::default() };
    let Some(f) = prog.function(&spec.function) else {
        return report;
    };
    let pre = spec.pre_term();
    let post = spec.post_term();
    for trial in 0..trials {
        report.trials += 1;
        let mut s0 = random_state(prog, &gen, &mut rng);
        let mut logic: HashMap<String, Value> = HashMap::new();
        let args: Vec<Value> =
            f.params.iter().map(|(_, ty)| gen.value(&mut rng, ty).unwrap_or(Value::Bool(false))).collect();
        for ((p, _), v) in f.params.iter().zip(&args) {
            s0.set(p, *v);
        }
        for (l, sort) in &spec.labels {
            let v = match spec.label_defs.get(l) {
                Some(def) => crate::logic::eval(def, &s0).ok(),
                None => gen.sort_value(&mut rng, *sort),
            };
            if let Some(v) = v {
                logic.insert(l.clone(), v);
            }
        }
        let env = WithLogic { state: &s0, logic: &logic };
        if !matches!(eval_bool(&pre, &env), Ok(true)) {
            report.vacuous += 1;
            continue;
        }
        // Pin pre-state reads before running.
        let post_now = post.rewrite(&mut |n| match n.node() {
            Node::Old(x) => crate::logic::eval(x, &env).ok().map(value_term),
            _ => None,
        });
        let run =
            match run_function_quiet(prog, &spec.function, args.clone(), s0.clone(), default_fuel(), Mode::Monadic) {
                Ok(r) => r,
                Err(ExecError::FuelExhausted(n)) => {
                    if spec.total {
                        let d = format!("no termination within {n} steps");
                        report.violations.push(witness(trial, &s0, &logic, d));
                    } else {
                        report.diverged += 1;
                    }
                    continue;
                }
                Err(e) => {
                    report.faults.push(witness(trial, &s0, &logic, e.to_string()));
                    continue;
                }
            };
        let mut post_logic = logic.clone();
        if let Some(r) = run.result {
            post_logic.insert(RESULT.to_string(), r);
        }
        let env = WithLogic { state: &run.state, logic: &post_logic };
        match eval_bool(&post_now, &env) {
            Ok(true) => {}
            Ok(false) => report.violations.push(witness(trial, &s0, &logic, "postcondition false".into())),
            Err(e) => report.violations.push(witness(trial, &s0, &logic, format!("postcondition: {e}"))),
        }
    }
    report
}
