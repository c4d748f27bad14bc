//! Discharging a single VC: simplify, bit-blast, solve, and check any
//! countermodel by direct evaluation.

use std::fmt;

use super::bitblast::bitblast;
use super::sat::{sat_solve, SatResult};
use super::simplify::simplify;
use super::Budget;
use crate::logic::{eval_bool, Assignment, Sort, Term, Value, Vc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofResult {
    Proved,
    /// Values for every free variable (and the heap cells read) under
    /// which the hypothesis holds and the goal fails.
    Counterexample(Assignment),
    Unknown(String),
}

impl ProofResult {
    pub fn tag(&self) -> &'static str {
        match self {
            ProofResult::Proved => "proved",
            ProofResult::Counterexample(_) => "counterexample",
            ProofResult::Unknown(_) => "unknown",
        }
    }
}

impl fmt::Display for ProofResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofResult::Proved => f.write_str("proved"),
            ProofResult::Counterexample(a) => {
                f.write_str("counterexample")?;
                for (k, v) in &a.vars {
                    write!(f, " {k}={v}")?;
                }
                for (h, cells) in &a.heaps {
                    for (addr, v) in cells {
                        write!(f, " {h}[{addr:#x}]={v:#x}")?;
                    }
                }
                Ok(())
            }
            ProofResult::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

/// The formula whose satisfiability refutes the VC.
pub fn refutation(vc: &Vc) -> Term {
    Term::and2(vc.hypothesis.clone(), Term::not(vc.goal.clone()))
}

/// Decide whether `formula` is valid. Countermodels are re-evaluated on
/// the original formula before being reported.
pub fn prove(formula: &Term, budget: &Budget) -> ProofResult {
    let negated = Term::not(formula.clone());
    let simplified = simplify(&negated);
    if simplified.as_bool() == Some(false) {
        return ProofResult::Proved;
    }
    let cnf = match bitblast(&simplified) {
        Ok(c) => c,
        Err(e) => return ProofResult::Unknown(e.to_string()),
    };
    let model = match sat_solve(&cnf.clauses, budget) {
        SatResult::Unsat => return ProofResult::Proved,
        SatResult::Unknown(r) => return ProofResult::Unknown(r),
        SatResult::Sat(m) => m,
    };
    let mut a = cnf.decode(&model);
    // Variables the simplifier removed are unconstrained; pin them to 0.
    for (name, sort) in negated.free_vars() {
        let v = match sort {
            Sort::Bool => Value::Bool(false),
            Sort::Bv(w) => Value::bv(w, 0),
            Sort::Heap(_) => continue,
        };
        a.vars.entry(name).or_insert(v);
    }
    match eval_bool(&negated, &a) {
        Ok(true) => ProofResult::Counterexample(a),
        Ok(false) => ProofResult::Unknown("countermodel failed re-evaluation".into()),
        Err(e) => ProofResult::Unknown(format!("countermodel does not evaluate: {e}")),
    }
}

pub fn prove_vc(vc: &Vc, budget: &Budget) -> ProofResult {
    if let Some(r) = &vc.unprovable {
        return ProofResult::Unknown(r.clone());
    }
    prove(&vc.formula(), budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::BinOp;

    #[test]
    fn low_bit_goal_has_zero_counterexample() {
        let x = Term::bv_var("x", 8);
        let goal = Term::ne(Term::bin(BinOp::And, x, Term::bv(8, 1)), Term::bv(8, 0));
        let ProofResult::Counterexample(a) = prove(&Term::implies(Term::tt(), goal), &Budget::default()) else {
            panic!()
        };
        assert_eq!(a.vars["x"].bits() & 1, 0);
    }

    #[test]
    fn or_three_has_low_bit() {
        let x = Term::bv_var("x", 64);
        let goal =
            Term::ne(Term::bin(BinOp::And, Term::bin(BinOp::Or, x, Term::bv(64, 3)), Term::bv(64, 1)), Term::bv(64, 0));
        assert_eq!(prove(&goal, &Budget::default()), ProofResult::Proved);
    }

    #[test]
    fn increment_under_equality() {
        let (t, a) = (Term::bv_var("timer", 32), Term::bv_var("a", 32));
        let f = Term::implies(
            Term::eq(t.clone(), a.clone()),
            Term::eq(Term::bin(BinOp::Add, t, Term::bv(32, 1)), Term::bin(BinOp::Add, a, Term::bv(32, 1))),
        );
        assert_eq!(prove(&f, &Budget::default()), ProofResult::Proved);
    }
}
