//! Word abstraction: `+`, `-` and `*` on machine words become exact
//! integer operations, each preceded by a guard stating that the exact
//! result fits the word. Bitwise operators stay at word level.

use std::collections::HashMap;

use crate::frontend::Loc;
use crate::logic::fold::fold;
use crate::logic::{mask, BinOp, CmpOp, Node, Term};

use super::ir::{GuardKind, Monadic};

fn neg(t: &Term) -> Term {
    let w = t.width().unwrap();
    Term::cmp(CmpOp::Slt, t.clone(), Term::bv(w, 0))
}

/// Condition under which the word operation `a op b` computes the exact
/// integer result.
pub fn range_guard(op: BinOp, signed: bool, a: &Term, b: &Term) -> Term {
    let w = a.width().expect("word operand");
    let word = |o: BinOp| Term::bin(o, a.clone(), b.clone());
    let g = match (op, signed) {
        (BinOp::Add, false) => Term::cmp(CmpOp::Ule, a.clone(), word(BinOp::Add)),
        (BinOp::Sub, false) => Term::cmp(CmpOp::Ule, b.clone(), a.clone()),
        (BinOp::Add, true) => {
            let same = Term::eq(neg(a), neg(b));
            Term::not(Term::and2(same, Term::not(Term::eq(neg(&word(BinOp::Add)), neg(a)))))
        }
        (BinOp::Sub, true) => {
            let differ = Term::not(Term::eq(neg(a), neg(b)));
            Term::not(Term::and2(differ, Term::not(Term::eq(neg(&word(BinOp::Sub)), neg(a)))))
        }
        (BinOp::Mul, s) if w <= 32 => {
            let wide = Term::bin(BinOp::Mul, a.clone().resize(2 * w, s), b.clone().resize(2 * w, s));
            Term::eq(wide, word(BinOp::Mul).resize(2 * w, s))
        }
        (BinOp::Mul, false) => Term::or(vec![
            Term::eq(a.clone(), Term::bv(w, 0)),
            Term::eq(Term::bin(BinOp::UDiv, word(BinOp::Mul), a.clone()), b.clone()),
        ]),
        (BinOp::Mul, true) => {
            let min = Term::bv(w, 1u64 << (w - 1));
            Term::or(vec![
                Term::eq(a.clone(), Term::bv(w, 0)),
                Term::and2(
                    Term::not(Term::and2(Term::eq(a.clone(), Term::bv(w, mask(w))), Term::eq(b.clone(), min))),
                    Term::eq(Term::bin(BinOp::SDiv, word(BinOp::Mul), a.clone()), b.clone()),
                ),
            ])
        }
        _ => Term::tt(),
    };
    fold(&g)
}

fn int_op(op: BinOp, signed: bool) -> BinOp {
    match op {
        BinOp::Add => BinOp::IAdd { signed },
        BinOp::Sub => BinOp::ISub { signed },
        _ => BinOp::IMul { signed },
    }
}

/// Same fact, up to the trivial rewrites `not (a < b)` = `b <= a`.
fn normal(t: &Term) -> Term {
    match t.node() {
        Node::Not(x) => match x.node() {
            Node::Cmp(CmpOp::Ult, a, b) => Term::cmp(CmpOp::Ule, b.clone(), a.clone()),
            Node::Cmp(CmpOp::Slt, a, b) => Term::cmp(CmpOp::Sle, b.clone(), a.clone()),
            Node::Cmp(CmpOp::Ule, a, b) => Term::cmp(CmpOp::Ult, b.clone(), a.clone()),
            Node::Cmp(CmpOp::Sle, a, b) => Term::cmp(CmpOp::Slt, b.clone(), a.clone()),
            _ => t.clone(),
        },
        _ => t.clone(),
    }
}

struct Abstractor<'a> {
    signed_ops: &'a HashMap<Term, bool>,
}

impl Abstractor<'_> {
    /// Abstract one term; returns it and the range guards it needs.
    fn term(&self, t: &Term) -> (Term, Vec<Term>) {
        let mut guards = Vec::new();
        let out = t.rewrite(&mut |n| {
            if let Node::Bin(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul), a, b) = n.node() {
                // Look the node up by its word form; children may already
                // have been abstracted.
                let word_form = Term::bin(*op, strip(a), strip(b));
                if let Some(&signed) = self.signed_ops.get(&word_form) {
                    let g = range_guard(*op, signed, &strip(a), &strip(b));
                    if g.as_bool() != Some(true) {
                        guards.push(g);
                    }
                    return Some(Term::bin(int_op(*op, signed), a.clone(), b.clone()));
                }
            }
            None
        });
        (out, guards)
    }

    fn guards(&self, gs: Vec<Term>, facts: &[Term], loc: Loc) -> Vec<Monadic> {
        let mut out = Vec::new();
        let mut seen: Vec<Term> = facts.iter().map(normal).collect();
        for g in gs {
            let n = normal(&g);
            if seen.contains(&n) {
                continue;
            }
            seen.push(n);
            out.push(Monadic::Guard(GuardKind::WordRange, g, loc));
        }
        out
    }

    fn run(&self, m: &Monadic, facts: &mut Vec<Term>) -> Monadic {
        let loc = Loc::default();
        match m {
            Monadic::Seq(ms) => {
                let mut out = Vec::new();
                for x in ms {
                    out.push(self.run(x, facts));
                }
                Monadic::seq(out)
            }
            Monadic::Guard(k, g, l) => {
                let (g2, gs) = self.term(g);
                let mut out = self.guards(gs, facts, *l);
                facts.extend(g.conjuncts());
                out.push(Monadic::Guard(*k, g2, *l));
                Monadic::seq(out)
            }
            Monadic::Modify(u) => {
                let mut gs = Vec::new();
                let mut nu = Vec::new();
                for (x, t) in u {
                    let (t2, g) = self.term(t);
                    gs.extend(g);
                    nu.push((x.clone(), t2));
                }
                let mut out = self.guards(gs, facts, loc);
                facts.retain(|f| !u.iter().any(|(x, _)| f.mentions(x)));
                out.push(Monadic::Modify(nu));
                Monadic::seq(out)
            }
            Monadic::Return(Some(t)) | Monadic::Gets(t) => {
                let (t2, gs) = self.term(t);
                let mut out = self.guards(gs, facts, loc);
                out.push(match m {
                    Monadic::Return(_) => Monadic::Return(Some(t2)),
                    _ => Monadic::Gets(t2),
                });
                Monadic::seq(out)
            }
            Monadic::Call { callee, args, loc } => {
                let mut gs = Vec::new();
                let args = args
                    .iter()
                    .map(|a| {
                        let (a2, g) = self.term(a);
                        gs.extend(g);
                        a2
                    })
                    .collect();
                let mut out = self.guards(gs, facts, *loc);
                facts.clear();
                out.push(Monadic::Call { callee: callee.clone(), args, loc: *loc });
                Monadic::seq(out)
            }
            Monadic::CallPtr { .. } => {
                facts.clear();
                m.clone()
            }
            Monadic::Bind(a, x, b) => {
                let a = self.run(a, facts);
                let b = self.run(b, facts);
                Monadic::Bind(Box::new(a), x.clone(), Box::new(b))
            }
            Monadic::Condition(c, a, b) => {
                let (c2, gs) = self.term(c);
                let mut out = self.guards(gs, facts, loc);
                let mut fa = facts.clone();
                fa.extend(c.conjuncts());
                let mut fb = facts.clone();
                fb.push(fold(&Term::not(c.clone())));
                let a = self.run(a, &mut fa);
                let b = self.run(b, &mut fb);
                facts.retain(|f| fa.contains(f) && fb.contains(f));
                out.push(Monadic::Condition(c2, Box::new(a), Box::new(b)));
                Monadic::seq(out)
            }
            Monadic::While { cond, body, ann, loc } => {
                facts.clear();
                let (c2, gs) = self.term(cond);
                let pre = self.guards(gs.clone(), &[], *loc);
                let mut fb = cond.conjuncts();
                let body = self.run(body, &mut fb);
                let recheck = self.guards(gs, &[], *loc);
                let mut items = vec![body];
                items.extend(recheck);
                let mut out = pre;
                out.push(Monadic::While { cond: c2, body: Box::new(Monadic::seq(items)), ann: ann.clone(), loc: *loc });
                facts.push(fold(&Term::not(cond.clone())));
                Monadic::seq(out)
            }
            Monadic::Return(None) | Monadic::Fail => m.clone(),
        }
    }
}

/// Undo the abstraction of a term (integer ops back to word ops).
pub fn strip(t: &Term) -> Term {
    t.rewrite(&mut |n| match n.node() {
        Node::Bin(op @ (BinOp::IAdd { .. } | BinOp::ISub { .. } | BinOp::IMul { .. }), a, b) => {
            Some(Term::bin(op.word_op(), a.clone(), b.clone()))
        }
        _ => None,
    })
}

/// Abstract the arithmetic of `m`. `signed_ops` gives, for each word
/// `+`/`-`/`*` node produced by the translator, whether the C operation
/// was signed; nodes not in the table (address arithmetic) stay as they
/// are.
pub fn abstract_words(m: &Monadic, signed_ops: &HashMap<Term, bool>) -> Monadic {
    Abstractor { signed_ops }.run(m, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval, Assignment, Value};

    #[test]
    fn increment_gets_range_guard() {
        let t = Term::bv_var("timer", 32);
        let add = Term::bin(BinOp::Add, t.clone(), Term::bv(32, 1));
        let ops = HashMap::from([(add.clone(), false)]);
        let m = Monadic::Modify(vec![("timer".into(), add)]);
        let out = abstract_words(&m, &ops).to_string();
        assert_eq!(out, "(seq (guard word-range (bvule timer (bvadd timer 1#32))) (modify timer (int+ timer 1#32)))");
    }

    #[test]
    fn guarded_subtraction_adds_nothing() {
        let x = Term::bv_var("x", 8);
        let y = Term::bv_var("y", 8);
        let sub = Term::bin(BinOp::Sub, x.clone(), y.clone());
        let ops = HashMap::from([(sub.clone(), false)]);
        let m = Monadic::seq(vec![
            Monadic::Guard(GuardKind::Bounds, Term::cmp(CmpOp::Ule, y, x), Loc::default()),
            Monadic::Return(Some(sub)),
        ]);
        let out = abstract_words(&m, &ops);
        let guards = match &out {
            Monadic::Seq(ms) => ms.iter().filter(|m| matches!(m, Monadic::Guard(..))).count(),
            _ => 0,
        };
        assert_eq!(guards, 1);
    }

    #[test]
    fn range_guards_are_exact_at_width_8() {
        let a = Term::bv_var("a", 8);
        let b = Term::bv_var("b", 8);
        for op in [BinOp::Add, BinOp::Sub, BinOp::Mul] {
            for signed in [false, true] {
                let g = range_guard(op, signed, &a, &b);
                let exact = Term::bin(int_op(op, signed), a.clone(), b.clone());
                for x in 0..256u64 {
                    for y in 0..256u64 {
                        let mut env = Assignment::default();
                        env.vars.insert("a".into(), Value::bv(8, x));
                        env.vars.insert("b".into(), Value::bv(8, y));
                        let fits = eval(&exact, &env).is_ok();
                        assert_eq!(eval(&g, &env).unwrap().as_bool(), fits, "{op:?} {signed} {x} {y}");
                    }
                }
            }
        }
    }
}
