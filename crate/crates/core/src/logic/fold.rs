//! Local, always-sound term rewriting: constant folding, neutral elements
//! and boolean connective flattening. Used by the translator to keep IR
//! readable and as the first stage of the solver's simplifier.

use super::eval::{eval, Assignment, Value};
use super::term::{mask, BinOp, CmpOp, Node, Term, UnOp};

fn is_literal(t: &Term) -> bool {
    matches!(t.node(), Node::Bool(_) | Node::Const { .. } | Node::FnAddr { .. })
}

fn value_term(v: Value) -> Term {
    match v {
        Value::Bool(b) => Term::bool(b),
        Value::Bv { width, bits } => Term::bv(width, bits),
    }
}

fn commutative(op: BinOp) -> bool {
    matches!(op, BinOp::Add | BinOp::Mul | BinOp::And | BinOp::Or | BinOp::Xor)
}

/// Rewrite `t` bottom-up until no rule applies at any node.
pub fn fold(t: &Term) -> Term {
    t.rewrite(&mut |n| {
        let mut cur = step(n)?;
        // A rewrite can enable another at the same node; its children are
        // already normal unless the rule built new ones.
        for _ in 0..8 {
            match step(&cur) {
                Some(next) => cur = next,
                None => break,
            }
        }
        Some(fold_children(&cur))
    })
}

fn fold_children(t: &Term) -> Term {
    let kids = t.children();
    if kids.iter().all(|k| step(k).is_none()) {
        return t.clone();
    }
    fold(t)
}

/// One rewrite at the root, children assumed folded. Returns `None` when
/// no rule applies.
pub fn step(t: &Term) -> Option<Term> {
    let kids = t.children();
    let foldable = !matches!(
        t.node(),
        Node::Var { .. } | Node::Old(_) | Node::Read { .. } | Node::Store { .. } | Node::FnAddr { .. }
    );
    if foldable && !kids.is_empty() && kids.iter().all(|k| is_literal(k)) {
        if let Ok(v) = eval(t, &Assignment::default()) {
            return Some(value_term(v));
        }
    }
    let c = |x: &Term| match x.node() {
        Node::Const { value, .. } => Some(*value),
        _ => None,
    };
    match t.node() {
        Node::Not(a) => match a.node() {
            Node::Bool(b) => Some(Term::bool(!b)),
            Node::Not(x) => Some(x.clone()),
            _ => None,
        },
        Node::And(ts) => flatten(ts, true),
        Node::Or(ts) => flatten(ts, false),
        Node::Implies(a, b) => match (a.as_bool(), b.as_bool()) {
            (Some(true), _) => Some(b.clone()),
            (Some(false), _) | (_, Some(true)) => Some(Term::tt()),
            (_, Some(false)) => Some(Term::not(a.clone())),
            _ if a == b => Some(Term::tt()),
            // a -> (a -> c) = a -> c; repeated guards on one path stack up like this
            _ => match b.node() {
                Node::Implies(a2, c) if a2 == a => Some(Term::implies(a.clone(), c.clone())),
                _ => None,
            },
        },
        Node::Ite(cnd, a, b) => match cnd.as_bool() {
            Some(true) => Some(a.clone()),
            Some(false) => Some(b.clone()),
            None if a == b => Some(a.clone()),
            None => match (a.as_bool(), b.as_bool()) {
                (Some(true), Some(false)) => Some(cnd.clone()),
                (Some(false), Some(true)) => Some(Term::not(cnd.clone())),
                _ => None,
            },
        },
        Node::Eq(a, b) => {
            if a == b {
                return Some(Term::tt());
            }
            match (a.as_bool(), b.as_bool()) {
                (Some(true), _) => Some(b.clone()),
                (_, Some(true)) => Some(a.clone()),
                (Some(false), _) => Some(Term::not(b.clone())),
                (_, Some(false)) => Some(Term::not(a.clone())),
                _ if is_literal(a) && !is_literal(b) => Some(Term::eq(b.clone(), a.clone())),
                _ => None,
            }
        }
        Node::Un(UnOp::Not, a) => match a.node() {
            Node::Un(UnOp::Not, x) => Some(x.clone()),
            _ => None,
        },
        Node::Un(UnOp::Neg, a) => match a.node() {
            Node::Un(UnOp::Neg, x) => Some(x.clone()),
            _ => None,
        },
        Node::Bin(op, a, b) => {
            let w = t.width()?;
            let ones = mask(w);
            if commutative(*op) && is_literal(a) && !is_literal(b) {
                return Some(Term::bin(*op, b.clone(), a.clone()));
            }
            // (x op c1) op c2 = x op (c1 op c2)
            if commutative(*op) {
                if let (Node::Bin(inner, x, c1), Some(_)) = (a.node(), c(b)) {
                    if inner == op && c(c1).is_some() {
                        let k = fold(&Term::bin(*op, c1.clone(), b.clone()));
                        return Some(Term::bin(*op, x.clone(), k));
                    }
                }
            }
            match (op, c(b)) {
                (BinOp::Or | BinOp::Xor | BinOp::Add | BinOp::Sub, Some(0)) => Some(a.clone()),
                (BinOp::Shl | BinOp::LShr | BinOp::AShr, Some(0)) => Some(a.clone()),
                (BinOp::And | BinOp::Mul, Some(0)) => Some(Term::bv(w, 0)),
                (BinOp::Or, Some(v)) if v == ones => Some(Term::bv(w, ones)),
                (BinOp::And, Some(v)) if v == ones => Some(a.clone()),
                (BinOp::Mul | BinOp::UDiv | BinOp::SDiv, Some(1)) => Some(a.clone()),
                _ if a == b => match op {
                    BinOp::And | BinOp::Or => Some(a.clone()),
                    BinOp::Xor | BinOp::Sub => Some(Term::bv(w, 0)),
                    _ => None,
                },
                _ => None,
            }
        }
        Node::Cmp(op, a, b) => {
            let w = a.width()?;
            match (op, c(a), c(b)) {
                (CmpOp::Ule, Some(0), _) => Some(Term::tt()),
                (CmpOp::Ule, _, Some(v)) if v == mask(w) => Some(Term::tt()),
                (CmpOp::Ult, _, Some(0)) => Some(Term::ff()),
                (CmpOp::Ult, Some(v), _) if v == mask(w) => Some(Term::ff()),
                _ if a == b => Some(Term::bool(matches!(op, CmpOp::Ule | CmpOp::Sle))),
                _ => None,
            }
        }
        Node::Ext { signed, by, arg } => match arg.node() {
            Node::Ext { signed: s2, by: b2, arg: inner } if s2 == signed || !s2 => {
                // zext of zext, sext of sext, and sext of zext (the sign
                // bit of a zero-extension is zero) all collapse.
                let s = *s2 && *signed;
                Some(Term::new(Node::Ext { signed: s, by: by + b2, arg: inner.clone() }))
            }
            _ => None,
        },
        Node::Extract { hi, lo, arg } => match arg.node() {
            Node::Ext { arg: inner, .. } if *lo == 0 && inner.width() == Some(hi + 1) => Some(inner.clone()),
            Node::Extract { lo: lo2, arg: inner, .. } => Some(Term::extract(hi + lo2, lo + lo2, inner.clone())),
            _ => None,
        },
        _ => None,
    }
}

fn flatten(ts: &[Term], is_and: bool) -> Option<Term> {
    let unit = is_and;
    let mut out: Vec<Term> = Vec::with_capacity(ts.len());
    let mut changed = false;
    for x in ts {
        match x.node() {
            Node::Bool(b) if *b == unit => changed = true,
            Node::Bool(_) => return Some(Term::bool(!unit)),
            Node::And(inner) if is_and => {
                changed = true;
                for y in inner {
                    if !out.contains(y) {
                        out.push(y.clone());
                    }
                }
            }
            Node::Or(inner) if !is_and => {
                changed = true;
                for y in inner {
                    if !out.contains(y) {
                        out.push(y.clone());
                    }
                }
            }
            _ => {
                if out.contains(x) {
                    changed = true;
                } else {
                    out.push(x.clone());
                }
            }
        }
    }
    if !changed && out.len() >= 2 {
        return None;
    }
    Some(if is_and { Term::and(out) } else { Term::or(out) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn or_constants_merge() {
        let x = Term::bv_var("x", 64);
        let t = Term::bin(BinOp::Or, Term::bin(BinOp::Or, x.clone(), Term::bv(64, 2)), Term::bv(64, 1));
        assert_eq!(fold(&t).to_string(), "(bvor x 3#64)");
    }

    #[test]
    fn neutral_elements() {
        let x = Term::bv_var("x", 8);
        assert_eq!(fold(&Term::bin(BinOp::Add, x.clone(), Term::bv(8, 0))), x);
        assert_eq!(fold(&Term::bin(BinOp::And, Term::bv(8, 0), x.clone())), Term::bv(8, 0));
        assert_eq!(fold(&Term::eq(x.clone(), x)), Term::tt());
    }

    #[test]
    fn constant_conversion() {
        assert_eq!(fold(&Term::zext(32, Term::bv(32, 2))), Term::bv(64, 2));
    }

    #[test]
    fn repeated_hypothesis_collapses() {
        let g = Term::cmp(CmpOp::Ult, Term::bv_var("i", 8), Term::bv(8, 4));
        let c = Term::eq(Term::bv_var("x", 8), Term::bv(8, 1));
        let t = Term::implies(g.clone(), Term::implies(g.clone(), Term::implies(g.clone(), c.clone())));
        assert_eq!(fold(&t), Term::implies(g, c));
    }
}
