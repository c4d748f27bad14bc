//! Equivalence-preserving simplification run before bit-blasting.
//!
//! On top of the local folding rules this tracks which bits of each word
//! are fixed regardless of the free variables (`known bits`). A word whose
//! bits are all fixed becomes a constant, and an equality whose sides
//! disagree on a fixed bit becomes `false`. That is enough to close goals
//! like `(c | 3) & 1 != 0` without a SAT call.

use std::collections::HashMap;

use crate::logic::fold::fold;
use crate::logic::{mask, BinOp, Node, Term, UnOp};

/// Bits known to be zero and known to be one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Known {
    zeros: u64,
    ones: u64,
}

impl Known {
    const NONE: Known = Known { zeros: 0, ones: 0 };

    fn exact(w: u32, v: u64) -> Known {
        Known { zeros: !v & mask(w), ones: v & mask(w) }
    }

    fn meet(self, o: Known) -> Known {
        Known { zeros: self.zeros & o.zeros, ones: self.ones & o.ones }
    }
}

struct Analysis {
    // Holding the term keeps its address from being reused by a node built
    // later in the same pass.
    memo: HashMap<usize, (Term, Known)>,
}

impl Analysis {
    fn known(&mut self, t: &Term) -> Known {
        if let Some((_, k)) = self.memo.get(&t.ptr_id()) {
            return *k;
        }
        let k = self.compute(t);
        self.memo.insert(t.ptr_id(), (t.clone(), k));
        k
    }

    fn compute(&mut self, t: &Term) -> Known {
        let Some(w) = t.width() else {
            return Known::NONE;
        };
        let m = mask(w);
        match t.node() {
            Node::Const { value, .. } => Known::exact(w, *value),
            Node::FnAddr { addr, .. } => Known::exact(w, *addr),
            Node::Un(UnOp::Not, a) => {
                let k = self.known(a);
                Known { zeros: k.ones, ones: k.zeros }
            }
            Node::Bin(op, a, b) => {
                let ka = self.known(a);
                let kb = self.known(b);
                match op {
                    BinOp::And => Known { zeros: ka.zeros | kb.zeros, ones: ka.ones & kb.ones },
                    BinOp::Or => Known { zeros: ka.zeros & kb.zeros, ones: ka.ones | kb.ones },
                    BinOp::Xor => Known {
                        zeros: (ka.zeros & kb.zeros) | (ka.ones & kb.ones),
                        ones: (ka.ones & kb.zeros) | (ka.zeros & kb.ones),
                    },
                    BinOp::Shl | BinOp::LShr => match b.as_const() {
                        Some((_, s)) if s >= w as u64 => Known::exact(w, 0),
                        Some((_, s)) => {
                            if *op == BinOp::Shl {
                                Known { zeros: ((ka.zeros << s) | mask(s as u32)) & m, ones: (ka.ones << s) & m }
                            } else {
                                Known { zeros: (ka.zeros >> s) | (!(m >> s) & m), ones: ka.ones >> s }
                            }
                        }
                        None => Known::NONE,
                    },
                    _ => Known::NONE,
                }
            }
            Node::Ite(_, a, b) => self.known(a).meet(self.known(b)),
            Node::Ext { signed, arg, .. } => {
                let aw = arg.width().unwrap_or(w);
                let k = self.known(arg);
                let high = m & !mask(aw);
                let sign = 1u64 << (aw - 1);
                if !signed || k.zeros & sign != 0 {
                    Known { zeros: k.zeros | high, ones: k.ones }
                } else if k.ones & sign != 0 {
                    Known { zeros: k.zeros, ones: k.ones | high }
                } else {
                    k
                }
            }
            Node::Extract { lo, arg, .. } => {
                let k = self.known(arg);
                Known { zeros: (k.zeros >> lo) & m, ones: (k.ones >> lo) & m }
            }
            _ => Known::NONE,
        }
    }
}

fn known_bits_pass(t: &Term) -> Term {
    let mut an = Analysis { memo: HashMap::new() };
    t.rewrite(&mut |n| {
        if let Some(w) = n.width() {
            if n.as_const().is_none() {
                let k = an.known(n);
                if (k.zeros | k.ones) == mask(w) {
                    return Some(Term::bv(w, k.ones));
                }
            }
            return None;
        }
        if let Node::Eq(a, b) = n.node() {
            if a.width().is_some() {
                let (ka, kb) = (an.known(a), an.known(b));
                if (ka.ones & kb.zeros) | (ka.zeros & kb.ones) != 0 {
                    return Some(Term::ff());
                }
            }
        }
        None
    })
}

/// Simplify a formula. The result is equivalent to the input under every
/// assignment of its free variables.
pub fn simplify(t: &Term) -> Term {
    let mut cur = fold(t);
    for _ in 0..4 {
        let next = fold(&known_bits_pass(&cur));
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval, Assignment, Value};

    fn x() -> Term {
        Term::bv_var("x", 8)
    }

    #[test]
    fn or_then_mask_is_decided() {
        let t =
            Term::ne(Term::bin(BinOp::And, Term::bin(BinOp::Or, x(), Term::bv(8, 3)), Term::bv(8, 1)), Term::bv(8, 0));
        let s = simplify(&t);
        assert_eq!(s, Term::tt());
        // Exhaustive agreement at width 8.
        for v in 0..256u64 {
            let mut a = Assignment::default();
            a.vars.insert("x".into(), Value::bv(8, v));
            assert_eq!(eval(&t, &a).unwrap(), eval(&s, &a).unwrap());
        }
    }

    #[test]
    fn add_zero_is_identity() {
        assert_eq!(simplify(&Term::bin(BinOp::Add, x(), Term::bv(8, 0))), x());
    }

    #[test]
    fn false_hypothesis_is_vacuous() {
        let t = Term::implies(Term::ff(), Term::eq(x(), Term::bv(8, 1)));
        assert_eq!(simplify(&t), Term::tt());
    }

    #[test]
    fn shifted_bits_are_known() {
        let t = Term::bin(BinOp::And, Term::bin(BinOp::Shl, x(), Term::bv(8, 4)), Term::bv(8, 0x0f));
        assert_eq!(simplify(&t), Term::bv(8, 0));
    }

    #[test]
    fn rewritten_nodes_do_not_alias() {
        let (x, y) = (Term::bv_var("x", 2), Term::bv_var("y", 2));
        let div = Term::bin(BinOp::Shl, Term::bv(2, 0), Term::bin(BinOp::Shl, x.clone(), Term::bv(2, 2)));
        let t = Term::eq(Term::bin(BinOp::SRem, y.clone(), div), x.clone());
        let s = simplify(&t);
        for v in 0..16u64 {
            let mut a = Assignment::default();
            a.vars.insert("x".into(), Value::bv(2, v & 3));
            a.vars.insert("y".into(), Value::bv(2, v >> 2));
            assert_eq!(eval(&t, &a).unwrap(), eval(&s, &a).unwrap());
        }
    }
}
