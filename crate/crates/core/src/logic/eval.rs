//! Concrete evaluation of terms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::term::{mask, to_signed, BinOp, CmpOp, HeapType, Node, Sort, Term, UnOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Bv { width: u32, bits: u64 },
}

impl Value {
    pub fn bv(width: u32, bits: u64) -> Value {
        Value::Bv { width, bits: bits & mask(width) }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Bv { bits, .. } => bits != 0,
        }
    }

    pub fn bits(self) -> u64 {
        match self {
            Value::Bool(b) => b as u64,
            Value::Bv { bits, .. } => bits,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Bv { width, bits } => write!(f, "{bits:#x}#{width}"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("`\\old` must be eliminated before evaluation")]
    Old,
    #[error("integer result does not fit in {0} bits")]
    IntOverflow(u32),
    #[error("heap-sorted term used as a value")]
    HeapValue,
}

/// Source of variable and heap values for evaluation.
pub trait Env {
    fn var(&self, name: &str, sort: Sort) -> Option<Value>;
    /// Value stored at `addr` in the base heap named `heap` (unwritten
    /// cells default to zero in every environment).
    fn heap(&self, heap: &str, ty: HeapType, addr: u64) -> u64;
}

/// A plain assignment: variable values plus explicit heap cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub vars: BTreeMap<String, Value>,
    pub heaps: BTreeMap<String, BTreeMap<u64, u64>>,
}

impl Env for Assignment {
    fn var(&self, name: &str, _sort: Sort) -> Option<Value> {
        self.vars.get(name).copied()
    }

    fn heap(&self, heap: &str, _ty: HeapType, addr: u64) -> u64 {
        self.heaps.get(heap).and_then(|h| h.get(&addr)).copied().unwrap_or(0)
    }
}

pub fn eval(t: &Term, env: &dyn Env) -> Result<Value, EvalError> {
    Evaluator { env, memo: HashMap::new() }.eval(t)
}

pub fn eval_bool(t: &Term, env: &dyn Env) -> Result<bool, EvalError> {
    eval(t, env).map(Value::as_bool)
}

struct Evaluator<'a> {
    env: &'a dyn Env,
    memo: HashMap<usize, Value>,
}

pub fn bin_word(op: BinOp, w: u32, a: u64, b: u64) -> Result<u64, EvalError> {
    let m = mask(w);
    let neg = |x: u64| x.wrapping_neg() & m;
    let msb = |x: u64| (x >> (w - 1)) & 1 == 1;
    let udiv = |a: u64, b: u64| a.checked_div(b).unwrap_or(m);
    let urem = |a: u64, b: u64| if b == 0 { a } else { a % b };
    let r = match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::UDiv => udiv(a, b),
        BinOp::URem => urem(a, b),
        BinOp::SDiv => match (msb(a), msb(b)) {
            (false, false) => udiv(a, b),
            (true, false) => neg(udiv(neg(a), b)),
            (false, true) => neg(udiv(a, neg(b))),
            (true, true) => udiv(neg(a), neg(b)),
        },
        BinOp::SRem => match (msb(a), msb(b)) {
            (false, false) => urem(a, b),
            (true, false) => neg(urem(neg(a), b)),
            (false, true) => urem(a, neg(b)),
            (true, true) => neg(urem(neg(a), neg(b))),
        },
        BinOp::And => a & b,
        BinOp::Or => a | b,
        BinOp::Xor => a ^ b,
        BinOp::Shl => {
            if b >= w as u64 {
                0
            } else {
                a << b
            }
        }
        BinOp::LShr => {
            if b >= w as u64 {
                0
            } else {
                a >> b
            }
        }
        BinOp::AShr => {
            let s = to_signed(a, w);
            if b >= w as u64 {
                if s < 0 {
                    m
                } else {
                    0
                }
            } else {
                (s >> b) as u64
            }
        }
        BinOp::IAdd { signed } | BinOp::ISub { signed } | BinOp::IMul { signed } => {
            let (x, y) =
                if signed { (to_signed(a, w) as i128, to_signed(b, w) as i128) } else { (a as i128, b as i128) };
            let exact = match op {
                BinOp::IAdd { .. } => x + y,
                BinOp::ISub { .. } => x - y,
                _ => x * y,
            };
            let (lo, hi) = if signed { (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1) } else { (0, (1i128 << w) - 1) };
            if exact < lo || exact > hi {
                return Err(EvalError::IntOverflow(w));
            }
            exact as u64
        }
    };
    Ok(r & m)
}

pub fn cmp_word(op: CmpOp, w: u32, a: u64, b: u64) -> bool {
    match op {
        CmpOp::Ult => a < b,
        CmpOp::Ule => a <= b,
        CmpOp::Slt => to_signed(a, w) < to_signed(b, w),
        CmpOp::Sle => to_signed(a, w) <= to_signed(b, w),
    }
}

impl Evaluator<'_> {
    fn eval(&mut self, t: &Term) -> Result<Value, EvalError> {
        if matches!(t.node(), Node::Const { .. } | Node::Var { .. } | Node::Bool(_)) {
            return self.eval_node(t);
        }
        if let Some(v) = self.memo.get(&t.ptr_id()) {
            return Ok(*v);
        }
        let v = self.eval_node(t)?;
        self.memo.insert(t.ptr_id(), v);
        Ok(v)
    }

    fn word(&mut self, t: &Term) -> Result<u64, EvalError> {
        Ok(self.eval(t)?.bits())
    }

    fn eval_node(&mut self, t: &Term) -> Result<Value, EvalError> {
        Ok(match t.node() {
            Node::Bool(b) => Value::Bool(*b),
            Node::Const { width, value } => Value::bv(*width, *value),
            Node::FnAddr { addr, .. } => Value::bv(64, *addr),
            Node::Var { name, sort } => {
                if let Sort::Heap(_) = sort {
                    return Err(EvalError::HeapValue);
                }
                self.env.var(name, *sort).ok_or_else(|| EvalError::Unbound(name.clone()))?
            }
            Node::Old(_) => return Err(EvalError::Old),
            Node::Not(a) => Value::Bool(!self.eval(a)?.as_bool()),
            Node::And(ts) => {
                for x in ts {
                    if !self.eval(x)?.as_bool() {
                        return Ok(Value::Bool(false));
                    }
                }
                Value::Bool(true)
            }
            Node::Or(ts) => {
                for x in ts {
                    if self.eval(x)?.as_bool() {
                        return Ok(Value::Bool(true));
                    }
                }
                Value::Bool(false)
            }
            Node::Implies(a, b) => Value::Bool(!self.eval(a)?.as_bool() || self.eval(b)?.as_bool()),
            Node::Ite(c, a, b) => {
                if self.eval(c)?.as_bool() {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
            Node::Eq(a, b) => Value::Bool(self.eval(a)? == self.eval(b)?),
            Node::Un(op, a) => {
                let w = t.width().unwrap();
                let x = self.word(a)?;
                let r = match op {
                    UnOp::Not => !x,
                    UnOp::Neg => x.wrapping_neg(),
                };
                Value::bv(w, r)
            }
            Node::Bin(op, a, b) => {
                let w = t.width().unwrap();
                let x = self.word(a)?;
                let y = self.word(b)?;
                Value::bv(w, bin_word(*op, w, x, y)?)
            }
            Node::Cmp(op, a, b) => {
                let w = a.width().unwrap();
                let x = self.word(a)?;
                let y = self.word(b)?;
                Value::Bool(cmp_word(*op, w, x, y))
            }
            Node::Ext { signed, arg, .. } => {
                let w = t.width().unwrap();
                let aw = arg.width().unwrap();
                let x = self.word(arg)?;
                let r = if *signed { to_signed(x, aw) as u64 } else { x };
                Value::bv(w, r)
            }
            Node::Extract { hi, lo, arg } => {
                let x = self.word(arg)?;
                Value::bv(hi - lo + 1, x >> lo)
            }
            Node::Read { heap, addr } => {
                let a = self.word(addr)?;
                let w = t.width().unwrap();
                Value::bv(w, self.read_heap(heap, a)?)
            }
            Node::Store { .. } => return Err(EvalError::HeapValue),
        })
    }

    fn read_heap(&mut self, heap: &Term, addr: u64) -> Result<u64, EvalError> {
        match heap.node() {
            Node::Var { name, sort: Sort::Heap(ty) } => Ok(self.env.heap(name, *ty, addr)),
            Node::Store { heap: inner, addr: a, value } => {
                if self.word(a)? == addr {
                    self.word(value)
                } else {
                    self.read_heap(inner, addr)
                }
            }
            Node::Ite(c, a, b) => {
                if self.eval(c)?.as_bool() {
                    self.read_heap(a, addr)
                } else {
                    self.read_heap(b, addr)
                }
            }
            Node::Old(_) => Err(EvalError::Old),
            _ => Err(EvalError::HeapValue),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_follows_total_semantics() {
        assert_eq!(bin_word(BinOp::UDiv, 8, 7, 0).unwrap(), 0xff);
        assert_eq!(bin_word(BinOp::URem, 8, 7, 0).unwrap(), 7);
        // -7 / 2 = -3, -7 % 2 = -1 (truncating)
        assert_eq!(bin_word(BinOp::SDiv, 8, 0xf9, 2).unwrap(), 0xfd);
        assert_eq!(bin_word(BinOp::SRem, 8, 0xf9, 2).unwrap(), 0xff);
    }

    #[test]
    fn integer_ops_reject_overflow() {
        assert_eq!(bin_word(BinOp::IAdd { signed: false }, 8, 200, 55).unwrap(), 255);
        assert!(bin_word(BinOp::IAdd { signed: false }, 8, 200, 56).is_err());
        assert!(bin_word(BinOp::ISub { signed: false }, 8, 1, 2).is_err());
        assert_eq!(bin_word(BinOp::ISub { signed: true }, 8, 1, 2).unwrap(), 0xff);
    }

    #[test]
    fn heap_reads_see_stores() {
        let ty = HeapType::Word { width: 32, signed: false };
        let h = Term::store(Term::heap_var(ty), Term::bv(64, 8), Term::bv(32, 7));
        let r8 = Term::read(h.clone(), Term::bv(64, 8));
        let r16 = Term::read(h, Term::bv(64, 16));
        let env = Assignment::default();
        assert_eq!(eval(&r8, &env).unwrap(), Value::bv(32, 7));
        assert_eq!(eval(&r16, &env).unwrap(), Value::bv(32, 0));
    }
}
