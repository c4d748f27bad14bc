//! Quantifier-free terms over fixed-width words, booleans and typed heaps.
//!
//! The same term language is used for program expressions inside the
//! intermediate representations and for verification conditions, so a
//! guard or branch condition can flow into a VC without conversion.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

/// Element kind of a typed heap. Each kind owns an independent map from
/// addresses to values; there is no operation that moves data between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeapType {
    Word { width: u32, signed: bool },
    Ptr,
}

impl HeapType {
    pub fn width(self) -> u32 {
        match self {
            HeapType::Word { width, .. } => width,
            HeapType::Ptr => 64,
        }
    }

    /// Name of the state component holding this heap, e.g. `heap_u32`.
    pub fn var_name(self) -> String {
        format!("heap_{self}")
    }
}

impl fmt::Display for HeapType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapType::Word { width, signed } => {
                write!(f, "{}{}", if *signed { 's' } else { 'u' }, width)
            }
            HeapType::Ptr => f.write_str("ptr"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Bv(u32),
    Heap(HeapType),
}

impl Sort {
    pub fn width(self) -> Option<u32> {
        match self {
            Sort::Bv(w) => Some(w),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("bool"),
            Sort::Bv(w) => write!(f, "bv{w}"),
            Sort::Heap(h) => write!(f, "heap<{h}>"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    UDiv,
    URem,
    SDiv,
    SRem,
    And,
    Or,
    Xor,
    Shl,
    LShr,
    AShr,
    /// Unbounded integer operations introduced by word abstraction. They
    /// are only ever evaluated beneath a guard proving the exact result
    /// fits the operand width, where they coincide with the word ops.
    IAdd {
        signed: bool,
    },
    ISub {
        signed: bool,
    },
    IMul {
        signed: bool,
    },
}

impl BinOp {
    /// The word-level operation with the same meaning wherever the
    /// abstraction guard holds.
    pub fn word_op(self) -> BinOp {
        match self {
            BinOp::IAdd { .. } => BinOp::Add,
            BinOp::ISub { .. } => BinOp::Sub,
            BinOp::IMul { .. } => BinOp::Mul,
            op => op,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BinOp::Add => "bvadd",
            BinOp::Sub => "bvsub",
            BinOp::Mul => "bvmul",
            BinOp::UDiv => "bvudiv",
            BinOp::URem => "bvurem",
            BinOp::SDiv => "bvsdiv",
            BinOp::SRem => "bvsrem",
            BinOp::And => "bvand",
            BinOp::Or => "bvor",
            BinOp::Xor => "bvxor",
            BinOp::Shl => "bvshl",
            BinOp::LShr => "bvlshr",
            BinOp::AShr => "bvashr",
            BinOp::IAdd { signed: false } => "int+",
            BinOp::IAdd { signed: true } => "sint+",
            BinOp::ISub { signed: false } => "int-",
            BinOp::ISub { signed: true } => "sint-",
            BinOp::IMul { signed: false } => "int*",
            BinOp::IMul { signed: true } => "sint*",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Ult,
    Ule,
    Slt,
    Sle,
}

impl CmpOp {
    fn name(self) -> &'static str {
        match self {
            CmpOp::Ult => "bvult",
            CmpOp::Ule => "bvule",
            CmpOp::Slt => "bvslt",
            CmpOp::Sle => "bvsle",
        }
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Bool(bool),
    Const {
        width: u32,
        value: u64,
    },
    /// Address of a named function in the symbol table.
    FnAddr {
        name: String,
        addr: u64,
    },
    Var {
        name: String,
        sort: Sort,
    },
    /// Pre-state value of an expression; only legal in postconditions
    /// before label elimination.
    Old(Term),
    Not(Term),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Term, Term),
    Ite(Term, Term, Term),
    Eq(Term, Term),
    Un(UnOp, Term),
    Bin(BinOp, Term, Term),
    Cmp(CmpOp, Term, Term),
    Ext {
        signed: bool,
        by: u32,
        arg: Term,
    },
    Extract {
        hi: u32,
        lo: u32,
        arg: Term,
    },
    Read {
        heap: Term,
        addr: Term,
    },
    Store {
        heap: Term,
        addr: Term,
        value: Term,
    },
}

/// Shared, immutable term handle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Term(Arc<Node>);

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Interpret the low `width` bits of `v` as a two's-complement integer.
pub fn to_signed(v: u64, width: u32) -> i64 {
    if width >= 64 {
        v as i64
    } else {
        let shift = 64 - width;
        ((v << shift) as i64) >> shift
    }
}

impl Term {
    pub fn new(node: Node) -> Term {
        Term(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn bool(b: bool) -> Term {
        Term::new(Node::Bool(b))
    }

    pub fn tt() -> Term {
        Term::bool(true)
    }

    pub fn ff() -> Term {
        Term::bool(false)
    }

    pub fn bv(width: u32, value: u64) -> Term {
        assert!((1..=64).contains(&width), "bit-vector width {width} out of range");
        Term::new(Node::Const { width, value: value & mask(width) })
    }

    pub fn fn_addr(name: impl Into<String>, addr: u64) -> Term {
        Term::new(Node::FnAddr { name: name.into(), addr })
    }

    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::new(Node::Var { name: name.into(), sort })
    }

    pub fn bv_var(name: impl Into<String>, width: u32) -> Term {
        Term::var(name, Sort::Bv(width))
    }

    pub fn heap_var(ty: HeapType) -> Term {
        Term::var(ty.var_name(), Sort::Heap(ty))
    }

    pub fn old(t: Term) -> Term {
        Term::new(Node::Old(t))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::new(Node::Not(t))
    }

    pub fn and(ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::tt(),
            1 => ts.into_iter().next().unwrap(),
            _ => Term::new(Node::And(ts)),
        }
    }

    pub fn and2(a: Term, b: Term) -> Term {
        Term::and(vec![a, b])
    }

    pub fn or(ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::ff(),
            1 => ts.into_iter().next().unwrap(),
            _ => Term::new(Node::Or(ts)),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::new(Node::Implies(a, b))
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        Term::new(Node::Ite(c, a, b))
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::new(Node::Eq(a, b))
    }

    pub fn ne(a: Term, b: Term) -> Term {
        Term::not(Term::eq(a, b))
    }

    pub fn un(op: UnOp, a: Term) -> Term {
        Term::new(Node::Un(op, a))
    }

    pub fn bin(op: BinOp, a: Term, b: Term) -> Term {
        Term::new(Node::Bin(op, a, b))
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Term {
        Term::new(Node::Cmp(op, a, b))
    }

    pub fn zext(by: u32, arg: Term) -> Term {
        if by == 0 {
            arg
        } else {
            Term::new(Node::Ext { signed: false, by, arg })
        }
    }

    pub fn sext(by: u32, arg: Term) -> Term {
        if by == 0 {
            arg
        } else {
            Term::new(Node::Ext { signed: true, by, arg })
        }
    }

    pub fn extract(hi: u32, lo: u32, arg: Term) -> Term {
        if lo == 0 && arg.width() == Some(hi + 1) {
            arg
        } else {
            Term::new(Node::Extract { hi, lo, arg })
        }
    }

    pub fn read(heap: Term, addr: Term) -> Term {
        Term::new(Node::Read { heap, addr })
    }

    pub fn store(heap: Term, addr: Term, value: Term) -> Term {
        Term::new(Node::Store { heap, addr, value })
    }

    /// Convert a word of `from` bits to `to` bits, extending by sign when
    /// `signed` describes the source.
    pub fn resize(self, to: u32, signed: bool) -> Term {
        let from = self.width().expect("resize of non-bit-vector term");
        match from.cmp(&to) {
            std::cmp::Ordering::Equal => self,
            std::cmp::Ordering::Less if signed => Term::sext(to - from, self),
            std::cmp::Ordering::Less => Term::zext(to - from, self),
            std::cmp::Ordering::Greater => Term::extract(to - 1, 0, self),
        }
    }

    /// Boolean view of a word (C truthiness): `t != 0`.
    pub fn truthy(self) -> Term {
        match self.sort() {
            Sort::Bool => self,
            Sort::Bv(w) => Term::ne(self, Term::bv(w, 0)),
            Sort::Heap(_) => panic!("truthiness of a heap"),
        }
    }

    /// Word view of a boolean: `b ? 1 : 0` at `width` bits.
    pub fn to_word(self, width: u32) -> Term {
        match self.sort() {
            Sort::Bool => Term::ite(self, Term::bv(width, 1), Term::bv(width, 0)),
            Sort::Bv(w) if w == width => self,
            Sort::Bv(_) => self.resize(width, false),
            Sort::Heap(_) => panic!("word view of a heap"),
        }
    }

    pub fn sort(&self) -> Sort {
        match self.node() {
            Node::Bool(_)
            | Node::Not(_)
            | Node::And(_)
            | Node::Or(_)
            | Node::Implies(..)
            | Node::Eq(..)
            | Node::Cmp(..) => Sort::Bool,
            Node::Const { width, .. } => Sort::Bv(*width),
            Node::FnAddr { .. } => Sort::Bv(64),
            Node::Var { sort, .. } => *sort,
            Node::Old(t) => t.sort(),
            Node::Ite(_, a, _) => a.sort(),
            Node::Un(_, a) | Node::Bin(_, a, _) => a.sort(),
            Node::Ext { by, arg, .. } => Sort::Bv(arg.width().unwrap_or(0) + by),
            Node::Extract { hi, lo, .. } => Sort::Bv(hi - lo + 1),
            Node::Read { heap, .. } => match heap.sort() {
                Sort::Heap(h) => Sort::Bv(h.width()),
                s => panic!("read from non-heap sort {s}"),
            },
            Node::Store { heap, .. } => heap.sort(),
        }
    }

    pub fn width(&self) -> Option<u32> {
        self.sort().width()
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.node() {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<(u32, u64)> {
        match self.node() {
            Node::Const { width, value } => Some((*width, *value)),
            Node::FnAddr { addr, .. } => Some((64, *addr)),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self.node() {
            Node::Var { name, .. } => Some(name),
            _ => None,
        }
    }

    /// Immediate subterms, in a fixed order.
    pub fn children(&self) -> Vec<&Term> {
        match self.node() {
            Node::Bool(_) | Node::Const { .. } | Node::FnAddr { .. } | Node::Var { .. } => vec![],
            Node::Old(a) | Node::Not(a) | Node::Un(_, a) => vec![a],
            Node::Ext { arg, .. } | Node::Extract { arg, .. } => vec![arg],
            Node::And(ts) | Node::Or(ts) => ts.iter().collect(),
            Node::Implies(a, b) | Node::Eq(a, b) | Node::Bin(_, a, b) | Node::Cmp(_, a, b) => {
                vec![a, b]
            }
            Node::Ite(c, a, b) => vec![c, a, b],
            Node::Read { heap, addr } => vec![heap, addr],
            Node::Store { heap, addr, value } => vec![heap, addr, value],
        }
    }

    /// Rebuild this node with new children (same arity and order as
    /// [`Term::children`]).
    pub fn with_children(&self, mut kids: Vec<Term>) -> Term {
        let mut take = || kids.remove(0);
        let node = match self.node() {
            Node::Bool(_) | Node::Const { .. } | Node::FnAddr { .. } | Node::Var { .. } => return self.clone(),
            Node::Old(_) => Node::Old(take()),
            Node::Not(_) => Node::Not(take()),
            Node::Un(op, _) => Node::Un(*op, take()),
            Node::Ext { signed, by, .. } => Node::Ext { signed: *signed, by: *by, arg: take() },
            Node::Extract { hi, lo, .. } => Node::Extract { hi: *hi, lo: *lo, arg: take() },
            Node::And(_) => Node::And(std::mem::take(&mut kids)),
            Node::Or(_) => Node::Or(std::mem::take(&mut kids)),
            Node::Implies(..) => {
                let a = take();
                Node::Implies(a, take())
            }
            Node::Eq(..) => {
                let a = take();
                Node::Eq(a, take())
            }
            Node::Bin(op, ..) => {
                let a = take();
                Node::Bin(*op, a, take())
            }
            Node::Cmp(op, ..) => {
                let a = take();
                Node::Cmp(*op, a, take())
            }
            Node::Ite(..) => {
                let c = take();
                let a = take();
                Node::Ite(c, a, take())
            }
            Node::Read { .. } => {
                let heap = take();
                Node::Read { heap, addr: take() }
            }
            Node::Store { .. } => {
                let heap = take();
                let addr = take();
                Node::Store { heap, addr, value: take() }
            }
        };
        Term::new(node)
    }

    /// Bottom-up rewrite with memoisation on shared subterms. `f` sees a
    /// node whose children have already been rewritten and may return a
    /// replacement.
    pub fn rewrite(&self, f: &mut impl FnMut(&Term) -> Option<Term>) -> Term {
        let mut memo = HashMap::new();
        self.rewrite_memo(f, &mut memo)
    }

    fn rewrite_memo(&self, f: &mut impl FnMut(&Term) -> Option<Term>, memo: &mut HashMap<usize, Term>) -> Term {
        if let Some(t) = memo.get(&self.ptr_id()) {
            return t.clone();
        }
        let kids = self.children();
        let rebuilt = if kids.is_empty() {
            self.clone()
        } else {
            let new_kids: Vec<Term> = kids.iter().map(|k| k.rewrite_memo(f, memo)).collect();
            if new_kids.iter().zip(kids.iter()).all(|(a, b)| a.ptr_id() == b.ptr_id()) {
                self.clone()
            } else {
                self.with_children(new_kids)
            }
        };
        let out = f(&rebuilt).unwrap_or(rebuilt);
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Simultaneous substitution of variables by terms. Occurrences under
    /// `Old` are left alone: they denote the pre-state.
    pub fn substitute(&self, map: &HashMap<String, Term>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        let mut memo = HashMap::new();
        self.subst_memo(map, &mut memo)
    }

    fn subst_memo(&self, map: &HashMap<String, Term>, memo: &mut HashMap<usize, Term>) -> Term {
        if let Some(t) = memo.get(&self.ptr_id()) {
            return t.clone();
        }
        let out = match self.node() {
            Node::Var { name, .. } => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            Node::Old(_) => self.clone(),
            _ => {
                let kids = self.children();
                if kids.is_empty() {
                    self.clone()
                } else {
                    let new_kids: Vec<Term> = kids.iter().map(|k| k.subst_memo(map, memo)).collect();
                    if new_kids.iter().zip(kids.iter()).all(|(a, b)| a.ptr_id() == b.ptr_id()) {
                        self.clone()
                    } else {
                        self.with_children(new_kids)
                    }
                }
            }
        };
        memo.insert(self.ptr_id(), out.clone());
        out
    }

    /// Free variables with their sorts (including those under `Old`).
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        self.collect_vars(&mut out, &mut seen);
        out
    }

    fn collect_vars(&self, out: &mut BTreeMap<String, Sort>, seen: &mut std::collections::HashSet<usize>) {
        if !seen.insert(self.ptr_id()) {
            return;
        }
        if let Node::Var { name, sort } = self.node() {
            out.insert(name.clone(), *sort);
        }
        for k in self.children() {
            k.collect_vars(out, seen);
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_vars().contains_key(name)
    }

    pub fn contains_old(&self) -> bool {
        self.any(&mut |t| matches!(t.node(), Node::Old(_)))
    }

    /// True when some subterm satisfies `pred`.
    pub fn any(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr_id()) {
                continue;
            }
            if pred(t) {
                return true;
            }
            stack.extend(t.children());
        }
        false
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if seen.insert(t.ptr_id()) {
                stack.extend(t.children());
            }
        }
        seen.len()
    }

    /// Split a conjunction into its conjuncts (flattening nested `and`).
    pub fn conjuncts(&self) -> Vec<Term> {
        match self.node() {
            Node::And(ts) => ts.iter().flat_map(|t| t.conjuncts()).collect(),
            Node::Bool(true) => vec![],
            _ => vec![self.clone()],
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, width: u32, value: u64) -> fmt::Result {
    if value > 0xffff {
        write!(f, "{value:#x}#{width}")
    } else {
        write!(f, "{value}#{width}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, head: &str, ts: &[&Term]| -> fmt::Result {
            write!(f, "({head}")?;
            for t in ts {
                write!(f, " {t}")?;
            }
            f.write_str(")")
        };
        match self.node() {
            Node::Bool(b) => write!(f, "{b}"),
            Node::Const { width, value } => write_const(f, *width, *value),
            Node::FnAddr { name, .. } => write!(f, "(sym {name})"),
            Node::Var { name, .. } => f.write_str(name),
            Node::Old(t) => list(f, "old", &[t]),
            Node::Not(t) => list(f, "not", &[t]),
            Node::And(ts) => list(f, "and", &ts.iter().collect::<Vec<_>>()),
            Node::Or(ts) => list(f, "or", &ts.iter().collect::<Vec<_>>()),
            Node::Implies(a, b) => list(f, "=>", &[a, b]),
            Node::Ite(c, a, b) => list(f, "ite", &[c, a, b]),
            Node::Eq(a, b) => list(f, "=", &[a, b]),
            Node::Un(UnOp::Not, a) => list(f, "bvnot", &[a]),
            Node::Un(UnOp::Neg, a) => list(f, "bvneg", &[a]),
            Node::Bin(op, a, b) => list(f, op.name(), &[a, b]),
            Node::Cmp(op, a, b) => list(f, op.name(), &[a, b]),
            Node::Ext { signed, by, arg } => {
                write!(f, "({} {by} {arg})", if *signed { "sext" } else { "zext" })
            }
            Node::Extract { hi, lo, arg } => write!(f, "(extract {hi} {lo} {arg})"),
            Node::Read { heap, addr } => list(f, "read", &[heap, addr]),
            Node::Store { heap, addr, value } => list(f, "store", &[heap, addr, value]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_is_simultaneous() {
        let x = Term::bv_var("x", 8);
        let y = Term::bv_var("y", 8);
        let t = Term::bin(BinOp::Add, x.clone(), y.clone());
        let mut m = HashMap::new();
        m.insert("x".to_string(), y.clone());
        m.insert("y".to_string(), x.clone());
        assert_eq!(t.substitute(&m), Term::bin(BinOp::Add, y, x));
    }

    #[test]
    fn substitution_skips_old() {
        let x = Term::bv_var("x", 8);
        let t = Term::eq(x.clone(), Term::old(x.clone()));
        let mut m = HashMap::new();
        m.insert("x".to_string(), Term::bv(8, 1));
        assert_eq!(t.substitute(&m), Term::eq(Term::bv(8, 1), Term::old(x)));
    }

    #[test]
    fn sorts() {
        let h = Term::heap_var(HeapType::Word { width: 32, signed: false });
        let r = Term::read(h.clone(), Term::bv(64, 8));
        assert_eq!(r.sort(), Sort::Bv(32));
        assert_eq!(Term::zext(32, r).sort(), Sort::Bv(64));
        assert_eq!(h.as_var(), Some("heap_u32"));
    }

    #[test]
    fn signed_view() {
        assert_eq!(to_signed(0xff, 8), -1);
        assert_eq!(to_signed(0x7f, 8), 127);
        assert_eq!(to_signed(u64::MAX, 64), -1);
    }
}
