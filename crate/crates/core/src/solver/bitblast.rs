//! Tseitin-style bit-blasting of quantifier-free bit-vector formulas.
//!
//! Heap reads are handled eagerly: a read through `store` and `ite`
//! layers becomes a multiplexer chain, and each read of a base heap gets
//! fresh value bits plus functional-consistency clauses against every
//! other read of the same heap.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::sat::Clauses;
use crate::logic::{Assignment, BinOp, CmpOp, Node, Sort, Term, UnOp, Value};

/// Widths above this are rejected for multiplication, division and
/// shifts by a non-constant amount.
pub const NONLINEAR_WIDTH_CAP: u32 = 32;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BlastError {
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Literals standing for one free variable of the formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputBits {
    pub sort: Sort,
    /// One literal per bit, least significant first (one for booleans).
    pub lits: Vec<i32>,
}

/// One read of a base heap: address and value literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeapRead {
    pub heap: String,
    pub addr: Vec<i32>,
    pub value: Vec<i32>,
}

/// Clause set plus the map back from literals to formula variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub clauses: Clauses,
    pub inputs: BTreeMap<String, InputBits>,
    pub reads: Vec<HeapRead>,
}

fn lit_value(model: &[bool], l: i32) -> bool {
    let v = model[l.unsigned_abs() as usize];
    if l > 0 {
        v
    } else {
        !v
    }
}

fn word_value(model: &[bool], lits: &[i32]) -> u64 {
    lits.iter().enumerate().fold(0, |acc, (i, &l)| acc | ((lit_value(model, l) as u64) << i))
}

impl Cnf {
    /// Read a word-level assignment back out of a SAT model.
    pub fn decode(&self, model: &[bool]) -> Assignment {
        let mut a = Assignment::default();
        for (name, bits) in &self.inputs {
            let v = match bits.sort {
                Sort::Bool => Value::Bool(lit_value(model, bits.lits[0])),
                Sort::Bv(w) => Value::bv(w, word_value(model, &bits.lits)),
                Sort::Heap(_) => continue,
            };
            a.vars.insert(name.clone(), v);
        }
        for r in &self.reads {
            let addr = word_value(model, &r.addr);
            let value = word_value(model, &r.value);
            a.heaps.entry(r.heap.clone()).or_default().insert(addr, value);
        }
        a
    }
}

#[derive(Hash, PartialEq, Eq)]
enum Gate {
    And(i32, i32),
    Xor(i32, i32),
    Mux(i32, i32, i32),
}

struct Blaster {
    cnf: Cnf,
    tru: Option<i32>,
    memo: HashMap<usize, Vec<i32>>,
    gates: HashMap<Gate, i32>,
    divs: HashMap<(Bits, Bits), (Bits, Bits)>,
    read_memo: HashMap<(usize, Vec<i32>), Vec<i32>>,
}

type Bits = Vec<i32>;

impl Blaster {
    fn new() -> Self {
        Blaster {
            cnf: Cnf::default(),
            tru: None,
            memo: HashMap::new(),
            gates: HashMap::new(),
            divs: HashMap::new(),
            read_memo: HashMap::new(),
        }
    }

    fn fresh(&mut self) -> i32 {
        self.cnf.clauses.num_vars += 1;
        self.cnf.clauses.num_vars as i32
    }

    fn clause(&mut self, c: Vec<i32>) {
        self.cnf.clauses.clauses.push(c);
    }

    fn t(&mut self) -> i32 {
        if let Some(t) = self.tru {
            return t;
        }
        let v = self.fresh();
        self.clause(vec![v]);
        self.tru = Some(v);
        v
    }

    fn konst(&mut self, b: bool) -> i32 {
        let t = self.t();
        if b {
            t
        } else {
            -t
        }
    }

    fn is_const(&self, l: i32) -> Option<bool> {
        match self.tru {
            Some(t) if l == t => Some(true),
            Some(t) if l == -t => Some(false),
            _ => None,
        }
    }

    fn and2(&mut self, a: i32, b: i32) -> i32 {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) | (_, Some(false)) => return self.konst(false),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == -b {
            return self.konst(false);
        }
        let key = Gate::And(a.min(b), a.max(b));
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let v = self.fresh();
        self.clause(vec![-v, a]);
        self.clause(vec![-v, b]);
        self.clause(vec![v, -a, -b]);
        self.gates.insert(key, v);
        v
    }

    fn or2(&mut self, a: i32, b: i32) -> i32 {
        -self.and2(-a, -b)
    }

    fn xor2(&mut self, a: i32, b: i32) -> i32 {
        match (self.is_const(a), self.is_const(b)) {
            (Some(x), _) => return if x { -b } else { b },
            (_, Some(y)) => return if y { -a } else { a },
            _ => {}
        }
        if a == b {
            return self.konst(false);
        }
        if a == -b {
            return self.konst(true);
        }
        // Normalise polarity so x^y and ¬x^¬y share a gate.
        let flip = (a < 0) != (b < 0);
        let (x, y) = (a.abs().min(b.abs()), a.abs().max(b.abs()));
        let key = Gate::Xor(x, y);
        let g = if let Some(&g) = self.gates.get(&key) {
            g
        } else {
            let v = self.fresh();
            self.clause(vec![-v, x, y]);
            self.clause(vec![-v, -x, -y]);
            self.clause(vec![v, -x, y]);
            self.clause(vec![v, x, -y]);
            self.gates.insert(key, v);
            v
        };
        if flip {
            -g
        } else {
            g
        }
    }

    fn mux(&mut self, c: i32, a: i32, b: i32) -> i32 {
        if let Some(x) = self.is_const(c) {
            return if x { a } else { b };
        }
        if a == b {
            return a;
        }
        if let (Some(x), Some(_)) = (self.is_const(a), self.is_const(b)) {
            // a != b here, so exactly one of them is true.
            return if x { c } else { -c };
        }
        let key = Gate::Mux(c, a, b);
        if let Some(&g) = self.gates.get(&key) {
            return g;
        }
        let v = self.fresh();
        self.clause(vec![-c, -a, v]);
        self.clause(vec![-c, a, -v]);
        self.clause(vec![c, -b, v]);
        self.clause(vec![c, b, -v]);
        self.gates.insert(key, v);
        v
    }

    fn and_n(&mut self, ls: &[i32]) -> i32 {
        let mut acc = self.konst(true);
        for &l in ls {
            acc = self.and2(acc, l);
        }
        acc
    }

    fn or_n(&mut self, ls: &[i32]) -> i32 {
        let neg: Vec<i32> = ls.iter().map(|l| -l).collect();
        -self.and_n(&neg)
    }

    fn const_bits(&mut self, w: u32, v: u64) -> Bits {
        (0..w).map(|i| self.konst((v >> i) & 1 == 1)).collect()
    }

    fn mux_bits(&mut self, c: i32, a: &[i32], b: &[i32]) -> Bits {
        a.iter().zip(b).map(|(&x, &y)| self.mux(c, x, y)).collect()
    }

    fn eq_bits(&mut self, a: &[i32], b: &[i32]) -> i32 {
        let xs: Vec<i32> = a.iter().zip(b).map(|(&x, &y)| -self.xor2(x, y)).collect();
        self.and_n(&xs)
    }

    fn add_bits(&mut self, a: &[i32], b: &[i32], carry_in: i32) -> Bits {
        let mut c = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let p = self.xor2(x, y);
            out.push(self.xor2(p, c));
            let g = self.and2(x, y);
            let pc = self.and2(p, c);
            c = self.or2(g, pc);
        }
        out
    }

    fn neg_bits(&mut self, a: &[i32]) -> Bits {
        let inv: Bits = a.iter().map(|l| -l).collect();
        let zero = self.const_bits(a.len() as u32, 0);
        let one = self.konst(true);
        self.add_bits(&inv, &zero, one)
    }

    fn sub_bits(&mut self, a: &[i32], b: &[i32]) -> Bits {
        let inv: Bits = b.iter().map(|l| -l).collect();
        let one = self.konst(true);
        self.add_bits(a, &inv, one)
    }

    fn mul_bits(&mut self, a: &[i32], b: &[i32]) -> Bits {
        let w = a.len();
        let mut acc = self.const_bits(w as u32, 0);
        for (i, &bi) in b.iter().enumerate() {
            if self.is_const(bi) == Some(false) {
                continue;
            }
            let f = self.konst(false);
            let partial: Bits = (0..w).map(|j| if j < i { f } else { self.and2(a[j - i], bi) }).collect();
            let zero = self.konst(false);
            acc = self.add_bits(&acc, &partial, zero);
        }
        acc
    }

    /// `a <u b`, scanning from the least significant bit.
    fn ult_bits(&mut self, a: &[i32], b: &[i32]) -> i32 {
        let mut lt = self.konst(false);
        for (&x, &y) in a.iter().zip(b) {
            let here = self.and2(-x, y);
            let same = -self.xor2(x, y);
            let keep = self.and2(same, lt);
            lt = self.or2(here, keep);
        }
        lt
    }

    fn flip_sign(a: &[i32]) -> Bits {
        let mut v = a.to_vec();
        if let Some(last) = v.last_mut() {
            *last = -*last;
        }
        v
    }

    /// Unsigned quotient and remainder, with `x/0 = all ones` and
    /// `x%0 = x`.
    fn udivrem(&mut self, a: &[i32], b: &[i32]) -> (Bits, Bits) {
        let key = (a.to_vec(), b.to_vec());
        if let Some(r) = self.divs.get(&key) {
            return r.clone();
        }
        let w = a.len();
        let q: Bits = (0..w).map(|_| self.fresh()).collect();
        let r: Bits = (0..w).map(|_| self.fresh()).collect();
        let zero_w = self.const_bits(w as u32, 0);
        let b_zero = self.eq_bits(b, &zero_w);
        // b = 0: q = ~0, r = a
        let ones = self.const_bits(w as u32, u64::MAX);
        let q_ones = self.eq_bits(&q, &ones);
        let r_a = self.eq_bits(&r, a);
        let zero_case = self.and2(q_ones, r_a);
        // b != 0: zext(q)*zext(b) + zext(r) = zext(a) and r < b
        let f = self.konst(false);
        let ext = |v: &[i32]| -> Bits { v.iter().copied().chain(std::iter::repeat_n(f, w)).collect() };
        let (q2, b2, r2, a2) = (ext(&q), ext(b), ext(&r), ext(a));
        let prod = self.mul_bits(&q2, &b2);
        let sum = self.add_bits(&prod, &r2, f);
        let exact = self.eq_bits(&sum, &a2);
        let small = self.ult_bits(&r, b);
        let nz_case = self.and2(exact, small);
        let ok = self.mux(b_zero, zero_case, nz_case);
        self.clause(vec![ok]);
        self.divs.insert(key, (q.clone(), r.clone()));
        (q, r)
    }

    fn shift_const(&mut self, op: BinOp, a: &[i32], s: u64) -> Bits {
        let w = a.len();
        let fill = match op {
            BinOp::AShr => a[w - 1],
            _ => self.konst(false),
        };
        (0..w)
            .map(|i| {
                let src = match op {
                    BinOp::Shl => (i as u64).checked_sub(s),
                    _ => Some(i as u64 + s).filter(|&j| j < w as u64),
                };
                src.map(|j| a[j as usize]).unwrap_or(fill)
            })
            .collect()
    }

    fn shift_var(&mut self, op: BinOp, a: &[i32], s: &[i32]) -> Bits {
        let w = a.len();
        let mut cur = a.to_vec();
        let mut k = 0;
        while (1u64 << k) < w as u64 {
            let shifted = self.shift_const(op, &cur, 1 << k);
            cur = self.mux_bits(s[k], &shifted, &cur);
            k += 1;
        }
        let wc = self.const_bits(w as u32, w as u64);
        let too_far = -self.ult_bits(s, &wc);
        let fill = match op {
            BinOp::AShr => a[w - 1],
            _ => self.konst(false),
        };
        let fills = vec![fill; w];
        self.mux_bits(too_far, &fills, &cur)
    }

    fn blast(&mut self, t: &Term) -> Result<Bits, BlastError> {
        if let Some(b) = self.memo.get(&t.ptr_id()) {
            return Ok(b.clone());
        }
        let bits = self.blast_node(t)?;
        self.memo.insert(t.ptr_id(), bits.clone());
        Ok(bits)
    }

    fn lit(&mut self, t: &Term) -> Result<i32, BlastError> {
        Ok(self.blast(t)?[0])
    }

    fn blast_node(&mut self, t: &Term) -> Result<Bits, BlastError> {
        let cap = |w: u32, what: &str| {
            if w > NONLINEAR_WIDTH_CAP {
                Err(BlastError::Unsupported(format!("{what} at width {w}")))
            } else {
                Ok(())
            }
        };
        Ok(match t.node() {
            Node::Bool(b) => vec![self.konst(*b)],
            Node::Const { width, value } => self.const_bits(*width, *value),
            Node::FnAddr { addr, .. } => self.const_bits(64, *addr),
            Node::Var { name, sort } => {
                if let Some(inp) = self.cnf.inputs.get(name) {
                    return Ok(inp.lits.clone());
                }
                let n = match sort {
                    Sort::Bool => 1,
                    Sort::Bv(w) => *w,
                    Sort::Heap(_) => return Err(BlastError::Unsupported(format!("heap `{name}` used as a value"))),
                };
                let lits: Bits = (0..n).map(|_| self.fresh()).collect();
                self.cnf.inputs.insert(name.clone(), InputBits { sort: *sort, lits: lits.clone() });
                lits
            }
            Node::Old(_) => return Err(BlastError::Unsupported("`\\old` in a VC".into())),
            Node::Not(a) => vec![-self.lit(a)?],
            Node::And(ts) => {
                let ls = ts.iter().map(|x| self.lit(x)).collect::<Result<Vec<_>, _>>()?;
                vec![self.and_n(&ls)]
            }
            Node::Or(ts) => {
                let ls = ts.iter().map(|x| self.lit(x)).collect::<Result<Vec<_>, _>>()?;
                vec![self.or_n(&ls)]
            }
            Node::Implies(a, b) => {
                let (x, y) = (self.lit(a)?, self.lit(b)?);
                vec![self.or2(-x, y)]
            }
            Node::Ite(c, a, b) => {
                let c = self.lit(c)?;
                let (x, y) = (self.blast(a)?, self.blast(b)?);
                self.mux_bits(c, &x, &y)
            }
            Node::Eq(a, b) => {
                let (x, y) = (self.blast(a)?, self.blast(b)?);
                vec![self.eq_bits(&x, &y)]
            }
            Node::Un(op, a) => {
                let x = self.blast(a)?;
                match op {
                    UnOp::Not => x.iter().map(|l| -l).collect(),
                    UnOp::Neg => self.neg_bits(&x),
                }
            }
            Node::Bin(op, a, b) => {
                let (x, y) = (self.blast(a)?, self.blast(b)?);
                let w = x.len() as u32;
                match op.word_op() {
                    BinOp::Add => {
                        let f = self.konst(false);
                        self.add_bits(&x, &y, f)
                    }
                    BinOp::Sub => self.sub_bits(&x, &y),
                    BinOp::Mul => {
                        cap(w, "multiplication")?;
                        self.mul_bits(&x, &y)
                    }
                    BinOp::UDiv | BinOp::URem => {
                        cap(w, "division")?;
                        let (q, r) = self.udivrem(&x, &y);
                        if op.word_op() == BinOp::UDiv {
                            q
                        } else {
                            r
                        }
                    }
                    BinOp::SDiv | BinOp::SRem => {
                        cap(w, "division")?;
                        let (sa, sb) = (x[x.len() - 1], y[y.len() - 1]);
                        let (na, nb) = (self.neg_bits(&x), self.neg_bits(&y));
                        let abs_a = self.mux_bits(sa, &na, &x);
                        let abs_b = self.mux_bits(sb, &nb, &y);
                        let (q, r) = self.udivrem(&abs_a, &abs_b);
                        if op.word_op() == BinOp::SDiv {
                            let flip = self.xor2(sa, sb);
                            let nq = self.neg_bits(&q);
                            self.mux_bits(flip, &nq, &q)
                        } else {
                            let nr = self.neg_bits(&r);
                            self.mux_bits(sa, &nr, &r)
                        }
                    }
                    BinOp::And => x.iter().zip(&y).map(|(&p, &q)| self.and2(p, q)).collect(),
                    BinOp::Or => x.iter().zip(&y).map(|(&p, &q)| self.or2(p, q)).collect(),
                    BinOp::Xor => x.iter().zip(&y).map(|(&p, &q)| self.xor2(p, q)).collect(),
                    sh @ (BinOp::Shl | BinOp::LShr | BinOp::AShr) => match b.as_const() {
                        Some((_, s)) => self.shift_const(sh, &x, s),
                        None => {
                            cap(w, "shift by a variable amount")?;
                            self.shift_var(sh, &x, &y)
                        }
                    },
                    other => return Err(BlastError::Unsupported(format!("operator {other:?}"))),
                }
            }
            Node::Cmp(op, a, b) => {
                let (x, y) = (self.blast(a)?, self.blast(b)?);
                let (x, y) = match op {
                    CmpOp::Slt | CmpOp::Sle => (Self::flip_sign(&x), Self::flip_sign(&y)),
                    _ => (x, y),
                };
                match op {
                    CmpOp::Ult | CmpOp::Slt => vec![self.ult_bits(&x, &y)],
                    CmpOp::Ule | CmpOp::Sle => vec![-self.ult_bits(&y, &x)],
                }
            }
            Node::Ext { signed, by, arg } => {
                let mut x = self.blast(arg)?;
                let fill = if *signed { *x.last().unwrap() } else { self.konst(false) };
                x.extend(std::iter::repeat_n(fill, *by as usize));
                x
            }
            Node::Extract { hi, lo, arg } => {
                let x = self.blast(arg)?;
                x[*lo as usize..=*hi as usize].to_vec()
            }
            Node::Read { heap, addr } => {
                let a = self.blast(addr)?;
                let w = t.width().unwrap_or(64);
                self.read(heap, &a, w)?
            }
            Node::Store { .. } => return Err(BlastError::Unsupported("heap used as a value".into())),
        })
    }

    fn read(&mut self, heap: &Term, addr: &[i32], w: u32) -> Result<Bits, BlastError> {
        let key = (heap.ptr_id(), addr.to_vec());
        if let Some(b) = self.read_memo.get(&key) {
            return Ok(b.clone());
        }
        let out = match heap.node() {
            Node::Store { heap: inner, addr: a, value } => {
                let a = self.blast(a)?;
                let hit = self.eq_bits(&a, addr);
                let v = self.blast(value)?;
                let rest = self.read(inner, addr, w)?;
                self.mux_bits(hit, &v, &rest)
            }
            Node::Ite(c, h1, h2) => {
                let c = self.lit(c)?;
                let x = self.read(h1, addr, w)?;
                let y = self.read(h2, addr, w)?;
                self.mux_bits(c, &x, &y)
            }
            Node::Var { name, .. } => {
                let value: Bits = (0..w).map(|_| self.fresh()).collect();
                let earlier: Vec<HeapRead> = self.cnf.reads.iter().filter(|r| &r.heap == name).cloned().collect();
                for r in earlier {
                    let same_addr = self.eq_bits(&r.addr, addr);
                    let same_val = self.eq_bits(&r.value, &value);
                    self.clause(vec![-same_addr, same_val]);
                }
                self.cnf.reads.push(HeapRead { heap: name.clone(), addr: addr.to_vec(), value: value.clone() });
                value
            }
            _ => return Err(BlastError::Unsupported("heap expression".into())),
        };
        self.read_memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Encode `f` as a clause set satisfiable exactly when `f` is.
pub fn bitblast(f: &Term) -> Result<Cnf, BlastError> {
    match f.as_bool() {
        Some(true) => return Ok(Cnf::default()),
        Some(false) => {
            let mut cnf = Cnf::default();
            cnf.clauses.clauses.push(vec![]);
            return Ok(cnf);
        }
        None => {}
    }
    let mut b = Blaster::new();
    let root = b.lit(f)?;
    b.clause(vec![root]);
    Ok(b.cnf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::sat::{sat_solve, SatResult};
    use crate::solver::Budget;

    fn sat(f: &Term) -> bool {
        let cnf = bitblast(f).unwrap();
        match sat_solve(&cnf.clauses, &Budget::default()) {
            SatResult::Sat(_) => true,
            SatResult::Unsat => false,
            SatResult::Unknown(r) => panic!("{r}"),
        }
    }

    #[test]
    fn true_has_no_clauses() {
        let cnf = bitblast(&Term::tt()).unwrap();
        assert!(cnf.clauses.clauses.is_empty());
        assert!(sat(&Term::tt()));
    }

    #[test]
    fn x_ne_x_is_unsat() {
        let x = Term::bv_var("x", 8);
        assert!(!sat(&Term::ne(x.clone(), x)));
    }

    #[test]
    fn or3_and2_is_never_zero() {
        let c = Term::bv_var("c", 8);
        let f =
            Term::eq(Term::bin(BinOp::And, Term::bin(BinOp::Or, c, Term::bv(8, 3)), Term::bv(8, 2)), Term::bv(8, 0));
        assert!(!sat(&f));
    }

    #[test]
    fn model_decodes_to_a_witness() {
        let x = Term::bv_var("x", 8);
        let f = Term::eq(Term::bin(BinOp::Mul, x.clone(), Term::bv(8, 3)), Term::bv(8, 21));
        let cnf = bitblast(&f).unwrap();
        let SatResult::Sat(m) = sat_solve(&cnf.clauses, &Budget::default()) else { panic!() };
        let a = cnf.decode(&m);
        assert_eq!(a.vars["x"], Value::bv(8, 7));
    }

    #[test]
    fn wide_multiplication_is_rejected() {
        let x = Term::bv_var("x", 64);
        let f = Term::eq(Term::bin(BinOp::Mul, x.clone(), x), Term::bv(64, 4));
        assert!(matches!(bitblast(&f), Err(BlastError::Unsupported(_))));
    }
}
