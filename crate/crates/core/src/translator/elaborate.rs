//! Lowering of typed expressions to terms (collecting the guards their
//! evaluation needs) and of statements to the deep IR.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::frontend::ast::{BinaryOp, UnaryOp};
use crate::frontend::{Ast, CType, Diagnostic, Expr, ExprKind, FunctionDef, Loc, LoopSpec, Stmt, StmtKind};
use crate::logic::fold::fold;
use crate::logic::spec::{HoareSpec, SpecClause, RESULT};
use crate::logic::{mask, BinOp, CmpOp, Node, Term, UnOp};

use super::ir::{Deep, GuardKind, LoopAnn, Measure};
use super::records::{heap_type, param_names, qualify, sort_of, SymbolTable};

type LResult<T> = Result<T, Diagnostic>;

fn unsupported(loc: Loc, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error("unsupported", loc, msg)
}

#[derive(Clone, Debug)]
pub struct GuardItem {
    pub kind: GuardKind,
    pub term: Term,
    pub loc: Loc,
}

/// Unit-wide facts shared by every function's lowering.
pub struct UnitCtx<'a> {
    pub ast: &'a Ast,
    pub symtab: &'a SymbolTable,
    pub consts: HashMap<String, Term>,
    pub globals: HashSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Code,
    Pre,
    Post,
    Loop,
}

#[derive(Clone)]
enum Place {
    State(String, CType),
    Mem(Term, CType),
}

pub struct Lowerer<'a> {
    cx: &'a UnitCtx<'a>,
    fname: String,
    result: CType,
    locals: HashSet<String>,
    params: HashSet<String>,
    labels: BTreeMap<String, CType>,
    mode: Mode,
    in_old: bool,
    allow_indirect: bool,
    guards: Vec<GuardItem>,
    /// Signedness of every word `+`, `-`, `*` node produced.
    pub signed_ops: HashMap<Term, bool>,
    /// Temporaries introduced for call results, with their types.
    pub temps: Vec<(String, CType)>,
}

fn mk(t: Term) -> Term {
    fold(&t)
}

fn word_ty(t: &CType) -> (u32, bool) {
    match t {
        CType::Word { width, signed } => (*width, *signed),
        CType::Pointer(_) => (64, false),
        _ => (64, false),
    }
}

/// C conversion between scalar types.
pub fn convert(t: Term, from: &CType, to: &CType) -> Term {
    if matches!(to, CType::Void) || from == to {
        return t;
    }
    let (_, signed) = word_ty(from);
    let (w, _) = word_ty(to);
    mk(t.resize(w, signed))
}

fn is_boolish(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.is_comparison() || op.is_logical(),
        ExprKind::Unary(UnaryOp::Not, _) | ExprKind::BoolLit(_) => true,
        ExprKind::ImplicitCast(_, a) | ExprKind::Cast(_, a) => is_boolish(a),
        _ => false,
    }
}

impl<'a> Lowerer<'a> {
    pub fn new(cx: &'a UnitCtx<'a>, f: Option<&FunctionDef>) -> Self {
        let mut locals = HashSet::new();
        let mut params = HashSet::new();
        if let Some(f) = f {
            for p in &f.params {
                locals.insert(p.name.clone());
                params.insert(p.name.clone());
            }
            for (n, _) in f.locals() {
                locals.insert(n);
            }
        }
        Lowerer {
            cx,
            fname: f.map(|f| f.name.clone()).unwrap_or_default(),
            result: f.map(|f| f.result.clone()).unwrap_or(CType::Void),
            locals,
            params,
            labels: BTreeMap::new(),
            mode: Mode::Code,
            in_old: false,
            allow_indirect: false,
            guards: Vec::new(),
            signed_ops: HashMap::new(),
            temps: Vec::new(),
        }
    }

    fn ast(&self) -> &'a Ast {
        self.cx.ast
    }

    fn guard(&mut self, kind: GuardKind, term: Term, loc: Loc) {
        let term = mk(term);
        if term.as_bool() == Some(true) || self.mode != Mode::Code {
            return;
        }
        self.guards.push(GuardItem { kind, term, loc });
    }

    /// Make the guards recorded since `start` conditional on `c`.
    fn under(&mut self, c: &Term, start: usize) {
        for g in &mut self.guards[start..] {
            g.term = mk(Term::implies(c.clone(), g.term.clone()));
        }
        self.guards.retain(|g| g.term.as_bool() != Some(true));
    }

    fn take_guards(&mut self) -> Vec<GuardItem> {
        std::mem::take(&mut self.guards)
    }

    fn wrap(gs: Vec<GuardItem>, d: Deep) -> Deep {
        gs.into_iter().rev().fold(d, |acc, g| Deep::Guard(g.kind, g.term, g.loc, Box::new(acc)))
    }

    fn is_function(&self, n: &str) -> bool {
        !self.locals.contains(n) && !self.cx.globals.contains(n) && self.ast().function(n).is_some()
    }

    fn local_var(&self, n: &str) -> String {
        qualify(&self.fname, n)
    }

    // ----- places -------------------------------------------------------

    fn place(&mut self, e: &Expr) -> LResult<Vec<(Term, Place)>> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::Ident(n) => {
                if self.locals.contains(n) {
                    Ok(vec![(Term::tt(), Place::State(self.local_var(n), e.ty().clone()))])
                } else if self.cx.globals.contains(n) {
                    Ok(vec![(Term::tt(), Place::State(n.clone(), e.ty().clone()))])
                } else {
                    Err(unsupported(loc, format!("`{n}` is not assignable")))
                }
            }
            ExprKind::Member(b, f) => {
                let CType::Struct(s) = b.ty() else {
                    return Err(unsupported(loc, "member access on a non-structure"));
                };
                let (off, fty) =
                    self.ast().field_offset(s, f).ok_or_else(|| unsupported(loc, format!("no field `{f}`")))?;
                let base = self.place(b)?;
                Ok(base
                    .into_iter()
                    .map(|(c, p)| match p {
                        Place::State(n, _) => (c, Place::State(format!("{n}.{f}"), fty.clone())),
                        Place::Mem(a, _) => {
                            (c, Place::Mem(mk(Term::bin(BinOp::Add, a, Term::bv(64, off))), fty.clone()))
                        }
                    })
                    .collect())
            }
            ExprKind::Arrow(p, f) => {
                let Some(CType::Struct(s)) = p.ty().pointee() else {
                    return Err(unsupported(loc, "`->` on a non-structure pointer"));
                };
                let (off, fty) =
                    self.ast().field_offset(s, f).ok_or_else(|| unsupported(loc, format!("no field `{f}`")))?;
                let a = self.value(p)?;
                Ok(vec![(Term::tt(), Place::Mem(mk(Term::bin(BinOp::Add, a, Term::bv(64, off))), fty))])
            }
            ExprKind::Unary(UnaryOp::Deref, p) => {
                let a = self.value(p)?;
                Ok(vec![(Term::tt(), Place::Mem(a, e.ty().clone()))])
            }
            ExprKind::Index(b, i) => {
                let (_, isigned) = word_ty(i.ty());
                let idx = mk(self.value(i)?.resize(64, isigned));
                match b.ty().clone() {
                    CType::Array(elem, n) => {
                        self.guard(GuardKind::Bounds, Term::cmp(CmpOp::Ult, idx.clone(), Term::bv(64, n)), loc);
                        let base = self.place(b)?;
                        let size = self.ast().size_of(&elem);
                        let mut out = Vec::new();
                        for (c, p) in base {
                            match p {
                                Place::State(name, _) => {
                                    if let Some((_, k)) = idx.as_const() {
                                        out.push((c, Place::State(format!("{name}[{k}]"), (*elem).clone())));
                                    } else {
                                        for k in 0..n {
                                            let ck = mk(Term::and2(c.clone(), Term::eq(idx.clone(), Term::bv(64, k))));
                                            out.push((ck, Place::State(format!("{name}[{k}]"), (*elem).clone())));
                                        }
                                    }
                                }
                                Place::Mem(a, _) => {
                                    let off = mk(Term::bin(BinOp::Mul, idx.clone(), Term::bv(64, size)));
                                    out.push((c, Place::Mem(mk(Term::bin(BinOp::Add, a, off)), (*elem).clone())));
                                }
                            }
                        }
                        Ok(out)
                    }
                    CType::Pointer(elem) => {
                        let a = self.value(b)?;
                        let size = self.ast().size_of(&elem);
                        let off = mk(Term::bin(BinOp::Mul, idx, Term::bv(64, size)));
                        Ok(vec![(Term::tt(), Place::Mem(mk(Term::bin(BinOp::Add, a, off)), (*elem).clone()))])
                    }
                    t => Err(unsupported(loc, format!("cannot index `{t}`"))),
                }
            }
            _ => Err(unsupported(loc, "expression is not an lvalue")),
        }
    }

    fn mem_guards(&mut self, c: &Term, a: &Term, ty: &CType, loc: Loc) {
        let align = self.ast().align_of(ty);
        let start = self.guards.len();
        self.guard(GuardKind::NonNull, Term::ne(a.clone(), Term::bv(64, 0)), loc);
        if align > 1 {
            self.guard(
                GuardKind::Aligned,
                Term::eq(Term::bin(BinOp::And, a.clone(), Term::bv(64, align - 1)), Term::bv(64, 0)),
                loc,
            );
        }
        if c.as_bool() != Some(true) {
            self.under(c, start);
        }
    }

    fn read_place(&mut self, c: &Term, p: &Place, loc: Loc) -> LResult<Term> {
        match p {
            Place::State(n, ty) if ty.is_scalar() => Ok(Term::var(n.clone(), sort_of(ty))),
            Place::State(n, ty) => Err(Diagnostic::error(
                "address-of-global",
                loc,
                format!("`{n}` of type `{ty}` used as a value (global addresses are not modelled)"),
            )),
            Place::Mem(a, CType::Array(..)) => Ok(a.clone()),
            Place::Mem(a, ty) => {
                let Some(h) = heap_type(ty) else {
                    return Err(unsupported(loc, format!("value of type `{ty}` read from memory")));
                };
                self.mem_guards(c, a, ty, loc);
                Ok(Term::read(Term::heap_var(h), a.clone()))
            }
        }
    }

    fn read_alts(&mut self, alts: &[(Term, Place)], loc: Loc) -> LResult<Term> {
        let mut vals = Vec::new();
        for (c, p) in alts {
            vals.push((c.clone(), self.read_place(c, p, loc)?));
        }
        let (_, last) = vals.pop().ok_or_else(|| unsupported(loc, "empty place"))?;
        Ok(mk(vals.into_iter().rev().fold(last, |acc, (c, v)| Term::ite(c, v, acc))))
    }

    fn assign_alts(&mut self, alts: &[(Term, Place)], v: Term, loc: Loc) -> LResult<Deep> {
        let single = alts.len() == 1 && alts[0].0.as_bool() == Some(true);
        let mut updates: Vec<(String, Term)> = Vec::new();
        for (c, p) in alts {
            match p {
                Place::State(n, ty) => {
                    if !ty.is_scalar() {
                        return Err(Diagnostic::error("struct-assign", loc, "aggregate assignment"));
                    }
                    let val = if single {
                        v.clone()
                    } else {
                        mk(Term::ite(c.clone(), v.clone(), Term::var(n.clone(), sort_of(ty))))
                    };
                    updates.push((n.clone(), val));
                }
                Place::Mem(a, ty) => {
                    let h = heap_type(ty).ok_or_else(|| Diagnostic::error("struct-assign", loc, "aggregate store"))?;
                    self.mem_guards(c, a, ty, loc);
                    let name = h.var_name();
                    let cur = match updates.iter().position(|(n, _)| *n == name) {
                        Some(i) => updates.remove(i).1,
                        None => Term::heap_var(h),
                    };
                    let stored = Term::store(cur.clone(), a.clone(), v.clone());
                    let val = if single { stored } else { mk(Term::ite(c.clone(), stored, cur)) };
                    updates.push((name, val));
                }
            }
        }
        let gs = self.take_guards();
        Ok(Self::wrap(gs, Deep::Basic(updates)))
    }

    // ----- values -------------------------------------------------------

    fn record(&mut self, t: Term, signed: bool) -> Term {
        let t = mk(t);
        if let Node::Bin(BinOp::Add | BinOp::Sub | BinOp::Mul, ..) = t.node() {
            self.signed_ops.insert(t.clone(), signed);
        }
        t
    }

    /// Arithmetic and bitwise binary operators on converted operands.
    #[allow(clippy::too_many_arguments)]
    fn arith(
        &mut self,
        op: BinaryOp,
        a: Term,
        ta: &CType,
        b: Term,
        tb: &CType,
        rty: &CType,
        loc: Loc,
    ) -> LResult<Term> {
        if let (BinaryOp::Add | BinaryOp::Sub, Some(elem)) = (op, ta.pointee()) {
            if tb.is_pointer() {
                let size = self.ast().size_of(elem).max(1);
                let diff = mk(Term::bin(BinOp::Sub, a, b));
                return Ok(mk(Term::bin(BinOp::SDiv, diff, Term::bv(64, size))));
            }
            let size = self.ast().size_of(elem);
            let off = mk(Term::bin(BinOp::Mul, b, Term::bv(64, size)));
            let bop = if op == BinaryOp::Add { BinOp::Add } else { BinOp::Sub };
            return Ok(mk(Term::bin(bop, a, off)));
        }
        if let (BinaryOp::Add, Some(elem)) = (op, tb.pointee()) {
            let size = self.ast().size_of(elem);
            let off = mk(Term::bin(BinOp::Mul, a, Term::bv(64, size)));
            return Ok(mk(Term::bin(BinOp::Add, b, off)));
        }
        let (w, signed) = word_ty(rty);
        Ok(match op {
            BinaryOp::Add => self.record(Term::bin(BinOp::Add, a, b), signed),
            BinaryOp::Sub => self.record(Term::bin(BinOp::Sub, a, b), signed),
            BinaryOp::Mul => self.record(Term::bin(BinOp::Mul, a, b), signed),
            BinaryOp::Div | BinaryOp::Rem => {
                self.guard(GuardKind::DivZero, Term::ne(b.clone(), Term::bv(w, 0)), loc);
                if signed {
                    let min = Term::bv(w, 1u64 << (w - 1));
                    let neg1 = Term::bv(w, mask(w));
                    self.guard(
                        GuardKind::DivOverflow,
                        Term::not(Term::and2(Term::eq(a.clone(), min), Term::eq(b.clone(), neg1))),
                        loc,
                    );
                }
                let bop = match (op, signed) {
                    (BinaryOp::Div, true) => BinOp::SDiv,
                    (BinaryOp::Div, false) => BinOp::UDiv,
                    (_, true) => BinOp::SRem,
                    (_, false) => BinOp::URem,
                };
                mk(Term::bin(bop, a, b))
            }
            BinaryOp::Shl | BinaryOp::Shr => {
                let (wb, bsigned) = word_ty(tb);
                let _ = bsigned;
                let in_range = if wb >= 64 || (w as u64) <= mask(wb) {
                    Term::cmp(CmpOp::Ult, b.clone(), Term::bv(wb, w as u64))
                } else {
                    Term::tt()
                };
                self.guard(GuardKind::Shift, in_range, loc);
                let amount = mk(b.resize(w, false));
                let bop = match (op, signed) {
                    (BinaryOp::Shl, _) => BinOp::Shl,
                    (_, true) => BinOp::AShr,
                    (_, false) => BinOp::LShr,
                };
                mk(Term::bin(bop, a, amount))
            }
            BinaryOp::BitAnd => mk(Term::bin(BinOp::And, a, b)),
            BinaryOp::BitOr => mk(Term::bin(BinOp::Or, a, b)),
            BinaryOp::BitXor => mk(Term::bin(BinOp::Xor, a, b)),
            _ => return Err(unsupported(loc, format!("operator `{}` in arithmetic", op.symbol()))),
        })
    }

    pub fn value(&mut self, e: &Expr) -> LResult<Term> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::IntLit { value, .. } => {
                let (w, _) = word_ty(e.ty());
                Ok(Term::bv(w, value & mask(w)))
            }
            ExprKind::BoolLit(b) => Ok(Term::bv(32, *b as u64)),
            ExprKind::Ident(n) => {
                if self.locals.contains(n) {
                    let v = Term::var(self.local_var(n), sort_of(e.ty()));
                    if self.mode == Mode::Post && self.params.contains(n) && !self.in_old {
                        return Ok(Term::old(v));
                    }
                    return Ok(v);
                }
                if let Some(c) = self.cx.consts.get(n) {
                    return Ok(c.clone());
                }
                if self.cx.globals.contains(n) {
                    let alts = self.place(e)?;
                    return self.read_alts(&alts, loc);
                }
                if self.is_function(n) {
                    let addr = self.cx.symtab.addr(n).unwrap_or(0);
                    return Ok(Term::fn_addr(n.clone(), addr));
                }
                if let Some(t) = self.labels.get(n) {
                    return Ok(Term::var(n.clone(), sort_of(t)));
                }
                Err(unsupported(loc, format!("unresolved identifier `{n}`")))
            }
            ExprKind::Unary(op, a) => match op {
                UnaryOp::Neg => Ok(mk(Term::un(UnOp::Neg, self.value(a)?))),
                UnaryOp::Plus => self.value(a),
                UnaryOp::BitNot => Ok(mk(Term::un(UnOp::Not, self.value(a)?))),
                UnaryOp::Not => {
                    let c = self.cond(e)?;
                    Ok(mk(c.to_word(word_ty(e.ty()).0)))
                }
                UnaryOp::Deref => {
                    let alts = self.place(e)?;
                    self.read_alts(&alts, loc)
                }
                UnaryOp::AddrOf => {
                    if let ExprKind::Ident(n) = &a.kind {
                        if self.is_function(n) {
                            return self.value(a);
                        }
                    }
                    let alts = self.place(a)?;
                    match alts.as_slice() {
                        [(_, Place::Mem(addr, _))] => Ok(addr.clone()),
                        _ => Err(Diagnostic::error(
                            "address-of-global",
                            loc,
                            "taking the address of a variable is not supported",
                        )),
                    }
                }
            },
            ExprKind::Binary(op, a, b) => {
                if op.is_comparison() || op.is_logical() {
                    let c = self.cond(e)?;
                    return Ok(mk(c.to_word(word_ty(e.ty()).0)));
                }
                let va = self.value(a)?;
                let vb = self.value(b)?;
                self.arith(*op, va, a.ty(), vb, b.ty(), e.ty(), loc)
            }
            ExprKind::Cond(c, a, b) => {
                let cc = self.cond(c)?;
                let s = self.guards.len();
                let va = self.value(a)?;
                self.under(&cc, s);
                let s = self.guards.len();
                let vb = self.value(b)?;
                self.under(&mk(Term::not(cc.clone())), s);
                Ok(mk(Term::ite(cc, va, vb)))
            }
            ExprKind::Index(..) | ExprKind::Member(..) | ExprKind::Arrow(..) => {
                let alts = self.place(e)?;
                self.read_alts(&alts, loc)
            }
            ExprKind::Cast(t, a) | ExprKind::ImplicitCast(t, a) => {
                if t == &CType::Void {
                    return Err(unsupported(loc, "void value"));
                }
                let v = self.value(a)?;
                if !a.ty().is_scalar() {
                    return Ok(v);
                }
                Ok(convert(v, a.ty(), t))
            }
            ExprKind::SizeofType(t) => Ok(Term::bv(64, self.ast().size_of(t))),
            ExprKind::SizeofExpr(a) => Ok(Term::bv(64, self.ast().size_of(a.ty()))),
            ExprKind::Old(a) => {
                let saved = self.in_old;
                self.in_old = true;
                let v = self.value(a);
                self.in_old = saved;
                Ok(Term::old(v?))
            }
            ExprKind::Result => Ok(Term::var(RESULT, sort_of(&self.result))),
            ExprKind::FloatLit(_) => Err(Diagnostic::error("float", loc, "floating point is not supported")),
            ExprKind::StrLit(_) => Err(Diagnostic::error("string", loc, "string literals are not supported")),
            ExprKind::Assign(..) | ExprKind::IncDec { .. } | ExprKind::Call(..) => {
                Err(Diagnostic::error("side-effect", loc, "side effect inside an expression"))
            }
        }
    }

    /// Boolean view of a scalar expression.
    pub fn cond(&mut self, e: &Expr) -> LResult<Term> {
        match &e.kind {
            ExprKind::ImplicitCast(_, a) | ExprKind::Cast(_, a) if is_boolish(a) => self.cond(a),
            ExprKind::BoolLit(b) => Ok(Term::bool(*b)),
            ExprKind::Unary(UnaryOp::Not, a) => Ok(mk(Term::not(self.cond(a)?))),
            ExprKind::Binary(op, a, b) if op.is_logical() => {
                let ca = self.cond(a)?;
                let s = self.guards.len();
                let cb = self.cond(b)?;
                Ok(mk(match op {
                    BinaryOp::LogAnd => {
                        self.under(&ca, s);
                        Term::and2(ca, cb)
                    }
                    BinaryOp::LogOr => {
                        self.under(&mk(Term::not(ca.clone())), s);
                        Term::or(vec![ca, cb])
                    }
                    _ => {
                        self.under(&ca, s);
                        Term::implies(ca, cb)
                    }
                }))
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let va = self.value(a)?;
                let vb = self.value(b)?;
                let signed = a.ty().is_signed();
                let (lt, le) = if signed { (CmpOp::Slt, CmpOp::Sle) } else { (CmpOp::Ult, CmpOp::Ule) };
                Ok(mk(match op {
                    BinaryOp::Lt => Term::cmp(lt, va, vb),
                    BinaryOp::Gt => Term::cmp(lt, vb, va),
                    BinaryOp::Le => Term::cmp(le, va, vb),
                    BinaryOp::Ge => Term::cmp(le, vb, va),
                    BinaryOp::Eq => Term::eq(va, vb),
                    _ => Term::ne(va, vb),
                }))
            }
            _ => Ok(mk(self.value(e)?.truthy())),
        }
    }

    // ----- statements ---------------------------------------------------

    fn fresh_temp(&mut self, ty: &CType) -> String {
        let n = qualify(&self.fname, &format!("__tmp{}", self.temps.len()));
        self.temps.push((n.clone(), ty.clone()));
        n
    }

    fn call(&mut self, e: &Expr, ret: Option<String>) -> LResult<Deep> {
        let loc = e.loc;
        let ExprKind::Call(callee, args) = &e.kind else {
            return Err(unsupported(loc, "expected a call"));
        };
        let mut vals = Vec::new();
        for a in args {
            vals.push(self.value(a)?);
        }
        let direct = match &callee.kind {
            ExprKind::Ident(n) if self.is_function(n) && matches!(callee.ty(), CType::Function { .. }) => {
                Some(n.clone())
            }
            _ => None,
        };
        let d = match direct {
            Some(n) => Deep::Call { callee: n, args: vals, ret, loc },
            None if self.allow_indirect && ret.is_none() => {
                let target = self.value(callee)?;
                Deep::CallPtr { target, args: vals, loc }
            }
            None => return Err(Diagnostic::error("indirect-call", loc, "call through a function pointer")),
        };
        let gs = self.take_guards();
        Ok(Self::wrap(gs, d))
    }

    fn callee_result(&self, call: &Expr) -> CType {
        match &call.kind {
            ExprKind::Call(callee, _) => match callee.ty() {
                CType::Function { result, .. } => (**result).clone(),
                CType::Pointer(f) => match &**f {
                    CType::Function { result, .. } => (**result).clone(),
                    _ => CType::Void,
                },
                _ => CType::Void,
            },
            _ => CType::Void,
        }
    }

    /// `lhs = call(...)`: store directly when the target is a plain
    /// variable of the callee's result type, through a temporary otherwise.
    fn assign_call(
        &mut self,
        lhs_var: Option<(String, CType)>,
        lhs: Option<&Expr>,
        call: &Expr,
        lt: &CType,
    ) -> LResult<Deep> {
        let rty = self.callee_result(call);
        if let Some((v, ty)) = &lhs_var {
            if *ty == rty {
                return self.call(call, Some(v.clone()));
            }
        }
        let tmp = self.fresh_temp(&rty);
        let c = self.call(call, Some(tmp.clone()))?;
        let val = convert(Term::var(tmp, sort_of(&rty)), &rty, lt);
        let store = match (lhs_var, lhs) {
            (Some((v, _)), _) => Deep::Basic(vec![(v, val)]),
            (None, Some(l)) => {
                let alts = self.place(l)?;
                self.assign_alts(&alts, val, l.loc)?
            }
            _ => unreachable!(),
        };
        Ok(Deep::seq(c, store))
    }

    fn simple_var(&self, e: &Expr) -> Option<(String, CType)> {
        match &e.kind {
            ExprKind::Ident(n) if self.locals.contains(n) => Some((self.local_var(n), e.ty().clone())),
            ExprKind::Ident(n) if self.cx.globals.contains(n) && e.ty().is_scalar() => {
                Some((n.clone(), e.ty().clone()))
            }
            _ => None,
        }
    }

    fn expr_stmt(&mut self, e: &Expr) -> LResult<Deep> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::Assign(op, lhs, rhs) => {
                let lt = lhs.ty().clone();
                if op.is_none() && matches!(rhs.peel().kind, ExprKind::Call(..)) {
                    return self.assign_call(self.simple_var(lhs), Some(lhs), rhs.peel(), &lt);
                }
                let alts = self.place(lhs)?;
                let mut v = self.value(rhs)?;
                if let Some(op) = op {
                    let cur = self.read_alts(&alts, loc)?;
                    let opt = match op {
                        BinaryOp::Shl | BinaryOp::Shr => match &lt {
                            CType::Word { width, .. } if *width < 32 => CType::S32,
                            t => t.clone(),
                        },
                        _ if lt.is_pointer() => lt.clone(),
                        _ => rhs.ty().clone(),
                    };
                    let cur = if lt.is_pointer() { cur } else { convert(cur, &lt, &opt) };
                    let r = self.arith(*op, cur, &opt, v, rhs.ty(), &opt, loc)?;
                    v = convert(r, &opt, &lt);
                }
                self.assign_alts(&alts, v, loc)
            }
            ExprKind::IncDec { inc, target, .. } => {
                let ty = target.ty().clone();
                let alts = self.place(target)?;
                let cur = self.read_alts(&alts, loc)?;
                let (w, signed) = word_ty(&ty);
                let step = match ty.pointee() {
                    Some(p) => Term::bv(64, self.ast().size_of(p)),
                    None => Term::bv(w, 1),
                };
                let op = if *inc { BinOp::Add } else { BinOp::Sub };
                let v = if ty.is_pointer() {
                    mk(Term::bin(op, cur, step))
                } else {
                    self.record(Term::bin(op, cur, step), signed)
                };
                self.assign_alts(&alts, v, loc)
            }
            ExprKind::Call(..) => self.call(e, None),
            ExprKind::Cast(CType::Void, inner) => self.expr_stmt(inner),
            _ => {
                self.value(e)?;
                let gs = self.take_guards();
                Ok(Self::wrap(gs, Deep::Skip))
            }
        }
    }

    fn loop_ann(&mut self, spec: &Option<LoopSpec>) -> LResult<Option<LoopAnn>> {
        let Some(s) = spec else { return Ok(None) };
        let saved = self.mode;
        self.mode = Mode::Loop;
        let r = (|| {
            let mut invariant = Vec::new();
            for c in &s.invariant {
                invariant.push((self.cond(&c.expr)?, c.expr.loc));
            }
            let measure = match &s.measure {
                Some(m) => {
                    Some(Measure { term: self.value(&m.expr)?, signed: m.expr.ty().is_signed(), loc: m.expr.loc })
                }
                None => None,
            };
            Ok(Some(LoopAnn { invariant, measure, loc: s.loc }))
        })();
        self.mode = saved;
        r
    }

    fn while_loop(&mut self, cond: Option<&Expr>, body: Deep, ann: Option<LoopAnn>, loc: Loc) -> LResult<Deep> {
        let c = match cond {
            Some(c) => self.cond(c)?,
            None => Term::tt(),
        };
        let gs = self.take_guards();
        let recheck = Self::wrap(gs.clone(), Deep::Skip);
        let w = Deep::While { cond: c, body: Box::new(Deep::seq(body, recheck)), ann, loc };
        Ok(Self::wrap(gs, w))
    }

    pub fn stmts(&mut self, ss: &[Stmt]) -> LResult<Deep> {
        let mut out = Vec::new();
        for s in ss {
            out.push(self.stmt(s)?);
        }
        Ok(Deep::seq_all(out))
    }

    pub fn stmt(&mut self, s: &Stmt) -> LResult<Deep> {
        let loc = s.loc;
        match &s.kind {
            StmtKind::Empty => Ok(Deep::Skip),
            StmtKind::Expr(e) => self.expr_stmt(e),
            StmtKind::Decl(d) => match &d.init {
                None => Ok(Deep::Skip),
                Some(init) => {
                    let var = (self.local_var(&d.name), d.ty.clone());
                    if matches!(init.peel().kind, ExprKind::Call(..)) {
                        return self.assign_call(Some(var), None, init.peel(), &d.ty);
                    }
                    if !d.ty.is_scalar() {
                        return Err(Diagnostic::error("struct-assign", loc, "aggregate initialisation"));
                    }
                    let v = self.value(init)?;
                    let gs = self.take_guards();
                    Ok(Self::wrap(gs, Deep::Basic(vec![(var.0, v)])))
                }
            },
            StmtKind::Block(ss) => self.stmts(ss),
            StmtKind::If(c, a, b) => {
                let cc = self.cond(c)?;
                let gs = self.take_guards();
                let da = self.stmt(a)?;
                let db = match b {
                    Some(b) => self.stmt(b)?,
                    None => Deep::Skip,
                };
                Ok(Self::wrap(gs, Deep::Cond(cc, Box::new(da), Box::new(db))))
            }
            StmtKind::While { cond, body, spec, .. } => {
                let ann = self.loop_ann(spec)?;
                let b = self.stmt(body)?;
                self.while_loop(Some(cond), b, ann, loc)
            }
            StmtKind::DoWhile { body, cond, spec, .. } => {
                let ann = self.loop_ann(spec)?;
                let first = self.stmt(body)?;
                let again = self.stmt(body)?;
                let w = self.while_loop(Some(cond), again, ann, loc)?;
                Ok(Deep::seq(first, w))
            }
            StmtKind::For { init, cond, step, body, spec, .. } => {
                let ann = self.loop_ann(spec)?;
                let di = match init {
                    Some(i) => self.stmt(i)?,
                    None => Deep::Skip,
                };
                let b = self.stmt(body)?;
                let st = match step {
                    Some(e) => self.expr_stmt(e)?,
                    None => Deep::Skip,
                };
                let w = self.while_loop(cond.as_ref(), Deep::seq(b, st), ann, loc)?;
                Ok(Deep::seq(di, w))
            }
            StmtKind::Return(None) => Ok(Deep::Skip),
            StmtKind::Return(Some(e)) => {
                let rv = qualify(&self.fname, "__ret");
                let rt = self.result.clone();
                if matches!(e.peel().kind, ExprKind::Call(..)) {
                    return self.assign_call(Some((rv, rt.clone())), None, e.peel(), &rt);
                }
                let v = self.value(e)?;
                let gs = self.take_guards();
                Ok(Self::wrap(gs, Deep::Basic(vec![(rv, v)])))
            }
            StmtKind::Break => Err(Diagnostic::error("break", loc, "`break` is not supported")),
            StmtKind::Continue => Err(Diagnostic::error("continue", loc, "`continue` is not supported")),
            StmtKind::Goto(_) | StmtKind::Label(..) => Err(Diagnostic::error("goto", loc, "`goto` is not supported")),
            StmtKind::Switch(..) | StmtKind::Case(..) => {
                Err(Diagnostic::error("switch", loc, "`switch` is not supported"))
            }
        }
    }
}

/// Lowered body of one function.
pub struct LoweredFunction {
    pub deep: Deep,
    pub signed_ops: HashMap<Term, bool>,
    pub temps: Vec<(String, CType)>,
}

pub fn lower_function(cx: &UnitCtx<'_>, f: &FunctionDef, allow_indirect: bool) -> LResult<LoweredFunction> {
    let mut l = Lowerer::new(cx, Some(f));
    l.allow_indirect = allow_indirect;
    let deep = match &f.body {
        Some(b) => l.stmts(b)?,
        None => return Err(unsupported(f.loc, format!("`{}` has no body", f.name))),
    };
    Ok(LoweredFunction { deep, signed_ops: l.signed_ops, temps: l.temps })
}

/// Fold a constant global's initialiser.
pub fn const_value(cx: &UnitCtx<'_>, e: &Expr, ty: &CType) -> LResult<Term> {
    let mut l = Lowerer::new(cx, None);
    let v = l.value(e)?;
    let v = convert(v, e.ty(), ty);
    if v.as_const().is_some() {
        Ok(v)
    } else {
        Err(Diagnostic::error("const-init", e.loc, "initialiser is not a constant expression"))
    }
}

fn label_defs(l: &mut Lowerer<'_>, e: &Expr, out: &mut BTreeMap<String, Term>) -> LResult<()> {
    match &e.kind {
        ExprKind::Binary(BinaryOp::LogAnd, a, b) => {
            label_defs(l, a, out)?;
            label_defs(l, b, out)
        }
        ExprKind::ImplicitCast(_, a) => label_defs(l, a, out),
        ExprKind::Binary(BinaryOp::Eq, a, b) => {
            for (x, other) in [(a, b), (b, a)] {
                let ExprKind::Ident(n) = &x.peel().kind else { continue };
                let Some(lt) = l.labels.get(n).cloned() else { continue };
                if out.contains_key(n) {
                    continue;
                }
                let v = l.value(other)?;
                out.insert(n.clone(), convert(v, other.ty(), &lt));
                break;
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Elaborate every specification block of `f`.
pub fn lower_specs(cx: &UnitCtx<'_>, f: &FunctionDef) -> LResult<Vec<HoareSpec>> {
    let mut out = Vec::new();
    for s in &f.specs {
        let mut l = Lowerer::new(cx, Some(f));
        l.labels = s.labels.clone();
        l.mode = Mode::Pre;
        let mut pre = Vec::new();
        let mut defs = BTreeMap::new();
        for c in &s.requires {
            pre.push(SpecClause { term: l.cond(&c.expr)?, text: c.text.clone(), loc: c.expr.loc });
            label_defs(&mut l, &c.expr, &mut defs)?;
        }
        l.mode = Mode::Post;
        let mut post = Vec::new();
        for c in &s.ensures {
            post.push(SpecClause { term: l.cond(&c.expr)?, text: c.text.clone(), loc: c.expr.loc });
        }
        out.push(HoareSpec {
            name: s.name.clone().unwrap_or_else(|| f.name.clone()),
            function: f.name.clone(),
            total: s.total,
            pre,
            post,
            labels: s.labels.iter().map(|(n, t)| (n.clone(), sort_of(t))).collect(),
            label_defs: defs,
            loc: s.loc,
        });
    }
    Ok(out)
}

/// Qualified parameter names and types.
pub fn params(f: &FunctionDef) -> Vec<(String, CType)> {
    param_names(f).into_iter().zip(f.params.iter().map(|p| p.ty.clone())).collect()
}
