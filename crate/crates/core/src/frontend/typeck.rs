//! Type checking: assigns a `CType` to every expression, makes implicit
//! conversions explicit, resolves identifiers (renaming shadowed locals so
//! every local of a function has a distinct name) and infers the types of
//! logical labels bound in preconditions.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::ast::*;
use super::diag::{Diagnostic, Loc};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Code,
    Requires,
    Ensures,
    Invariant,
}

struct Checker {
    structs: HashMap<String, StructDecl>,
    globals: HashMap<String, CType>,
    functions: HashMap<String, CType>,
    scopes: Vec<HashMap<String, (String, CType)>>,
    used: HashSet<String>,
    result: CType,
    mode: Mode,
    labels: BTreeMap<String, CType>,
}

type TResult<T = ()> = Result<T, Diagnostic>;

fn err(code: &str, loc: Loc, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(code, loc, msg)
}

/// Integer promotion: words narrower than 32 bits become `int`.
fn promote(t: &CType) -> CType {
    match t {
        CType::Word { width, .. } if *width < 32 => CType::S32,
        t => t.clone(),
    }
}

/// Usual arithmetic conversions on two (promoted) word types.
fn common_word(a: &CType, b: &CType) -> CType {
    let (a, b) = (promote(a), promote(b));
    let (CType::Word { width: wa, signed: sa }, CType::Word { width: wb, signed: sb }) = (&a, &b) else {
        return a;
    };
    if sa == sb {
        return CType::word((*wa).max(*wb), *sa);
    }
    let (uw, sw) = if *sa { (*wb, *wa) } else { (*wa, *wb) };
    if uw >= sw {
        CType::word(uw, false)
    } else {
        CType::word(sw, true)
    }
}

/// Constant expression built only from literals: takes its type from the
/// other operand of a binary operator.
fn is_literal_like(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::IntLit { suffix, .. } => !suffix.unsigned && suffix.longs == 0,
        ExprKind::Unary(UnaryOp::Neg | UnaryOp::BitNot | UnaryOp::Plus, a) => is_literal_like(a),
        ExprKind::Binary(op, a, b) if !op.is_comparison() && !op.is_logical() => {
            is_literal_like(a) && is_literal_like(b)
        }
        ExprKind::ImplicitCast(_, a) => is_literal_like(a),
        _ => false,
    }
}

fn is_null_constant(e: &Expr) -> bool {
    matches!(e.peel().kind, ExprKind::IntLit { value: 0, .. })
}

fn literal_type(value: u64, suffix: super::token::IntSuffix) -> CType {
    let wide = value > u32::MAX as u64;
    if suffix.longs > 0 {
        CType::word(64, !suffix.unsigned)
    } else if suffix.unsigned {
        CType::word(if wide { 64 } else { 32 }, false)
    } else if wide {
        CType::U64
    } else {
        CType::U32
    }
}

fn wrap_cast(e: &mut Expr, to: &CType) {
    if e.ty.as_ref() == Some(to) {
        return;
    }
    let loc = e.loc;
    let inner = std::mem::replace(e, Expr::new(ExprKind::BoolLit(false), loc));
    *e = Expr { kind: ExprKind::ImplicitCast(to.clone(), Box::new(inner)), ty: Some(to.clone()), loc };
}

impl Checker {
    fn new(ast: &Ast) -> Self {
        Checker {
            structs: ast.structs.iter().map(|s| (s.name.clone(), s.clone())).collect(),
            globals: ast.globals.iter().map(|g| (g.name.clone(), g.ty.clone())).collect(),
            functions: ast.functions.iter().map(|f| (f.name.clone(), f.ctype())).collect(),
            scopes: Vec::new(),
            used: HashSet::new(),
            result: CType::Void,
            mode: Mode::Code,
            labels: BTreeMap::new(),
        }
    }

    fn lookup_local(&self, name: &str) -> Option<(String, CType)> {
        self.scopes.iter().rev().find_map(|s| s.get(name).cloned())
    }

    fn declare_local(&mut self, name: &mut String, ty: CType) {
        let mut unique = name.clone();
        let mut k = 2;
        while self.used.contains(&unique) {
            unique = format!("{name}#{k}");
            k += 1;
        }
        self.used.insert(unique.clone());
        self.scopes.last_mut().unwrap().insert(name.clone(), (unique.clone(), ty));
        *name = unique;
    }

    fn field(&self, sname: &str, field: &str, loc: Loc) -> TResult<CType> {
        let s = self
            .structs
            .get(sname)
            .ok_or_else(|| err("incomplete-type", loc, format!("`{sname}` has no definition")))?;
        s.fields
            .iter()
            .find(|(n, _)| n == field)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| err("no-field", loc, format!("`{sname}` has no field `{field}`")))
    }

    /// Convert `e` to type `to` as by assignment.
    fn coerce(&self, e: &mut Expr, to: &CType) -> TResult {
        let from = e.ty().clone();
        if &from == to {
            return Ok(());
        }
        let ok = match (&from, to) {
            (CType::Word { .. }, CType::Word { .. }) => true,
            (CType::Pointer(a), CType::Pointer(b)) => a == b || **a == CType::Void || **b == CType::Void,
            (CType::Word { .. }, CType::Pointer(_)) => is_null_constant(e),
            _ => false,
        };
        if !ok {
            return Err(err("type-mismatch", e.loc, format!("cannot convert `{from}` to `{to}`")));
        }
        wrap_cast(e, to);
        Ok(())
    }

    fn scalar(&self, e: &Expr, what: &str) -> TResult {
        if e.ty().is_scalar() {
            Ok(())
        } else {
            Err(err("type-mismatch", e.loc, format!("{what} must have scalar type, found `{}`", e.ty())))
        }
    }

    fn word(&self, e: &Expr, what: &str) -> TResult {
        if e.ty().is_word() {
            Ok(())
        } else {
            Err(err("type-mismatch", e.loc, format!("{what} must be an integer, found `{}`", e.ty())))
        }
    }

    fn is_lvalue(e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Ident(_) => true,
            ExprKind::Unary(UnaryOp::Deref, _) | ExprKind::Arrow(..) => true,
            ExprKind::Index(b, _) | ExprKind::Member(b, _) => {
                Self::is_lvalue(b) || b.ty.as_ref().is_some_and(|t| t.is_pointer())
            }
            _ => false,
        }
    }

    fn expr(&mut self, e: &mut Expr) -> TResult {
        let loc = e.loc;
        let ty: CType = match &mut e.kind {
            ExprKind::IntLit { value, suffix, .. } => literal_type(*value, *suffix),
            ExprKind::BoolLit(_) => CType::S32,
            ExprKind::FloatLit(_) => CType::Float(64),
            ExprKind::StrLit(_) => CType::ptr(CType::S8),
            ExprKind::Ident(name) => {
                if let Some((unique, t)) = self.lookup_local(name) {
                    *name = unique;
                    t
                } else if let Some(t) = self.globals.get(name.as_str()) {
                    t.clone()
                } else if let Some(t) = self.functions.get(name.as_str()) {
                    CType::ptr(t.clone())
                } else if let Some(t) = self.labels.get(name.as_str()) {
                    t.clone()
                } else if self.mode == Mode::Requires {
                    self.labels.insert(name.clone(), CType::U32);
                    CType::U32
                } else {
                    return Err(err("undeclared", loc, format!("use of undeclared identifier `{name}`")));
                }
            }
            ExprKind::Unary(op, a) => {
                self.expr(a)?;
                match op {
                    UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot => {
                        self.word(a, "operand")?;
                        let t = promote(a.ty());
                        wrap_cast(a, &t);
                        t
                    }
                    UnaryOp::Not => {
                        self.scalar(a, "operand of `!`")?;
                        CType::S32
                    }
                    UnaryOp::Deref => match a.ty() {
                        CType::Pointer(t) if **t != CType::Void => (**t).clone(),
                        t => {
                            return Err(err("type-mismatch", loc, format!("cannot dereference a value of type `{t}`")))
                        }
                    },
                    UnaryOp::AddrOf => {
                        if let CType::Pointer(f) = a.ty() {
                            if matches!(**f, CType::Function { .. }) && matches!(a.kind, ExprKind::Ident(_)) {
                                // `&fn` is the same value as `fn`.
                                a.ty().clone()
                            } else {
                                CType::ptr(a.ty().clone())
                            }
                        } else if Self::is_lvalue(a) {
                            CType::ptr(a.ty().clone())
                        } else {
                            return Err(err("type-mismatch", loc, "cannot take the address of an rvalue"));
                        }
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let op = *op;
                self.expr(a)?;
                self.expr(b)?;
                self.binary(op, a, b, loc)?
            }
            ExprKind::Assign(op, lhs, rhs) => {
                let op = *op;
                self.expr(lhs)?;
                self.expr(rhs)?;
                if !Self::is_lvalue(lhs) {
                    return Err(err("not-lvalue", loc, "left side of assignment is not assignable"));
                }
                let lt = lhs.ty().clone();
                if matches!(lt, CType::Array(..) | CType::Function { .. }) {
                    return Err(err("not-lvalue", loc, format!("cannot assign to a value of type `{lt}`")));
                }
                match op {
                    None => {
                        let same_struct = matches!((&lt, rhs.ty()), (CType::Struct(a), CType::Struct(b)) if a == b);
                        if !same_struct {
                            self.coerce(rhs, &lt)?;
                        }
                    }
                    Some(op) => {
                        // The operation happens in the common type; the
                        // result converts back to the left side's type.
                        let mut probe = (**lhs).clone();
                        let opt = self.binary(op, &mut probe, rhs, loc)?;
                        if !opt.is_scalar() || !lt.is_scalar() {
                            return Err(err("type-mismatch", loc, "invalid compound assignment"));
                        }
                    }
                }
                lt
            }
            ExprKind::IncDec { target, .. } => {
                self.expr(target)?;
                if !Self::is_lvalue(target) {
                    return Err(err("not-lvalue", loc, "operand of ++/-- is not assignable"));
                }
                self.scalar(target, "operand of ++/--")?;
                target.ty().clone()
            }
            ExprKind::Cond(c, a, b) => {
                self.expr(c)?;
                self.scalar(c, "condition")?;
                self.expr(a)?;
                self.expr(b)?;
                let (ta, tb) = (a.ty().clone(), b.ty().clone());
                if ta.is_word() && tb.is_word() {
                    let t = if is_literal_like(a) && !is_literal_like(b) {
                        promote(&tb)
                    } else if is_literal_like(b) && !is_literal_like(a) {
                        promote(&ta)
                    } else {
                        common_word(&ta, &tb)
                    };
                    wrap_cast(a, &t);
                    wrap_cast(b, &t);
                    t
                } else if ta.is_pointer() {
                    self.coerce(b, &ta)?;
                    ta
                } else if tb.is_pointer() {
                    self.coerce(a, &tb)?;
                    tb
                } else if ta == tb {
                    ta
                } else {
                    return Err(err("type-mismatch", loc, format!("incompatible branches `{ta}` and `{tb}`")));
                }
            }
            ExprKind::Call(callee, args) => {
                if self.mode != Mode::Code {
                    return Err(err("annotation", loc, "function calls are not allowed in annotations"));
                }
                let direct = match &callee.kind {
                    ExprKind::Ident(n) if self.lookup_local(n).is_none() && !self.globals.contains_key(n) => {
                        self.functions.get(n).cloned()
                    }
                    _ => None,
                };
                let fty = match direct {
                    Some(t) => {
                        callee.ty = Some(t.clone());
                        t
                    }
                    None => {
                        self.expr(callee)?;
                        match callee.ty() {
                            CType::Pointer(f) if matches!(**f, CType::Function { .. }) => (**f).clone(),
                            t => {
                                return Err(err(
                                    "type-mismatch",
                                    loc,
                                    format!("called value of type `{t}` is not a function"),
                                ))
                            }
                        }
                    }
                };
                let CType::Function { params, result } = fty else { unreachable!() };
                if params.len() != args.len() {
                    return Err(err(
                        "arity",
                        loc,
                        format!("expected {} argument(s), found {}", params.len(), args.len()),
                    ));
                }
                for (a, p) in args.iter_mut().zip(&params) {
                    self.expr(a)?;
                    self.coerce(a, p)?;
                }
                *result
            }
            ExprKind::Index(base, idx) => {
                self.expr(base)?;
                self.expr(idx)?;
                self.word(idx, "array index")?;
                match base.ty() {
                    CType::Array(t, _) => (**t).clone(),
                    CType::Pointer(t) if **t != CType::Void => (**t).clone(),
                    t => return Err(err("type-mismatch", loc, format!("cannot index a value of type `{t}`"))),
                }
            }
            ExprKind::Member(base, f) => {
                self.expr(base)?;
                match base.ty().clone() {
                    CType::Struct(s) | CType::Union(s) => self.field(&s, f, loc)?,
                    t => return Err(err("type-mismatch", loc, format!("member access on `{t}`"))),
                }
            }
            ExprKind::Arrow(base, f) => {
                self.expr(base)?;
                match base.ty().clone() {
                    CType::Pointer(t) => match *t {
                        CType::Struct(s) | CType::Union(s) => self.field(&s, f, loc)?,
                        t => return Err(err("type-mismatch", loc, format!("`->` on pointer to `{t}`"))),
                    },
                    t => return Err(err("type-mismatch", loc, format!("`->` on `{t}`"))),
                }
            }
            ExprKind::Cast(t, a) => {
                let t = t.clone();
                self.expr(a)?;
                let from = a.ty();
                let ok = t == CType::Void
                    || (t.is_scalar() && from.is_scalar())
                    || matches!(t, CType::Float(_)) && from.is_word()
                    || matches!(from, CType::Float(_)) && t.is_word();
                if !ok {
                    return Err(err("type-mismatch", loc, format!("invalid cast from `{from}` to `{t}`")));
                }
                t
            }
            ExprKind::ImplicitCast(t, a) => {
                let t = t.clone();
                self.expr(a)?;
                t
            }
            ExprKind::SizeofType(_) => CType::U64,
            ExprKind::SizeofExpr(a) => {
                self.expr(a)?;
                CType::U64
            }
            ExprKind::Old(a) => {
                if self.mode != Mode::Ensures {
                    return Err(err("annotation", loc, "`\\old` may only appear in postconditions"));
                }
                self.expr(a)?;
                a.ty().clone()
            }
            ExprKind::Result => {
                if self.mode != Mode::Ensures {
                    return Err(err("annotation", loc, "`\\result` may only appear in postconditions"));
                }
                if self.result == CType::Void {
                    return Err(err("annotation", loc, "`\\result` used in a void function"));
                }
                self.result.clone()
            }
        };
        self.set(e, ty);
        Ok(())
    }

    fn set(&self, e: &mut Expr, ty: CType) {
        e.ty = Some(ty);
    }

    fn binary(&mut self, op: BinaryOp, a: &mut Expr, b: &mut Expr, loc: Loc) -> TResult<CType> {
        let (ta, tb) = (a.ty().clone(), b.ty().clone());
        if op.is_logical() {
            self.scalar(a, "operand")?;
            self.scalar(b, "operand")?;
            return Ok(CType::S32);
        }
        match op {
            BinaryOp::Shl | BinaryOp::Shr => {
                self.word(a, "shifted value")?;
                self.word(b, "shift amount")?;
                let t = promote(&ta);
                wrap_cast(a, &t);
                let tb2 = promote(&tb);
                wrap_cast(b, &tb2);
                return Ok(t);
            }
            BinaryOp::Add | BinaryOp::Sub if ta.is_pointer() && tb.is_word() => {
                wrap_cast(b, &CType::U64);
                return Ok(ta);
            }
            BinaryOp::Add if tb.is_pointer() && ta.is_word() => {
                wrap_cast(a, &CType::U64);
                return Ok(tb);
            }
            BinaryOp::Sub if ta.is_pointer() && tb.is_pointer() => {
                if ta != tb {
                    return Err(err("type-mismatch", loc, "subtraction of unrelated pointers"));
                }
                return Ok(CType::S64);
            }
            _ => {}
        }
        if op.is_comparison() && (ta.is_pointer() || tb.is_pointer()) {
            if !matches!(op, BinaryOp::Eq | BinaryOp::Ne) && !(ta.is_pointer() && tb.is_pointer()) {
                return Err(err("type-mismatch", loc, "ordered comparison between pointer and integer"));
            }
            if ta.is_pointer() {
                self.coerce(b, &ta)?;
            } else {
                self.coerce(a, &tb)?;
            }
            return Ok(CType::S32);
        }
        self.word(a, "operand")?;
        self.word(b, "operand")?;
        let t = if is_literal_like(a) && !is_literal_like(b) {
            promote(&tb)
        } else if is_literal_like(b) && !is_literal_like(a) {
            promote(&ta)
        } else {
            common_word(&ta, &tb)
        };
        wrap_cast(a, &t);
        wrap_cast(b, &t);
        Ok(if op.is_comparison() { CType::S32 } else { t })
    }

    fn stmts(&mut self, ss: &mut [Stmt], diags: &mut Vec<Diagnostic>) {
        self.scopes.push(HashMap::new());
        for s in ss {
            self.stmt(s, diags);
        }
        self.scopes.pop();
    }

    fn cond(&mut self, c: &mut Expr) -> TResult {
        self.expr(c)?;
        self.scalar(c, "condition")
    }

    fn loop_spec(&mut self, spec: &mut Option<LoopSpec>, diags: &mut Vec<Diagnostic>) {
        let Some(spec) = spec else { return };
        let saved = self.mode;
        self.mode = Mode::Invariant;
        for c in &mut spec.invariant {
            if let Err(d) = self.cond(&mut c.expr) {
                diags.push(d);
            }
        }
        if let Some(m) = &mut spec.measure {
            if let Err(d) = self.expr(&mut m.expr).and_then(|_| self.word(&m.expr, "measure")) {
                diags.push(d);
            }
        }
        self.mode = saved;
    }

    fn stmt(&mut self, s: &mut Stmt, diags: &mut Vec<Diagnostic>) {
        match &mut s.kind {
            StmtKind::Empty | StmtKind::Break | StmtKind::Continue | StmtKind::Goto(_) => {}
            StmtKind::Expr(e) => report(diags, self.expr(e)),
            StmtKind::Decl(d) => {
                if let Some(init) = &mut d.init {
                    report(
                        diags,
                        self.expr(init).and_then(|_| {
                            if matches!(d.ty, CType::Struct(_)) && init.ty() == &d.ty {
                                Ok(())
                            } else {
                                self.coerce(init, &d.ty)
                            }
                        }),
                    );
                }
                if d.ty == CType::Void {
                    report(diags, Err(err("type-mismatch", s.loc, "variable of type void")));
                }
                self.declare_local(&mut d.name, d.ty.clone());
            }
            StmtKind::Block(ss) => self.stmts(ss, diags),
            StmtKind::If(c, a, b) => {
                report(diags, self.cond(c));
                self.scoped(a, diags);
                if let Some(b) = b {
                    self.scoped(b, diags);
                }
            }
            StmtKind::While { cond, body, spec, .. } => {
                report(diags, self.cond(cond));
                self.loop_spec(spec, diags);
                self.scoped(body, diags);
            }
            StmtKind::DoWhile { body, cond, spec, .. } => {
                self.loop_spec(spec, diags);
                self.scoped(body, diags);
                report(diags, self.cond(cond));
            }
            StmtKind::For { init, cond, step, body, spec, .. } => {
                self.scopes.push(HashMap::new());
                if let Some(i) = init {
                    self.stmt(i, diags);
                }
                if let Some(c) = cond {
                    if let Err(d) = self.cond(c) {
                        diags.push(d);
                    }
                }
                if let Some(st) = step {
                    if let Err(d) = self.expr(st) {
                        diags.push(d);
                    }
                }
                self.loop_spec(spec, diags);
                self.scoped(body, diags);
                self.scopes.pop();
            }
            StmtKind::Return(e) => {
                let r = self.result.clone();
                match (e, &r) {
                    (None, CType::Void) => {}
                    (None, _) => report(diags, Err(err("type-mismatch", s.loc, "missing return value"))),
                    (Some(_), CType::Void) => {
                        report(diags, Err(err("type-mismatch", s.loc, "void function returns a value")))
                    }
                    (Some(e), r) => report(diags, self.expr(e).and_then(|_| self.coerce(e, r))),
                }
            }
            StmtKind::Label(_, b) => self.stmt(b, diags),
            StmtKind::Switch(e, b) => {
                report(diags, self.expr(e));
                self.scoped(b, diags);
            }
            StmtKind::Case(e, b) => {
                if let Some(e) = e {
                    report(diags, self.expr(e));
                }
                self.stmt(b, diags);
            }
        }
    }

    fn scoped(&mut self, s: &mut Stmt, diags: &mut Vec<Diagnostic>) {
        self.scopes.push(HashMap::new());
        self.stmt(s, diags);
        self.scopes.pop();
    }

    /// Find `label == e` / `e == label` conjuncts in a precondition and
    /// give each label the type of its defining expression.
    fn label_hints(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Binary(BinaryOp::LogAnd, a, b) => {
                self.label_hints(a);
                self.label_hints(b);
            }
            ExprKind::Binary(BinaryOp::Eq, a, b) => {
                for (l, other) in [(a, b), (b, a)] {
                    let ExprKind::Ident(name) = &l.kind else { continue };
                    if self.lookup_local(name).is_some()
                        || self.globals.contains_key(name)
                        || self.functions.contains_key(name)
                        || self.labels.contains_key(name)
                    {
                        continue;
                    }
                    let mut probe = (**other).clone();
                    let saved = self.mode;
                    self.mode = Mode::Invariant;
                    if self.expr(&mut probe).is_ok() && probe.ty().is_scalar() {
                        let t = promote(probe.ty());
                        self.labels.insert(name.clone(), t);
                    }
                    self.mode = saved;
                }
            }
            _ => {}
        }
    }

    fn function(&mut self, f: &mut FunctionDef, diags: &mut Vec<Diagnostic>) {
        // Globals and functions count as taken so a local that shadows one
        // gets a distinct name.
        self.used = self.globals.keys().chain(self.functions.keys()).cloned().collect();
        self.scopes = vec![HashMap::new()];
        self.result = f.result.clone();
        let mut seen = HashSet::new();
        for p in &mut f.params {
            if p.name.is_empty() {
                continue;
            }
            if !seen.insert(p.name.clone()) {
                diags.push(err("redefinition", p.loc, format!("duplicate parameter `{}`", p.name)));
            }
            self.declare_local(&mut p.name, p.ty.clone());
        }
        for spec in &mut f.specs {
            self.labels.clear();
            self.mode = Mode::Requires;
            for c in &spec.requires {
                self.label_hints(&c.expr);
            }
            for c in &mut spec.requires {
                if let Err(d) = self.cond(&mut c.expr) {
                    diags.push(d);
                }
            }
            self.mode = Mode::Ensures;
            for c in &mut spec.ensures {
                if let Err(d) = self.cond(&mut c.expr) {
                    diags.push(d);
                }
            }
            spec.labels = std::mem::take(&mut self.labels);
            self.mode = Mode::Code;
        }
        if let Some(body) = &mut f.body {
            self.stmts(body, diags);
        }
        self.scopes.clear();
    }
}

/// Type-check a parsed unit in place. Diagnostics are returned; the AST is
/// fully annotated only when none of them is an error.
fn report(diags: &mut Vec<Diagnostic>, r: TResult) {
    if let Err(d) = r {
        diags.push(d);
    }
}

pub fn typecheck_unit(ast: &mut Ast) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut ck = Checker::new(ast);
    for s in &ast.structs {
        let mut names = HashSet::new();
        for (n, _) in &s.fields {
            if !names.insert(n) {
                diags.push(err("duplicate-field", s.loc, format!("duplicate field `{n}`")));
            }
        }
    }
    for g in &mut ast.globals {
        if let CType::Struct(n) = &g.ty {
            if !ck.structs.contains_key(n) {
                diags.push(err("incomplete-type", g.loc, format!("`struct {n}` has no definition")));
            }
        }
        if let Some(init) = &mut g.init {
            ck.scopes = vec![HashMap::new()];
            let r = ck.expr(init).and_then(|_| ck.coerce(init, &g.ty));
            if let Err(d) = r {
                diags.push(d);
            }
        }
    }
    for f in &mut ast.functions {
        ck.function(f, &mut diags);
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parser::parse_unit, token::tokenize};

    fn check(src: &str) -> (Ast, Vec<Diagnostic>) {
        let mut ast = parse_unit(&tokenize(src).unwrap()).unwrap();
        let d = typecheck_unit(&mut ast);
        (ast, d)
    }

    #[test]
    fn widening_assignment() {
        let (ast, d) = check(
            "unsigned int get_register(unsigned long a) { return 0; }
             void f(void) { unsigned long r = get_register(1); }",
        );
        assert!(d.is_empty(), "{d:?}");
        let body = ast.function("f").unwrap().body.as_ref().unwrap();
        let StmtKind::Decl(decl) = &body[0].kind else { panic!() };
        let init = decl.init.as_ref().unwrap();
        assert_eq!(init.ty(), &CType::U64);
        assert!(matches!(init.kind, ExprKind::ImplicitCast(CType::U64, _)));
    }

    #[test]
    fn struct_to_word_is_an_error() {
        let (_, d) = check("struct s { int a; }; struct s v; unsigned int w; void f(void) { w = v; }");
        assert_eq!(d[0].code, "type-mismatch");
    }

    #[test]
    fn function_value_assignment() {
        let (_, d) = check("void foo(void) {} void (*p_fun)(void); void set(void) { p_fun = foo; }");
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn undeclared_identifier() {
        let (_, d) = check("void f(void) { x = 1; }");
        assert_eq!(d[0].code, "undeclared");
    }

    #[test]
    fn literal_takes_context_type() {
        let (ast, d) = check("int f(int x) { return x < 0; }");
        assert!(d.is_empty());
        let body = ast.function("f").unwrap().body.as_ref().unwrap();
        let StmtKind::Return(Some(e)) = &body[0].kind else { panic!() };
        let ExprKind::Binary(_, _, b) = &e.peel().kind else { panic!() };
        assert_eq!(b.ty(), &CType::S32);
    }

    #[test]
    fn shadowed_locals_are_renamed() {
        let (ast, d) = check("void f(void) { unsigned int v = 1; { unsigned int v = 2; v = 3; } v = 4; }");
        assert!(d.is_empty());
        let locals = ast.function("f").unwrap().locals();
        assert_eq!(locals[0].0, "v");
        assert_eq!(locals[1].0, "v#2");
    }

    #[test]
    fn labels_take_type_from_equation() {
        let src = "unsigned long c; int r;
                   /*@ requires c == a; ensures r == a; @*/ void f(void) {}";
        let toks = tokenize(src).unwrap();
        let mut ast = parse_unit(&toks).unwrap();
        assert!(crate::frontend::annot::parse_annotations(&mut ast, &toks, src).is_empty());
        assert!(typecheck_unit(&mut ast).is_empty());
        assert_eq!(ast.function("f").unwrap().specs[0].labels["a"], CType::U64);
    }
}
