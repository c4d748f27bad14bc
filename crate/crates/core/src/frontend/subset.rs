//! Enforcement of the translatable C subset. Functions marked
//! `dont_translate` are exempt; every other function must avoid the
//! constructs listed below or the unit is rejected.

use std::collections::HashSet;

use super::ast::*;
use super::diag::{Diagnostic, Loc};

struct Ctx<'a> {
    ast: &'a Ast,
    locals: HashSet<String>,
    diags: Vec<Diagnostic>,
}

impl Ctx<'_> {
    fn report(&mut self, code: &str, loc: Loc, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, loc, msg));
    }

    fn check_type(&mut self, ty: &CType, loc: Loc) {
        if ty.contains_float() {
            self.report("float", loc, "floating-point types are not supported");
        }
        if ty.contains_union() || self.struct_has_union(ty, &mut HashSet::new()) {
            self.report("union", loc, "unions are not supported");
        }
    }

    fn struct_has_union(&self, ty: &CType, seen: &mut HashSet<String>) -> bool {
        match ty {
            CType::Union(_) => true,
            CType::Struct(n) => {
                if !seen.insert(n.clone()) {
                    return false;
                }
                self.ast
                    .struct_decl(n)
                    .is_some_and(|s| s.is_union || s.fields.iter().any(|(_, t)| self.struct_has_union(t, seen)))
            }
            CType::Array(t, _) => self.struct_has_union(t, seen),
            _ => false,
        }
    }

    fn is_local_lvalue(&self, e: &Expr) -> bool {
        match &e.peel().kind {
            ExprKind::Ident(n) => self.locals.contains(n),
            ExprKind::Member(b, _) | ExprKind::Index(b, _) => {
                !b.ty.as_ref().is_some_and(CType::is_pointer) && self.is_local_lvalue(b)
            }
            _ => false,
        }
    }

    /// Structural checks on every subexpression.
    fn expr_constructs(&mut self, e: &Expr) {
        // One float/union report per expression tree is enough.
        let (mut float_seen, mut union_seen) = (false, false);
        e.walk(&mut |x| {
            let is_float = matches!(x.kind, ExprKind::FloatLit(_)) || x.ty.as_ref().is_some_and(CType::contains_float);
            if is_float && !float_seen {
                float_seen = true;
                self.diags.push(Diagnostic::error("float", x.loc, "floating-point values are not supported"));
            }
            if x.ty.as_ref().is_some_and(CType::contains_union) && !union_seen {
                union_seen = true;
                self.diags.push(Diagnostic::error("union", x.loc, "unions are not supported"));
            }
            match &x.kind {
                ExprKind::StrLit(_) => {
                    self.diags.push(Diagnostic::error("string", x.loc, "string literals are not supported"))
                }
                ExprKind::Call(callee, _) => {
                    if !matches!(callee.ty, Some(CType::Function { .. })) {
                        self.diags.push(Diagnostic::error(
                            "indirect-call",
                            x.loc,
                            "call through a function pointer cannot be translated",
                        ));
                    }
                }
                ExprKind::Unary(UnaryOp::AddrOf, a) => {
                    let is_fn = matches!(&a.kind, ExprKind::Ident(n) if self.ast.function(n).is_some()
                        && !self.locals.contains(n));
                    if is_fn {
                    } else if self.is_local_lvalue(a) {
                        self.diags.push(Diagnostic::error(
                            "address-of-local",
                            x.loc,
                            "taking the address of a local variable is not supported",
                        ));
                    } else {
                        self.diags.push(Diagnostic::error(
                            "address-of",
                            x.loc,
                            "taking the address of a variable is not supported",
                        ));
                    }
                }
                _ => {}
            }
        });
    }

    /// `e` must not write state or call functions.
    fn pure(&mut self, e: &Expr) {
        self.expr_constructs(e);
        let mut bad = None;
        e.walk(&mut |x| {
            if bad.is_none() && matches!(x.kind, ExprKind::Assign(..) | ExprKind::IncDec { .. } | ExprKind::Call(..)) {
                bad = Some(x.loc);
            }
        });
        if let Some(loc) = bad {
            self.report("side-effect", loc, "assignments and calls are only supported as whole statements");
        }
    }

    /// A call whose arguments are pure, or a pure expression.
    fn call_or_pure(&mut self, e: &Expr) {
        match &e.peel().kind {
            ExprKind::Call(callee, args) => {
                self.expr_constructs(callee);
                if !matches!(callee.ty, Some(CType::Function { .. })) {
                    self.report("indirect-call", e.loc, "call through a function pointer cannot be translated");
                }
                for a in args {
                    self.pure(a);
                }
            }
            _ => self.pure(e),
        }
    }

    fn lvalue(&mut self, e: &Expr) {
        self.pure(e);
        if matches!(e.ty, Some(CType::Struct(_))) {
            self.report("struct-assign", e.loc, "whole-structure assignment is not supported");
        }
    }

    /// Statement-level expression: assignment, increment, call, or pure.
    fn effect(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Assign(_, lhs, rhs) => {
                self.lvalue(lhs);
                self.call_or_pure(rhs);
            }
            ExprKind::IncDec { target, .. } => self.lvalue(target),
            _ => self.call_or_pure(e),
        }
    }

    fn stmts(&mut self, ss: &[Stmt], tail: bool) {
        for (i, s) in ss.iter().enumerate() {
            self.stmt(s, tail && i + 1 == ss.len());
        }
    }

    fn stmt(&mut self, s: &Stmt, tail: bool) {
        match &s.kind {
            StmtKind::Empty => {}
            StmtKind::Expr(e) => self.effect(e),
            StmtKind::Decl(d) => {
                self.check_type(&d.ty, s.loc);
                self.locals.insert(d.name.clone());
                if let Some(init) = &d.init {
                    if matches!(d.ty, CType::Struct(_)) {
                        self.report("struct-assign", s.loc, "structure initializers are not supported");
                    }
                    self.call_or_pure(init);
                }
            }
            StmtKind::Block(ss) => self.stmts(ss, tail),
            StmtKind::If(c, a, b) => {
                self.pure(c);
                self.stmt(a, tail);
                if let Some(b) = b {
                    self.stmt(b, tail);
                }
            }
            StmtKind::While { cond, body, .. } | StmtKind::DoWhile { body, cond, .. } => {
                self.pure(cond);
                self.stmt(body, false);
            }
            StmtKind::For { init, cond, step, body, .. } => {
                if let Some(i) = init {
                    self.stmt(i, false);
                }
                if let Some(c) = cond {
                    self.pure(c);
                }
                if let Some(st) = step {
                    self.effect(st);
                }
                self.stmt(body, false);
            }
            StmtKind::Return(e) => {
                if !tail {
                    self.report(
                        "early-return",
                        s.loc,
                        "`return` is only supported as the last statement of a function",
                    );
                }
                if let Some(e) = e {
                    self.call_or_pure(e);
                }
            }
            StmtKind::Break => self.report("break", s.loc, "`break` is not supported"),
            StmtKind::Continue => self.report("continue", s.loc, "`continue` is not supported"),
            StmtKind::Goto(_) => self.report("goto", s.loc, "`goto` is not supported"),
            StmtKind::Label(_, b) => {
                self.report("goto", s.loc, "labels (goto targets) are not supported");
                self.stmt(b, tail);
            }
            StmtKind::Switch(e, b) => {
                self.report("switch", s.loc, "`switch` is not supported");
                self.pure(e);
                self.stmt(b, false);
            }
            StmtKind::Case(_, b) => self.stmt(b, false),
        }
    }
}

/// Diagnostics for every construct outside the translatable subset, in
/// source order. Functions flagged `dont_translate` are skipped.
pub fn check_subset(ast: &Ast) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for f in ast.definitions() {
        if f.dont_translate {
            continue;
        }
        let mut cx = Ctx { ast, locals: HashSet::new(), diags: Vec::new() };
        for p in &f.params {
            cx.check_type(&p.ty, p.loc);
            cx.locals.insert(p.name.clone());
        }
        cx.check_type(&f.result, f.loc);
        let body = f.body.as_deref().unwrap_or(&[]);
        cx.stmts(body, true);
        cx.diags.sort_by_key(|d| (d.loc.line, d.loc.col));
        // One report per construct kind and line keeps the output readable.
        cx.diags.dedup_by(|a, b| a.code == b.code && a.loc.line == b.loc.line);
        out.extend(cx.diags);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parser::parse_unit, token::tokenize, typeck::typecheck_unit};

    fn codes(src: &str) -> Vec<String> {
        let toks = tokenize(src).unwrap();
        let mut ast = parse_unit(&toks).unwrap();
        crate::frontend::annot::parse_annotations(&mut ast, &toks, src);
        let d = typecheck_unit(&mut ast);
        assert!(d.is_empty(), "{d:?}");
        check_subset(&ast).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn function_pointer_program() {
        let src = crate::corpus::PFUN_C;
        assert_eq!(codes(src), ["indirect-call"]);
        let annotated = src.replace("void call_function", "/** DONT_TRANSLATE */\nvoid call_function");
        assert!(codes(&annotated).is_empty());
    }

    #[test]
    fn rejected_constructs() {
        assert_eq!(codes("void f(int x) { l: x = 1; }"), ["goto"]);
        assert_eq!(codes("void f(int x) { switch (x) { default: x = 1; } }"), ["switch"]);
        assert_eq!(codes("union u { int a; unsigned int b; }; union u g; void f(void) { g.a = 1; }"), ["union"]);
        assert_eq!(codes("double d; void f(void) { d = 1.5; }"), ["float"]);
        assert_eq!(codes("void f(void) { unsigned int x; unsigned int *p; p = &x; }"), ["address-of-local"]);
        assert_eq!(
            codes("unsigned int g(void) { return 1; } void f(unsigned int x) { x = g() + 1; }"),
            ["side-effect"]
        );
        assert_eq!(codes("int f(int x) { if (x) return 1; return 0; }"), ["early-return"]);
    }

    #[test]
    fn tail_returns_in_branches_are_fine() {
        assert!(codes("int f(int x) { if (x) { return 1; } else { return 0; } }").is_empty());
    }
}
