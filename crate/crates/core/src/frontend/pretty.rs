//! Fully parenthesized C printer. Re-parsing the output yields the same
//! syntax tree (typedefs are already resolved, so none are printed).

use std::fmt::Write;

use super::ast::*;

pub fn print_unit(ast: &Ast) -> String {
    let mut out = String::new();
    for item in &ast.items {
        match *item {
            Item::Struct(i) => {
                let s = &ast.structs[i];
                let kw = if s.is_union { "union" } else { "struct" };
                let _ = writeln!(out, "{kw} {} {{", s.name);
                for (n, t) in &s.fields {
                    let _ = writeln!(out, "    {};", t.declare(n));
                }
                out.push_str("};\n");
            }
            Item::Global(i) => {
                let g = &ast.globals[i];
                if g.is_static {
                    out.push_str("static ");
                }
                if g.is_const {
                    out.push_str("const ");
                }
                out.push_str(&g.ty.declare(&g.name));
                if let Some(e) = &g.init {
                    out.push_str(" = ");
                    out.push_str(&print_expr(e));
                }
                out.push_str(";\n");
            }
            Item::Function(i) => print_function(&mut out, &ast.functions[i]),
        }
    }
    out
}

fn print_function(out: &mut String, f: &FunctionDef) {
    if f.dont_translate {
        out.push_str("/** DONT_TRANSLATE */\n");
    }
    for s in &f.specs {
        out.push_str("/*@");
        if let Some(n) = &s.name {
            let _ = write!(out, " spec {n};");
        }
        if s.total {
            out.push_str(" total;");
        }
        for c in &s.requires {
            let _ = write!(out, " requires {};", c.text);
        }
        for c in &s.ensures {
            let _ = write!(out, " ensures {};", c.text);
        }
        out.push_str(" @*/\n");
    }
    if f.is_static {
        out.push_str("static ");
    }
    let params = if f.params.is_empty() {
        "void".to_string()
    } else {
        f.params.iter().map(|p| p.ty.declare(&p.name)).collect::<Vec<_>>().join(", ")
    };
    let head = f.result.declare(&format!("{}({params})", f.name));
    out.push_str(&head);
    match &f.body {
        None => out.push_str(";\n"),
        Some(body) => {
            out.push_str("\n{\n");
            for s in body {
                print_stmt(out, s, 1);
            }
            out.push_str("}\n");
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_loop_spec(out: &mut String, spec: &Option<LoopSpec>, depth: usize) {
    if let Some(s) = spec {
        indent(out, depth);
        out.push_str("/*@");
        for c in &s.invariant {
            let _ = write!(out, " invariant {};", c.text);
        }
        if let Some(m) = &s.measure {
            let _ = write!(out, " measure {};", m.text);
        }
        out.push_str(" @*/\n");
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    match &s.kind {
        StmtKind::Block(ss) => {
            indent(out, depth);
            out.push_str("{\n");
            for s in ss {
                print_stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::If(c, a, b) => {
            indent(out, depth);
            let _ = writeln!(out, "if ({})", print_expr(c));
            print_stmt(out, a, depth + 1);
            if let Some(b) = b {
                indent(out, depth);
                out.push_str("else\n");
                print_stmt(out, b, depth + 1);
            }
        }
        StmtKind::While { cond, body, spec, .. } => {
            print_loop_spec(out, spec, depth);
            indent(out, depth);
            let _ = writeln!(out, "while ({})", print_expr(cond));
            print_stmt(out, body, depth + 1);
        }
        StmtKind::DoWhile { body, cond, spec, .. } => {
            print_loop_spec(out, spec, depth);
            indent(out, depth);
            out.push_str("do\n");
            print_stmt(out, body, depth + 1);
            indent(out, depth);
            let _ = writeln!(out, "while ({});", print_expr(cond));
        }
        StmtKind::For { init, cond, step, body, spec, .. } => {
            print_loop_spec(out, spec, depth);
            indent(out, depth);
            out.push_str("for (");
            match init {
                Some(i) => out.push_str(simple_stmt(i).trim_end()),
                None => out.push(';'),
            }
            out.push(' ');
            if let Some(c) = cond {
                out.push_str(&print_expr(c));
            }
            out.push_str("; ");
            if let Some(st) = step {
                out.push_str(&print_expr(st));
            }
            out.push_str(")\n");
            print_stmt(out, body, depth + 1);
        }
        StmtKind::Label(l, b) => {
            indent(out, depth);
            let _ = writeln!(out, "{l}:");
            print_stmt(out, b, depth + 1);
        }
        StmtKind::Switch(e, b) => {
            indent(out, depth);
            let _ = writeln!(out, "switch ({})", print_expr(e));
            print_stmt(out, b, depth + 1);
        }
        StmtKind::Case(e, b) => {
            indent(out, depth);
            match e {
                Some(e) => {
                    let _ = writeln!(out, "case {}:", print_expr(e));
                }
                None => out.push_str("default:\n"),
            }
            print_stmt(out, b, depth + 1);
        }
        _ => {
            indent(out, depth);
            out.push_str(&simple_stmt(s));
            out.push('\n');
        }
    }
}

/// Single-line statements, terminated by `;`.
fn simple_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Empty => ";".into(),
        StmtKind::Expr(e) => format!("{};", print_expr(e)),
        StmtKind::Decl(d) => match &d.init {
            Some(e) => format!("{} = {};", d.ty.declare(&d.name), print_expr(e)),
            None => format!("{};", d.ty.declare(&d.name)),
        },
        StmtKind::Return(Some(e)) => format!("return {};", print_expr(e)),
        StmtKind::Return(None) => "return;".into(),
        StmtKind::Break => "break;".into(),
        StmtKind::Continue => "continue;".into(),
        StmtKind::Goto(l) => format!("goto {l};"),
        _ => unreachable!("compound statement printed as simple"),
    }
}

/// Atoms print bare; every compound expression is wrapped in parentheses.
pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::IntLit { value, suffix, radix } => {
            let mut s = match radix {
                16 => format!("0x{value:x}"),
                8 => format!("0{value:o}"),
                _ => value.to_string(),
            };
            if suffix.unsigned {
                s.push('u');
            }
            for _ in 0..suffix.longs {
                s.push('l');
            }
            s
        }
        ExprKind::FloatLit(t) => t.clone(),
        ExprKind::StrLit(t) => format!("{t:?}"),
        ExprKind::BoolLit(b) => b.to_string(),
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Unary(op, a) => format!("({}{})", op.symbol(), print_expr(a)),
        ExprKind::Binary(op, a, b) => {
            format!("({} {} {})", print_expr(a), op.symbol(), print_expr(b))
        }
        ExprKind::Assign(op, a, b) => {
            let sym = op.map(|o| o.symbol()).unwrap_or("");
            format!("({} {sym}= {})", print_expr(a), print_expr(b))
        }
        ExprKind::IncDec { inc, prefix, target } => {
            let op = if *inc { "++" } else { "--" };
            if *prefix {
                format!("({op}{})", print_expr(target))
            } else {
                format!("({}{op})", print_expr(target))
            }
        }
        ExprKind::Cond(c, a, b) => {
            format!("({} ? {} : {})", print_expr(c), print_expr(a), print_expr(b))
        }
        ExprKind::Call(f, args) => {
            let args = args.iter().map(print_expr).collect::<Vec<_>>().join(", ");
            format!("({}({args}))", print_expr(f))
        }
        ExprKind::Index(a, i) => format!("({}[{}])", print_expr(a), print_expr(i)),
        ExprKind::Member(a, f) => format!("({}.{f})", print_expr(a)),
        ExprKind::Arrow(a, f) => format!("({}->{f})", print_expr(a)),
        ExprKind::Cast(t, a) => format!("(({}){})", t.declare(""), print_expr(a)),
        ExprKind::ImplicitCast(_, a) => print_expr(a),
        ExprKind::SizeofType(t) => format!("(sizeof({}))", t.declare("")),
        ExprKind::SizeofExpr(a) => format!("(sizeof({}))", print_expr(a)),
        ExprKind::Old(a) => format!("\\old({})", print_expr(a)),
        ExprKind::Result => "\\result".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{annot::parse_annotations, parser::parse_unit, token::tokenize};

    fn load(src: &str) -> Ast {
        let toks = tokenize(src).unwrap();
        let mut ast = parse_unit(&toks).unwrap();
        let d = parse_annotations(&mut ast, &toks, src);
        assert!(d.is_empty(), "{d:?}");
        ast
    }

    #[test]
    fn corpus_round_trips() {
        for src in [crate::corpus::PFUN_C, crate::corpus::OCTRNG_C, crate::corpus::SCHED_C] {
            let ast = load(src);
            let printed = print_unit(&ast);
            assert_eq!(load(&printed), ast, "{printed}");
        }
    }

    #[test]
    fn expressions_are_parenthesized() {
        let ast = load("int f(int a, int b) { return a - b - -1 * a; }");
        let printed = print_unit(&ast);
        assert!(printed.contains("return ((a - b) - ((-1) * a));"), "{printed}");
    }
}
