//! Specification annotations: `/*@ ... @*/` comments attached to the
//! function or loop that immediately follows them.

use super::ast::*;
use super::diag::{Diagnostic, Loc};
use super::parser::parse_annotation_expr;
use super::token::{tokenize, Token, TokenKind};

enum ClauseKind {
    Requires(Clause),
    Ensures(Clause),
    Total,
    Invariant(Clause),
    Measure(Clause),
    DontTranslate,
    Spec(String),
    For(String),
}

struct RawClause {
    kind: ClauseKind,
    loc: Loc,
}

/// Position of byte `offset` of `src` as a 1-based line/column.
fn loc_at(src: &str, offset: usize) -> Loc {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() as u32 + 1;
    let col = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) as u32 + 1;
    Loc::new(line, col)
}

fn shift(loc: Loc, base: Loc) -> Loc {
    if loc.line == 1 {
        Loc::new(base.line, base.col + loc.col - 1)
    } else {
        Loc::new(base.line + loc.line - 1, loc.col)
    }
}

/// Body of an annotation comment without the `@` delimiters, plus its byte
/// offset in the source.
fn annotation_body(src: &str, tok: &Token) -> (String, usize) {
    // `/*` precedes the comment text.
    let start = tok.start + 2;
    let text = &src[start..tok.end - 2];
    let lead = if text.starts_with('@') { 1 } else { 0 };
    let mut body = &text[lead..];
    if body.ends_with('@') {
        body = &body[..body.len() - 1];
    }
    (body.to_string(), start + lead)
}

fn parse_clause_expr(text: &str, base: Loc) -> Result<Expr, Diagnostic> {
    let fix = |mut d: Diagnostic| {
        d.loc = shift(d.loc, base);
        d.code = "annotation".into();
        d
    };
    let toks = tokenize(text).map_err(fix)?;
    let mut e = parse_annotation_expr(&toks).map_err(fix)?;
    relocate(&mut e, base);
    Ok(e)
}

fn relocate(e: &mut Expr, base: Loc) {
    e.loc = shift(e.loc, base);
    match &mut e.kind {
        ExprKind::Unary(_, a)
        | ExprKind::Cast(_, a)
        | ExprKind::ImplicitCast(_, a)
        | ExprKind::SizeofExpr(a)
        | ExprKind::Old(a)
        | ExprKind::Member(a, _)
        | ExprKind::Arrow(a, _) => relocate(a, base),
        ExprKind::IncDec { target, .. } => relocate(target, base),
        ExprKind::Binary(_, a, b) | ExprKind::Assign(_, a, b) | ExprKind::Index(a, b) => {
            relocate(a, base);
            relocate(b, base);
        }
        ExprKind::Cond(c, a, b) => {
            relocate(c, base);
            relocate(a, base);
            relocate(b, base);
        }
        ExprKind::Call(f, args) => {
            relocate(f, base);
            args.iter_mut().for_each(|a| relocate(a, base));
        }
        _ => {}
    }
}

/// Split an annotation body into clauses. `offset` is the byte offset of
/// `body` within `src`.
fn parse_clauses(src: &str, body: &str, offset: usize) -> Result<Vec<RawClause>, Diagnostic> {
    let mut out = Vec::new();
    let mut pos = 0;
    for piece in body.split(';') {
        let piece_start = pos;
        pos += piece.len() + 1;
        let trimmed = piece.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let lead = piece.len() - trimmed.len();
        let clause_off = offset + piece_start + lead;
        let loc = loc_at(src, clause_off);
        let text = trimmed.trim_end();
        let (kw, rest) = match text.find(|c: char| c.is_whitespace()) {
            Some(i) => (&text[..i], &text[i..]),
            None => (text, ""),
        };
        let rest_lead = rest.len() - rest.trim_start().len();
        let rest_text = rest.trim();
        let expr_loc = loc_at(src, clause_off + kw.len() + rest_lead);
        let needs_expr = |name: &str| -> Result<Clause, Diagnostic> {
            if rest_text.is_empty() {
                return Err(Diagnostic::error("annotation", loc, format!("`{name}` clause needs an expression")));
            }
            Ok(Clause { text: rest_text.to_string(), expr: parse_clause_expr(rest_text, expr_loc)? })
        };
        let needs_name = |name: &str| -> Result<String, Diagnostic> {
            let ok = !rest_text.is_empty()
                && rest_text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !rest_text.starts_with(|c: char| c.is_ascii_digit());
            if ok {
                Ok(rest_text.to_string())
            } else {
                Err(Diagnostic::error("annotation", loc, format!("`{name}` expects an identifier")))
            }
        };
        let no_arg = |name: &str| -> Result<(), Diagnostic> {
            if rest_text.is_empty() {
                Ok(())
            } else {
                Err(Diagnostic::error("annotation", loc, format!("`{name}` takes no argument")))
            }
        };
        let kind = match kw {
            "requires" => ClauseKind::Requires(needs_expr(kw)?),
            "ensures" => ClauseKind::Ensures(needs_expr(kw)?),
            "invariant" => ClauseKind::Invariant(needs_expr(kw)?),
            "measure" => ClauseKind::Measure(needs_expr(kw)?),
            "total" => {
                no_arg(kw)?;
                ClauseKind::Total
            }
            "dont_translate" | "DONT_TRANSLATE" => {
                no_arg(kw)?;
                ClauseKind::DontTranslate
            }
            "spec" => ClauseKind::Spec(needs_name(kw)?),
            "for" => ClauseKind::For(needs_name(kw)?),
            other => return Err(Diagnostic::error("annotation", loc, format!("unknown annotation clause `{other}`"))),
        };
        out.push(RawClause { kind, loc });
    }
    Ok(out)
}

fn spec_block(clauses: Vec<RawClause>, loc: Loc) -> Result<(Option<SpecBlock>, bool), Diagnostic> {
    let mut spec = SpecBlock { loc, ..Default::default() };
    let mut has_contract = false;
    let mut dont_translate = false;
    for c in clauses {
        match c.kind {
            ClauseKind::Requires(cl) => {
                spec.requires.push(cl);
                has_contract = true;
            }
            ClauseKind::Ensures(cl) => {
                spec.ensures.push(cl);
                has_contract = true;
            }
            ClauseKind::Total => {
                spec.total = true;
                has_contract = true;
            }
            ClauseKind::Spec(n) => {
                if spec.name.replace(n).is_some() {
                    return Err(Diagnostic::error("annotation", c.loc, "duplicate `spec` clause"));
                }
                has_contract = true;
            }
            ClauseKind::For(n) => {
                if spec.target.replace(n).is_some() {
                    return Err(Diagnostic::error("annotation", c.loc, "duplicate `for` clause"));
                }
            }
            ClauseKind::DontTranslate => dont_translate = true,
            ClauseKind::Invariant(_) | ClauseKind::Measure(_) => {
                return Err(Diagnostic::error(
                    "misplaced-loop-annotation",
                    c.loc,
                    "`invariant` and `measure` may only annotate a loop",
                ))
            }
        }
    }
    Ok((has_contract.then_some(spec), dont_translate))
}

fn loop_spec(clauses: Vec<RawClause>, loc: Loc) -> Result<LoopSpec, Diagnostic> {
    let mut spec = LoopSpec { loc, ..Default::default() };
    for c in clauses {
        match c.kind {
            ClauseKind::Invariant(cl) => spec.invariant.push(cl),
            ClauseKind::Measure(cl) => {
                if spec.measure.replace(cl).is_some() {
                    return Err(Diagnostic::error("annotation", c.loc, "a loop has at most one measure"));
                }
            }
            _ => {
                return Err(Diagnostic::error(
                    "annotation",
                    c.loc,
                    "only `invariant` and `measure` may annotate a loop",
                ))
            }
        }
    }
    Ok(spec)
}

fn loop_slot(s: &mut Stmt) -> Option<(TokIdx, &mut Option<LoopSpec>)> {
    match &mut s.kind {
        StmtKind::While { spec, tok, .. } | StmtKind::DoWhile { spec, tok, .. } | StmtKind::For { spec, tok, .. } => {
            Some((*tok, spec))
        }
        _ => None,
    }
}

fn find_loop(stmts: &mut [Stmt], idx: usize) -> Option<&mut Option<LoopSpec>> {
    for s in stmts {
        if let Some(r) = find_loop_in(s, idx) {
            return Some(r);
        }
    }
    None
}

fn find_loop_in(s: &mut Stmt, idx: usize) -> Option<&mut Option<LoopSpec>> {
    let is_match = matches!(loop_slot(s), Some((t, _)) if t.0 == idx);
    if is_match {
        return loop_slot(s).map(|(_, spec)| spec);
    }
    match &mut s.kind {
        StmtKind::Block(ss) => find_loop(ss, idx),
        StmtKind::If(_, a, b) => {
            if let Some(r) = find_loop_in(a, idx) {
                return Some(r);
            }
            b.as_mut().and_then(|b| find_loop_in(b, idx))
        }
        StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } => find_loop_in(body, idx),
        StmtKind::For { body, .. } => find_loop_in(body, idx),
        StmtKind::Label(_, b) | StmtKind::Switch(_, b) | StmtKind::Case(_, b) => find_loop_in(b, idx),
        _ => None,
    }
}

/// Attach every annotation comment in `tokens` to the function or loop
/// that follows it. `src` is the text the tokens were produced from.
pub fn parse_annotations(ast: &mut Ast, tokens: &[Token], src: &str) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let TokenKind::Comment { text, annotation } = &tok.kind else { continue };
        let legacy_dont_translate = !annotation && text.trim_start_matches('*').trim() == "DONT_TRANSLATE";
        if !annotation && !legacy_dont_translate {
            continue;
        }
        let next = tokens[i + 1..].iter().position(|t| !t.kind.is_trivia()).map(|p| i + 1 + p);
        let Some(next) = next else {
            diags.push(Diagnostic::error(
                "annotation-placement",
                tok.loc,
                "annotation is not followed by a function or loop",
            ));
            continue;
        };
        let clauses = if legacy_dont_translate {
            vec![RawClause { kind: ClauseKind::DontTranslate, loc: tok.loc }]
        } else {
            let (body, off) = annotation_body(src, tok);
            match parse_clauses(src, &body, off) {
                Ok(c) => c,
                Err(d) => {
                    diags.push(d);
                    continue;
                }
            }
        };
        if let Some(f) = ast.functions.iter_mut().find(|f| f.tok.0 == next) {
            match spec_block(clauses, tok.loc) {
                Ok((spec, dont)) => {
                    f.dont_translate |= dont;
                    if let Some(mut spec) = spec {
                        if let Some(t) = &spec.target {
                            if *t != f.name {
                                diags.push(Diagnostic::error(
                                    "annotation",
                                    tok.loc,
                                    format!("`for {t}` annotation placed before `{}`", f.name),
                                ));
                                continue;
                            }
                        }
                        spec.target = None;
                        f.specs.push(spec);
                    }
                }
                Err(d) => diags.push(d),
            }
            continue;
        }
        let slot = ast.functions.iter_mut().filter_map(|f| f.body.as_mut()).find_map(|body| find_loop(body, next));
        match slot {
            Some(slot) => match loop_spec(clauses, tok.loc) {
                Ok(ls) => {
                    if slot.is_some() {
                        diags.push(Diagnostic::error("annotation", tok.loc, "loop already carries an annotation"));
                    } else {
                        *slot = Some(ls);
                    }
                }
                Err(d) => diags.push(d),
            },
            None => {
                let has_loop_clause =
                    clauses.iter().any(|c| matches!(c.kind, ClauseKind::Invariant(_) | ClauseKind::Measure(_)));
                diags.push(if has_loop_clause {
                    Diagnostic::error(
                        "misplaced-loop-annotation",
                        tok.loc,
                        "`invariant` and `measure` may only annotate a loop",
                    )
                } else {
                    Diagnostic::error(
                        "annotation-placement",
                        tok.loc,
                        "annotation must immediately precede a function or loop",
                    )
                });
            }
        }
    }
    diags
}

/// Parse a side specification file: a sequence of annotation blocks, each
/// naming its target function with `for NAME;`. Blocks are appended to the
/// target's specification list.
pub fn parse_spec_file(ast: &mut Ast, src: &str) -> Vec<Diagnostic> {
    let tokens = match tokenize(src) {
        Ok(t) => t,
        Err(d) => return vec![d],
    };
    let mut diags = Vec::new();
    for tok in &tokens {
        match &tok.kind {
            TokenKind::Comment { annotation: true, .. } => {
                let (body, off) = annotation_body(src, tok);
                let clauses = match parse_clauses(src, &body, off) {
                    Ok(c) => c,
                    Err(d) => {
                        diags.push(d);
                        continue;
                    }
                };
                match spec_block(clauses, tok.loc) {
                    Ok((Some(spec), dont)) => {
                        let Some(target) = spec.target.clone() else {
                            diags.push(Diagnostic::error(
                                "annotation",
                                tok.loc,
                                "specification file blocks need a `for NAME;` clause",
                            ));
                            continue;
                        };
                        match ast.function_mut(&target) {
                            Some(f) => {
                                f.dont_translate |= dont;
                                f.specs.push(spec);
                            }
                            None => diags.push(Diagnostic::error(
                                "undeclared",
                                tok.loc,
                                format!("specification for unknown function `{target}`"),
                            )),
                        }
                    }
                    Ok((None, _)) => diags.push(Diagnostic::error(
                        "annotation",
                        tok.loc,
                        "specification file block has no contract clauses",
                    )),
                    Err(d) => diags.push(d),
                }
            }
            TokenKind::Comment { .. } => {}
            _ => {
                diags.push(Diagnostic::error(
                    "annotation",
                    tok.loc,
                    "specification files may contain only annotation comments",
                ));
                break;
            }
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_unit;

    fn load(src: &str) -> (Ast, Vec<Diagnostic>) {
        let toks = tokenize(src).unwrap();
        let mut ast = parse_unit(&toks).unwrap();
        let d = parse_annotations(&mut ast, &toks, src);
        (ast, d)
    }

    #[test]
    fn function_contract() {
        let (ast, d) =
            load("unsigned long c;\n/*@ requires true;\n    ensures (c & 2) != 0; @*/\nvoid f(void) { c = 3; }");
        assert!(d.is_empty(), "{d:?}");
        let f = ast.function("f").unwrap();
        assert_eq!(f.specs.len(), 1);
        assert_eq!(f.specs[0].ensures[0].text, "(c & 2) != 0");
        assert!(f.specs[0].ensures[0].expr.loc.same_position(&Loc::new(3, 14)));
    }

    #[test]
    fn loop_annotation() {
        let (ast, d) = load(
            "unsigned int t;\nvoid f(void) {\n /*@ invariant t <= 10; measure 10 - t; @*/\n while (t < 10) t = t + 1;\n}",
        );
        assert!(d.is_empty(), "{d:?}");
        let body = ast.function("f").unwrap().body.as_ref().unwrap();
        let StmtKind::While { spec: Some(s), .. } = &body[0].kind else { panic!() };
        assert_eq!(s.invariant.len(), 1);
        assert_eq!(s.measure.as_ref().unwrap().text, "10 - t");
    }

    #[test]
    fn invariant_on_function_is_rejected() {
        let (_, d) = load("/*@ invariant 1; @*/ void f(void) {}");
        assert_eq!(d[0].code, "misplaced-loop-annotation");
    }

    #[test]
    fn legacy_dont_translate_marker() {
        let (ast, d) = load("/** DONT_TRANSLATE */\nvoid f(void) {}");
        assert!(d.is_empty());
        assert!(ast.function("f").unwrap().dont_translate);
        assert!(ast.function("f").unwrap().specs.is_empty());
    }

    #[test]
    fn malformed_clause() {
        let (_, d) = load("/*@ requires x +; @*/ void f(void) {}");
        assert_eq!(d[0].code, "annotation");
        let (_, d) = load("/*@ frobnicate; @*/ void f(void) {}");
        assert_eq!(d[0].code, "annotation");
    }

    #[test]
    fn spec_file_blocks() {
        let (mut ast, _) = load("unsigned int t; void f(void) {}");
        let d = parse_spec_file(&mut ast, "/*@ for f; spec nope; ensures false; @*/\n");
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(ast.function("f").unwrap().specs[0].name.as_deref(), Some("nope"));
        let d = parse_spec_file(&mut ast, "/*@ for g; ensures false; @*/");
        assert_eq!(d[0].code, "undeclared");
    }
}
