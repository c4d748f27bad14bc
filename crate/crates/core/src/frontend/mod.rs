//! Tokenizer, parser, annotation reader, type checker and subset checker
//! for one preprocessed C translation unit.

pub mod annot;
pub mod ast;
pub mod diag;
pub mod parser;
pub mod pretty;
pub mod subset;
pub mod token;
pub mod typeck;

pub use ast::{Ast, CType, Expr, ExprKind, FunctionDef, LoopSpec, SpecBlock, Stmt, StmtKind};
pub use diag::{has_errors, Diagnostic, Loc, Severity};

/// Result of running the whole frontend. `ast` is present when parsing
/// succeeded, even if later stages reported errors.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub ast: Option<Ast>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Analysis {
    pub fn is_ok(&self) -> bool {
        self.ast.is_some() && !has_errors(&self.diagnostics)
    }
}

/// Tokenize, parse, attach annotations (inline and from `spec_sources`),
/// type-check and subset-check `src`.
pub fn analyze(src: &str, spec_sources: &[&str]) -> Analysis {
    let tokens = match token::tokenize(src) {
        Ok(t) => t,
        Err(d) => return Analysis { ast: None, diagnostics: vec![d] },
    };
    let mut ast = match parser::parse_unit(&tokens) {
        Ok(a) => a,
        Err(diagnostics) => return Analysis { ast: None, diagnostics },
    };
    let mut diagnostics = annot::parse_annotations(&mut ast, &tokens, src);
    for spec in spec_sources {
        diagnostics.extend(annot::parse_spec_file(&mut ast, spec));
    }
    if has_errors(&diagnostics) {
        return Analysis { ast: Some(ast), diagnostics };
    }
    diagnostics.extend(typeck::typecheck_unit(&mut ast));
    if !has_errors(&diagnostics) {
        diagnostics.extend(subset::check_subset(&ast));
    }
    Analysis { ast: Some(ast), diagnostics }
}

/// [`analyze`], failing with the diagnostics if any of them is an error.
pub fn load(src: &str, spec_sources: &[&str]) -> Result<Ast, Vec<Diagnostic>> {
    let a = analyze(src, spec_sources);
    match a.ast {
        Some(ast) if !has_errors(&a.diagnostics) => Ok(ast),
        _ => Err(a.diagnostics),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn corpus_units_are_accepted() {
        for src in [corpus::OCTRNG_C, corpus::SCHED_C] {
            let a = analyze(src, &[corpus::OCTRNG_SPEC]);
            assert!(a.is_ok(), "{:?}", a.diagnostics);
            assert!(a.diagnostics.is_empty());
        }
        let ast = load(corpus::SCHED_C, &[]).unwrap();
        assert!(ast.function("run_tasks").unwrap().dont_translate);
        let names: Vec<_> = ast.function("main").unwrap().specs.iter().map(|s| s.name.clone()).collect();
        assert_eq!(names, [Some("main_function".to_string())]);
    }

    #[test]
    fn switch_fixture_is_rejected() {
        let diags = load(corpus::BAD_SWITCH_C, &[]).unwrap_err();
        assert_eq!(diags.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(), ["switch", "break"]);
    }

    #[test]
    fn diagnostics_point_into_the_input() {
        let src = corpus::PFUN_C;
        let lines: Vec<&str> = src.lines().collect();
        for d in load(src, &[]).unwrap_err() {
            let line = lines[d.loc.line as usize - 1];
            assert!((d.loc.col as usize) <= line.chars().count());
        }
    }
}
