//! Translation of a checked unit to the deep and monadic intermediate
//! forms: records, symbol table, lowering, monadic conversion, optional
//! word abstraction and modifies sets.

pub mod elaborate;
pub mod ir;
pub mod modifies;
pub mod monadic;
pub mod records;
pub mod words;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::frontend::{Ast, CType, Diagnostic, Loc};
use crate::logic::spec::HoareSpec;
use crate::logic::{Sort, Term};

pub use ir::{Deep, GuardKind, LoopAnn, Measure, Monadic, Update};
pub use modifies::ModSet;
pub use records::{qualify, sort_of, Field, GlobalsRecord, LocalsRecord, SymbolTable};

use elaborate::UnitCtx;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    pub abstract_words: bool,
}

/// One translated function.
#[derive(Clone, Debug)]
pub struct FunctionIr {
    pub name: String,
    /// Qualified parameter names with their types.
    pub params: Vec<(String, CType)>,
    pub result: CType,
    /// Variable receiving the return value, for non-void functions.
    pub ret_var: Option<String>,
    /// Qualified locals (declared ones and translator temporaries).
    pub locals: Vec<(String, CType)>,
    pub deep: Deep,
    pub monadic: Monadic,
    /// Excluded from verification; lowered on a best-effort basis so the
    /// interpreter can still run it.
    pub dont_translate: bool,
    pub loc: Loc,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub ast: Ast,
    pub globals: GlobalsRecord,
    pub locals: BTreeMap<String, LocalsRecord>,
    pub symtab: SymbolTable,
    /// Values of `const` globals, folded into the code.
    pub consts: BTreeMap<String, Term>,
    /// Initial values of global leaves with an initialiser.
    pub init: BTreeMap<String, Term>,
    /// Function definitions in source order.
    pub functions: Vec<FunctionIr>,
    /// Excluded functions whose body could not be lowered at all.
    pub skipped: Vec<String>,
    pub specs: Vec<HoareSpec>,
    pub modifies: BTreeMap<String, ModSet>,
    pub options: TranslateOptions,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionIr> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn spec(&self, name: &str) -> Option<&HoareSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn specs_of(&self, function: &str) -> impl Iterator<Item = &HoareSpec> {
        let function = function.to_string();
        self.specs.iter().filter(move |s| s.function == function)
    }

    pub fn modifies_of(&self, name: &str) -> ModSet {
        self.modifies.get(name).cloned().unwrap_or(ModSet::Top)
    }

    /// Whether `name` and everything it calls is loop-free translated code.
    pub fn loop_free(&self, name: &str) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![name.to_string()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            let Some(f) = self.function(&n) else { return false };
            if f.dont_translate || f.monadic.has_loop() {
                return false;
            }
            stack.extend(f.monadic.callees());
        }
        true
    }
}

fn find_recursion(ast: &Ast, graph: &BTreeMap<String, Vec<String>>) -> Vec<Diagnostic> {
    // Colour-based DFS; report each function on a cycle once.
    #[derive(Clone, Copy, PartialEq)]
    enum C {
        White,
        Grey,
        Black,
    }
    fn dfs(n: &str, g: &BTreeMap<String, Vec<String>>, col: &mut HashMap<String, C>, out: &mut Vec<String>) {
        col.insert(n.to_string(), C::Grey);
        for m in g.get(n).into_iter().flatten() {
            match col.get(m).copied().unwrap_or(C::White) {
                C::White => dfs(m, g, col, out),
                C::Grey => {
                    if !out.contains(m) {
                        out.push(m.clone());
                    }
                }
                C::Black => {}
            }
        }
        col.insert(n.to_string(), C::Black);
    }
    let mut col = HashMap::new();
    let mut out = Vec::new();
    for n in graph.keys() {
        if col.get(n).copied().unwrap_or(C::White) == C::White {
            dfs(n, graph, &mut col, &mut out);
        }
    }
    out.into_iter()
        .map(|n| {
            let loc = ast.function(&n).map(|f| f.loc).unwrap_or_default();
            Diagnostic::error("recursion", loc, format!("`{n}` is recursive; recursion is not supported"))
        })
        .collect()
}

/// Translate a checked unit.
pub fn translate(ast: &Ast, options: TranslateOptions) -> Result<Program, Vec<Diagnostic>> {
    let (globals, locals) = records::build_records(ast)?;
    let symtab = SymbolTable::build(ast);
    let mut cx = UnitCtx {
        ast,
        symtab: &symtab,
        consts: HashMap::new(),
        globals: globals.fields.iter().map(|f| f.root.clone()).collect(),
    };
    let mut diags = Vec::new();
    let mut consts = BTreeMap::new();
    let mut init = BTreeMap::new();
    for g in &ast.globals {
        let Some(e) = &g.init else { continue };
        if !g.ty.is_scalar() {
            diags.push(Diagnostic::error("unsupported-init", e.loc, "aggregate initialisers are not supported"));
            continue;
        }
        match elaborate::const_value(&cx, e, &g.ty) {
            Ok(v) if g.is_const => {
                cx.consts.insert(g.name.clone(), v.clone());
                consts.insert(g.name.clone(), v);
            }
            Ok(v) => {
                init.insert(g.name.clone(), v);
            }
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut lowered = Vec::new();
    let mut skipped = Vec::new();
    for f in ast.definitions() {
        match elaborate::lower_function(&cx, f, f.dont_translate) {
            Ok(l) => lowered.push((f, l)),
            Err(_) if f.dont_translate => skipped.push(f.name.clone()),
            Err(d) => diags.push(d),
        }
    }
    let graph: BTreeMap<String, Vec<String>> =
        lowered.iter().map(|(f, l)| (f.name.clone(), l.deep.callees())).collect();
    diags.extend(find_recursion(ast, &graph));

    let mut specs = Vec::new();
    for f in &ast.functions {
        match elaborate::lower_specs(&cx, f) {
            Ok(s) => specs.extend(s),
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let result_sorts: HashMap<String, Sort> =
        ast.functions.iter().filter(|f| f.result.is_scalar()).map(|f| (f.name.clone(), sort_of(&f.result))).collect();
    let mut functions = Vec::new();
    for (f, l) in lowered {
        let ret_var = f.result.is_scalar().then(|| qualify(&f.name, "__ret"));
        let mut raw = monadic::Converter::new(&result_sorts).convert(&l.deep);
        if let Some(r) = &ret_var {
            raw = Monadic::seq(vec![raw, Monadic::Return(Some(Term::var(r.clone(), sort_of(&f.result))))]);
        }
        if options.abstract_words {
            raw = words::abstract_words(&raw, &l.signed_ops);
        }
        let mut fl: Vec<(String, CType)> = f.locals().into_iter().map(|(n, t)| (qualify(&f.name, &n), t)).collect();
        fl.extend(l.temps.iter().cloned());
        if let Some(r) = &ret_var {
            fl.push((r.clone(), f.result.clone()));
        }
        functions.push(FunctionIr {
            name: f.name.clone(),
            params: elaborate::params(f),
            result: f.result.clone(),
            ret_var,
            locals: fl,
            monadic: monadic::peephole(&raw),
            deep: l.deep,
            dont_translate: f.dont_translate,
            loc: f.loc,
        });
    }

    let bodies: BTreeMap<String, &Monadic> =
        functions.iter().filter(|f| !f.dont_translate).map(|f| (f.name.clone(), &f.monadic)).collect();
    let mut modifies = modifies::modifies_sets(&bodies);
    for f in &functions {
        modifies.entry(f.name.clone()).or_insert(ModSet::Top);
    }

    Ok(Program {
        ast: ast.clone(),
        globals,
        locals,
        symtab,
        consts,
        init,
        functions,
        skipped,
        specs,
        modifies,
        options,
    })
}

/// Deterministic textual dump of the translation.
pub fn dump_ir(p: &Program) -> String {
    let mut s = String::new();
    s.push_str("(globals");
    for f in &p.globals.fields {
        let _ = write!(s, "\n  ({} {})", f.name, f.ty);
    }
    for h in &p.globals.heaps {
        let _ = write!(s, "\n  ({} heap)", h.var_name());
    }
    s.push_str(")\n(symbols");
    for (n, a) in p.symtab.iter() {
        let _ = write!(s, "\n  ({n} {a:#x})");
    }
    s.push_str(")\n");
    for f in &p.functions {
        let _ = write!(s, "(function {}", f.name);
        if f.dont_translate {
            s.push_str(" :dont-translate");
        }
        s.push_str("\n  (params");
        for (n, t) in &f.params {
            let _ = write!(s, " ({n} {t})");
        }
        let _ = write!(s, ")\n  (modifies {})", p.modifies_of(&f.name));
        let _ = write!(s, "\n  (deep {})\n  (monadic {}))\n", f.deep, f.monadic);
    }
    for n in &p.skipped {
        let _ = writeln!(s, "(function {n} :skipped)");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::frontend::load;

    fn program(src: &str) -> Program {
        translate(&load(src, &[]).unwrap(), TranslateOptions::default()).unwrap()
    }

    #[test]
    fn attach_matches_three_step_form() {
        let p = program(corpus::OCTRNG_C);
        assert_eq!(
            p.function("octrng_attach").unwrap().monadic.to_string(),
            "(bind (call get_register 0x1180040000000#64) ret' (seq (call set_register 0x1180040000000#64 \
             (bvor (zext 32 ret') 3#64)) (call add_task (sym octrng_rnd) 5#32)))"
        );
    }

    #[test]
    fn rnd_matches_three_step_form() {
        let p = program(corpus::OCTRNG_C);
        assert_eq!(
            p.function("octrng_rnd").unwrap().monadic.to_string(),
            "(bind (call get_register 0#64) ret' (seq (modify rand_value ret') (call add_task (sym octrng_rnd) 10#32)))"
        );
    }

    #[test]
    fn increment_is_basic_update() {
        let p = program("static int counter; void foo(void) { counter++; }");
        assert_eq!(p.function("foo").unwrap().deep.to_string(), "(basic counter (bvadd counter 1#32))");
    }

    #[test]
    fn compound_or_is_basic_update() {
        let p = program("static unsigned long c; void f(void) { c |= 2; }");
        assert_eq!(p.function("f").unwrap().deep.to_string(), "(basic c (bvor c 2#64))");
    }

    #[test]
    fn empty_body_is_skip() {
        let p = program("void f(void) {}");
        let f = p.function("f").unwrap();
        assert_eq!(f.deep, Deep::Skip);
        assert_eq!(f.monadic.to_string(), "(return)");
        assert_eq!(p.modifies_of("f"), ModSet::empty());
    }

    #[test]
    fn corpus_modifies_sets() {
        let p = program(corpus::SCHED_C);
        assert_eq!(p.modifies_of("idle").to_string(), "{timer}");
        assert!(p.modifies_of("main").is_top());
        assert!(p.modifies_of("run_tasks").is_top());
        let attach = p.modifies_of("octrng_attach");
        assert!(attach.contains("rng_regs.control_addr"));
        assert!(attach.contains("tasks[0].start"));
        assert!(!attach.contains("timer"));
    }

    #[test]
    fn pointer_deref_is_guarded() {
        let p = program("void f(unsigned int *p) { *p = 1; }");
        let m = p.function("f").unwrap().monadic.to_string();
        assert!(m.contains("(guard non-null"), "{m}");
        assert!(m.contains("(guard aligned"), "{m}");
    }

    #[test]
    fn recursion_is_rejected() {
        let ast = load("void f(void) { f(); }", &[]).unwrap();
        let d = translate(&ast, TranslateOptions::default()).unwrap_err();
        assert_eq!(d[0].code, "recursion");
    }

    #[test]
    fn dump_is_deterministic() {
        let a = dump_ir(&program(corpus::SCHED_C));
        let b = dump_ir(&program(corpus::SCHED_C));
        assert_eq!(a, b);
        assert!(a.contains("(function run_tasks :dont-translate"));
    }
}
