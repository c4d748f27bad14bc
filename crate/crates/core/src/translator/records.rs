//! Split of program variables into a globals record (flattened to scalar
//! leaves) and one locals record per function, plus the symbol table
//! giving every function an abstract code address.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::frontend::{Ast, CType, Diagnostic, FunctionDef};
use crate::logic::{HeapType, Sort};

/// One scalar component of the global state, e.g. `tasks[3].start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Field {
    pub name: String,
    #[serde(serialize_with = "ser_ctype")]
    pub ty: CType,
    /// Name of the C global this leaf belongs to.
    pub root: String,
}

fn ser_ctype<S: serde::Serializer>(t: &CType, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GlobalsRecord {
    pub fields: Vec<Field>,
    /// One heap per pointed-to scalar type.
    #[serde(skip)]
    pub heaps: Vec<HeapType>,
}

impl GlobalsRecord {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// Every state component a havoc of "all globals" must cover.
    pub fn components(&self) -> Vec<(String, Sort)> {
        let mut out: Vec<(String, Sort)> = self.fields.iter().map(|f| (f.name.clone(), sort_of(&f.ty))).collect();
        out.extend(self.heaps.iter().map(|h| (h.var_name(), Sort::Heap(*h))));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalsRecord {
    pub function: String,
    /// Qualified names (`function::name`) of parameters, then locals.
    pub fields: Vec<(String, String)>,
}

/// Function name to abstract code address.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    by_name: BTreeMap<String, u64>,
    by_addr: BTreeMap<u64, String>,
}

pub const CODE_BASE: u64 = 0x10_0000;

impl SymbolTable {
    pub fn build(ast: &Ast) -> SymbolTable {
        let mut t = SymbolTable::default();
        for (i, f) in ast.functions.iter().enumerate() {
            let addr = CODE_BASE + 16 * i as u64;
            t.by_name.insert(f.name.clone(), addr);
            t.by_addr.insert(addr, f.name.clone());
        }
        t
    }

    pub fn addr(&self, name: &str) -> Option<u64> {
        self.by_name.get(name).copied()
    }

    pub fn function_at(&self, addr: u64) -> Option<&str> {
        self.by_addr.get(&addr).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.by_name.iter().map(|(n, a)| (n.as_str(), *a))
    }
}

pub fn sort_of(ty: &CType) -> Sort {
    match ty {
        CType::Word { width, .. } => Sort::Bv(*width),
        CType::Pointer(_) => Sort::Bv(64),
        t => panic!("no sort for non-scalar type {t}"),
    }
}

pub fn heap_type(ty: &CType) -> Option<HeapType> {
    match ty {
        CType::Word { width, signed } => Some(HeapType::Word { width: *width, signed: *signed }),
        CType::Pointer(_) => Some(HeapType::Ptr),
        _ => None,
    }
}

pub fn qualify(function: &str, name: &str) -> String {
    format!("{function}::{name}")
}

/// Parameter names as used in the state; unnamed parameters get a
/// positional name.
pub fn param_names(f: &FunctionDef) -> Vec<String> {
    f.params
        .iter()
        .enumerate()
        .map(
            |(i, p)| {
                if p.name.is_empty() {
                    qualify(&f.name, &format!("__arg{i}"))
                } else {
                    qualify(&f.name, &p.name)
                }
            },
        )
        .collect()
}

fn leaves(ast: &Ast, path: &str, root: &str, ty: &CType, out: &mut Vec<Field>) -> Result<(), String> {
    match ty {
        CType::Word { .. } | CType::Pointer(_) => {
            out.push(Field { name: path.to_string(), ty: ty.clone(), root: root.to_string() });
            Ok(())
        }
        CType::Array(t, n) => {
            for k in 0..*n {
                leaves(ast, &format!("{path}[{k}]"), root, t, out)?;
            }
            Ok(())
        }
        CType::Struct(s) => {
            let decl = ast.struct_decl(s).ok_or_else(|| format!("`struct {s}` has no definition"))?;
            for (f, t) in &decl.fields {
                leaves(ast, &format!("{path}.{f}"), root, t, out)?;
            }
            Ok(())
        }
        t => Err(format!("global `{root}` of type `{t}` cannot be represented")),
    }
}

/// Pointed-to scalar types of a type's pointers, recursively through
/// structures and arrays.
fn pointee_heaps(ast: &Ast, ty: &CType, out: &mut Vec<HeapType>, depth: usize) {
    if depth > 8 {
        return;
    }
    match ty {
        CType::Pointer(t) => match &**t {
            CType::Function { .. } | CType::Void => {}
            t => scalar_heaps(ast, t, out, depth + 1),
        },
        CType::Array(t, _) => pointee_heaps(ast, t, out, depth + 1),
        CType::Struct(s) => {
            if let Some(d) = ast.struct_decl(s) {
                for (_, t) in &d.fields {
                    pointee_heaps(ast, t, out, depth + 1);
                }
            }
        }
        _ => {}
    }
}

fn scalar_heaps(ast: &Ast, ty: &CType, out: &mut Vec<HeapType>, depth: usize) {
    if let Some(h) = heap_type(ty) {
        if !out.contains(&h) {
            out.push(h);
        }
    }
    match ty {
        CType::Array(t, _) => scalar_heaps(ast, t, out, depth),
        CType::Struct(s) => {
            if let Some(d) = ast.struct_decl(s) {
                for (_, t) in &d.fields {
                    scalar_heaps(ast, t, out, depth);
                }
            }
        }
        _ => {}
    }
    pointee_heaps(ast, ty, out, depth);
}

/// Build the globals record (non-constant globals only; constants are
/// folded into the code) and the locals record of every function.
pub fn build_records(ast: &Ast) -> Result<(GlobalsRecord, BTreeMap<String, LocalsRecord>), Vec<Diagnostic>> {
    let mut rec = GlobalsRecord::default();
    let mut diags = Vec::new();
    for g in &ast.globals {
        if g.is_const {
            continue;
        }
        if let Err(msg) = leaves(ast, &g.name, &g.name, &g.ty, &mut rec.fields) {
            diags.push(Diagnostic::error("unsupported-type", g.loc, msg));
        }
        pointee_heaps(ast, &g.ty, &mut rec.heaps, 0);
    }
    let mut locals = BTreeMap::new();
    for f in &ast.functions {
        for p in &f.params {
            pointee_heaps(ast, &p.ty, &mut rec.heaps, 0);
        }
        let mut fields: Vec<(String, String)> =
            param_names(f).into_iter().zip(&f.params).map(|(n, p)| (n, p.ty.to_string())).collect();
        for (n, t) in f.locals() {
            pointee_heaps(ast, &t, &mut rec.heaps, 0);
            fields.push((qualify(&f.name, &n), t.to_string()));
        }
        locals.insert(f.name.clone(), LocalsRecord { function: f.name.clone(), fields });
    }
    rec.heaps.sort();
    if diags.is_empty() {
        Ok((rec, locals))
    } else {
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::frontend::load;

    #[test]
    fn corpus_globals_are_flattened() {
        let ast = load(corpus::OCTRNG_C, &[]).unwrap();
        let (g, _) = build_records(&ast).unwrap();
        let names: Vec<&str> = g.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names[0], "rng_regs.control_addr");
        assert!(names.contains(&"timer"));
        assert!(names.contains(&"rand_value"));
        assert!(names.contains(&"tasks[7].timeout_fun"));
        assert!(!names.contains(&"MAX_QUEUE"));
        assert_eq!(names.len(), 3 + 8 * 3 + 2);
        let mut uniq = names.clone();
        uniq.dedup();
        assert_eq!(uniq.len(), names.len());
    }

    #[test]
    fn no_globals() {
        let ast = load("void f(void) {}", &[]).unwrap();
        let (g, l) = build_records(&ast).unwrap();
        assert!(g.fields.is_empty());
        assert!(l["f"].fields.is_empty());
    }

    #[test]
    fn same_local_name_in_two_functions() {
        let ast = load(corpus::OCTRNG_C, &[]).unwrap();
        let (_, l) = build_records(&ast).unwrap();
        let a = &l["get_register"].fields;
        let b = &l["octrng_rnd"].fields;
        assert!(a.iter().any(|(n, _)| n == "get_register::value"));
        assert!(b.iter().any(|(n, _)| n == "octrng_rnd::value"));
    }

    #[test]
    fn symbol_table_is_injective() {
        let ast = load(corpus::SCHED_C, &[]).unwrap();
        let t = SymbolTable::build(&ast);
        for (n, a) in t.iter() {
            assert_eq!(t.function_at(a), Some(n));
            assert_ne!(a, 0);
        }
    }
}
