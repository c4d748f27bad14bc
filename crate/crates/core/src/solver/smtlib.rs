//! SMT-LIB 2 export of a VC's refutation query.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use super::prove::refutation;
use crate::logic::{BinOp, CmpOp, Node, Sort, Term, UnOp, Vc};

fn sort_text(s: Sort) -> String {
    match s {
        Sort::Bool => "Bool".into(),
        Sort::Bv(w) => format!("(_ BitVec {w})"),
        Sort::Heap(h) => format!("(Array (_ BitVec 64) (_ BitVec {}))", h.width()),
    }
}

fn simple_symbol(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
}

fn bin_name(op: BinOp) -> &'static str {
    match op.word_op() {
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
        _ => "bvashr",
    }
}

struct Printer {
    names: HashMap<String, String>,
    shared: HashSet<usize>,
    defs: HashMap<usize, String>,
    out: String,
}

impl Printer {
    fn name(&self, var: &str) -> String {
        self.names[var].clone()
    }

    /// Emit definitions for shared subterms of `t` in dependency order.
    fn define(&mut self, t: &Term) {
        if self.defs.contains_key(&t.ptr_id()) {
            return;
        }
        for k in t.children() {
            self.define(k);
        }
        if self.shared.contains(&t.ptr_id()) && !t.children().is_empty() {
            let body = self.expr(t);
            let name = format!("t{}", self.defs.len());
            let sort = t.sort();
            let _ = writeln!(self.out, "(define-fun {name} () {} {body})", sort_text(sort));
            self.defs.insert(t.ptr_id(), name);
        }
    }

    fn sub(&self, t: &Term) -> String {
        match self.defs.get(&t.ptr_id()) {
            Some(n) => n.clone(),
            None => self.expr(t),
        }
    }

    fn expr(&self, t: &Term) -> String {
        let list = |head: &str, ts: &[&Term]| {
            let mut s = format!("({head}");
            for x in ts {
                s.push(' ');
                s.push_str(&self.sub(x));
            }
            s.push(')');
            s
        };
        match t.node() {
            Node::Bool(b) => b.to_string(),
            Node::Const { width, value } => format!("(_ bv{value} {width})"),
            Node::FnAddr { addr, .. } => format!("(_ bv{addr} 64)"),
            Node::Var { name, .. } => self.name(name),
            Node::Old(x) => self.sub(x),
            Node::Not(a) => list("not", &[a]),
            Node::And(ts) | Node::Or(ts) => {
                let is_and = matches!(t.node(), Node::And(_));
                match ts.len() {
                    0 => (if is_and { "true" } else { "false" }).into(),
                    1 => self.sub(&ts[0]),
                    _ => list(if is_and { "and" } else { "or" }, &ts.iter().collect::<Vec<_>>()),
                }
            }
            Node::Implies(a, b) => list("=>", &[a, b]),
            Node::Ite(c, a, b) => list("ite", &[c, a, b]),
            Node::Eq(a, b) => list("=", &[a, b]),
            Node::Un(UnOp::Not, a) => list("bvnot", &[a]),
            Node::Un(UnOp::Neg, a) => list("bvneg", &[a]),
            Node::Bin(op, a, b) => list(bin_name(*op), &[a, b]),
            Node::Cmp(op, a, b) => list(
                match op {
                    CmpOp::Ult => "bvult",
                    CmpOp::Ule => "bvule",
                    CmpOp::Slt => "bvslt",
                    CmpOp::Sle => "bvsle",
                },
                &[a, b],
            ),
            Node::Ext { signed, by, arg } => {
                let head = format!("(_ {} {by})", if *signed { "sign_extend" } else { "zero_extend" });
                list(&head, &[arg])
            }
            Node::Extract { hi, lo, arg } => list(&format!("(_ extract {hi} {lo})"), &[arg]),
            Node::Read { heap, addr } => list("select", &[heap, addr]),
            Node::Store { heap, addr, value } => list("store", &[heap, addr, value]),
        }
    }
}

fn shared_nodes(t: &Term) -> HashSet<usize> {
    let mut count: HashMap<usize, usize> = HashMap::new();
    let mut seen = HashSet::new();
    let mut stack = vec![t];
    while let Some(x) = stack.pop() {
        if !seen.insert(x.ptr_id()) {
            continue;
        }
        for k in x.children() {
            *count.entry(k.ptr_id()).or_default() += 1;
            stack.push(k);
        }
    }
    count.into_iter().filter(|&(_, n)| n > 1).map(|(id, _)| id).collect()
}

/// SMT-LIB 2 script asserting the VC's hypothesis and the negation of its
/// goal. A solver answers `unsat` exactly when the VC is valid.
pub fn export_smtlib(vc: &Vc) -> String {
    let f = refutation(vc);
    let vars = f.free_vars();
    let mut names = HashMap::new();
    let mut used = HashSet::new();
    for name in vars.keys() {
        let base = if simple_symbol(name) { name.clone() } else { format!("|{}|", name.replace(['\\', '|'], "$")) };
        let mut cand = base.clone();
        let mut k = 1;
        while !used.insert(cand.clone()) || cand.starts_with('t') && cand[1..].parse::<u64>().is_ok() {
            cand = format!("|{}~{k}|", base.trim_matches('|'));
            k += 1;
        }
        names.insert(name.clone(), cand);
    }
    let has_heap = vars.values().any(|s| matches!(s, Sort::Heap(_)));
    let mut p = Printer { names, shared: shared_nodes(&f), defs: HashMap::new(), out: String::new() };
    let mut head = String::new();
    let _ = writeln!(head, "; {} {} {} {}", vc.function, vc.spec, vc.provenance, vc.index);
    if !vc.detail.is_empty() {
        let _ = writeln!(head, "; {}", vc.detail.replace('\n', " "));
    }
    let _ = writeln!(head, "(set-logic {})", if has_heap { "QF_ABV" } else { "QF_BV" });
    let sorted: BTreeMap<_, _> = vars.iter().collect();
    for (name, sort) in sorted {
        let _ = writeln!(head, "(declare-fun {} () {})", p.names[name.as_str()], sort_text(*sort));
    }
    p.define(&f);
    let body = p.sub(&f);
    format!("{head}{}(assert {body})\n(check-sat)\n(exit)\n", p.out)
}

/// `<function>_<provenance>_<index>.smt2`
pub fn smt2_file_name(vc: &Vc) -> String {
    format!("{}_{}_{}.smt2", vc.function, vc.provenance, vc.index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Loc;
    use crate::logic::Provenance;

    fn vc(hyp: Term, goal: Term) -> Vc {
        Vc {
            index: 0,
            function: "f".into(),
            spec: "s".into(),
            provenance: Provenance::WpGoal,
            detail: String::new(),
            hypothesis: hyp,
            goal,
            loc: Loc::new(1, 1),
            unprovable: None,
        }
    }

    #[test]
    fn script_shape() {
        let x = Term::bv_var("timer@2", 32);
        let s = export_smtlib(&vc(Term::tt(), Term::eq(x, Term::bv(32, 0))));
        assert!(s.contains("(set-logic QF_BV)"));
        assert!(s.contains("(declare-fun timer@2 () (_ BitVec 32))"));
        assert!(s.contains("(check-sat)"));
    }

    #[test]
    fn awkward_names_are_quoted() {
        let x = Term::bv_var("\\result@3", 8);
        let s = export_smtlib(&vc(Term::tt(), Term::eq(x, Term::bv(8, 0))));
        assert!(s.contains("|$result@3|"), "{s}");
    }
}
