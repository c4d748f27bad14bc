//! Weakest preconditions over the monadic form.
//!
//! The postcondition is carried as a map of independent obligations
//! ("leaves"), each keyed by where it comes from, so that the final result
//! splits into one VC per postcondition clause, guard and loop rule. Every
//! rule transforms all leaves uniformly: `modify` substitutes, `guard` adds
//! a leaf and assumes the guard in the others, `condition` merges the two
//! branch maps.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::frontend::Loc;
use crate::translator::words::range_guard;
use crate::translator::{ModSet, Monadic, Program};

use super::fold::fold;
use super::spec::{HoareSpec, RESULT};
use super::term::{BinOp, CmpOp, Node, Sort, Term};
use super::vc::{Provenance, Vc};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum WpError {
    #[error("{loc}: loop in `{function}` has no invariant, required for total correctness")]
    MissingInvariant { function: String, loc: Loc },
    #[error("{loc}: loop in `{function}` has no measure, required for total correctness")]
    MissingMeasure { function: String, loc: Loc },
    #[error("spec `{0}` targets a function that was not translated")]
    NoFunction(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WpOptions {
    /// Demand termination for every spec, not only those marked `total`.
    pub total: bool,
    /// Havoc every global at contract calls instead of the callee's
    /// modifies set.
    pub skip_modifies: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LeafKey {
    pub line: u32,
    pub col: u32,
    pub provenance: Provenance,
    pub detail: String,
    /// Call sites through which the obligation was inlined.
    pub ctx: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Leaf {
    Formula(Term),
    Unprovable(String),
}

pub type Leaves = BTreeMap<LeafKey, Leaf>;

fn map_leaves(q: Leaves, mut f: impl FnMut(&Term) -> Term) -> Leaves {
    q.into_iter()
        .map(|(k, l)| {
            let l = match l {
                Leaf::Formula(t) => Leaf::Formula(f(&t)),
                u => u,
            };
            (k, l)
        })
        .collect()
}

fn add_leaf(q: &mut Leaves, k: LeafKey, l: Leaf) {
    match (q.remove(&k), l) {
        (None, l) => {
            q.insert(k, l);
        }
        (Some(Leaf::Formula(a)), Leaf::Formula(b)) => {
            q.insert(k, Leaf::Formula(fold(&Term::and2(a, b))));
        }
        (Some(u @ Leaf::Unprovable(_)), _) | (Some(_), u @ Leaf::Unprovable(_)) => {
            q.insert(k, u);
        }
    }
}

fn subst(map: &HashMap<String, Term>) -> impl FnMut(&Term) -> Term + '_ {
    move |t| fold(&t.substitute(map))
}

/// Replace `Old(t)` by `t` (used once the pre-state is the current state).
pub fn strip_old(t: &Term) -> Term {
    t.rewrite(&mut |n| match n.node() {
        Node::Old(x) => Some(x.clone()),
        _ => None,
    })
}

pub struct WpGen<'a> {
    prog: &'a Program,
    opts: WpOptions,
    total: bool,
    function: String,
    fresh: usize,
    ctx: Vec<(u32, u32)>,
}

impl<'a> WpGen<'a> {
    pub fn new(prog: &'a Program, opts: WpOptions, total: bool, function: &str) -> Self {
        WpGen { prog, opts, total: total || opts.total, function: function.to_string(), fresh: 0, ctx: Vec::new() }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}@{}", self.fresh)
    }

    fn key(&self, loc: Loc, provenance: Provenance, detail: impl Into<String>) -> LeafKey {
        LeafKey { line: loc.line, col: loc.col, provenance, detail: detail.into(), ctx: self.ctx.clone() }
    }

    /// Every global state component.
    fn all_globals(&self) -> Vec<(String, Sort)> {
        self.prog.globals.components()
    }

    fn sort_of_global(&self, name: &str) -> Option<Sort> {
        self.all_globals().into_iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Rename `vars` to fresh names in every leaf.
    fn havoc(&mut self, q: Leaves, vars: &[(String, Sort)]) -> (Leaves, HashMap<String, Term>) {
        let mut map = HashMap::new();
        for (n, s) in vars {
            let f = self.fresh(n);
            map.insert(n.clone(), Term::var(f, *s));
        }
        (map_leaves(q, subst(&map)), map)
    }

    /// State components a program may change, including through calls.
    fn changed_by(&self, m: &Monadic, seen: &mut BTreeSet<String>) -> Option<BTreeMap<String, Sort>> {
        let mut out = BTreeMap::new();
        let mut sorts: HashMap<String, Sort> = HashMap::new();
        m.walk(&mut |n| {
            if let Monadic::Modify(u) = n {
                for (x, t) in u {
                    sorts.insert(x.clone(), t.sort());
                }
            }
        });
        out.extend(sorts);
        let mut top = false;
        m.walk(&mut |n| top |= matches!(n, Monadic::CallPtr { .. }));
        for c in m.callees() {
            if !seen.insert(c.clone()) {
                continue;
            }
            match self.prog.function(&c) {
                Some(f) if !f.dont_translate && self.contract(&c).is_none() => {
                    match self.changed_by(&f.monadic, seen) {
                        Some(s) => out.extend(s),
                        None => top = true,
                    }
                }
                Some(_) if self.contract(&c).is_some() && !self.opts.skip_modifies => match self.prog.modifies_of(&c) {
                    ModSet::Top => top = true,
                    ModSet::Set(s) => {
                        for x in s {
                            if let Some(srt) = self.sort_of_global(&x) {
                                out.insert(x, srt);
                            }
                        }
                    }
                },
                _ => top = true,
            }
        }
        if top {
            None
        } else {
            Some(out)
        }
    }

    /// Contract used to summarise calls to `f`: the spec named after the
    /// function if there is one, the first spec otherwise.
    fn contract(&self, f: &str) -> Option<&'a HoareSpec> {
        let specs: Vec<&HoareSpec> = self.prog.specs_of(f).collect();
        specs.iter().find(|s| s.name == f).or(specs.first()).copied()
    }

    pub fn wp(&mut self, m: &Monadic, q: Leaves, rv: Option<&str>) -> Result<Leaves, WpError> {
        Ok(match m {
            Monadic::Return(None) => q,
            Monadic::Return(Some(e)) | Monadic::Gets(e) => match rv {
                Some(r) => {
                    let map = HashMap::from([(r.to_string(), e.clone())]);
                    map_leaves(q, subst(&map))
                }
                None => q,
            },
            Monadic::Modify(u) => {
                let map: HashMap<String, Term> = u.iter().cloned().collect();
                map_leaves(q, subst(&map))
            }
            Monadic::Seq(ms) => {
                let mut q = q;
                for (i, x) in ms.iter().enumerate().rev() {
                    let r = if i + 1 == ms.len() { rv } else { None };
                    q = self.wp(x, q, r)?;
                }
                q
            }
            Monadic::Bind(a, x, b) => {
                let q2 = self.wp(b, q, rv)?;
                let x2 = self.fresh(x);
                let sort = bound_sort(b, x).unwrap_or(Sort::Bv(64));
                let map = HashMap::from([(x.clone(), Term::var(x2.clone(), sort))]);
                let q2 = map_leaves(q2, subst(&map));
                self.wp(a, q2, Some(&x2))?
            }
            Monadic::Guard(k, g, loc) => {
                let mut q = map_leaves(q, |f| fold(&Term::implies(g.clone(), f.clone())));
                let key = self.key(*loc, Provenance::Guard, k.name());
                add_leaf(&mut q, key, Leaf::Formula(g.clone()));
                q
            }
            Monadic::Fail => {
                let mut q = q;
                let key = self.key(Loc::default(), Provenance::Guard, "fail");
                add_leaf(&mut q, key, Leaf::Formula(Term::ff()));
                q
            }
            Monadic::Condition(c, a, b) => {
                let qa = self.wp(a, q.clone(), rv)?;
                let qb = self.wp(b, q, rv)?;
                merge_branches(c, qa, qb)
            }
            Monadic::While { cond, body, ann, loc } => self.wp_loop(cond, body, ann.as_ref(), *loc, q)?,
            Monadic::Call { callee, args, loc } => self.wp_call(callee, args, *loc, q, rv)?,
            Monadic::CallPtr { loc, .. } => {
                let vars = self.all_globals();
                let (mut q, _) = self.havoc(q, &vars);
                let key = self.key(*loc, Provenance::Guard, "indirect call");
                add_leaf(&mut q, key, Leaf::Unprovable("call through a function pointer".into()));
                q
            }
        })
    }

    fn wp_call(
        &mut self,
        callee: &str,
        args: &[Term],
        loc: Loc,
        q: Leaves,
        rv: Option<&str>,
    ) -> Result<Leaves, WpError> {
        let prog = self.prog;
        let f = prog.function(callee);
        if let Some(spec) = self.contract(callee) {
            return Ok(self.summarise(spec, args, loc, q, rv));
        }
        match f {
            Some(f) if !f.dont_translate => {
                self.ctx.push((loc.line, loc.col));
                let inner = self.wp(&f.monadic, q, rv);
                self.ctx.pop();
                let mut inner = inner?;
                let map: HashMap<String, Term> =
                    f.params.iter().map(|(n, _)| n.clone()).zip(args.iter().cloned()).collect();
                inner = map_leaves(inner, subst(&map));
                Ok(inner)
            }
            _ => {
                // Untranslated code without a contract: anything may change.
                let vars = self.all_globals();
                let (mut q, _) = self.havoc(q, &vars);
                q = self.havoc_result(q, rv, callee);
                if self.total {
                    let key = self.key(loc, Provenance::Guard, format!("termination of {callee}"));
                    add_leaf(
                        &mut q,
                        key,
                        Leaf::Unprovable(format!("`{callee}` is not translated and has no total contract")),
                    );
                }
                Ok(q)
            }
        }
    }

    fn havoc_result(&mut self, q: Leaves, rv: Option<&str>, callee: &str) -> Leaves {
        let Some(r) = rv else { return q };
        let sort =
            self.prog.function(callee).filter(|f| f.result.is_scalar()).map(|f| crate::translator::sort_of(&f.result));
        let Some(sort) = sort else { return q };
        let fresh = self.fresh(r);
        let map = HashMap::from([(r.to_string(), Term::var(fresh, sort))]);
        map_leaves(q, subst(&map))
    }

    /// `pre' ∧ ∀ changed. post' ⇒ Q`.
    fn summarise(&mut self, spec: &HoareSpec, args: &[Term], loc: Loc, q: Leaves, rv: Option<&str>) -> Leaves {
        let prog = self.prog;
        let callee = &spec.function;
        let f = prog.function(callee);
        let params: Vec<String> = f.map(|f| f.params.iter().map(|(n, _)| n.clone()).collect()).unwrap_or_else(|| {
            prog.ast.function(callee).map(crate::translator::records::param_names).unwrap_or_default()
        });
        let mut pin: HashMap<String, Term> = params.iter().cloned().zip(args.iter().cloned()).collect();
        for (label, sort) in &spec.labels {
            let v = match spec.label_defs.get(label) {
                Some(d) => fold(&d.substitute(&pin)),
                None => Term::var(self.fresh(label), *sort),
            };
            pin.insert(label.clone(), v);
        }
        // Post: `Old(t)` and labels are read in the pre-call state, the
        // rest in the post-call state.
        let pre = fold(&spec.pre_term().substitute(&pin));

        let changed: Vec<(String, Sort)> = if self.opts.skip_modifies {
            self.all_globals()
        } else {
            match prog.modifies_of(callee) {
                ModSet::Top => self.all_globals(),
                ModSet::Set(s) => s.iter().filter_map(|x| self.sort_of_global(x).map(|srt| (x.clone(), srt))).collect(),
            }
        };
        let (q, ren) = self.havoc(q, &changed);
        let result_sort = f.filter(|f| f.result.is_scalar()).map(|f| crate::translator::sort_of(&f.result));
        let mut post_map: HashMap<String, Term> = ren;
        for label in spec.labels.keys() {
            post_map.insert(label.clone(), pin[label].clone());
        }
        let mut q = q;
        if let Some(sort) = result_sort {
            let r = self.fresh("\\result");
            let rt = Term::var(r, sort);
            post_map.insert(RESULT.to_string(), rt.clone());
            if let Some(x) = rv {
                let m = HashMap::from([(x.to_string(), rt)]);
                q = map_leaves(q, subst(&m));
            }
        }
        // Substitution leaves `Old` alone, so rename the post-state first
        // and pin the pre-state reads afterwards.
        let post = spec.post_term().substitute(&post_map).rewrite(&mut |n| match n.node() {
            Node::Old(x) => Some(x.substitute(&pin)),
            _ => None,
        });
        let post = fold(&post);
        let mut q = map_leaves(q, |f| fold(&Term::implies(post.clone(), f.clone())));
        let key = self.key(loc, Provenance::Guard, format!("precondition of {} ({})", callee, spec.name));
        add_leaf(&mut q, key, Leaf::Formula(pre));
        let terminates = spec.total || prog.loop_free(callee);
        if self.total && !terminates {
            let key = self.key(loc, Provenance::Guard, format!("termination of {callee}"));
            add_leaf(&mut q, key, Leaf::Unprovable(format!("contract of `{callee}` is partial and it may loop")));
        }
        q
    }

    fn wp_loop(
        &mut self,
        cond: &Term,
        body: &Monadic,
        ann: Option<&crate::translator::LoopAnn>,
        loc: Loc,
        q: Leaves,
    ) -> Result<Leaves, WpError> {
        let inv = match ann {
            Some(a) if !a.invariant.is_empty() => a.invariant_term(),
            _ if self.total => return Err(WpError::MissingInvariant { function: self.function.clone(), loc }),
            _ => Term::tt(),
        };
        let measure = ann.and_then(|a| a.measure.clone());
        if self.total && measure.is_none() {
            return Err(WpError::MissingMeasure { function: self.function.clone(), loc });
        }
        // Universally quantify over everything the loop may change by
        // renaming it apart from the entry state.
        let changed: Vec<(String, Sort)> = match self.changed_by(body, &mut BTreeSet::new()) {
            Some(s) => s.into_iter().collect(),
            None => {
                let mut v = self.all_globals();
                let mut locals = BTreeMap::new();
                body.walk(&mut |n| {
                    if let Monadic::Modify(u) = n {
                        for (x, t) in u {
                            locals.insert(x.clone(), t.sort());
                        }
                    }
                });
                for (x, s) in locals {
                    if !v.iter().any(|(y, _)| *y == x) {
                        v.push((x, s));
                    }
                }
                v
            }
        };
        let mut ren = HashMap::new();
        for (n, s) in &changed {
            let f = self.fresh(n);
            ren.insert(n.clone(), Term::var(f, *s));
        }
        let r = |t: &Term| fold(&t.substitute(&ren));
        let inv_r = r(&inv);
        let cond_r = r(cond);

        let mut out = Leaves::new();
        add_leaf(&mut out, self.key(loc, Provenance::InvariantInit, ""), Leaf::Formula(inv.clone()));

        // preserve: I ∧ c ⇒ wp(body, I)
        let mut qi = Leaves::new();
        qi.insert(self.key(loc, Provenance::InvariantPreserved, ""), Leaf::Formula(inv.clone()));
        let pres = self.wp(body, qi, None)?;
        let hyp = fold(&Term::and2(inv_r.clone(), cond_r.clone()));
        for (k, l) in pres {
            let l = match l {
                Leaf::Formula(t) => Leaf::Formula(fold(&Term::implies(hyp.clone(), r(&t)))),
                u => u,
            };
            add_leaf(&mut out, k, l);
        }

        // exit: I ∧ ¬c ⇒ Q
        let hyp_exit = fold(&Term::and2(inv_r.clone(), Term::not(cond_r.clone())));
        for (mut k, l) in q {
            if k.provenance == Provenance::WpGoal {
                k.provenance = Provenance::ExitImpliesPost;
            }
            let l = match l {
                Leaf::Formula(t) => Leaf::Formula(fold(&Term::implies(hyp_exit.clone(), r(&t)))),
                u => u,
            };
            add_leaf(&mut out, k, l);
        }

        if self.total {
            let m = measure.expect("checked above");
            let w = m.term.width().unwrap_or(64);
            let m0 = Term::var(self.fresh("measure"), Sort::Bv(w));
            let lt = if m.signed { CmpOp::Slt } else { CmpOp::Ult };
            let dkey = self.key(loc, Provenance::MeasureDecreases, "");
            let mut qd = Leaves::new();
            qd.insert(dkey.clone(), Leaf::Formula(Term::cmp(lt, m.term.clone(), m0.clone())));
            let dec = self.wp(body, qd, None)?;
            let hyp_dec = fold(&Term::and(vec![inv_r.clone(), cond_r.clone(), Term::eq(m0, r(&m.term))]));
            let leaf = match dec.get(&dkey) {
                Some(Leaf::Formula(t)) => Leaf::Formula(fold(&Term::implies(hyp_dec, r(t)))),
                Some(u) => u.clone(),
                None => Leaf::Formula(Term::tt()),
            };
            add_leaf(&mut out, dkey, leaf);
            for (k, l) in dec {
                if let Leaf::Unprovable(_) = l {
                    add_leaf(&mut out, k, l);
                }
            }
            let mut nonneg = no_underflow(&m.term);
            if m.signed {
                nonneg = Term::and2(nonneg, Term::cmp(CmpOp::Sle, Term::bv(w, 0), m.term.clone()));
            }
            let leaf = fold(&Term::implies(inv_r, r(&nonneg)));
            add_leaf(&mut out, self.key(loc, Provenance::MeasureNonneg, ""), Leaf::Formula(leaf));
        }
        Ok(out)
    }
}

fn merge_branches(c: &Term, qa: Leaves, qb: Leaves) -> Leaves {
    let nc = fold(&Term::not(c.clone()));
    let mut out = Leaves::new();
    let keys: BTreeSet<LeafKey> = qa.keys().chain(qb.keys()).cloned().collect();
    for k in keys {
        let l = match (qa.get(&k), qb.get(&k)) {
            (Some(Leaf::Formula(a)), Some(Leaf::Formula(b))) => {
                if a == b {
                    Leaf::Formula(a.clone())
                } else {
                    Leaf::Formula(fold(&Term::and2(
                        Term::implies(c.clone(), a.clone()),
                        Term::implies(nc.clone(), b.clone()),
                    )))
                }
            }
            (Some(Leaf::Formula(a)), None) => Leaf::Formula(fold(&Term::implies(c.clone(), a.clone()))),
            (None, Some(Leaf::Formula(b))) => Leaf::Formula(fold(&Term::implies(nc.clone(), b.clone()))),
            (Some(u @ Leaf::Unprovable(_)), _) | (_, Some(u @ Leaf::Unprovable(_))) => u.clone(),
            (None, None) => unreachable!(),
        };
        out.insert(k, l);
    }
    out
}

/// Sort a bound name takes inside `m` (from its first occurrence).
fn bound_sort(m: &Monadic, x: &str) -> Option<Sort> {
    let mut found = None;
    m.walk(&mut |n| {
        if found.is_none() {
            for t in n.own_terms() {
                if let Some(s) = t.free_vars().get(x) {
                    found = Some(*s);
                    break;
                }
            }
        }
    });
    found
}

/// Every `+`, `-`, `*` in a word expression computes its exact result.
pub fn no_underflow(t: &Term) -> Term {
    let mut conds = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![t.clone()];
    while let Some(n) = stack.pop() {
        if !seen.insert(n.ptr_id()) {
            continue;
        }
        if let Node::Bin(op, a, b) = n.node() {
            let (op, signed) = match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => (*op, false),
                BinOp::IAdd { signed } | BinOp::ISub { signed } | BinOp::IMul { signed } => (op.word_op(), *signed),
                _ => (BinOp::And, false),
            };
            if op != BinOp::And {
                conds.push(range_guard(op, signed, a, b));
            }
        }
        stack.extend(n.children().into_iter().cloned());
    }
    fold(&Term::and(conds))
}

/// Formula-level weakest precondition (all obligations conjoined), for a
/// program whose loops are handled in partial-correctness mode.
pub fn wp(prog: &Program, m: &Monadic, post: &Term) -> Result<Term, WpError> {
    let mut g = WpGen::new(prog, WpOptions::default(), false, "");
    let mut q = Leaves::new();
    q.insert(g.key(Loc::default(), Provenance::WpGoal, ""), Leaf::Formula(post.clone()));
    let out = g.wp(m, q, Some(RESULT))?;
    let mut parts = Vec::new();
    for (_, l) in out {
        match l {
            Leaf::Formula(t) => parts.push(t),
            Leaf::Unprovable(_) => parts.push(Term::ff()),
        }
    }
    Ok(fold(&Term::and(parts)))
}

/// Replace each distinct `Old(t)` by a fresh label `old#k`, returning the
/// rewritten term and the label definitions `old#k == t`.
fn label_olds(t: &Term, defs: &mut Vec<(Term, Term)>) -> Term {
    t.rewrite(&mut |n| match n.node() {
        Node::Old(x) => {
            if let Some((l, _)) = defs.iter().find(|(_, d)| d == x) {
                return Some(l.clone());
            }
            let l = Term::var(format!("old#{}", defs.len()), x.sort());
            defs.push((l.clone(), x.clone()));
            Some(l)
        }
        _ => None,
    })
}

/// Verification conditions of one spec, in a stable order.
pub fn vcgen(prog: &Program, spec: &HoareSpec, opts: WpOptions) -> Result<Vec<Vc>, WpError> {
    let mut out = Vec::new();
    let mk = |out: &mut Vec<Vc>, prov, detail: String, hyp: Term, goal: Term, loc: Loc, unprovable: Option<String>| {
        out.push(Vc {
            index: out.len(),
            function: spec.function.clone(),
            spec: spec.name.clone(),
            provenance: prov,
            detail,
            hypothesis: hyp,
            goal,
            loc,
            unprovable,
        })
    };
    let f = match prog.function(&spec.function) {
        Some(f) if !f.dont_translate => f,
        _ => {
            let reason = format!("`{}` is excluded from translation", spec.function);
            mk(&mut out, Provenance::WpGoal, String::new(), spec.pre_term(), spec.post_term(), spec.loc, Some(reason));
            return Ok(out);
        }
    };
    let mut g = WpGen::new(prog, opts, spec.total, &f.name);
    let mut q = Leaves::new();
    for c in &spec.post {
        let k = g.key(c.loc, Provenance::WpGoal, c.text.clone());
        add_leaf(&mut q, k, Leaf::Formula(c.term.clone()));
    }
    if spec.post.is_empty() {
        q.insert(g.key(spec.loc, Provenance::WpGoal, "true"), Leaf::Formula(Term::tt()));
    }
    let leaves = g.wp(&f.monadic, q, Some(RESULT))?;
    // Parameters are read at entry, where `Old(p)` and `p` coincide.
    for (k, l) in leaves {
        let loc = Loc::new(k.line, k.col);
        let mut detail = k.detail.clone();
        if !k.ctx.is_empty() {
            let sites: Vec<String> = k.ctx.iter().map(|(l, c)| format!("{l}:{c}")).collect();
            detail = format!("{detail} (inlined at {})", sites.join(" <- "));
        }
        match l {
            Leaf::Formula(t) => {
                if k.provenance == Provenance::Guard && t.as_bool() == Some(true) {
                    continue;
                }
                let mut defs = Vec::new();
                let goal = label_olds(&t, &mut defs);
                let mut hyps = vec![spec.pre_term()];
                hyps.extend(defs.into_iter().map(|(l, d)| Term::eq(l, d)));
                mk(&mut out, k.provenance, detail, fold(&Term::and(hyps)), goal, loc, None);
            }
            Leaf::Unprovable(r) => mk(&mut out, k.provenance, detail, spec.pre_term(), Term::ff(), loc, Some(r)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;
    use crate::translator::{translate, TranslateOptions};

    fn prog(src: &str) -> Program {
        translate(&load(src, &[]).unwrap(), TranslateOptions::default()).unwrap()
    }

    #[test]
    fn wp_of_return_unit_is_identity() {
        let p = prog("void f(void) {}");
        let q = Term::bv_var("x", 8);
        let q = Term::eq(q, Term::bv(8, 1));
        assert_eq!(wp(&p, &Monadic::unit(), &q).unwrap(), q);
    }

    #[test]
    fn wp_of_increment() {
        let p = prog("static unsigned int timer; void idle(void) { timer = timer + 1; }");
        let a = Term::bv_var("a", 32);
        let timer = Term::bv_var("timer", 32);
        let one = Term::bv(32, 1);
        let post = Term::eq(timer.clone(), Term::bin(BinOp::Add, a.clone(), one.clone()));
        let got = wp(&p, &p.function("idle").unwrap().monadic, &post).unwrap();
        assert_eq!(got, Term::eq(Term::bin(BinOp::Add, timer, one.clone()), Term::bin(BinOp::Add, a, one)));
    }

    #[test]
    fn guard_leaves_are_split_out() {
        let p = prog("static unsigned int r; void f(unsigned int *q) { r = *q; }");
        let spec = HoareSpec {
            name: "f".into(),
            function: "f".into(),
            total: false,
            pre: vec![],
            post: vec![],
            labels: Default::default(),
            label_defs: Default::default(),
            loc: Loc::default(),
        };
        let vcs = vcgen(&p, &spec, WpOptions::default()).unwrap();
        let tags: Vec<_> = vcs.iter().map(|v| (v.provenance, v.detail.as_str())).collect();
        assert!(tags.contains(&(Provenance::Guard, "non-null")), "{tags:?}");
        assert!(tags.contains(&(Provenance::Guard, "aligned")), "{tags:?}");
        assert!(tags.contains(&(Provenance::WpGoal, "true")));
    }
}
