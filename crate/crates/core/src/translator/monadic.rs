//! Conversion of the deep statement form to the monadic form, and the
//! clean-up pass that turns the literal conversion into readable code
//! (forwarding local assignments into their single use, dropping dead
//! local stores, merging consecutive updates).

use std::collections::{BTreeSet, HashMap};

use crate::logic::fold::fold;
use crate::logic::{Sort, Term};

use super::ir::{Deep, Monadic, Update};

/// Literal translation: each deep construct maps to its monadic
/// counterpart, with a `bind` naming each call result.
pub struct Converter<'a> {
    /// Result sort of every callee that returns a value.
    pub result_sorts: &'a HashMap<String, Sort>,
    binds: usize,
}

impl<'a> Converter<'a> {
    pub fn new(result_sorts: &'a HashMap<String, Sort>) -> Self {
        Converter { result_sorts, binds: 0 }
    }

    fn fresh(&mut self) -> String {
        self.binds += 1;
        format!("ret{}", "'".repeat(self.binds))
    }

    pub fn convert(&mut self, d: &Deep) -> Monadic {
        match d {
            Deep::Skip => Monadic::unit(),
            Deep::Basic(u) => Monadic::Modify(u.clone()),
            Deep::Seq(a, b) => {
                let a = self.convert(a);
                Monadic::seq(vec![a, self.convert(b)])
            }
            Deep::Cond(c, a, b) => {
                let a = self.convert(a);
                Monadic::Condition(c.clone(), Box::new(a), Box::new(self.convert(b)))
            }
            Deep::Guard(k, g, l, s) => Monadic::seq(vec![Monadic::Guard(*k, g.clone(), *l), self.convert(s)]),
            Deep::While { cond, body, ann, loc } => {
                Monadic::While { cond: cond.clone(), body: Box::new(self.convert(body)), ann: ann.clone(), loc: *loc }
            }
            Deep::Call { callee, args, ret, loc } => {
                let call = Monadic::Call { callee: callee.clone(), args: args.clone(), loc: *loc };
                match (ret, self.result_sorts.get(callee)) {
                    (Some(r), Some(sort)) => {
                        let x = self.fresh();
                        let store = Monadic::Modify(vec![(r.clone(), Term::var(x.clone(), *sort))]);
                        Monadic::Bind(Box::new(call), x, Box::new(store))
                    }
                    _ => call,
                }
            }
            Deep::CallPtr { target, args, loc } => {
                Monadic::CallPtr { target: target.clone(), args: args.clone(), loc: *loc }
            }
            Deep::Fail => Monadic::Fail,
        }
    }
}

/// Function-local state components are qualified `function::name`.
pub fn is_local(name: &str) -> bool {
    name.contains("::")
}

fn reads_of(m: &Monadic) -> BTreeSet<String> {
    m.reads()
}

fn apply(u: &Update, t: &Term) -> Term {
    let map: HashMap<String, Term> = u.iter().cloned().collect();
    fold(&t.substitute(&map))
}

/// `modify u1; modify u2` as one simultaneous update.
fn merge(u1: &Update, u2: &Update) -> Update {
    let mut out: Update = u1.iter().filter(|(x, _)| !u2.iter().any(|(y, _)| y == x)).cloned().collect();
    out.extend(u2.iter().map(|(x, t)| (x.clone(), apply(u1, t))));
    out
}

/// Substitute a local-only update into the terms evaluated first by `m`,
/// when that is exact. Returns `None` if `m` does not start by
/// evaluating terms in the pre-state.
fn forward(u: &Update, m: &Monadic) -> Option<Monadic> {
    let sub = |t: &Term| apply(u, t);
    Some(match m {
        Monadic::Return(Some(t)) => Monadic::Return(Some(sub(t))),
        Monadic::Gets(t) => Monadic::Gets(sub(t)),
        Monadic::Guard(k, g, l) => Monadic::Guard(*k, sub(g), *l),
        Monadic::Call { callee, args, loc } => {
            Monadic::Call { callee: callee.clone(), args: args.iter().map(sub).collect(), loc: *loc }
        }
        Monadic::CallPtr { target, args, loc } => {
            Monadic::CallPtr { target: sub(target), args: args.iter().map(sub).collect(), loc: *loc }
        }
        Monadic::Bind(a, x, b) => Monadic::Bind(Box::new(forward(u, a)?), x.clone(), b.clone()),
        Monadic::Condition(c, a, b) => Monadic::Condition(sub(c), a.clone(), b.clone()),
        _ => return None,
    })
}

/// Clean up `m`; `live_out` holds the variables read after it.
pub fn peephole(m: &Monadic) -> Monadic {
    let mut cur = m.clone();
    for _ in 0..12 {
        let next = pass(&cur, &BTreeSet::new());
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn pass(m: &Monadic, live_out: &BTreeSet<String>) -> Monadic {
    match m {
        Monadic::Seq(items) => seq_pass(items, live_out),
        Monadic::Bind(a, x, b) => {
            if let Monadic::Bind(a1, y, b1) = &**a {
                // (a1 >>= y. b1) >>= x. b  ==  a1 >>= y. (b1 >>= x. b)
                let inner = Monadic::Bind(b1.clone(), x.clone(), b.clone());
                return Monadic::Bind(a1.clone(), y.clone(), Box::new(inner));
            }
            let b = pass(b, live_out);
            let mut live_a = live_out.clone();
            live_a.extend(reads_of(&b));
            Monadic::Bind(Box::new(pass(a, &live_a)), x.clone(), Box::new(b))
        }
        Monadic::Condition(c, a, b) => {
            let c = fold(c);
            match c.as_bool() {
                Some(true) => pass(a, live_out),
                Some(false) => pass(b, live_out),
                None => Monadic::Condition(c, Box::new(pass(a, live_out)), Box::new(pass(b, live_out))),
            }
        }
        Monadic::While { cond, body, ann, loc } => {
            let mut live = live_out.clone();
            live.extend(reads_of(m));
            Monadic::While { cond: fold(cond), body: Box::new(pass(body, &live)), ann: ann.clone(), loc: *loc }
        }
        Monadic::Modify(u) => {
            let u: Update = u
                .iter()
                .filter(|(x, _)| !is_local(x) || live_out.contains(x))
                .map(|(x, t)| (x.clone(), fold(t)))
                .collect();
            if u.is_empty() {
                Monadic::unit()
            } else {
                Monadic::Modify(u)
            }
        }
        Monadic::Guard(k, g, l) => {
            let g = fold(g);
            if g.as_bool() == Some(true) {
                Monadic::unit()
            } else {
                Monadic::Guard(*k, g, *l)
            }
        }
        other => other.map_terms(&mut |t| fold(t)),
    }
}

fn seq_pass(items: &[Monadic], live_out: &BTreeSet<String>) -> Monadic {
    // Flatten, and let a bind absorb the rest of its sequence so the bound
    // name scopes over everything after it.
    let mut flat: Vec<Monadic> = Vec::new();
    for (i, m) in items.iter().enumerate() {
        match m {
            Monadic::Seq(inner) => flat.extend(inner.iter().cloned()),
            Monadic::Bind(a, x, b) if i + 1 < items.len() => {
                let mut rest = vec![(**b).clone()];
                rest.extend(items[i + 1..].iter().cloned());
                flat.push(Monadic::Bind(a.clone(), x.clone(), Box::new(Monadic::seq(rest))));
                return pass(&Monadic::seq(flat), live_out);
            }
            m => flat.push(m.clone()),
        }
    }
    // Drop unit returns that are not the result of the sequence.
    let n = flat.len();
    let mut flat: Vec<Monadic> = flat
        .into_iter()
        .enumerate()
        .filter(|(i, m)| !(matches!(m, Monadic::Return(None)) && *i + 1 < n))
        .map(|(_, m)| m)
        .collect();
    if flat.len() > 1 && matches!(flat.last(), Some(Monadic::Return(None))) {
        flat.pop();
    }

    // Merge and forward local updates.
    let mut i = 0;
    while i + 1 < flat.len() {
        if let Monadic::Modify(u1) = &flat[i] {
            match &flat[i + 1] {
                Monadic::Modify(u2) => {
                    let merged = merge(u1, u2);
                    flat.splice(i..i + 2, [Monadic::Modify(merged)]);
                    continue;
                }
                next => {
                    let locals: Update = u1.iter().filter(|(x, _)| is_local(x)).cloned().collect();
                    if !locals.is_empty() {
                        let next_writes = next.writes();
                        let clash = locals.iter().any(|(x, t)| {
                            next_writes.contains(x) || t.free_vars().keys().any(|v| next_writes.contains(v))
                        });
                        // Globals in the update must not feed the forwarded
                        // terms: they would be read before being written.
                        let uses_written =
                            locals.iter().any(|(_, t)| t.free_vars().keys().any(|v| u1.iter().any(|(y, _)| y == v)));
                        if !clash && !uses_written {
                            if let Some(fwd) = forward(&locals, next) {
                                if &fwd != next {
                                    flat[i + 1] = fwd;
                                }
                            }
                        }
                    }
                }
            }
        }
        i += 1;
    }

    // Recurse with liveness, back to front.
    let mut live = live_out.clone();
    let mut out: Vec<Monadic> = Vec::with_capacity(flat.len());
    for m in flat.iter().rev() {
        let m2 = pass(m, &live);
        live.extend(reads_of(&m2));
        out.push(m2);
    }
    out.reverse();
    let n = out.len();
    let out: Vec<Monadic> = out
        .into_iter()
        .enumerate()
        .filter(|(i, m)| !(matches!(m, Monadic::Return(None)) && *i + 1 < n))
        .map(|(_, m)| m)
        .collect();
    Monadic::seq(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Loc;

    fn call(f: &str, args: Vec<Term>) -> Monadic {
        Monadic::Call { callee: f.into(), args, loc: Loc::default() }
    }

    #[test]
    fn local_chain_is_forwarded_into_call() {
        let x = Term::bv_var("f::x", 32);
        let m = Monadic::seq(vec![Monadic::Modify(vec![("f::x".into(), Term::bv(32, 4))]), call("g", vec![x])]);
        assert_eq!(peephole(&m).to_string(), "(call g 4#32)");
    }

    #[test]
    fn global_stores_survive() {
        let m = Monadic::Modify(vec![("g".into(), Term::bv(8, 1))]);
        assert_eq!(peephole(&m), m);
    }

    #[test]
    fn skip_is_return_unit() {
        let sorts = HashMap::new();
        assert_eq!(Converter::new(&sorts).convert(&Deep::Skip).to_string(), "(return)");
    }
}
