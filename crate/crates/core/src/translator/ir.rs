//! Deep (statement-level) and monadic (shallow) intermediate forms.

use std::fmt;

use serde::Serialize;

use crate::frontend::Loc;
use crate::logic::Term;

/// Why a guard is there. Guards are runtime-safety conditions: the
/// interpreter faults when one is false and the verifier proves them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardKind {
    NonNull,
    Aligned,
    DivZero,
    DivOverflow,
    Shift,
    Bounds,
    /// Introduced by word abstraction: an arithmetic result fits its width.
    WordRange,
}

impl GuardKind {
    pub fn name(self) -> &'static str {
        match self {
            GuardKind::NonNull => "non-null",
            GuardKind::Aligned => "aligned",
            GuardKind::DivZero => "div-zero",
            GuardKind::DivOverflow => "div-overflow",
            GuardKind::Shift => "shift",
            GuardKind::Bounds => "bounds",
            GuardKind::WordRange => "word-range",
        }
    }
}

impl fmt::Display for GuardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    pub term: Term,
    pub signed: bool,
    pub loc: Loc,
}

/// Invariant and measure attached to a loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopAnn {
    pub invariant: Vec<(Term, Loc)>,
    pub measure: Option<Measure>,
    pub loc: Loc,
}

impl LoopAnn {
    pub fn invariant_term(&self) -> Term {
        Term::and(self.invariant.iter().map(|(t, _)| t.clone()).collect())
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> LoopAnn {
        LoopAnn {
            invariant: self.invariant.iter().map(|(t, l)| (f(t), *l)).collect(),
            measure: self.measure.as_ref().map(|m| Measure { term: f(&m.term), ..m.clone() }),
            loc: self.loc,
        }
    }

    fn terms(&self) -> Vec<&Term> {
        let mut v: Vec<&Term> = self.invariant.iter().map(|(t, _)| t).collect();
        if let Some(m) = &self.measure {
            v.push(&m.term);
        }
        v
    }
}

pub type Update = Vec<(String, Term)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Deep {
    Skip,
    /// Simultaneous assignment to state components.
    Basic(Update),
    Seq(Box<Deep>, Box<Deep>),
    Cond(Term, Box<Deep>, Box<Deep>),
    Guard(GuardKind, Term, Loc, Box<Deep>),
    While {
        cond: Term,
        body: Box<Deep>,
        ann: Option<LoopAnn>,
        loc: Loc,
    },
    /// Call of a named function; the callee's return value is stored in
    /// `ret` when present.
    Call {
        callee: String,
        args: Vec<Term>,
        ret: Option<String>,
        loc: Loc,
    },
    /// Call through a function-pointer value. Only produced for functions
    /// excluded from verification, so the interpreter can still run them.
    CallPtr {
        target: Term,
        args: Vec<Term>,
        loc: Loc,
    },
    Fail,
}

impl Deep {
    pub fn seq(a: Deep, b: Deep) -> Deep {
        match (a, b) {
            (Deep::Skip, b) => b,
            (a, Deep::Skip) => a,
            (a, b) => Deep::Seq(Box::new(a), Box::new(b)),
        }
    }

    pub fn seq_all(items: impl IntoIterator<Item = Deep>) -> Deep {
        let items: Vec<Deep> = items.into_iter().collect();
        items.into_iter().rev().fold(Deep::Skip, |acc, d| Deep::seq(d, acc))
    }

    /// Visit every node, pre-order.
    pub fn walk(&self, f: &mut impl FnMut(&Deep)) {
        f(self);
        match self {
            Deep::Seq(a, b) | Deep::Cond(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Deep::Guard(_, _, _, s) => s.walk(f),
            Deep::While { body, .. } => body.walk(f),
            _ => {}
        }
    }

    pub fn callees(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |d| {
            if let Deep::Call { callee, .. } = d {
                if !out.contains(callee) {
                    out.push(callee.clone());
                }
            }
        });
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Monadic {
    /// `return e`, or `return ()` for `None`.
    Return(Option<Term>),
    /// Read a projection of the state as the result.
    Gets(Term),
    Modify(Update),
    /// Run the first program, name its result, run the second.
    Bind(Box<Monadic>, String, Box<Monadic>),
    Seq(Vec<Monadic>),
    Guard(GuardKind, Term, Loc),
    Condition(Term, Box<Monadic>, Box<Monadic>),
    While {
        cond: Term,
        body: Box<Monadic>,
        ann: Option<LoopAnn>,
        loc: Loc,
    },
    Call {
        callee: String,
        args: Vec<Term>,
        loc: Loc,
    },
    CallPtr {
        target: Term,
        args: Vec<Term>,
        loc: Loc,
    },
    Fail,
}

impl Monadic {
    pub fn unit() -> Monadic {
        Monadic::Return(None)
    }

    pub fn seq(items: Vec<Monadic>) -> Monadic {
        let mut flat = Vec::new();
        for m in items {
            match m {
                Monadic::Seq(inner) => flat.extend(inner),
                m => flat.push(m),
            }
        }
        match flat.len() {
            0 => Monadic::unit(),
            1 => flat.pop().unwrap(),
            _ => Monadic::Seq(flat),
        }
    }

    pub fn walk(&self, f: &mut impl FnMut(&Monadic)) {
        f(self);
        match self {
            Monadic::Bind(a, _, b) | Monadic::Condition(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Monadic::Seq(ms) => ms.iter().for_each(|m| m.walk(f)),
            Monadic::While { body, .. } => body.walk(f),
            _ => {}
        }
    }

    /// Terms appearing directly in this node (not in children).
    pub fn own_terms(&self) -> Vec<&Term> {
        match self {
            Monadic::Return(Some(t)) | Monadic::Gets(t) | Monadic::Guard(_, t, _) => vec![t],
            Monadic::Modify(u) => u.iter().map(|(_, t)| t).collect(),
            Monadic::Condition(c, ..) => vec![c],
            Monadic::While { cond, ann, .. } => {
                let mut v = vec![cond];
                if let Some(a) = ann {
                    v.extend(a.terms());
                }
                v
            }
            Monadic::Call { args, .. } => args.iter().collect(),
            Monadic::CallPtr { target, args, .. } => {
                let mut v = vec![target];
                v.extend(args.iter());
                v
            }
            _ => vec![],
        }
    }

    /// Apply `f` to every term, rebuilding the program.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Monadic {
        match self {
            Monadic::Return(t) => Monadic::Return(t.as_ref().map(&mut *f)),
            Monadic::Gets(t) => Monadic::Gets(f(t)),
            Monadic::Modify(u) => Monadic::Modify(u.iter().map(|(x, t)| (x.clone(), f(t))).collect()),
            Monadic::Bind(a, x, b) => Monadic::Bind(Box::new(a.map_terms(f)), x.clone(), Box::new(b.map_terms(f))),
            Monadic::Seq(ms) => Monadic::Seq(ms.iter().map(|m| m.map_terms(f)).collect()),
            Monadic::Guard(k, t, l) => Monadic::Guard(*k, f(t), *l),
            Monadic::Condition(c, a, b) => Monadic::Condition(f(c), Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Monadic::While { cond, body, ann, loc } => Monadic::While {
                cond: f(cond),
                body: Box::new(body.map_terms(f)),
                ann: ann.as_ref().map(|a| a.map_terms(f)),
                loc: *loc,
            },
            Monadic::Call { callee, args, loc } => {
                Monadic::Call { callee: callee.clone(), args: args.iter().map(&mut *f).collect(), loc: *loc }
            }
            Monadic::CallPtr { target, args, loc } => {
                Monadic::CallPtr { target: f(target), args: args.iter().map(&mut *f).collect(), loc: *loc }
            }
            Monadic::Fail => Monadic::Fail,
        }
    }

    /// Every variable read anywhere in the program.
    pub fn reads(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |m| {
            for t in m.own_terms() {
                out.extend(t.free_vars().into_keys());
            }
        });
        out
    }

    /// State components assigned anywhere in the program (calls excluded).
    pub fn writes(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |m| {
            if let Monadic::Modify(u) = m {
                out.extend(u.iter().map(|(x, _)| x.clone()));
            }
        });
        out
    }

    pub fn callees(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |m| {
            if let Monadic::Call { callee, .. } = m {
                if !out.contains(callee) {
                    out.push(callee.clone());
                }
            }
        });
        out
    }

    pub fn has_loop(&self) -> bool {
        let mut found = false;
        self.walk(&mut |m| found |= matches!(m, Monadic::While { .. }));
        found
    }
}

fn write_update(f: &mut fmt::Formatter<'_>, head: &str, u: &Update) -> fmt::Result {
    write!(f, "({head}")?;
    for (x, t) in u {
        write!(f, " {x} {t}")?;
    }
    f.write_str(")")
}

fn write_ann(f: &mut fmt::Formatter<'_>, ann: &Option<LoopAnn>) -> fmt::Result {
    if let Some(a) = ann {
        write!(f, " :invariant {}", a.invariant_term())?;
        if let Some(m) = &a.measure {
            write!(f, " :measure {}", m.term)?;
        }
    }
    Ok(())
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for a in args {
        write!(f, " {a}")?;
    }
    Ok(())
}

impl fmt::Display for Deep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deep::Skip => f.write_str("(skip)"),
            Deep::Basic(u) => write_update(f, "basic", u),
            Deep::Seq(a, b) => write!(f, "(seq {a} {b})"),
            Deep::Cond(c, a, b) => write!(f, "(cond {c} {a} {b})"),
            Deep::Guard(k, g, _, s) => write!(f, "(guard {k} {g} {s})"),
            Deep::While { cond, body, ann, .. } => {
                write!(f, "(while {cond}")?;
                write_ann(f, ann)?;
                write!(f, " {body})")
            }
            Deep::Call { callee, args, ret, .. } => {
                write!(f, "(call {callee}")?;
                write_args(f, args)?;
                if let Some(r) = ret {
                    write!(f, " :ret {r}")?;
                }
                f.write_str(")")
            }
            Deep::CallPtr { target, args, .. } => {
                write!(f, "(callptr {target}")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Deep::Fail => f.write_str("(fail)"),
        }
    }
}

impl fmt::Display for Monadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monadic::Return(None) => f.write_str("(return)"),
            Monadic::Return(Some(t)) => write!(f, "(return {t})"),
            Monadic::Gets(t) => write!(f, "(gets {t})"),
            Monadic::Modify(u) => write_update(f, "modify", u),
            Monadic::Bind(a, x, b) => write!(f, "(bind {a} {x} {b})"),
            Monadic::Seq(ms) => {
                f.write_str("(seq")?;
                for m in ms {
                    write!(f, " {m}")?;
                }
                f.write_str(")")
            }
            Monadic::Guard(k, g, _) => write!(f, "(guard {k} {g})"),
            Monadic::Condition(c, a, b) => write!(f, "(condition {c} {a} {b})"),
            Monadic::While { cond, body, ann, .. } => {
                write!(f, "(while {cond}")?;
                write_ann(f, ann)?;
                write!(f, " {body})")
            }
            Monadic::Call { callee, args, .. } => {
                write!(f, "(call {callee}")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Monadic::CallPtr { target, args, .. } => {
                write!(f, "(callptr {target}")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Monadic::Fail => f.write_str("(fail)"),
        }
    }
}
