//! Modifies sets: the global state components each function may write,
//! computed as a fixpoint over the call graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::ir::Monadic;
use super::monadic::is_local;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModSet {
    /// Anything may change (unknown or untranslated code is reachable).
    Top,
    Set(BTreeSet<String>),
}

impl ModSet {
    pub fn empty() -> ModSet {
        ModSet::Set(BTreeSet::new())
    }

    pub fn contains(&self, name: &str) -> bool {
        match self {
            ModSet::Top => true,
            ModSet::Set(s) => s.contains(name),
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, ModSet::Top)
    }

    fn join(&mut self, other: &ModSet) {
        match (&mut *self, other) {
            (ModSet::Top, _) => {}
            (_, ModSet::Top) => *self = ModSet::Top,
            (ModSet::Set(a), ModSet::Set(b)) => a.extend(b.iter().cloned()),
        }
    }
}

impl fmt::Display for ModSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModSet::Top => f.write_str("*"),
            ModSet::Set(s) => {
                f.write_str("{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(x)?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Modifies set of every function in `bodies`. A function is `Top` when it
/// calls through a pointer, or calls a function absent from `bodies`
/// (untranslated or body-less).
pub fn modifies_sets(bodies: &BTreeMap<String, &Monadic>) -> BTreeMap<String, ModSet> {
    let mut sets: BTreeMap<String, ModSet> = BTreeMap::new();
    for (name, m) in bodies {
        let own: BTreeSet<String> = m.writes().into_iter().filter(|x| !is_local(x)).collect();
        let mut top = m.callees().iter().any(|c| !bodies.contains_key(c));
        m.walk(&mut |n| top |= matches!(n, Monadic::CallPtr { .. }));
        sets.insert(name.clone(), if top { ModSet::Top } else { ModSet::Set(own) });
    }
    loop {
        let mut changed = false;
        for (name, m) in bodies {
            let mut acc = sets[name].clone();
            for c in m.callees() {
                if let Some(s) = sets.get(&c) {
                    acc.join(s);
                }
            }
            if acc != sets[name] {
                sets.insert(name.clone(), acc);
                changed = true;
            }
        }
        if !changed {
            return sets;
        }
    }
}
