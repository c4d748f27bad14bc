//! Verification conditions.

use std::fmt;

use serde::Serialize;

use crate::frontend::Loc;

use super::term::Term;

/// Which rule produced a VC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    WpGoal,
    Guard,
    InvariantInit,
    InvariantPreserved,
    MeasureDecreases,
    MeasureNonneg,
    ExitImpliesPost,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::WpGoal => "wp-goal",
            Provenance::Guard => "guard",
            Provenance::InvariantInit => "invariant-init",
            Provenance::InvariantPreserved => "invariant-preserved",
            Provenance::MeasureDecreases => "measure-decreases",
            Provenance::MeasureNonneg => "measure-nonneg",
            Provenance::ExitImpliesPost => "exit-implies-post",
        }
    }

    pub fn is_loop(self) -> bool {
        matches!(
            self,
            Provenance::InvariantInit
                | Provenance::InvariantPreserved
                | Provenance::MeasureDecreases
                | Provenance::MeasureNonneg
                | Provenance::ExitImpliesPost
        )
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// `hypothesis ⇒ goal`, closed except for the state at function entry
/// and the spec's logical labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vc {
    /// Position in the spec's VC list.
    pub index: usize,
    pub function: String,
    pub spec: String,
    pub provenance: Provenance,
    /// Guard kind, clause text or callee, for reports.
    pub detail: String,
    pub hypothesis: Term,
    pub goal: Term,
    pub loc: Loc,
    /// Set when the obligation cannot be discharged by construction (for
    /// instance, it depends on code excluded from translation).
    pub unprovable: Option<String>,
}

impl Vc {
    /// The formula whose validity the VC asserts.
    pub fn formula(&self) -> Term {
        Term::implies(self.hypothesis.clone(), self.goal.clone())
    }
}

impl fmt::Display for Vc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vc {} {} {} {} at {}", self.index, self.spec, self.provenance, self.function, self.loc)?;
        if !self.detail.is_empty() {
            writeln!(f, "  detail: {}", self.detail)?;
        }
        if let Some(r) = &self.unprovable {
            writeln!(f, "  unprovable: {r}")?;
        }
        writeln!(f, "  hyp: {}", self.hypothesis)?;
        writeln!(f, "  goal: {}", self.goal)
    }
}
