//! Elaborated Hoare-triple specifications.

use std::collections::BTreeMap;

use crate::frontend::Loc;

use super::term::{Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecClause {
    pub term: Term,
    /// Source text of the clause, for reports.
    pub text: String,
    pub loc: Loc,
}

/// `{pre} function {post}`, or the total-correctness variant. Parameters
/// in `post` appear under `Old` (they denote entry values), `\result` is
/// the variable [`RESULT`], and logical labels are free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoareSpec {
    pub name: String,
    pub function: String,
    pub total: bool,
    pub pre: Vec<SpecClause>,
    pub post: Vec<SpecClause>,
    pub labels: BTreeMap<String, Sort>,
    /// Labels fixed by a `label == e` conjunct of the precondition.
    pub label_defs: BTreeMap<String, Term>,
    pub loc: Loc,
}

/// Name of the variable standing for the function's return value.
pub const RESULT: &str = "\\result";

impl HoareSpec {
    pub fn pre_term(&self) -> Term {
        Term::and(self.pre.iter().map(|c| c.term.clone()).collect())
    }

    pub fn post_term(&self) -> Term {
        Term::and(self.post.iter().map(|c| c.term.clone()).collect())
    }
}
