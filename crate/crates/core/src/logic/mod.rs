//! Term language, typed-heap model, specifications and weakest-precondition
//! generation.

pub mod eval;
pub mod fold;
pub mod heap;
pub mod spec;
pub mod term;
pub mod vc;
pub mod wp;

pub use eval::{eval, eval_bool, Assignment, Env, EvalError, Value};
pub use heap::{check_access, HeapFault, TypedHeapState};
pub use spec::{HoareSpec, SpecClause, RESULT};
pub use term::{mask, to_signed, BinOp, CmpOp, HeapType, Node, Sort, Term, UnOp};
pub use vc::{Provenance, Vc};
pub use wp::{vcgen, WpError, WpOptions};
