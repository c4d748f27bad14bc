//! Verification pipeline for an annotated C subset: frontend, translation
//! to deep and monadic intermediate forms, weakest-precondition VC
//! generation, a bit-vector decision procedure and a concrete interpreter.

pub mod corpus;
pub mod frontend;
pub mod interpreter;
pub mod logic;
pub mod pipeline;
pub mod solver;
pub mod translator;
