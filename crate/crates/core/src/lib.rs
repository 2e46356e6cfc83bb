//! Hybrid-dynamic first-order logic with rigid symbols.
//!
//! The crate covers signatures and their morphisms, the sentence language
//! with nominals, retrieve, store, quantifiers and structured actions,
//! finite Kripke semantics, forcing over finite condition sets, an
//! omitting-types chain, constructor-based entailment and the flattening of
//! Kripke families into single structures.

pub mod encoding;
pub mod fixtures;
pub mod forcing;
pub mod kripke;
pub mod omitting;
pub mod signature;
pub mod syntax;
pub mod text;

pub use signature::{FOSignature, HDSignature, SignatureMorphism, Symbol, ANY};
pub use syntax::{Action, Sentence, Term, Var};
