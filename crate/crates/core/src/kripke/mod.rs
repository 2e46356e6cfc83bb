//! Finite Kripke structures and their semantics.

mod eval;
mod hom;
mod model;
mod ops;
mod reach;
mod terms;

pub use eval::{
    eval_action, eval_term, eval_term_env, sat_global, sat_local, sat_local_env, sat_theory, Env, Evaluator,
    Interp, Tv, Val,
};
pub use hom::{find_hom, find_homs, Hom};
pub use model::{tuples, Kripke, ModelError, Structure, UNDEF};
pub use ops::{assignments, expand, expansions, reduct, reduct_subst};
pub use reach::{is_constructor_based, is_reachable, Reach};
pub use terms::{basic_model, inhabitation_depth, initial_model, pinned_sort, TermModel, TermUniverse};
