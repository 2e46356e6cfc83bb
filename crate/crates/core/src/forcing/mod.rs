//! Forcing properties, the forcing relation, generic sets and the bounded
//! model finder behind the semantic forcing property.

mod budget;
mod finder;
mod generic;
mod property;
mod semantic;

pub use budget::{SatBudget, SatOutcome, Verdict};
pub use finder::{bounded_sat, bounded_sat_where, enumerate_models};
pub use generic::{build_generic, generic_model, Decision, GenericChain, GenericModel};
pub use property::{
    check_forcing_axioms, check_forcing_axioms_on, forces, weak_forces, AxiomReport, AxiomViolation, BasicEntailment, BoundedEntailment,
    EntailmentOracle, Forcer, ForcingError, ForcingProperty,
};
pub use semantic::{
    check_witness_invariants, instances, pool_closure, semantic_forcing, EnumeratedOracle, InvariantFailure,
    LazyOracle, PoolError, SatOracle, SemanticForcing, SentencePool, MAX_POOL,
};
