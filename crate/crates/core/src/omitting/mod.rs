//! Types, their realization and omission, the omitting-types chain and
//! entailment over constructor-based structures.

mod chain;
mod entail;
mod local;
mod types;

pub use chain::{omitting_model, ChainStep, OmitAudit, OmitConfig, OmitLog, OmitRun, TypeAudit};
pub use entail::{constructor_countermodel, constructor_entail, Derivation, EntailConfig, EntailVerdict, Rule};
pub use local::{
    locally_realizes, omission_witness, somewhere_not, substitutions, LocalOutcome, LocalRealization, OmissionWitness,
    OmitError,
};
pub use types::{
    constant_type, constructor_terms, constructor_type, fixed_types, nominal_type, omits, realizes, FixedTypes,
    OmitCertificate, TypeSpec,
};
