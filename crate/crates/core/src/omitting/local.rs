use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::{bounded_sat, SatBudget, SatOutcome};
use crate::kripke::{tuples, Kripke};
use crate::signature::HDSignature;
use crate::syntax::{fresh_name, names_in, substitute, Sentence, SubstTarget, Substitution, Term, Var};

use super::types::TypeSpec;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OmitError {
    #[error("the theory has no model within budget ({0} worlds)")]
    Unsatisfiable(usize),
    #[error("no omission witness for type `{ty}` within budget ({worlds} worlds)")]
    NoWitness { ty: String, worlds: usize },
    #[error("budget exceeded while {0}")]
    Budget(String),
    #[error("chain step {step}: {detail}")]
    Step { step: usize, detail: String },
    #[error("{0}")]
    Model(String),
}

/// `∃z. @z ¬s`: `s` fails at some world.
pub fn somewhere_not(sig: &HDSignature, s: &Sentence) -> Sentence {
    let mut avoid: BTreeSet<String> = names_in(s);
    avoid.extend(sig.nominals().cloned());
    let z = fresh_name("z", &avoid);
    Sentence::exists([Var::new(&z, sig.nominal_sort())], Sentence::at(&z, Sentence::not(s.clone())))
}

/// Every sort-respecting map from `xs` to `consts`.
pub fn substitutions(xs: &[Var], consts: &[Var], nominal_sort: &str) -> Vec<Substitution> {
    let cands: Vec<Vec<&Var>> = xs.iter().map(|x| consts.iter().filter(|c| c.sort == x.sort).collect()).collect();
    let dims: Vec<usize> = cands.iter().map(Vec::len).collect();
    tuples(&dims)
        .map(|t| {
            let mut theta = Substitution::new();
            for ((x, cs), &i) in xs.iter().zip(&cands).zip(&t) {
                let target = if x.sort == nominal_sort {
                    SubstTarget::Nominal(cs[i].name.clone())
                } else {
                    SubstTarget::Term(Term::cnst(&cs[i].name))
                };
                theta.map.insert(x.name.clone(), target);
            }
            theta
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRealization {
    pub theta: Substitution,
    pub p: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalOutcome {
    Realized(LocalRealization),
    /// No probe from the pool realizes the type within budget.
    OmittedAtBudget,
    BudgetExceeded,
}

fn with(theory: &[Sentence], extra: impl IntoIterator<Item = Sentence>) -> Vec<Sentence> {
    theory.iter().cloned().chain(extra).collect()
}

/// Searches `θ: X → C` and subsets `p` of `pool` (smallest first) with
/// `T ∪ p` satisfiable and every budget model of `T ∪ p` satisfying `θ(Γ)`.
/// `sig_c` is `Δ[C]`.
pub fn locally_realizes(
    sig_c: &HDSignature,
    theory: &[Sentence],
    ts: &TypeSpec,
    consts: &[Var],
    pool: &[Sentence],
    budget: &SatBudget,
) -> Result<LocalOutcome, OmitError> {
    if !bounded_sat(sig_c, theory, budget).is_model() {
        return Err(OmitError::Unsatisfiable(budget.max_worlds));
    }
    assert!(pool.len() < 32, "probe pool too large");
    let mut masks: Vec<u32> = (0..1u32 << pool.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let thetas = substitutions(&ts.vars, consts, sig_c.nominal_sort());
    let mut exceeded = false;
    for m in masks {
        let p: Vec<Sentence> = (0..pool.len()).filter(|i| m >> i & 1 == 1).map(|i| pool[i].clone()).collect();
        let tp = with(theory, p.iter().cloned());
        match bounded_sat(sig_c, &tp, budget) {
            SatOutcome::Model(_) => {}
            SatOutcome::NoModel => continue,
            SatOutcome::BudgetExceeded => {
                exceeded = true;
                continue;
            }
        }
        'theta: for theta in &thetas {
            for g in &ts.sentences {
                let probe = with(&tp, [somewhere_not(sig_c, &substitute(theta, g))]);
                match bounded_sat(sig_c, &probe, budget) {
                    SatOutcome::NoModel => {}
                    SatOutcome::Model(_) => continue 'theta,
                    SatOutcome::BudgetExceeded => {
                        exceeded = true;
                        continue 'theta;
                    }
                }
            }
            return Ok(LocalOutcome::Realized(LocalRealization { theta: theta.clone(), p }));
        }
    }
    Ok(if exceeded { LocalOutcome::BudgetExceeded } else { LocalOutcome::OmittedAtBudget })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmissionWitness {
    pub index: usize,
    pub sentence: Sentence,
    pub model: Kripke,
}

/// The first `γ ∈ Γ` with `T ∪ p ∪ {@z ¬θ(γ)}` satisfiable within budget, `z` fresh.
pub fn omission_witness(
    sig_c: &HDSignature,
    theory: &[Sentence],
    p: &[Sentence],
    theta: &Substitution,
    ts: &TypeSpec,
    budget: &SatBudget,
) -> Result<OmissionWitness, OmitError> {
    let tp = with(theory, p.iter().cloned());
    if !bounded_sat(sig_c, &tp, budget).is_model() {
        return Err(OmitError::Unsatisfiable(budget.max_worlds));
    }
    let mut exceeded = false;
    for (index, g) in ts.sentences.iter().enumerate() {
        let s = somewhere_not(sig_c, &substitute(theta, g));
        match bounded_sat(sig_c, &with(&tp, [s.clone()]), budget) {
            SatOutcome::Model(m) => return Ok(OmissionWitness { index, sentence: s, model: *m }),
            SatOutcome::NoModel => {}
            SatOutcome::BudgetExceeded => exceeded = true,
        }
    }
    if exceeded {
        Err(OmitError::Budget(format!("searching a witness for `{}`", ts.name)))
    } else {
        Err(OmitError::NoWitness { ty: ts.name.clone(), worlds: budget.max_worlds })
    }
}
