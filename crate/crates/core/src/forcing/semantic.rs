use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{sat_global, tuples, Kripke, TermUniverse};
use crate::signature::{HDSignature, HSort};
use crate::syntax::{substitute, Action, Sentence, SubstTarget, Substitution, Var};

use super::budget::{SatBudget, SatOutcome};
use super::finder::{bounded_sat, enumerate_models};
use super::property::ForcingProperty;

/// A finite set of retrieved sentences, closed under the witnesses the
/// forcing clauses inspect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePool {
    pub sentences: Vec<Sentence>,
    pub star_bound: usize,
}

impl SentencePool {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn index(&self, s: &Sentence) -> Option<usize> {
        self.sentences.iter().position(|x| x == s)
    }

    /// `(k, γ)` for each member `@ₖγ`.
    pub fn split(&self) -> Vec<(String, Sentence)> {
        self.sentences
            .iter()
            .map(|s| match s {
                Sentence::At(k, g) => (k.clone(), (**g).clone()),
                _ => unreachable!("pool members are retrieved"),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PoolError {
    #[error("pool sentence `{0}` is not of the form @k γ")]
    NotRetrieved(String),
    #[error("theory has no model within budget ({0})")]
    NoModel(String),
    #[error("model enumeration exceeds the node limit")]
    TooManyModels,
}

/// Ground rigid terms of sort `s` up to `depth`.
fn rigid_terms(sig: &HDSignature, depth: usize, s: &str) -> Vec<crate::syntax::Term> {
    let noms: Vec<String> = sig.nominals().cloned().collect();
    let u = TermUniverse::generate(sig, &noms, depth);
    (0..u.len()).filter(|&i| u.sorts[i] == HSort::Plain(s.to_string())).map(|i| u.terms[i].clone()).collect()
}

/// Instances `θ(γ)` over nominals and ground rigid terms up to `depth`.
pub fn instances(sig: &HDSignature, xs: &BTreeSet<Var>, body: &Sentence, depth: usize) -> Vec<Sentence> {
    let xs: Vec<&Var> = xs.iter().collect();
    let cands: Vec<Vec<SubstTarget>> = xs
        .iter()
        .map(|x| {
            if x.sort == sig.nominal_sort() {
                sig.nominals().map(|k| SubstTarget::Nominal(k.clone())).collect()
            } else {
                rigid_terms(sig, depth, &x.sort).into_iter().map(SubstTarget::Term).collect()
            }
        })
        .collect();
    let dims: Vec<usize> = cands.iter().map(Vec::len).collect();
    tuples(&dims)
        .map(|t| {
            let mut theta = Substitution::new();
            for ((x, c), &i) in xs.iter().zip(&cands).zip(&t) {
                theta.map.insert(x.name.clone(), c[i].clone());
            }
            substitute(&theta, body)
        })
        .collect()
}

/// Retrieved sentences whose membership the clauses for `@ₖγ` depend on.
fn witnesses(sig: &HDSignature, k: &str, g: &Sentence, star_bound: usize, depth: usize) -> Vec<Sentence> {
    let at = |k: &str, s: Sentence| Sentence::at(k, s);
    let noms: Vec<String> = sig.nominals().cloned().collect();
    match g {
        Sentence::Not(d) => vec![at(k, (**d).clone())],
        Sentence::Or(ds) => ds.iter().map(|d| at(k, d.clone())).collect(),
        Sentence::At(k2, d) => vec![at(k2, (**d).clone())],
        Sentence::Store(z, d) => vec![at(k, substitute(&Substitution::new().nominal(z, k), d))],
        Sentence::Exists(xs, d) => instances(sig, xs, d, depth).into_iter().map(|s| at(k, s)).collect(),
        Sentence::Dia(a, d) => match (a, &**d) {
            (Action::Atom(_), Sentence::Nominal(_)) => vec![],
            (Action::Seq(a1, a2), Sentence::Nominal(k2)) => noms
                .iter()
                .flat_map(|m| {
                    [
                        at(k, Sentence::dia((**a1).clone(), Sentence::nom(m))),
                        at(m, Sentence::dia((**a2).clone(), Sentence::nom(k2))),
                    ]
                })
                .collect(),
            (Action::Union(a1, a2), Sentence::Nominal(k2)) => vec![
                at(k, Sentence::dia((**a1).clone(), Sentence::nom(k2))),
                at(k, Sentence::dia((**a2).clone(), Sentence::nom(k2))),
            ],
            (Action::Star(b), Sentence::Nominal(k2)) => std::iter::once(at(k, Sentence::nom(k2)))
                .chain((1..=star_bound).map(|n| at(k, Sentence::dia(b.power(n), Sentence::nom(k2)))))
                .collect(),
            (_, d) => noms
                .iter()
                .flat_map(|m| [at(k, Sentence::dia(a.clone(), Sentence::nom(m))), at(m, d.clone())])
                .collect(),
        },
        _ => vec![],
    }
}

/// Closes `seeds` under witnesses, in first-reached order.
pub fn pool_closure(
    sig: &HDSignature,
    seeds: &[Sentence],
    star_bound: usize,
    term_depth: usize,
) -> Result<SentencePool, PoolError> {
    let mut out: Vec<Sentence> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut queue: std::collections::VecDeque<Sentence> = seeds.iter().cloned().collect();
    while let Some(s) = queue.pop_front() {
        if !seen.insert(s.clone()) {
            continue;
        }
        let Sentence::At(k, g) = &s else {
            return Err(PoolError::NotRetrieved(s.to_string()));
        };
        queue.extend(witnesses(sig, k, g, star_bound, term_depth));
        out.push(s);
    }
    Ok(SentencePool { sentences: out, star_bound })
}

/// Decides joint satisfiability of the theory with a set of pool sentences.
pub trait SatOracle {
    fn satisfiable(&mut self, extra: &[Sentence]) -> SatOutcome;
}

/// `bounded_sat` on the theory plus the extra sentences, memoized.
pub struct LazyOracle {
    pub sig: HDSignature,
    pub theory: Vec<Sentence>,
    pub budget: SatBudget,
    cache: HashMap<Vec<Sentence>, SatOutcome>,
}

impl LazyOracle {
    pub fn new(sig: &HDSignature, theory: &[Sentence], budget: &SatBudget) -> Self {
        LazyOracle { sig: sig.clone(), theory: theory.to_vec(), budget: budget.clone(), cache: HashMap::new() }
    }
}

impl SatOracle for LazyOracle {
    fn satisfiable(&mut self, extra: &[Sentence]) -> SatOutcome {
        let mut key = extra.to_vec();
        key.sort();
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let mut t = self.theory.clone();
        t.extend(key.iter().cloned());
        let v = bounded_sat(&self.sig, &t, &self.budget);
        self.cache.insert(key, v.clone());
        v
    }
}

/// Every structure within budget, kept once, filtered by the theory.
pub struct EnumeratedOracle {
    pub models: Vec<Kripke>,
    truth: HashMap<Sentence, Vec<bool>>,
}

impl EnumeratedOracle {
    pub fn new(sig: &HDSignature, theory: &[Sentence], budget: &SatBudget) -> Result<Self, PoolError> {
        let all = enumerate_models(sig, budget).ok_or(PoolError::TooManyModels)?;
        let models = all.into_iter().filter(|m| theory.iter().all(|s| sat_global(m, s))).collect();
        Ok(EnumeratedOracle { models, truth: HashMap::new() })
    }

    fn column(&mut self, s: &Sentence) -> &Vec<bool> {
        if !self.truth.contains_key(s) {
            let col = self.models.iter().map(|m| sat_global(m, s)).collect();
            self.truth.insert(s.clone(), col);
        }
        &self.truth[s]
    }
}

impl SatOracle for EnumeratedOracle {
    fn satisfiable(&mut self, extra: &[Sentence]) -> SatOutcome {
        let mut alive = vec![true; self.models.len()];
        for s in extra {
            let col = self.column(s).clone();
            alive.iter_mut().zip(col).for_each(|(a, c)| *a &= c);
        }
        match alive.iter().position(|&a| a) {
            Some(i) => SatOutcome::Model(Box::new(self.models[i].clone())),
            None => SatOutcome::NoModel,
        }
    }
}

/// A witness requirement that no member of the conditions can meet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantFailure {
    pub condition: Vec<Sentence>,
    pub member: Sentence,
}

/// The pool-generated forcing property: satisfiable subsets ordered by inclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticForcing {
    pub pool: SentencePool,
    /// Bitmask of pool members per condition; condition 0 is the empty set.
    pub masks: Vec<u64>,
    pub property: ForcingProperty,
    /// Subsets the oracle could not decide; treated as not satisfiable.
    pub undecided: usize,
    pub invariant_failures: Vec<InvariantFailure>,
}

impl SemanticForcing {
    pub fn condition(&self, mask: u64) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.condition(mask).is_some()
    }

    pub fn members(&self, p: usize) -> Vec<Sentence> {
        bits(self.masks[p]).map(|i| self.pool.sentences[i].clone()).collect()
    }

    /// The mask of `p ∪ {s}`, if `s` is in the pool.
    pub fn with(&self, p: usize, s: &Sentence) -> Option<u64> {
        self.pool.index(s).map(|i| self.masks[p] | (1 << i))
    }

    /// Whether the witness invariants hold for every condition.
    pub fn is_witness_closed(&self) -> bool {
        self.invariant_failures.is_empty()
    }
}

fn bits(m: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| m >> i & 1 == 1)
}

/// Pools are indexed by `u64` masks.
pub const MAX_POOL: usize = 20;

/// Builds the semantic forcing property of `theory` over `sig` (which
/// already contains the fresh nominals and constants) for `pool`.
pub fn semantic_forcing(
    sig: &HDSignature,
    pool: &SentencePool,
    oracle: &mut dyn SatOracle,
    term_depth: usize,
) -> Result<SemanticForcing, PoolError> {
    assert!(pool.len() <= MAX_POOL, "pool of {} sentences exceeds {MAX_POOL}", pool.len());
    let n = pool.len();
    if !oracle.satisfiable(&[]).is_model() {
        return Err(PoolError::NoModel("empty condition".into()));
    }
    let mut order: Vec<u64> = (0..1u64 << n).collect();
    order.sort_by_key(|m| (m.count_ones(), *m));
    let mut member: HashMap<u64, bool> = HashMap::new();
    let mut undecided = 0;
    for &m in &order {
        let down_ok = bits(m).all(|i| member.get(&(m & !(1 << i))).copied().unwrap_or(false));
        let ok = (m == 0 || down_ok) && {
            let extra: Vec<Sentence> = bits(m).map(|i| pool.sentences[i].clone()).collect();
            match oracle.satisfiable(&extra) {
                SatOutcome::Model(_) => true,
                SatOutcome::NoModel => false,
                SatOutcome::BudgetExceeded => {
                    undecided += 1;
                    false
                }
            }
        };
        member.insert(m, ok);
    }
    let masks: Vec<u64> = order.into_iter().filter(|m| member[m]).collect();
    let basic: u64 = pool.sentences.iter().enumerate().filter(|(_, s)| s.is_basic()).fold(0, |a, (i, _)| a | 1 << i);
    let names: Vec<String> = masks.iter().map(|m| format!("{m:b}")).collect();
    let leq: Vec<Vec<bool>> = masks.iter().map(|&p| masks.iter().map(|&q| p & !q == 0).collect()).collect();
    let labels = masks.iter().map(|&m| bits(m & basic).map(|i| pool.sentences[i].clone()).collect()).collect();
    let property = ForcingProperty { sig: sig.clone(), names, leq, labels, term_depth };
    let mut sf = SemanticForcing { pool: pool.clone(), masks, property, undecided, invariant_failures: Vec::new() };
    sf.invariant_failures = check_witness_invariants(sig, &sf);
    Ok(sf)
}

/// The witness properties: every member `@ₖγ` of a condition `p` has a
/// pool witness `w` (a set of sentences) with `p ∪ w` again a condition.
pub fn check_witness_invariants(sig: &HDSignature, sf: &SemanticForcing) -> Vec<InvariantFailure> {
    let noms: Vec<String> = sig.nominals().cloned().collect();
    let star_bound = sf.pool.star_bound;
    let mut out = Vec::new();
    for (p, &mask) in sf.masks.iter().enumerate() {
        for i in bits(mask) {
            let s = &sf.pool.sentences[i];
            let Sentence::At(k, g) = s else { continue };
            let at = |k: &str, s: Sentence| Sentence::at(k, s);
            let options: Vec<Vec<Sentence>> = match &**g {
                Sentence::Or(ds) => ds.iter().map(|d| vec![at(k, d.clone())]).collect(),
                Sentence::Exists(xs, d) => {
                    instances(sig, xs, d, sf.property.term_depth).into_iter().map(|d| vec![at(k, d)]).collect()
                }
                Sentence::Dia(a, d) => match (a, &**d) {
                    (Action::Atom(_), Sentence::Nominal(_)) => continue,
                    (Action::Seq(a1, a2), Sentence::Nominal(k2)) => noms
                        .iter()
                        .map(|m| {
                            vec![
                                at(k, Sentence::dia((**a1).clone(), Sentence::nom(m))),
                                at(m, Sentence::dia((**a2).clone(), Sentence::nom(k2))),
                            ]
                        })
                        .collect(),
                    (Action::Union(a1, a2), Sentence::Nominal(k2)) => vec![
                        vec![at(k, Sentence::dia((**a1).clone(), Sentence::nom(k2)))],
                        vec![at(k, Sentence::dia((**a2).clone(), Sentence::nom(k2)))],
                    ],
                    (Action::Star(b), Sentence::Nominal(k2)) => std::iter::once(vec![at(k, Sentence::nom(k2))])
                        .chain((1..=star_bound).map(|n| vec![at(k, Sentence::dia(b.power(n), Sentence::nom(k2)))]))
                        .collect(),
                    (_, d) => noms
                        .iter()
                        .map(|m| vec![at(k, Sentence::dia(a.clone(), Sentence::nom(m))), at(m, d.clone())])
                        .collect(),
                },
                _ => continue,
            };
            let met = options.iter().any(|w| {
                let mut m = mask;
                for s in w {
                    match sf.pool.index(s) {
                        Some(j) => m |= 1 << j,
                        None => return false,
                    }
                }
                sf.contains(m)
            });
            if !met {
                out.push(InvariantFailure { condition: sf.members(p), member: s.clone() });
            }
        }
    }
    out
}
