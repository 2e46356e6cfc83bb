use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::forcing::{bounded_sat, bounded_sat_where, SatBudget, SatOutcome};
use crate::kripke::{is_constructor_based, Reach};
use crate::signature::{ConstructorPartition, HDSignature};
use crate::syntax::{fresh_name, names_in, substitute, Sentence, Substitution, Term, Var};

use super::local::somewhere_not;
use super::types::constructor_terms;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// Bounded semantic entailment from the theory.
    R0,
    /// Every nominal instance of a nominal variable.
    R1 { var: String },
    /// Every constructor-term instance of a constrained variable.
    R2 { var: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub sentence: Sentence,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Whether `rule` is used anywhere in the tree.
    pub fn uses(&self, rule: &dyn Fn(&Rule) -> bool) -> bool {
        rule(&self.rule) || self.premises.iter().any(|p| p.uses(rule))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntailVerdict {
    Derivable(Derivation),
    NotDerivableAtBudget,
}

impl EntailVerdict {
    pub fn is_derivable(&self) -> bool {
        matches!(self, EntailVerdict::Derivable(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntailConfig {
    pub budget: SatBudget,
    /// Constructor-term depth for R2.
    pub depth: usize,
}

impl Default for EntailConfig {
    fn default() -> Self {
        EntailConfig { budget: SatBudget::default(), depth: 2 }
    }
}

/// `[@k] ∀X. ψ`, split into its parts.
fn split_forall(s: &Sentence) -> Option<(Option<String>, Vec<Var>, Sentence)> {
    match s {
        Sentence::At(k, inner) => match split_forall(inner)? {
            (None, xs, body) => Some((Some(k.clone()), xs, body)),
            _ => None,
        },
        Sentence::Not(a) => match &**a {
            Sentence::Exists(xs, b) => match &**b {
                Sentence::Not(body) => Some((None, xs.iter().cloned().collect(), (**body).clone())),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn rebuild(k: Option<&str>, xs: Vec<Var>, body: Sentence) -> Sentence {
    let s = if xs.is_empty() { body } else { Sentence::forall(xs, body) };
    match k {
        Some(k) => Sentence::at(k, s),
        None => s,
    }
}

struct Prover<'a> {
    sig: &'a HDSignature,
    theory: &'a [Sentence],
    partition: &'a ConstructorPartition,
    cfg: &'a EntailConfig,
    memo: HashMap<Sentence, Option<Derivation>>,
}

impl Prover<'_> {
    fn r0(&self, phi: &Sentence) -> bool {
        let mut t = self.theory.to_vec();
        t.push(somewhere_not(self.sig, phi));
        bounded_sat(self.sig, &t, &self.cfg.budget) == SatOutcome::NoModel
    }

    fn derive(&mut self, phi: &Sentence) -> Option<Derivation> {
        if let Some(d) = self.memo.get(phi) {
            return d.clone();
        }
        let d = self.derive_fresh(phi);
        self.memo.insert(phi.clone(), d.clone());
        d
    }

    fn derive_fresh(&mut self, phi: &Sentence) -> Option<Derivation> {
        if self.r0(phi) {
            return Some(Derivation { sentence: phi.clone(), rule: Rule::R0, premises: vec![] });
        }
        let (k, xs, body) = split_forall(phi)?;
        let nominal_sort = self.sig.nominal_sort().to_string();
        let pos = xs.iter().position(|x| x.sort == nominal_sort || self.partition.constrained.contains(&x.sort))?;
        let mut rest = xs.clone();
        let x = rest.remove(pos);
        let noms: Vec<String> = self.sig.nominals().cloned().collect();
        let worlds: Vec<String> = match &k {
            Some(k) => vec![k.clone()],
            None => noms.clone(),
        };
        let mut goals = Vec::new();
        let rule = if x.sort == nominal_sort {
            for n in &noms {
                let inst = substitute(&Substitution::new().nominal(&x.name, n), &body);
                for w in &worlds {
                    goals.push(rebuild(Some(w), rest.clone(), inst.clone()));
                }
            }
            Rule::R1 { var: x.name.clone() }
        } else {
            let mut avoid: BTreeSet<String> = names_in(&body);
            avoid.extend(rest.iter().map(|v| v.name.clone()));
            for (t, ys) in constructor_terms(self.sig, self.partition, &x.sort, self.cfg.depth) {
                let mut ren = Substitution::new();
                let mut bound = rest.clone();
                for y in ys {
                    let name = if avoid.contains(&y.name) { fresh_name(&y.name, &avoid) } else { y.name.clone() };
                    if name != y.name {
                        ren = ren.term(&y.name, Term::cnst(&name));
                    }
                    bound.push(Var::new(&name, &y.sort));
                }
                let t = ren.apply_term(&t);
                let inst = substitute(&Substitution::new().term(&x.name, t), &body);
                for w in &worlds {
                    goals.push(rebuild(Some(w), bound.clone(), inst.clone()));
                }
            }
            Rule::R2 { var: x.name.clone() }
        };
        let premises = goals.iter().map(|g| self.derive(g)).collect::<Option<Vec<_>>>()?;
        Some(Derivation { sentence: phi.clone(), rule, premises })
    }
}

/// Goal-directed search for a derivation of `phi` from `theory` with R0
/// at the leaves and R1/R2 peeling one universal variable at a time.
pub fn constructor_entail(
    sig: &HDSignature,
    theory: &[Sentence],
    phi: &Sentence,
    partition: &ConstructorPartition,
    cfg: &EntailConfig,
) -> EntailVerdict {
    let mut p = Prover { sig, theory, partition, cfg, memo: HashMap::new() };
    match p.derive(phi) {
        Some(d) => EntailVerdict::Derivable(d),
        None => EntailVerdict::NotDerivableAtBudget,
    }
}

/// A budget model of `theory` that is constructor-based at `depth` and falsifies `phi` somewhere.
pub fn constructor_countermodel(
    sig: &HDSignature,
    theory: &[Sentence],
    phi: &Sentence,
    partition: &ConstructorPartition,
    depth: usize,
    budget: &SatBudget,
) -> SatOutcome {
    let mut t = theory.to_vec();
    t.push(somewhere_not(sig, phi));
    let ops: BTreeSet<String> = partition.constructors.ops.keys().cloned().collect();
    bounded_sat_where(sig, &t, budget, &ops, &|m| is_constructor_based(m, partition, depth) == Reach::Yes)
}
