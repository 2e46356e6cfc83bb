use serde::{Deserialize, Serialize};

use crate::kripke::{basic_model, sat_global, Kripke, ModelError};
use crate::syntax::Sentence;

use super::budget::Verdict;
use super::property::{ForcingProperty, Forcer};

/// One step of the chain: the sentence decided, which way, and where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub nominal: String,
    pub sentence: Sentence,
    pub positive: bool,
    pub condition: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericChain {
    pub chain: Vec<usize>,
    pub decisions: Vec<Decision>,
    /// Down-closure of the chain, in index order.
    pub generic: Vec<usize>,
    /// Decisions the forcing relation could not settle within budget.
    pub undecided: Vec<Sentence>,
}

impl GenericChain {
    pub fn top(&self) -> usize {
        *self.chain.last().unwrap()
    }
}

/// Walks the pool from `p`, extending to the least condition forcing each
/// `γ` when one exists (otherwise the current condition forces `¬γ`), then
/// climbs to the least maximal condition above.
pub fn build_generic(fp: &ForcingProperty, p: usize, pool: &[(String, Sentence)]) -> GenericChain {
    let mut f = Forcer::new(fp);
    let mut cur = p;
    let mut chain = vec![p];
    let mut decisions = Vec::new();
    let mut undecided = Vec::new();
    for (k, g) in pool {
        let ups: Vec<usize> = fp.above(cur).collect();
        let mut exceeded = false;
        let mut hit = None;
        for q in ups {
            match f.forces(q, k, g) {
                Verdict::True => {
                    hit = Some(q);
                    break;
                }
                Verdict::BudgetExceeded => exceeded = true,
                Verdict::False => {}
            }
        }
        match hit {
            Some(q) => {
                if q != cur {
                    chain.push(q);
                    cur = q;
                }
                decisions.push(Decision { nominal: k.clone(), sentence: g.clone(), positive: true, condition: q });
            }
            None if exceeded => undecided.push(Sentence::at(k, g.clone())),
            None => decisions.push(Decision { nominal: k.clone(), sentence: g.clone(), positive: false, condition: cur }),
        }
    }
    if let Some(m) = fp.above(cur).find(|&q| fp.is_maximal(q)) {
        if m != cur {
            chain.push(m);
        }
    }
    let top = *chain.last().unwrap();
    let generic = (0..fp.len()).filter(|&q| fp.leq[q][top]).collect();
    GenericChain { chain, decisions, generic, undecided }
}

/// The generic model together with the outcome of the truth check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericModel {
    pub model: Kripke,
    pub truncated: bool,
    /// Pool sentences where the model and the generic set disagree.
    pub mismatches: Vec<Sentence>,
}

/// The basic model of the extended atoms forced by `G`, checked against
/// `G` on every pool sentence.
pub fn generic_model(
    fp: &ForcingProperty,
    g: &GenericChain,
    pool: &[(String, Sentence)],
    depth: usize,
) -> Result<GenericModel, ModelError> {
    let top = g.top();
    let b: Vec<Sentence> = fp.labels[top]
        .iter()
        .filter(|s| matches!(s, Sentence::At(_, a) if a.is_extended_atom()))
        .cloned()
        .collect();
    let tm = basic_model(&b, &fp.sig, depth)?;
    let mut f = Forcer::new(fp);
    let mismatches = pool
        .iter()
        .filter(|(k, s)| {
            let forced = f.forces(top, k, s);
            forced == Verdict::BudgetExceeded || forced.is_true() != sat_global(&tm.model, &Sentence::at(k, s.clone()))
        })
        .map(|(k, s)| Sentence::at(k, s.clone()))
        .collect();
    Ok(GenericModel { model: tm.model, truncated: tm.truncated, mismatches })
}
