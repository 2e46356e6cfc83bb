use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{basic_model, sat_global, TermUniverse};
use crate::signature::{HDSignature, HSort};
use crate::syntax::{substitute, Action, Sentence, SubstTarget, Substitution, Term, Var};

use super::budget::{SatBudget, SatOutcome, Verdict};
use super::finder::bounded_sat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ForcingError {
    #[error("condition `{0}` is unknown")]
    UnknownCondition(String),
    #[error("the order is not antisymmetric: `{0}` and `{1}`")]
    NotAntisymmetric(String, String),
    #[error("condition `{0}` is not above the least condition")]
    NoLeast(String),
    #[error("no conditions")]
    Empty,
    #[error("label `{0}` is not a basic sentence")]
    NotBasic(String),
}

/// A finite poset of conditions labeled by sets of basic sentences.
/// Condition 0 is the least element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcingProperty {
    pub sig: HDSignature,
    pub names: Vec<String>,
    /// `leq[p][q]` iff `p ≤ q`; reflexive and transitive.
    pub leq: Vec<Vec<bool>>,
    pub labels: Vec<BTreeSet<Sentence>>,
    /// Depth of ground terms tried for quantified variables of rigid sort.
    pub term_depth: usize,
}

impl ForcingProperty {
    /// Builds the order as the reflexive-transitive closure of `edges`
    /// (pairs `p ≤ q`). The first condition must lie below all others.
    pub fn from_hasse(
        sig: &HDSignature,
        names: &[&str],
        edges: &[(&str, &str)],
        labels: Vec<BTreeSet<Sentence>>,
    ) -> Result<Self, ForcingError> {
        let n = names.len();
        if n == 0 {
            return Err(ForcingError::Empty);
        }
        let idx = |s: &str| names.iter().position(|x| *x == s).ok_or_else(|| ForcingError::UnknownCondition(s.into()));
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in edges {
            leq[idx(a)?][idx(b)?] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        let fp = ForcingProperty {
            sig: sig.clone(),
            names: names.iter().map(|s| s.to_string()).collect(),
            leq,
            labels,
            term_depth: 1,
        };
        fp.check_order()?;
        Ok(fp)
    }

    fn check_order(&self) -> Result<(), ForcingError> {
        let n = self.len();
        for i in 0..n {
            if !self.leq[0][i] {
                return Err(ForcingError::NoLeast(self.names[i].clone()));
            }
            for j in i + 1..n {
                if self.leq[i][j] && self.leq[j][i] {
                    return Err(ForcingError::NotAntisymmetric(self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        for l in &self.labels {
            if let Some(s) = l.iter().find(|s| !s.is_basic()) {
                return Err(ForcingError::NotBasic(s.to_string()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Conditions `q ≥ p`, in index order.
    pub fn above(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&q| self.leq[p][q])
    }

    /// Conditions with nothing strictly above them.
    pub fn is_maximal(&self, p: usize) -> bool {
        self.above(p).all(|q| q == p)
    }
}

/// Ground subterms of `t`, outermost last.
fn subterms(t: &Term, out: &mut Vec<Term>) {
    t.args.iter().for_each(|a| subterms(a, out));
    out.push(t.clone());
}

fn sentence_terms(s: &Sentence, out: &mut Vec<Term>) {
    match s {
        Sentence::Nominal(_) => {}
        Sentence::Eq(a, b) => {
            subterms(a, out);
            subterms(b, out);
        }
        Sentence::Rel(_, args) => args.iter().for_each(|a| subterms(a, out)),
        Sentence::At(_, g) | Sentence::Not(g) | Sentence::Store(_, g) | Sentence::Exists(_, g) | Sentence::Dia(_, g) => {
            sentence_terms(g, out)
        }
        Sentence::Or(gs) => gs.iter().for_each(|g| sentence_terms(g, out)),
    }
}

/// Every op in `t` is rigid or pinned to a nominal.
fn is_rigid_term(sig: &HDSignature, t: &Term) -> bool {
    (t.op.at.is_some() || sig.is_rigid_op(&t.op.name)) && t.args.iter().all(|a| is_rigid_term(sig, a))
}

/// Nominal-indexed relation: `pairs[i]` lists the `j` with `(kᵢ, kⱼ)` related.
type NomRel = Vec<BTreeSet<usize>>;

fn compose(a: &NomRel, b: &NomRel) -> NomRel {
    a.iter().map(|js| js.iter().flat_map(|&j| b[j].iter().copied()).collect()).collect()
}

fn union(a: &NomRel, b: &NomRel) -> NomRel {
    a.iter().zip(b).map(|(x, y)| x.union(y).copied().collect()).collect()
}

fn transitive(a: &NomRel) -> NomRel {
    let mut r = a.clone();
    loop {
        let next = union(&r, &compose(&r, a));
        if next == r {
            return r;
        }
        r = next;
    }
}

/// Memoized forcing relation over one forcing property.
pub struct Forcer<'a> {
    fp: &'a ForcingProperty,
    noms: Vec<String>,
    memo: HashMap<(usize, String, Sentence), Verdict>,
    rels: HashMap<(usize, Action), NomRel>,
    label_terms: Vec<Term>,
    universe: Option<(TermUniverse, TermUniverse)>,
}

impl<'a> Forcer<'a> {
    pub fn new(fp: &'a ForcingProperty) -> Self {
        let mut label_terms = Vec::new();
        for l in &fp.labels {
            for s in l {
                sentence_terms(s, &mut label_terms);
            }
        }
        Forcer {
            fp,
            noms: fp.sig.nominals().cloned().collect(),
            memo: HashMap::new(),
            rels: HashMap::new(),
            label_terms,
            universe: None,
        }
    }

    pub fn property(&self) -> &ForcingProperty {
        self.fp
    }

    fn nom_index(&self, k: &str) -> usize {
        self.noms.iter().position(|n| n == k).unwrap_or_else(|| panic!("`{k}` is not a nominal"))
    }

    fn labelled(&self, p: usize, k: &str, g: &Sentence) -> bool {
        self.fp.labels[p].contains(&Sentence::at(k, g.clone()))
    }

    /// Pairs of nominals joined by `a` at condition `p`, reading `a⁰` as
    /// the nominal atom and sequencing through named intermediates.
    fn relation(&mut self, p: usize, a: &Action) -> NomRel {
        if let Some(r) = self.rels.get(&(p, a.clone())) {
            return r.clone();
        }
        let n = self.noms.len();
        let r = match a {
            Action::Atom(l) => (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| {
                            let atom = Sentence::dia(Action::atom(l), Sentence::nom(&self.noms[j]));
                            self.labelled(p, &self.noms[i], &atom)
                        })
                        .collect()
                })
                .collect(),
            Action::Seq(a1, a2) => {
                let r1 = self.relation(p, a1);
                let r2 = self.relation(p, a2);
                compose(&r1, &r2)
            }
            Action::Union(a1, a2) => {
                let r1 = self.relation(p, a1);
                let r2 = self.relation(p, a2);
                union(&r1, &r2)
            }
            Action::Star(b) => {
                let zero: NomRel = (0..n)
                    .map(|i| {
                        (0..n).filter(|&j| self.labelled(p, &self.noms[i], &Sentence::nom(&self.noms[j]))).collect()
                    })
                    .collect();
                let rb = self.relation(p, b);
                union(&zero, &transitive(&rb))
            }
        };
        self.rels.insert((p, a.clone()), r.clone());
        r
    }

    /// `p ⊩ᵏ γ`.
    pub fn forces(&mut self, p: usize, k: &str, g: &Sentence) -> Verdict {
        let key = (p, k.to_string(), g.clone());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.compute(p, k, g);
        self.memo.insert(key, v);
        v
    }

    fn compute(&mut self, p: usize, k: &str, g: &Sentence) -> Verdict {
        if g.is_extended_atom() {
            return Verdict::from_bool(self.labelled(p, k, g));
        }
        match g {
            Sentence::Dia(a, body) => match &**body {
                Sentence::Nominal(k2) => {
                    let (i, j) = (self.nom_index(k), self.nom_index(k2));
                    Verdict::from_bool(self.relation(p, a)[i].contains(&j))
                }
                _ => {
                    let i = self.nom_index(k);
                    let targets: Vec<usize> = self.relation(p, a)[i].iter().copied().collect();
                    let mut v = Verdict::False;
                    for j in targets {
                        let k2 = self.noms[j].clone();
                        v = v.or(self.forces(p, &k2, body));
                        if v.is_true() {
                            break;
                        }
                    }
                    v
                }
            },
            Sentence::Not(body) => {
                let ups: Vec<usize> = self.fp.above(p).collect();
                let mut v = Verdict::False;
                for q in ups {
                    v = v.or(self.forces(q, k, body));
                    if v.is_true() {
                        break;
                    }
                }
                v.negate()
            }
            Sentence::Or(gs) => {
                let mut v = Verdict::False;
                for h in gs {
                    v = v.or(self.forces(p, k, h));
                    if v.is_true() {
                        break;
                    }
                }
                v
            }
            Sentence::At(k2, body) => self.forces(p, k2, body),
            Sentence::Store(z, body) => {
                let inst = substitute(&Substitution::new().nominal(z, k), body);
                self.forces(p, k, &inst)
            }
            Sentence::Exists(xs, body) => {
                let xs: Vec<Var> = xs.iter().cloned().collect();
                let Some(cands) = self.candidates(&xs, body) else {
                    return Verdict::BudgetExceeded;
                };
                let dims: Vec<usize> = cands.iter().map(Vec::len).collect();
                let mut v = Verdict::False;
                for t in crate::kripke::tuples(&dims) {
                    let mut theta = Substitution::new();
                    for ((x, c), &i) in xs.iter().zip(&cands).zip(&t) {
                        theta.map.insert(x.name.clone(), c[i].clone());
                    }
                    v = v.or(self.forces(p, k, &substitute(&theta, body)));
                    if v.is_true() {
                        break;
                    }
                }
                v
            }
            _ => unreachable!("extended atoms are handled above"),
        }
    }

    /// Instances for each variable: every nominal, or the rigid terms that
    /// occur plus enough unused ones to stand in for any other choice.
    fn candidates(&mut self, xs: &[Var], body: &Sentence) -> Option<Vec<Vec<SubstTarget>>> {
        let sig = &self.fp.sig;
        let nominal = sig.nominal_sort().to_string();
        let mut occurring: Vec<Term> = self.label_terms.clone();
        sentence_terms(body, &mut occurring);
        occurring.retain(|t| is_rigid_term(sig, t));
        let mut seen = TermUniverse::default();
        for t in &occurring {
            let _ = seen.add(sig, t);
        }
        let mut need: BTreeMap<&str, usize> = BTreeMap::new();
        for x in xs.iter().filter(|x| x.sort != nominal) {
            *need.entry(&x.sort).or_default() += 1;
        }
        if !need.is_empty() && self.universe.is_none() {
            let d = self.fp.term_depth;
            self.universe =
                Some((TermUniverse::generate(sig, &self.noms, d), TermUniverse::generate(sig, &self.noms, d + 1)));
        }
        let mut by_sort: BTreeMap<String, Vec<Term>> = BTreeMap::new();
        for (s, &count) in &need {
            let (small, big) = self.universe.as_ref().unwrap();
            let of_sort = |u: &TermUniverse| -> Vec<Term> {
                (0..u.len())
                    .filter(|&i| u.sorts[i] == HSort::Plain(s.to_string()) && is_rigid_term(sig, &u.terms[i]))
                    .map(|i| u.terms[i].clone())
                    .collect()
            };
            let mut list: Vec<Term> =
                (0..seen.len()).filter(|&i| seen.sorts[i] == HSort::Plain(s.to_string())).map(|i| seen.terms[i].clone()).collect();
            let fresh: Vec<Term> = of_sort(small).into_iter().filter(|t| seen.get(t).is_none()).take(count).collect();
            if fresh.len() < count && of_sort(big).len() > of_sort(small).len() {
                return None;
            }
            list.extend(fresh);
            by_sort.insert(s.to_string(), list);
        }
        Some(
            xs.iter()
                .map(|x| {
                    if x.sort == nominal {
                        self.noms.iter().map(|k| SubstTarget::Nominal(k.clone())).collect()
                    } else {
                        by_sort[&x.sort].iter().map(|t| SubstTarget::Term(t.clone())).collect()
                    }
                })
                .collect(),
        )
    }

    /// `∀q≥p ∃r≥q. r ⊩ᵏ γ`.
    pub fn weak_forces(&mut self, p: usize, k: &str, g: &Sentence) -> Verdict {
        let ups: Vec<usize> = self.fp.above(p).collect();
        let mut all = Verdict::True;
        for q in ups {
            let rs: Vec<usize> = self.fp.above(q).collect();
            let mut some = Verdict::False;
            for r in rs {
                some = some.or(self.forces(r, k, g));
                if some.is_true() {
                    break;
                }
            }
            all = all.and(some);
            if all == Verdict::False {
                break;
            }
        }
        all
    }
}

pub fn forces(fp: &ForcingProperty, p: usize, k: &str, g: &Sentence) -> Verdict {
    Forcer::new(fp).forces(p, k, g)
}

pub fn weak_forces(fp: &ForcingProperty, p: usize, k: &str, g: &Sentence) -> Verdict {
    Forcer::new(fp).weak_forces(p, k, g)
}

/// Decides `premises ⊨ goal` for a set of basic premises and a retrieved extended atom.
pub trait EntailmentOracle {
    fn entails(&mut self, sig: &HDSignature, premises: &[Sentence], goal: &Sentence) -> Verdict;
    /// Whether a `True` answer only means "no countermodel within budget".
    fn budget_bounded(&self) -> bool;
}

/// Exact entailment between basic sentences through the basic model,
/// which maps homomorphically into every model of the premises.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasicEntailment;

impl EntailmentOracle for BasicEntailment {
    fn entails(&mut self, sig: &HDSignature, premises: &[Sentence], goal: &Sentence) -> Verdict {
        let mut b = premises.to_vec();
        let (k, atom) = match goal {
            Sentence::At(k, g) => (k.clone(), (**g).clone()),
            _ => return Verdict::BudgetExceeded,
        };
        let mut terms = Vec::new();
        sentence_terms(&atom, &mut terms);
        b.extend(terms.into_iter().map(|t| Sentence::at(&k, Sentence::eq(t.clone(), t))));
        match basic_model(&b, sig, 0) {
            Ok(tm) => Verdict::from_bool(sat_global(&tm.model, goal)),
            Err(_) => Verdict::BudgetExceeded,
        }
    }

    fn budget_bounded(&self) -> bool {
        false
    }
}

/// Entailment as "no countermodel within budget".
#[derive(Debug, Clone, Default)]
pub struct BoundedEntailment {
    pub budget: SatBudget,
}

impl EntailmentOracle for BoundedEntailment {
    fn entails(&mut self, sig: &HDSignature, premises: &[Sentence], goal: &Sentence) -> Verdict {
        let mut t = premises.to_vec();
        t.push(match goal {
            Sentence::At(k, g) => Sentence::at(k, Sentence::not((**g).clone())),
            g => Sentence::not(g.clone()),
        });
        match bounded_sat(sig, &t, &self.budget) {
            SatOutcome::Model(_) => Verdict::False,
            SatOutcome::NoModel => Verdict::True,
            SatOutcome::BudgetExceeded => Verdict::BudgetExceeded,
        }
    }

    fn budget_bounded(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub item: u8,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub violations: Vec<AxiomViolation>,
    /// Item-4 obligations the oracle could not decide.
    pub undecided: usize,
    /// Item-4 verdicts only hold up to the oracle's budget.
    pub unverified_at_budget: bool,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Atoms item 4 is checked against: those under any label, every nominal,
/// and every one-step edge between nominals.
fn item4_atoms(fp: &ForcingProperty) -> BTreeSet<Sentence> {
    let mut out = BTreeSet::new();
    for l in &fp.labels {
        for s in l {
            match s {
                Sentence::At(_, g) => out.insert((**g).clone()),
                g => out.insert(g.clone()),
            };
        }
    }
    for k in fp.sig.nominals() {
        out.insert(Sentence::nom(k));
        for l in fp.sig.modalities() {
            out.insert(Sentence::dia(Action::atom(l), Sentence::nom(k)));
        }
    }
    out
}

/// Checks the four axioms of a forcing property: order with least element,
/// basic labels, monotone labels, and labels closed under entailment up the order.
pub fn check_forcing_axioms(fp: &ForcingProperty, oracle: &mut dyn EntailmentOracle) -> AxiomReport {
    let atoms = item4_atoms(fp);
    let goals: Vec<Sentence> =
        fp.sig.nominals().flat_map(|k| atoms.iter().map(move |g| Sentence::at(k, g.clone()))).collect();
    check_forcing_axioms_on(fp, oracle, &goals)
}

/// As `check_forcing_axioms`, with item 4 checked only for the given `@k γ`
/// goals; pool-generated properties can only add sentences of their pool.
pub fn check_forcing_axioms_on(fp: &ForcingProperty, oracle: &mut dyn EntailmentOracle, goals: &[Sentence]) -> AxiomReport {
    let mut report = AxiomReport { unverified_at_budget: oracle.budget_bounded(), ..Default::default() };
    let mut push = |item: u8, detail: String| report.violations.push(AxiomViolation { item, detail });
    let n = fp.len();
    let name = |i: usize| fp.names[i].as_str();
    if n == 0 {
        push(1, "no conditions".into());
        return report;
    }
    for i in 0..n {
        if !fp.leq[i][i] {
            push(1, format!("`{}` ≤ `{}` fails", name(i), name(i)));
        }
        if !fp.leq[0][i] {
            push(1, format!("`{}` is not above `{}`", name(i), name(0)));
        }
        for j in 0..n {
            if i != j && fp.leq[i][j] && fp.leq[j][i] {
                push(1, format!("`{}` and `{}` are distinct but equivalent", name(i), name(j)));
            }
            for k in 0..n {
                if fp.leq[i][j] && fp.leq[j][k] && !fp.leq[i][k] {
                    push(1, format!("`{}` ≤ `{}` ≤ `{}` is not transitive", name(i), name(j), name(k)));
                }
            }
        }
    }
    for i in 0..n {
        for s in fp.labels[i].iter().filter(|s| !s.is_basic()) {
            push(2, format!("f(`{}`) contains non-basic `{s}`", name(i)));
        }
    }
    for i in 0..n {
        for j in fp.above(i) {
            if let Some(s) = fp.labels[i].difference(&fp.labels[j]).next() {
                push(3, format!("`{}` ≤ `{}` but `{s}` is lost", name(i), name(j)));
            }
        }
    }
    let mut undecided = 0;
    let mut item4 = Vec::new();
    for p in 0..n {
        let premises: Vec<Sentence> = fp.labels[p].iter().cloned().collect();
        for goal in goals {
            if fp.above(p).any(|q| fp.labels[q].contains(goal)) {
                continue;
            }
            match oracle.entails(&fp.sig, &premises, goal) {
                Verdict::True => item4.push(format!("f(`{}`) entails `{goal}` but no condition above adds it", name(p))),
                Verdict::False => {}
                Verdict::BudgetExceeded => undecided += 1,
            }
        }
    }
    for d in item4 {
        report.violations.push(AxiomViolation { item: 4, detail: d });
    }
    report.undecided = undecided;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_sentence;

    fn at(s: &str) -> Sentence {
        parse_sentence(&fixtures::hpl_signature(), s).unwrap()
    }

    fn two_chain() -> ForcingProperty {
        let sig = fixtures::hpl_signature();
        let l0 = BTreeSet::from([at("@k k")]);
        let l1 = BTreeSet::from([at("@k k"), at("@k rho")]);
        ForcingProperty::from_hasse(&sig, &["0", "p1"], &[("0", "p1")], vec![l0, l1]).unwrap()
    }

    #[test]
    fn atoms_are_forced_by_membership() {
        let fp = two_chain();
        let rho = Sentence::prop("rho");
        assert_eq!(forces(&fp, 1, "k", &rho), Verdict::True);
        assert_eq!(forces(&fp, 0, "k", &rho), Verdict::False);
        assert_eq!(forces(&fp, 0, "k", &Sentence::not(rho.clone())), Verdict::False);
        assert_eq!(weak_forces(&fp, 0, "k", &rho), Verdict::True);
    }

    #[test]
    fn axioms_hold_on_the_chain() {
        let r = check_forcing_axioms(&two_chain(), &mut BasicEntailment);
        assert!(r.passes(), "{r:?}");
    }

    #[test]
    fn monotonicity_violation_is_item_3() {
        let mut fp = two_chain();
        fp.labels[1].remove(&at("@k rho"));
        fp.labels[0].insert(at("@k rho"));
        fp.labels[1].remove(&at("@k k"));
        let r = check_forcing_axioms(&fp, &mut BasicEntailment);
        assert!(r.violations.iter().any(|v| v.item == 3));
    }

    #[test]
    fn missing_reflexive_nominal_is_item_4() {
        let sig = fixtures::hpl_signature();
        let fp = ForcingProperty::from_hasse(&sig, &["0"], &[], vec![BTreeSet::new()]).unwrap();
        let r = check_forcing_axioms(&fp, &mut BasicEntailment);
        assert!(r.violations.iter().any(|v| v.item == 4 && v.detail.contains("@k k")), "{r:?}");
    }

    #[test]
    fn union_and_star_use_nominal_paths() {
        let sig = fixtures::chain3_signature();
        let noms: Vec<String> = sig.nominals().cloned().collect();
        let p = |s: &str| parse_sentence(&sig, s).unwrap();
        let edge = format!("@{} <lambda> {}", noms[0], noms[1]);
        let edge2 = format!("@{} <lambda> {}", noms[1], noms[2]);
        let fp = ForcingProperty::from_hasse(&sig, &["0"], &[], vec![BTreeSet::from([p(&edge), p(&edge2)])]).unwrap();
        let mut f = Forcer::new(&fp);
        let star = p(&format!("<lambda*> {}", noms[2]));
        assert_eq!(f.forces(0, &noms[0], &star), Verdict::True);
        let seq = p(&format!("<lambda;lambda> {}", noms[2]));
        assert_eq!(f.forces(0, &noms[0], &seq), Verdict::True);
        assert_eq!(f.forces(0, &noms[1], &seq), Verdict::False);
        // a⁰ is the nominal atom, which is not labelled here
        assert_eq!(f.forces(0, &noms[0], &p(&format!("<lambda*> {}", noms[0]))), Verdict::False);
        let u = p(&format!("<lambda | lambda;lambda> {}", noms[2]));
        assert_eq!(f.forces(0, &noms[0], &u), Verdict::True);
    }
}
