use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::forcing::{instances, LazyOracle, SatBudget, SatOracle, SatOutcome};
use crate::kripke::{basic_model, pinned_sort, reduct, sat_global, sat_theory, tuples, Kripke, TermUniverse};
use crate::signature::{HDSignature, HSort, SignatureMorphism};
use crate::syntax::{check, fresh_name, print_term, substitute, Action, Sentence, SubstTarget, Substitution, Symbol, Term, Var};

use super::local::{locally_realizes, LocalOutcome, OmitError};
use super::types::{omits, OmitCertificate, TypeSpec};

/// Knobs for one run of the chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmitConfig {
    pub budget: SatBudget,
    /// Depth of the ground terms the chain instantiates and decides.
    pub term_depth: usize,
    /// Fresh constants per sort occurring in some type.
    pub constants: usize,
    /// Probes for the local-omission pre-check, over `Δ[C]`.
    pub probe_pool: Vec<Sentence>,
}

impl Default for OmitConfig {
    fn default() -> Self {
        OmitConfig { budget: SatBudget::default(), term_depth: 2, constants: 1, probe_pool: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainStep {
    /// `@m ¬θ(γ)`, normalized, added to keep `θ` from realizing the type.
    Witness { ty: String, theta: Vec<(String, String)>, index: usize, sentence: Sentence },
    /// An extended atom decided one way or the other.
    Atom { sentence: Sentence, positive: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeAudit {
    pub ty: String,
    pub precheck: LocalOutcome,
    /// `Ok` when the output model omits the type, otherwise the realizing assignment.
    pub omitted: Result<OmitCertificate, Vec<(String, String)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmitAudit {
    pub satisfies_theory: bool,
    pub types: Vec<TypeAudit>,
    pub truncated: bool,
    pub oracle_calls: usize,
    /// Atoms the oracle left open; they were decided negatively.
    pub undecided: Vec<Sentence>,
    pub budget: SatBudget,
    pub term_depth: usize,
}

impl OmitAudit {
    pub fn passes(&self) -> bool {
        self.satisfies_theory && self.types.iter().all(|t| t.omitted.is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmitRun {
    pub model: Kripke,
    pub constants: Vec<Var>,
    pub steps: Vec<ChainStep>,
    pub audit: OmitAudit,
}

/// The serializable part of a run: constants, decision sequence and audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmitLog {
    pub constants: Vec<Var>,
    pub steps: Vec<ChainStep>,
    pub audit: OmitAudit,
}

impl OmitRun {
    pub fn log(&self) -> OmitLog {
        OmitLog { constants: self.constants.clone(), steps: self.steps.clone(), audit: self.audit.clone() }
    }
}

/// `¬¬φ ↦ φ` at the top, under retrieves and under existentials.
fn strip(s: Sentence) -> Sentence {
    match s {
        Sentence::Not(a) => match *a {
            Sentence::Not(b) => strip(*b),
            a => Sentence::Not(Box::new(a)),
        },
        Sentence::At(k, a) => Sentence::At(k, Box::new(strip(*a))),
        Sentence::Exists(xs, a) => Sentence::Exists(xs, Box::new(strip(*a))),
        s => s,
    }
}

/// Ground instances of a normalized witness body, or the body itself when none exist.
fn henkin(sig: &HDSignature, s: Sentence, depth: usize) -> Vec<Sentence> {
    match s {
        Sentence::Exists(xs, body) => {
            let inst: Vec<Sentence> = instances(sig, &xs, &body, depth).into_iter().map(strip).collect();
            if inst.is_empty() {
                vec![Sentence::Exists(xs, body)]
            } else {
                inst
            }
        }
        s => vec![s],
    }
}

fn show_theta(theta: &Substitution) -> Vec<(String, String)> {
    theta
        .map
        .iter()
        .map(|(x, t)| {
            let v = match t {
                SubstTarget::Nominal(k) => k.clone(),
                SubstTarget::Term(t) => print_term(t),
            };
            (x.clone(), v)
        })
        .collect()
}

fn fresh_constants(sig: &HDSignature, types: &[TypeSpec], n: usize) -> Vec<Var> {
    let sorts: BTreeSet<&str> = types.iter().flat_map(|t| t.vars.iter().map(|v| v.sort.as_str())).collect();
    let mut avoid: BTreeSet<String> = sig.nominals().cloned().chain(sig.body.ops.keys().cloned()).collect();
    let mut out = Vec::new();
    for s in sorts {
        for i in 0..n {
            let base = if s == sig.nominal_sort() { format!("c{i}") } else { format!("c{i}_{s}") };
            let name = fresh_name(&base, &avoid);
            avoid.insert(name.clone());
            out.push(Var::new(&name, s));
        }
    }
    out
}

struct Chain<'a> {
    sig_c: &'a HDSignature,
    oracle: LazyOracle,
    cond: Vec<Sentence>,
    model: Kripke,
    calls: usize,
}

impl Chain<'_> {
    /// Adds `s` when it stays satisfiable, trusting the current model first.
    fn try_add(&mut self, s: &Sentence) -> SatOutcome {
        if sat_global(&self.model, s) {
            self.cond.push(s.clone());
            return SatOutcome::Model(Box::new(self.model.clone()));
        }
        let mut probe = self.cond.clone();
        probe.push(s.clone());
        self.calls += 1;
        let out = self.oracle.satisfiable(&probe);
        if let SatOutcome::Model(m) = &out {
            self.model = (**m).clone();
            self.cond.push(s.clone());
        }
        out
    }

    fn nominals(&self) -> Vec<String> {
        self.sig_c.nominals().cloned().collect()
    }
}

/// Every `θ` from the type's variables to nominals of `Δ[C]` or ground rigid terms.
fn ground_substitutions(sig_c: &HDSignature, u: &TermUniverse, ts: &TypeSpec) -> Vec<Substitution> {
    let pools: Vec<Vec<SubstTarget>> = ts
        .vars
        .iter()
        .map(|x| {
            if x.sort == sig_c.nominal_sort() {
                sig_c.nominals().map(|k| SubstTarget::Nominal(k.clone())).collect()
            } else {
                let want = HSort::Plain(x.sort.clone());
                (0..u.len()).filter(|&i| u.sorts[i] == want).map(|i| SubstTarget::Term(u.terms[i].clone())).collect()
            }
        })
        .collect();
    let dims: Vec<usize> = pools.iter().map(Vec::len).collect();
    tuples(&dims)
        .map(|t| Substitution {
            map: ts.vars.iter().zip(&pools).zip(&t).map(|((x, p), &i)| (x.name.clone(), p[i].clone())).collect(),
        })
        .collect()
}

/// Candidate atoms in decision order: nominal identities, edges, equations, relations.
fn atoms(sig_c: &HDSignature, u: &TermUniverse) -> Vec<(Sentence, Option<(usize, usize)>)> {
    let noms: Vec<String> = sig_c.nominals().cloned().collect();
    let home = noms[0].clone();
    let mut out = Vec::new();
    for (i, a) in noms.iter().enumerate() {
        for b in &noms[i + 1..] {
            out.push((Sentence::at(a, Sentence::nom(b)), None));
        }
    }
    for l in sig_c.modalities() {
        for a in &noms {
            for b in &noms {
                out.push((Sentence::at(a, Sentence::dia(Action::atom(l), Sentence::nom(b))), None));
            }
        }
    }
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if u.sorts[i] == u.sorts[j] {
                out.push((Sentence::at(&home, Sentence::eq(u.terms[i].clone(), u.terms[j].clone())), Some((i, j))));
            }
        }
    }
    for (r, args) in &sig_c.body.rels {
        let rigid = sig_c.is_rigid_rel(r);
        for k in &noms {
            if rigid && k != &home {
                continue;
            }
            let pools: Vec<Vec<usize>> = args
                .iter()
                .map(|s| {
                    let want = pinned_sort(sig_c, k, s);
                    (0..u.len()).filter(|&i| u.sorts[i] == want).collect()
                })
                .collect();
            let dims: Vec<usize> = pools.iter().map(Vec::len).collect();
            for t in tuples(&dims) {
                let ts: Vec<Term> = t.iter().zip(&pools).map(|(&i, p)| u.terms[p[i]].clone()).collect();
                let sym = if rigid { Symbol::plain(r) } else { Symbol::at(k, r) };
                out.push((Sentence::at(k, Sentence::Rel(sym, ts)), None));
            }
        }
    }
    out.into_iter().filter(|(s, _)| check(sig_c, s).is_ok()).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let r = self.find(self.0[i]);
            self.0[i] = r;
        }
        self.0[i]
    }
}

/// Builds a model of `theory` omitting every type: witnesses against each
/// ground instantiation first, then a positive-first decision of every
/// extended atom over `Δ[C]`, then the basic model of the positive atoms.
pub fn omitting_model(
    sig: &HDSignature,
    theory: &[Sentence],
    types: &[TypeSpec],
    cfg: &OmitConfig,
) -> Result<OmitRun, OmitError> {
    for ts in types {
        ts.check(sig).map_err(|e| OmitError::Model(e.to_string()))?;
    }
    let consts = fresh_constants(sig, types, cfg.constants);
    let sig_c = sig.extend(&consts).map_err(|e| OmitError::Model(e.to_string()))?;
    let mut oracle = LazyOracle::new(&sig_c, theory, &cfg.budget);
    let model = match oracle.satisfiable(&[]) {
        SatOutcome::Model(m) => *m,
        SatOutcome::NoModel => return Err(OmitError::Unsatisfiable(cfg.budget.max_worlds)),
        SatOutcome::BudgetExceeded => return Err(OmitError::Budget("searching a model of the theory".into())),
    };
    let mut prechecks = Vec::new();
    for ts in types {
        let out = locally_realizes(&sig_c, theory, ts, &consts, &cfg.probe_pool, &cfg.budget)?;
        prechecks.push(out);
    }
    let mut ch = Chain { sig_c: &sig_c, oracle, cond: Vec::new(), model, calls: 1 };
    let u = TermUniverse::generate(&sig_c, &ch.nominals(), cfg.term_depth);
    let mut steps = Vec::new();

    for ts in types {
        for theta in ground_substitutions(&sig_c, &u, ts) {
            let mut placed = false;
            let mut exceeded = false;
            'gamma: for (index, g) in ts.sentences.iter().enumerate() {
                let neg = strip(Sentence::not(substitute(&theta, g)));
                for m in ch.nominals() {
                    for cand in henkin(&sig_c, Sentence::at(&m, neg.clone()), cfg.term_depth) {
                        match ch.try_add(&cand) {
                            SatOutcome::Model(_) => {
                                steps.push(ChainStep::Witness {
                                    ty: ts.name.clone(),
                                    theta: show_theta(&theta),
                                    index,
                                    sentence: cand,
                                });
                                placed = true;
                                break 'gamma;
                            }
                            SatOutcome::BudgetExceeded => exceeded = true,
                            SatOutcome::NoModel => {}
                        }
                    }
                }
            }
            if !placed {
                let why = if exceeded { "budget exceeded" } else { "no satisfiable witness" };
                return Err(OmitError::Step {
                    step: steps.len(),
                    detail: format!("type `{}` under {:?}: {why}", ts.name, show_theta(&theta)),
                });
            }
        }
    }

    let mut uf = UnionFind((0..u.len()).collect());
    let mut undecided = Vec::new();
    let mut positive = Vec::new();
    for (atom, pair) in atoms(&sig_c, &u) {
        if let Some((i, j)) = pair {
            let (ri, rj) = (uf.find(i), uf.find(j));
            if ri == rj {
                continue;
            }
            if let SatOutcome::Model(_) = ch.try_add(&atom) {
                uf.0[ri.max(rj)] = ri.min(rj);
                positive.push(atom.clone());
                steps.push(ChainStep::Atom { sentence: atom, positive: true });
                continue;
            }
        } else if let SatOutcome::Model(_) = ch.try_add(&atom) {
            positive.push(atom.clone());
            steps.push(ChainStep::Atom { sentence: atom, positive: true });
            continue;
        }
        let neg = Sentence::not(atom.clone());
        let mut probe = ch.cond.clone();
        probe.push(atom.clone());
        if ch.oracle.satisfiable(&probe) == SatOutcome::BudgetExceeded {
            undecided.push(atom.clone());
        }
        ch.cond.push(neg);
        steps.push(ChainStep::Atom { sentence: atom, positive: false });
    }

    let tm = basic_model(&positive, &sig_c, cfg.term_depth).map_err(|e| OmitError::Model(e.to_string()))?;
    let chi = SignatureMorphism::inclusion(sig, &sig_c).map_err(|e| OmitError::Model(e.to_string()))?;
    let model = reduct(&tm.model, &chi).map_err(|e| OmitError::Model(e.to_string()))?;
    let mut audits = Vec::new();
    for (ts, precheck) in types.iter().zip(prechecks) {
        let omitted = match omits(&model, ts).map_err(|e| OmitError::Model(e.to_string()))? {
            Ok(cert) => Ok(cert),
            Err(env) => Err(env.iter().map(|(x, v)| (x.clone(), format!("{v:?}"))).collect()),
        };
        audits.push(TypeAudit { ty: ts.name.clone(), precheck, omitted });
    }
    let audit = OmitAudit {
        satisfies_theory: sat_theory(&model, theory),
        types: audits,
        truncated: tm.truncated,
        oracle_calls: ch.calls,
        undecided,
        budget: cfg.budget.clone(),
        term_depth: cfg.term_depth,
    };
    Ok(OmitRun { model, constants: consts, steps, audit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kripke::{is_constructor_based, Reach};
    use crate::omitting::types::{fixed_types, nominal_type};

    #[test]
    fn strip_removes_double_negations() {
        let s = Sentence::not(Sentence::not(Sentence::at("k", Sentence::not(Sentence::not(Sentence::prop("rho"))))));
        assert_eq!(strip(s), Sentence::at("k", Sentence::prop("rho")));
    }

    #[test]
    fn empty_theory_omits_the_nominal_type() {
        let sig = fixtures::hpl_signature();
        let run = omitting_model(&sig, &[], &[nominal_type(&sig, "x")], &OmitConfig::default()).unwrap();
        assert_eq!(run.model.n_worlds(), 1);
        assert!(run.audit.passes(), "{:?}", run.audit);
        assert_eq!(run.audit.types[0].precheck, LocalOutcome::OmittedAtBudget);
    }

    #[test]
    fn no_types_degenerates_to_a_generic_model() {
        let sig = fixtures::hpl_signature();
        let t = [Sentence::at("k", Sentence::prop("rho"))];
        let run = omitting_model(&sig, &t, &[], &OmitConfig::default()).unwrap();
        assert!(sat_theory(&run.model, &t));
        assert!(run.audit.passes());
    }

    #[test]
    fn lists_become_constructor_based() {
        let sig = fixtures::list_signature();
        let p = sig.partition(&fixtures::list_constructors()).unwrap();
        let fx = fixed_types(&sig, &p, 2, &[]);
        let types = [fx.nominal, fx.constructor[0].clone()];
        let cfg = OmitConfig { budget: SatBudget::default().with_carrier("Elt", 1), ..OmitConfig::default() };
        let run = omitting_model(&sig, &fixtures::list_theory(), &types, &cfg).unwrap();
        assert!(run.audit.passes(), "{:?}", run.audit);
        assert_eq!(is_constructor_based(&run.model, &p, 2), Reach::Yes);
        assert!(sat_theory(&run.model, &fixtures::list_ground_theory(2)));
    }

    #[test]
    fn unsatisfiable_theory_fails_up_front() {
        let sig = fixtures::hpl_signature();
        let r = omitting_model(&sig, &[Sentence::bot()], &[], &OmitConfig::default());
        assert!(matches!(r, Err(OmitError::Unsatisfiable(_))));
    }
}
