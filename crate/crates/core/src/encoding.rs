//! Flattening a family of Kripke structures into one structure over `Δ₊`,
//! where the old worlds become elements of a rigid sort and flexible
//! symbols take the old world as an extra first argument.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{sat_global, Kripke};
use crate::signature::HDSignature;
use crate::syntax::{fresh_name, rigidify_term, substitute, Action, Sentence, Substitution, Symbol, Term, Var};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("signature outside the encodable shape: {0}")]
    Restriction(String),
    #[error("cannot encode {0}")]
    Unsupported(String),
    #[error("local rigidity axiom fails: {0}")]
    Gamma(String),
    #[error("{0}")]
    Model(String),
}

/// `Δ₊` together with the rigidity axioms `Γ` and the world variable `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlusBundle {
    pub source: HDSignature,
    /// `Δ₊`: no nominals, rigid sorts for worlds and elements, flexible rest.
    pub plus: HDSignature,
    /// `Δ₊[z]`.
    pub plus_z: HDSignature,
    /// The rigid sort standing for the source worlds.
    pub world_sort: String,
    /// The single rigid sort of the source.
    pub elem_sort: String,
    pub z: String,
    pub gamma: Vec<Sentence>,
}

/// Builds `Δ₊` for a signature with exactly one sort, rigid, no rigid
/// operations and binary modalities.
pub fn build_plus(sig: &HDSignature) -> Result<PlusBundle, EncodeError> {
    let sorts: Vec<&String> = sig.body.sorts.iter().collect();
    let [elem] = sorts.as_slice() else {
        return Err(EncodeError::Restriction(format!("expected one sort, found {}", sorts.len())));
    };
    if !sig.is_rigid_sort(elem) {
        return Err(EncodeError::Restriction(format!("sort `{elem}` is flexible")));
    }
    if let Some(o) = sig.rigid.ops.keys().next() {
        return Err(EncodeError::Restriction(format!("operation `{o}` is rigid")));
    }
    if let Some((l, _)) = sig.nominal_sig.rels.iter().find(|(_, a)| a.len() != 2) {
        return Err(EncodeError::Restriction(format!("modality `{l}` is not binary")));
    }
    let names: BTreeSet<String> = sig
        .nominals()
        .chain(sig.modalities())
        .chain(sig.body.sorts.iter())
        .chain(sig.body.ops.keys())
        .chain(sig.body.rels.keys())
        .cloned()
        .collect();
    let ws = fresh_name("W", &names);
    let z = fresh_name("z", &names);
    let elem = elem.to_string();
    let mut plus = HDSignature::new().sort(&ws, true).sort(&elem, true);
    for k in sig.nominals() {
        plus = plus.op(k, &[], &ws, false);
    }
    for l in sig.modalities() {
        plus = plus.rel(l, &[&ws, &ws], false);
    }
    for (o, d) in &sig.body.ops {
        let args: Vec<&str> = std::iter::once(ws.as_str()).chain(d.args.iter().map(String::as_str)).collect();
        plus = plus.op(o, &args, &d.result, false);
    }
    let mut gamma = Vec::new();
    for (r, a) in &sig.body.rels {
        let args: Vec<&str> = std::iter::once(ws.as_str()).chain(a.iter().map(String::as_str)).collect();
        plus = plus.rel(r, &args, false);
        if sig.is_rigid_rel(r) {
            let ys: Vec<Var> = (0..a.len()).map(|i| Var::new(&format!("y{i}"), &elem)).collect();
            let at = |x: &str| {
                let args = std::iter::once(Term::cnst(x)).chain(ys.iter().map(|y| Term::cnst(&y.name))).collect();
                Sentence::rel(r, args)
            };
            let vars = [Var::new("x1", &ws), Var::new("x2", &ws)].into_iter().chain(ys.iter().cloned());
            gamma.push(Sentence::forall(vars, Sentence::iff(at("x1"), at("x2"))));
        }
    }
    let plus_z = plus.clone().nominal(&z);
    Ok(PlusBundle { source: sig.clone(), plus, plus_z, world_sort: ws, elem_sort: elem, z, gamma })
}

impl PlusBundle {
    /// `k` as a `W`-term: `@z k` for a nominal, the variable itself otherwise.
    fn world_term(&self, k: &str, bound: &BTreeSet<String>) -> Term {
        if self.source.is_nominal(k) && !bound.contains(k) {
            Term::at_app(&self.z, k, vec![])
        } else {
            Term::cnst(k)
        }
    }

    fn term(&self, t: &Term, bound: &BTreeSet<String>) -> Result<Term, EncodeError> {
        let Some(k) = &t.op.at else {
            if t.args.is_empty() && !self.source.body.ops.contains_key(&t.op.name) {
                return Ok(t.clone());
            }
            return Err(EncodeError::Unsupported(format!("unpinned term `{t}`")));
        };
        let mut args = vec![self.world_term(k, bound)];
        for a in &t.args {
            args.push(self.term(a, bound)?);
        }
        Ok(Term::at_app(&self.z, &t.op.name, args))
    }

    /// `t⁺` for a rigid term over `Δ[X]`.
    pub fn encode_term(&self, t: &Term) -> Result<Term, EncodeError> {
        self.term(t, &BTreeSet::new())
    }

    fn at(&self, k: &str, s: &Sentence, bound: &BTreeSet<String>) -> Result<Sentence, EncodeError> {
        let pin = |t: &Term| self.term(&rigidify_term(&self.source, k, t), bound);
        Ok(match s {
            Sentence::Nominal(k2) => {
                Sentence::at(&self.z, Sentence::eq(self.world_term(k, bound), self.world_term(k2, bound)))
            }
            Sentence::Dia(Action::Atom(l), g) => match &**g {
                Sentence::Nominal(k2) => Sentence::at(
                    &self.z,
                    Sentence::rel(l, vec![self.world_term(k, bound), self.world_term(k2, bound)]),
                ),
                _ => return Err(EncodeError::Unsupported(format!("possibility over a non-nominal in `{s}`"))),
            },
            Sentence::Dia(..) => return Err(EncodeError::Unsupported(format!("structured action in `{s}`"))),
            Sentence::Eq(a, b) => Sentence::eq(pin(a)?, pin(b)?),
            Sentence::Rel(sym, ts) => {
                let w = sym.at.as_deref().unwrap_or(k);
                let mut args = vec![self.world_term(w, bound)];
                for t in ts {
                    args.push(pin(t)?);
                }
                Sentence::Rel(Symbol::at(&self.z, &sym.name), args)
            }
            Sentence::Or(gs) => Sentence::Or(gs.iter().map(|g| self.at(k, g, bound)).collect::<Result<_, _>>()?),
            Sentence::Not(g) => Sentence::not(self.at(k, g, bound)?),
            Sentence::Exists(xs, g) => {
                let mut inner = bound.clone();
                let mut ys = BTreeSet::new();
                for x in xs {
                    if x.sort == self.source.nominal_sort() {
                        inner.insert(x.name.clone());
                        ys.insert(Var::new(&x.name, &self.world_sort));
                    } else {
                        inner.remove(&x.name);
                        ys.insert(x.clone());
                    }
                }
                Sentence::Exists(ys, Box::new(self.at(k, g, &inner)?))
            }
            Sentence::At(k2, g) => self.at(k2, g, bound)?,
            Sentence::Store(x, g) => self.at(k, &substitute(&Substitution::new().nominal(x, k), g), bound)?,
        })
    }

    /// `(@k φ)⁺`, a rigid sentence over `Δ₊[z]`.
    pub fn encode_at(&self, k: &str, phi: &Sentence) -> Result<Sentence, EncodeError> {
        self.encode_at_open(k, phi, &[])
    }

    /// `encode_at` for a sentence over `Δ[X]`; nominal variables of `X` become `W`-variables.
    pub fn encode_at_open(&self, k: &str, phi: &Sentence, vars: &[Var]) -> Result<Sentence, EncodeError> {
        let bound = vars.iter().filter(|v| v.sort == self.source.nominal_sort()).map(|v| v.name.clone()).collect();
        self.at(k, phi, &bound)
    }

    /// `φ⁺ = ∀x. (@x φ)⁺` with `x` fresh.
    pub fn encode(&self, phi: &Sentence) -> Result<Sentence, EncodeError> {
        let mut avoid = crate::syntax::names_in(phi);
        avoid.extend(self.plus_z.body.ops.keys().cloned());
        avoid.insert(self.z.clone());
        let x = fresh_name("x", &avoid);
        let body = self.at(&x, phi, &BTreeSet::from([x.clone()]))?;
        Ok(Sentence::forall([Var::new(&x, &self.world_sort)], body))
    }

    /// `m` with `z` naming world `w`.
    pub fn at_world(&self, m: &Kripke, w: usize) -> Kripke {
        let mut out = m.clone();
        out.sig = self.plus_z.clone();
        out.set_nominal(&self.z, w);
        out
    }

    /// The source structure sitting at world `w` of a model of `Γ`.
    pub fn decode(&self, m: &Kripke, w: usize) -> Result<Kripke, EncodeError> {
        if let Some(g) = self.gamma.iter().find(|g| !sat_global(m, g)) {
            return Err(EncodeError::Gamma(g.to_string()));
        }
        if w >= m.n_worlds() {
            return Err(EncodeError::Model(format!("no world {w}")));
        }
        let worlds: Vec<&str> = m.carrier(w, &self.world_sort).iter().map(String::as_str).collect();
        if worlds.is_empty() {
            return Err(EncodeError::Model(format!("sort `{}` is empty", self.world_sort)));
        }
        let src = &self.source;
        let mut out = Kripke::new(src, &worlds);
        for k in src.nominals() {
            out.set_nominal(k, m.apply_op(w, k, &[]));
        }
        let n = worlds.len();
        for l in src.modalities() {
            for a in 0..n {
                for b in 0..n {
                    if m.holds_rel(w, l, &[a, b]) {
                        out.add_edge(l, a, b);
                    }
                }
            }
        }
        let elems: Vec<&str> = m.carrier(w, &self.elem_sort).iter().map(String::as_str).collect();
        out.set_carrier(&self.elem_sort, &elems);
        let with = |v: usize, a: &[usize]| -> Vec<usize> { std::iter::once(v).chain(a.iter().copied()).collect() };
        for o in src.body.ops.keys() {
            for v in 0..n {
                out.fill_op(v, o, |a| m.apply_op(w, o, &with(v, a)));
            }
        }
        for r in src.body.rels.keys() {
            let vs = if src.is_rigid_rel(r) { 0..1 } else { 0..n };
            for v in vs {
                out.fill_rel(v, r, |a| m.holds_rel(w, r, &with(v, a)));
            }
        }
        Ok(out)
    }

    /// One `Δ₊`-world per member of a family sharing worlds and carrier,
    /// so that decoding world `i` gives back member `i`.
    pub fn assemble(&self, family: &[Kripke]) -> Result<Kripke, EncodeError> {
        let first = family.first().ok_or_else(|| EncodeError::Model("empty family".into()))?;
        let es = &self.elem_sort;
        for m in family {
            if m.worlds != first.worlds || m.carrier(0, es) != first.carrier(0, es) {
                return Err(EncodeError::Model("family members differ in worlds or carrier".into()));
            }
        }
        let names: Vec<String> = (0..family.len()).map(|i| format!("w{i}")).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut out = Kripke::new(&self.plus, &names);
        let ws: Vec<&str> = first.worlds.iter().map(String::as_str).collect();
        let elems: Vec<&str> = first.carrier(0, es).iter().map(String::as_str).collect();
        out.set_carrier(&self.world_sort, &ws).set_carrier(es, &elems);
        for (i, m) in family.iter().enumerate() {
            for k in self.source.nominals() {
                let v = m.nominals[k];
                out.fill_op(i, k, |_| v);
            }
            for l in self.source.modalities() {
                out.fill_rel(i, l, |a| m.edge(l, a[0], a[1]));
            }
            for o in self.source.body.ops.keys() {
                out.fill_op(i, o, |a| m.apply_op(a[0], o, &a[1..]));
            }
            for r in self.source.body.rels.keys() {
                out.fill_rel(i, r, |a| m.holds_rel(a[0], r, &a[1..]));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::{parse_sentence, parse_term, print_sentence, print_term};

    fn bundle() -> PlusBundle {
        build_plus(&fixtures::enc_signature()).unwrap()
    }

    #[test]
    fn ops_gain_a_world_argument() {
        let b = bundle();
        assert_eq!(b.plus.body.ops["f"].args, vec![b.world_sort.clone(), "D".to_string()]);
        assert_eq!(b.gamma.len(), 1);
        let no_rigid = fixtures::enc_signature();
        let mut no_rigid = no_rigid.clone();
        no_rigid.rigid.rels.clear();
        assert!(build_plus(&no_rigid).unwrap().gamma.is_empty());
    }

    #[test]
    fn rigid_ops_and_extra_sorts_are_rejected() {
        let sig = fixtures::enc_signature().op("r", &[], "D", true);
        assert!(matches!(build_plus(&sig), Err(EncodeError::Restriction(_))));
        let sig = fixtures::enc_signature().sort("E", true);
        assert!(matches!(build_plus(&sig), Err(EncodeError::Restriction(_))));
    }

    #[test]
    fn term_clauses() {
        let b = bundle();
        let sig = fixtures::enc_signature().op("x", &[], "D", true);
        let x = parse_term(&sig, "x").unwrap();
        assert_eq!(b.encode_term(&x).unwrap(), x);
        let t = parse_term(&sig, "(at k0 f)((at k1 f)(x))").unwrap();
        assert_eq!(print_term(&b.encode_term(&t).unwrap()), "(at z f)((at z k0), (at z f)((at z k1), x))");
    }

    #[test]
    fn sentence_clauses() {
        let b = bundle();
        let sig = fixtures::enc_signature();
        let p = |s: &str| parse_sentence(&sig, s).unwrap();
        assert_eq!(print_sentence(&b.encode_at("k0", &p("k1")).unwrap()), "@z (at z k0) = (at z k1)");
        let neg = b.encode_at("k0", &p("~k1")).unwrap();
        assert_eq!(neg, Sentence::not(b.encode_at("k0", &p("k1")).unwrap()));
        assert_eq!(b.encode_at("k0", &p("@k1 <lambda> k0")).unwrap(), b.encode_at("k1", &p("<lambda> k0")).unwrap());
        assert!(matches!(b.encode_at("k0", &p("<lambda> P(c)")), Err(EncodeError::Unsupported(_))));
    }

    #[test]
    fn decode_inverts_assemble() {
        let b = bundle();
        let fam = fixtures::enc_family();
        let m = b.assemble(&fam).unwrap();
        for (i, member) in fam.iter().enumerate() {
            assert_eq!(&b.decode(&m, i).unwrap(), member);
        }
    }

    #[test]
    fn gamma_breach_is_rejected() {
        let b = bundle();
        let mut m = b.assemble(&fixtures::enc_family()).unwrap();
        m.fill_rel(0, "P", |a| a[0] == 0);
        assert!(matches!(b.decode(&m, 0), Err(EncodeError::Gamma(_))));
    }

    #[test]
    fn falsum_encodes_to_an_unsatisfiable_sentence() {
        let b = bundle();
        let m = b.assemble(&fixtures::enc_family()).unwrap();
        let s = b.encode(&Sentence::bot()).unwrap();
        assert!(!sat_global(&b.at_world(&m, 0), &s));
    }
}
