use serde::{Deserialize, Serialize};

use crate::kripke::{expansions, sat_global, Env, Kripke, ModelError};
use crate::signature::{ConstructorPartition, HDSignature};
use crate::syntax::{check, Sentence, SyntaxError, Term, Var};

/// A type: sentences over `Δ[X]` in the finitely many variables `X`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSpec {
    pub name: String,
    pub vars: Vec<Var>,
    pub sentences: Vec<Sentence>,
}

impl TypeSpec {
    pub fn new(name: &str, vars: Vec<Var>, sentences: Vec<Sentence>) -> Self {
        TypeSpec { name: name.to_string(), vars, sentences }
    }

    /// Sort-checks every sentence over `Δ[X]`.
    pub fn check(&self, sig: &HDSignature) -> Result<(), SyntaxError> {
        let sx = sig.extend(&self.vars).map_err(|e| SyntaxError::Sort(e.to_string()))?;
        self.sentences.iter().try_for_each(|s| check(&sx, s))
    }
}

/// An expansion of `m` to `Δ[X]` satisfying every sentence of the type.
pub fn realizes(m: &Kripke, ts: &TypeSpec) -> Result<Option<Env>, ModelError> {
    for (env, e) in expansions(m, &ts.vars)? {
        if ts.sentences.iter().all(|s| sat_global(&e, s)) {
            return Ok(Some(env));
        }
    }
    Ok(None)
}

/// Per expansion, the first sentence of the type it falsifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmitCertificate {
    pub refuted: Vec<(Vec<(String, String)>, usize)>,
}

fn show_env(m: &Kripke, ts: &TypeSpec, env: &Env) -> Vec<(String, String)> {
    env.iter()
        .zip(&ts.vars)
        .map(|((x, v), var)| {
            let shown = match v {
                crate::kripke::Val::World(w) => m.worlds[*w].clone(),
                crate::kripke::Val::Elem(e) => m.carrier(0, &var.sort)[*e].clone(),
            };
            (x.clone(), shown)
        })
        .collect()
}

/// `Ok` with a certificate when `m` omits the type, `Err` with the realizing expansion otherwise.
pub fn omits(m: &Kripke, ts: &TypeSpec) -> Result<Result<OmitCertificate, Env>, ModelError> {
    let mut refuted = Vec::new();
    for (env, e) in expansions(m, &ts.vars)? {
        match ts.sentences.iter().position(|s| !sat_global(&e, s)) {
            Some(i) => refuted.push((show_env(m, ts, &env), i)),
            None => return Ok(Err(env)),
        }
    }
    Ok(Ok(OmitCertificate { refuted }))
}

/// Linear constructor terms of sort `s` up to `depth`: every loose-sorted
/// leaf is a distinct variable, numbered left to right.
pub fn constructor_terms(
    sig: &HDSignature,
    partition: &ConstructorPartition,
    s: &str,
    depth: usize,
) -> Vec<(Term, Vec<Var>)> {
    const HOLE: &str = "\u{0}";
    fn shapes(p: &ConstructorPartition, s: &str, depth: usize) -> Vec<Term> {
        if p.loose.contains(s) {
            return vec![Term::cnst(&format!("{HOLE}{s}"))];
        }
        let mut out = Vec::new();
        for (name, d) in &p.constructors.ops {
            if d.result != s || (depth == 0 && !d.args.is_empty()) {
                continue;
            }
            let sub: Vec<Vec<Term>> =
                d.args.iter().map(|a| shapes(p, a, depth.saturating_sub(1))).collect();
            let dims: Vec<usize> = sub.iter().map(Vec::len).collect();
            for t in crate::kripke::tuples(&dims) {
                out.push(Term::app(name, t.iter().zip(&sub).map(|(&i, v)| v[i].clone()).collect()));
            }
        }
        out
    }
    fn number(sig: &HDSignature, p: &ConstructorPartition, t: &Term, vars: &mut Vec<Var>) -> Term {
        if let Some(s) = t.op.name.strip_prefix(HOLE) {
            let i = vars.iter().filter(|v| v.sort == s).count();
            let v = p.loose_var(sig, s, i);
            vars.push(v.clone());
            return Term::cnst(&v.name);
        }
        Term { op: t.op.clone(), args: t.args.iter().map(|a| number(sig, p, a, vars)).collect() }
    }
    let mut out: Vec<(Term, Vec<Var>)> = shapes(partition, s, depth)
        .iter()
        .map(|t| {
            let mut vars = Vec::new();
            let t = number(sig, partition, t, &mut vars);
            (t, vars)
        })
        .collect();
    out.sort_by_key(|(t, _)| (t.depth(), t.size(), t.clone()));
    out
}

/// The fixed type families used to characterize constructor-based structures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedTypes {
    /// `{¬@ₖx | k nominal}`: the world of `x` is unnamed.
    pub nominal: TypeSpec,
    /// Per constrained sort: `{∀Y_t. ¬t = y | t constructor term}`.
    pub constructor: Vec<TypeSpec>,
    /// Per listed sort: `{c ≠ x | c ∈ C_s}`.
    pub constants: Vec<TypeSpec>,
}

pub fn nominal_type(sig: &HDSignature, x: &str) -> TypeSpec {
    let sentences = sig.nominals().map(|k| Sentence::not(Sentence::at(k, Sentence::nom(x)))).collect();
    TypeSpec::new("nominal", vec![Var::new(x, sig.nominal_sort())], sentences)
}

pub fn constructor_type(sig: &HDSignature, partition: &ConstructorPartition, s: &str, y: &str, depth: usize) -> TypeSpec {
    let sentences = constructor_terms(sig, partition, s, depth)
        .into_iter()
        .map(|(t, ys)| Sentence::forall(ys, Sentence::not(Sentence::eq(t, Term::cnst(y)))))
        .collect();
    TypeSpec::new(&format!("constructor:{s}"), vec![Var::new(y, s)], sentences)
}

pub fn constant_type(s: &str, x: &str, consts: &[String]) -> TypeSpec {
    let sentences = consts.iter().map(|c| Sentence::neq(Term::cnst(c), Term::cnst(x))).collect();
    TypeSpec::new(&format!("constants:{s}"), vec![Var::new(x, s)], sentences)
}

/// Materializes the three families up to `depth`, with the given constants per sort.
pub fn fixed_types(
    sig: &HDSignature,
    partition: &ConstructorPartition,
    depth: usize,
    consts: &[(String, Vec<String>)],
) -> FixedTypes {
    let avoid: std::collections::BTreeSet<String> = sig.nominals().cloned().chain(sig.body.ops.keys().cloned()).collect();
    let x = crate::syntax::fresh_name("x", &avoid);
    let y = crate::syntax::fresh_name("y", &avoid);
    FixedTypes {
        nominal: nominal_type(sig, &x),
        constructor: partition.constrained.iter().map(|s| constructor_type(sig, partition, s, &y, depth)).collect(),
        constants: consts.iter().map(|(s, cs)| constant_type(s, &x, cs)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::print_sentence;

    #[test]
    fn nominal_type_on_hpl_models() {
        let sig = fixtures::hpl_signature();
        let g = nominal_type(&sig, "x");
        let env = realizes(&fixtures::hpl_k2(), &g).unwrap().unwrap();
        assert_eq!(env[0].1, crate::kripke::Val::World(1));
        assert!(omits(&fixtures::hpl_k1(), &g).unwrap().is_ok());
        let empty = TypeSpec::new("empty", vec![Var::new("x", "any")], vec![]);
        assert!(realizes(&fixtures::hpl_k1(), &empty).unwrap().is_some());
    }

    #[test]
    fn constructor_type_at_depth_one() {
        let sig = fixtures::list_signature();
        let p = sig.partition(&fixtures::list_constructors()).unwrap();
        let g = constructor_type(&sig, &p, "List", "y", 1);
        let shown: Vec<String> = g.sentences.iter().map(print_sentence).collect();
        assert_eq!(shown.len(), 2);
        assert!(shown[0].contains("empty"));
        assert!(shown[1].contains("cons(Y0_Elt, empty)"), "{shown:?}");
        g.check(&sig).unwrap();
    }

    #[test]
    fn canonical_lists_omit_the_constructor_type() {
        let sig = fixtures::list_signature();
        let p = sig.partition(&fixtures::list_constructors()).unwrap();
        let g = constructor_type(&sig, &p, "List", "y", 2);
        let m = fixtures::list_canonical_model();
        let cert = omits(&m, &g).unwrap().unwrap();
        assert_eq!(cert.refuted.len(), 3);
    }

    #[test]
    fn named_elements_omit_the_constant_type() {
        let sig = fixtures::list_signature().op("c0", &[], "List", true).op("c1", &[], "List", true);
        let g = constant_type("List", "x", &["c0".into(), "c1".into()]);
        g.check(&sig).unwrap();
        let mut m = fixtures::list_canonical_model();
        m.sig = sig.clone();
        m.rigid.ops.insert("c0".into(), vec![0]);
        m.rigid.ops.insert("c1".into(), vec![1]);
        assert!(omits(&m, &g).unwrap().is_err());
        m.set_carrier("List", &["[]", "[e]"]);
        m.fill_op(0, "cons", |_| 1);
        for i in 0..3 {
            m.fill_op(i, "delete", |_| 0);
        }
        assert!(omits(&m, &g).unwrap().is_ok());
        assert!(constant_type("List", "x", &[]).sentences.is_empty());
    }
}
