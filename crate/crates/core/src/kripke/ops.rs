use crate::signature::{HDSignature, SignatureMorphism};
use crate::syntax::{SubstTarget, Substitution, Var};

use super::eval::{eval_term, Env, Val};
use super::model::{tuples, Kripke, ModelError};

/// The reduct of a model of `χ.target` along `χ`.
pub fn reduct(m: &Kripke, chi: &SignatureMorphism) -> Result<Kripke, ModelError> {
    let src = &chi.source;
    let worlds: Vec<&str> = m.worlds.iter().map(String::as_str).collect();
    let mut out = Kripke::new(src, &worlds);
    for k in src.nominals() {
        let k2 = chi.nominal(k);
        let w = *m.nominals.get(&k2).ok_or(ModelError::MissingNominal(k2))?;
        out.set_nominal(k, w);
    }
    for l in src.modalities() {
        let edges = m.modalities.get(&chi.modality(l)).cloned().unwrap_or_default();
        out.modalities.insert(l.clone(), edges);
    }
    for s in &src.body.sorts {
        let s2 = chi.sort(s);
        if src.is_rigid_sort(s) {
            out.rigid.carriers.insert(s.clone(), m.carrier(0, &s2).to_vec());
        } else {
            for w in 0..m.n_worlds() {
                out.local[w].carriers.insert(s.clone(), m.carrier(w, &s2).to_vec());
            }
        }
    }
    for o in src.body.ops.keys() {
        let o2 = chi.op(o);
        if src.is_rigid_op(o) {
            out.rigid.ops.insert(o.clone(), m.op_table(0, &o2).to_vec());
        } else {
            for w in 0..m.n_worlds() {
                out.local[w].ops.insert(o.clone(), m.op_table(w, &o2).to_vec());
            }
        }
    }
    for r in src.body.rels.keys() {
        let r2 = chi.rel(r);
        if src.is_rigid_rel(r) {
            out.rigid.rels.insert(r.clone(), m.rel_table(0, &r2).to_vec());
        } else {
            for w in 0..m.n_worlds() {
                out.local[w].rels.insert(r.clone(), m.rel_table(w, &r2).to_vec());
            }
        }
    }
    Ok(out)
}

fn install(m: &mut Kripke, x: &Var, v: Val) {
    match v {
        Val::World(w) => {
            m.set_nominal(&x.name, w);
        }
        Val::Elem(e) => {
            m.rigid.ops.insert(x.name.clone(), vec![e]);
        }
    }
}

/// The model over `base[vars]` interpreting each `c` in `vars` as `θ(c)`,
/// where `m` is a model of `base[C₂]` and `θ` maps into `base[C₂]`.
pub fn reduct_subst(m: &Kripke, base: &HDSignature, vars: &[Var], theta: &Substitution) -> Result<Kripke, ModelError> {
    let mut out = reduct(m, &SignatureMorphism::inclusion(base, &m.sig).map_err(|e| ModelError::Other(e.to_string()))?)?;
    out.sig = base.extend(vars).map_err(|e| ModelError::Other(e.to_string()))?;
    for x in vars {
        let v = match theta.map.get(&x.name) {
            Some(SubstTarget::Nominal(k)) => Val::World(*m.nominals.get(k).ok_or(ModelError::MissingNominal(k.clone()))?),
            Some(SubstTarget::Term(t)) => Val::Elem(eval_term(m, 0, t)),
            None => return Err(ModelError::Other(format!("substitution is not total: `{}` unmapped", x.name))),
        };
        install(&mut out, x, v);
    }
    Ok(out)
}

/// All assignments of `vars`: worlds for nominal variables, rigid-carrier elements otherwise.
pub fn assignments<'a>(m: &'a Kripke, vars: &[Var]) -> impl Iterator<Item = Env> + 'a {
    let nominal = m.sig.nominal_sort().to_string();
    let dims: Vec<usize> = vars
        .iter()
        .map(|x| if x.sort == nominal { m.n_worlds() } else { m.size(0, &x.sort) })
        .collect();
    let vars = vars.to_vec();
    tuples(&dims).map(move |t| {
        vars.iter()
            .zip(t)
            .map(|(x, e)| (x.name.clone(), if x.sort == nominal { Val::World(e) } else { Val::Elem(e) }))
            .collect()
    })
}

/// The expansion of `m` to `Δ[vars]` given by an assignment.
pub fn expand(m: &Kripke, sig_x: &HDSignature, vars: &[Var], env: &Env) -> Kripke {
    let mut out = m.clone();
    out.sig = sig_x.clone();
    for (x, (_, v)) in vars.iter().zip(env) {
        install(&mut out, x, *v);
    }
    out
}

/// Every expansion of `m` to `Δ[vars]`, paired with its assignment.
pub fn expansions<'a>(
    m: &'a Kripke,
    vars: &'a [Var],
) -> Result<impl Iterator<Item = (Env, Kripke)> + 'a, ModelError> {
    for x in vars {
        if x.sort != m.sig.nominal_sort() && !m.sig.is_rigid_sort(&x.sort) {
            return Err(ModelError::Other(format!("variable `{}` has flexible sort `{}`", x.name, x.sort)));
        }
    }
    let sig_x = m.sig.extend(vars).map_err(|e| ModelError::Other(e.to_string()))?;
    Ok(assignments(m, vars).map(move |env| {
        let e = expand(m, &sig_x, vars, &env);
        (env, e)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kripke::{eval_term, sat_local};
    use crate::syntax::{Sentence, Term};

    #[test]
    fn identity_reduct_is_identity() {
        let m = fixtures::list_canonical_model();
        let id = SignatureMorphism::identity(&m.sig);
        assert_eq!(reduct(&m, &id).unwrap(), m);
    }

    #[test]
    fn forgetting_an_expansion() {
        let m = fixtures::hpl_k2();
        let z = [Var::new("z", "any")];
        let (_, e) = expansions(&m, &z).unwrap().nth(1).unwrap();
        assert_eq!(e.nominals["z"], 1);
        let back = reduct(&e, &SignatureMorphism::inclusion(&m.sig, &e.sig).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn expansion_counts() {
        let m = fixtures::hpl_k2();
        assert_eq!(expansions(&m, &[Var::new("x", "any")]).unwrap().count(), 2);
        assert_eq!(expansions(&m, &[]).unwrap().count(), 1);
        let sig = fixtures::hpl_signature().sort("s", true);
        let mut m3 = Kripke::new(&sig, &["k", "w"]);
        m3.set_nominal("k", 0).set_carrier("s", &["a", "b", "c"]);
        m3.fill_rel(0, "rho", |_| true).fill_rel(1, "rho", |_| true);
        let xs = [Var::new("x", "any"), Var::new("y", "s")];
        assert_eq!(expansions(&m3, &xs).unwrap().count(), 6);
    }

    #[test]
    fn substitution_reduct_interprets_constants() {
        let m = fixtures::list_canonical_model();
        let base = fixtures::list_signature();
        let t = Term::app("cons", vec![Term::cnst("e"), Term::cnst("empty")]);
        let vars = [Var::new("L", "List")];
        let r = reduct_subst(&m, &base, &vars, &Substitution::new().term("L", t.clone())).unwrap();
        r.validate().unwrap();
        assert_eq!(eval_term(&r, 1, &Term::cnst("L")), eval_term(&m, 1, &t));
        let s = Sentence::eq(Term::at_app("n0", "delete", vec![Term::cnst("L")]), Term::cnst("L"));
        assert!(sat_local(&r, 2, &s));
    }
}
