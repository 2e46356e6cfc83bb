use crate::signature::{HDSignature, Symbol};

use super::{Action, Sentence, SyntaxError, Term};

/// `At_k t`: pins every unpinned flexible op of `t` to `k`.
pub fn rigidify_term(sig: &HDSignature, k: &str, t: &Term) -> Term {
    let pin = t.op.at.is_none() && sig.body.ops.contains_key(&t.op.name) && !sig.is_rigid_op(&t.op.name);
    Term {
        op: if pin { Symbol::at(k, &t.op.name) } else { t.op.clone() },
        args: t.args.iter().map(|a| rigidify_term(sig, k, a)).collect(),
    }
}

/// `At_k γ` for sentences without store and without possibility other than `⟨λ⟩k'`.
pub fn rigidify(sig: &HDSignature, k: &str, s: &Sentence) -> Result<Sentence, SyntaxError> {
    Ok(match s {
        Sentence::Nominal(_) => Sentence::at(k, s.clone()),
        Sentence::Dia(Action::Atom(_), g) if matches!(**g, Sentence::Nominal(_)) => Sentence::at(k, s.clone()),
        Sentence::Eq(a, b) => Sentence::Eq(rigidify_term(sig, k, a), rigidify_term(sig, k, b)),
        Sentence::Rel(sym, args) => {
            let pin = sym.at.is_none() && !sig.is_rigid_rel(&sym.name);
            Sentence::Rel(
                if pin { Symbol::at(k, &sym.name) } else { sym.clone() },
                args.iter().map(|a| rigidify_term(sig, k, a)).collect(),
            )
        }
        Sentence::Not(g) => Sentence::not(rigidify(sig, k, g)?),
        Sentence::Or(gs) => Sentence::Or(gs.iter().map(|g| rigidify(sig, k, g)).collect::<Result<_, _>>()?),
        Sentence::At(k2, g) => rigidify(sig, k2, g)?,
        Sentence::Exists(xs, g) => Sentence::Exists(xs.clone(), Box::new(rigidify(sig, k, g)?)),
        Sentence::Store(..) => return Err(SyntaxError::Unsupported("store under rigidification".into())),
        Sentence::Dia(..) => {
            return Err(SyntaxError::Unsupported("possibility under rigidification".into()));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::Var;

    #[test]
    fn flexible_relation_is_pinned() {
        let sig = HDSignature::new().nominal("k").sort("s", true).op("c", &[], "s", false).rel("p", &["s"], false);
        let s = Sentence::rel("p", vec![Term::cnst("c")]);
        let want = Sentence::Rel(Symbol::at("k", "p"), vec![Term::at_app("k", "c", vec![])]);
        assert_eq!(rigidify(&sig, "k", &s).unwrap(), want);
    }

    #[test]
    fn rigid_equation_is_unchanged() {
        let sig = fixtures::list_signature();
        let s = Sentence::eq(Term::app("cons", vec![Term::cnst("e"), Term::cnst("empty")]), Term::cnst("empty"));
        assert_eq!(rigidify(&sig, "n0", &s).unwrap(), s);
    }

    #[test]
    fn delete_is_pinned_at_n1() {
        let sig = fixtures::list_signature().extend(&[Var::new("L", "List")]).unwrap();
        let s = Sentence::eq(Term::app("delete", vec![Term::cnst("L")]), Term::cnst("L"));
        let want = Sentence::eq(Term::at_app("n1", "delete", vec![Term::cnst("L")]), Term::cnst("L"));
        assert_eq!(rigidify(&sig, "n1", &s).unwrap(), want);
    }

    #[test]
    fn retrieve_switches_world_and_store_is_rejected() {
        let sig = fixtures::hpl_signature().nominal("k2");
        let s = Sentence::at("k2", Sentence::prop("rho"));
        assert_eq!(rigidify(&sig, "k", &s).unwrap(), Sentence::Rel(Symbol::at("k2", "rho"), vec![]));
        assert!(rigidify(&sig, "k", &Sentence::store("z", Sentence::nom("z"))).is_err());
        let dia = Sentence::dia(Action::atom("lambda"), Sentence::prop("rho"));
        assert!(rigidify(&sig, "k", &dia).is_err());
    }
}
