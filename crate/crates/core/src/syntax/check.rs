use crate::signature::{HDSignature, HSort, Symbol};

use super::{Action, Sentence, SyntaxError, Term, Var};

/// Variables in scope, innermost last. Binders are fresh, so lookups never shadow.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub vars: Vec<Var>,
}

impl Scope {
    pub fn new(vars: impl IntoIterator<Item = Var>) -> Self {
        Scope { vars: vars.into_iter().collect() }
    }

    pub fn get(&self, name: &str) -> Option<&Var> {
        self.vars.iter().rev().find(|v| v.name == name)
    }

    fn is_nominal(&self, sig: &HDSignature, k: &str) -> bool {
        match self.get(k) {
            Some(v) => v.sort == sig.nominal_sort(),
            None => sig.is_nominal(k),
        }
    }

    fn bind(&mut self, sig: &HDSignature, v: &Var) -> Result<(), SyntaxError> {
        if sig.is_declared(&v.name) || self.get(&v.name).is_some() {
            return Err(SyntaxError::NotFresh(v.name.clone()));
        }
        self.vars.push(v.clone());
        Ok(())
    }
}

fn pin(sig: &HDSignature, k: &str, s: &str) -> HSort {
    if sig.is_rigid_sort(s) {
        HSort::Plain(s.to_string())
    } else {
        HSort::At(k.to_string(), s.to_string())
    }
}

fn check_pin(sig: &HDSignature, scope: &Scope, sym: &Symbol, rigid: bool) -> Result<(), SyntaxError> {
    if let Some(k) = &sym.at {
        if rigid {
            return Err(SyntaxError::Sort(format!("rigid symbol `{}` cannot be pinned to `{k}`", sym.name)));
        }
        if !scope.is_nominal(sig, k) {
            return Err(SyntaxError::Unknown(k.clone()));
        }
    }
    Ok(())
}

fn check_args(
    sig: &HDSignature,
    scope: &Scope,
    sym: &Symbol,
    params: &[String],
    args: &[Term],
) -> Result<(), SyntaxError> {
    if params.len() != args.len() {
        return Err(SyntaxError::Sort(format!(
            "`{sym}` expects {} arguments, got {}",
            params.len(),
            args.len()
        )));
    }
    for (p, a) in params.iter().zip(args) {
        let want = match &sym.at {
            Some(k) => pin(sig, k, p),
            None => HSort::Plain(p.clone()),
        };
        let got = term_sort(sig, scope, a)?;
        if got != want {
            return Err(SyntaxError::Sort(format!("argument `{a}` of `{sym}` has sort {got}, expected {want}")));
        }
    }
    Ok(())
}

/// The hybrid sort of a term.
pub fn term_sort(sig: &HDSignature, scope: &Scope, t: &Term) -> Result<HSort, SyntaxError> {
    if t.op.at.is_none() && t.args.is_empty() {
        if let Some(v) = scope.get(&t.op.name) {
            if v.sort == sig.nominal_sort() {
                return Err(SyntaxError::Sort(format!("nominal variable `{}` used as a term", v.name)));
            }
            return Ok(HSort::Plain(v.sort.clone()));
        }
    }
    let Some(decl) = sig.body.ops.get(&t.op.name) else {
        return Err(SyntaxError::Unknown(t.op.name.clone()));
    };
    check_pin(sig, scope, &t.op, sig.is_rigid_op(&t.op.name))?;
    check_args(sig, scope, &t.op, &decl.args, &t.args)?;
    Ok(match &t.op.at {
        Some(k) => pin(sig, k, &decl.result),
        None => HSort::Plain(decl.result.clone()),
    })
}

fn check_action(sig: &HDSignature, a: &Action) -> Result<(), SyntaxError> {
    match a {
        Action::Atom(l) if sig.is_modality(l) => Ok(()),
        Action::Atom(l) => Err(SyntaxError::Unknown(l.clone())),
        Action::Seq(a, b) | Action::Union(a, b) => {
            check_action(sig, a)?;
            check_action(sig, b)
        }
        Action::Star(a) => check_action(sig, a),
    }
}

fn check_in(sig: &HDSignature, scope: &mut Scope, s: &Sentence) -> Result<(), SyntaxError> {
    match s {
        Sentence::Nominal(k) => {
            if scope.is_nominal(sig, k) {
                Ok(())
            } else {
                Err(SyntaxError::Unknown(k.clone()))
            }
        }
        Sentence::Eq(a, b) => {
            let (sa, sb) = (term_sort(sig, scope, a)?, term_sort(sig, scope, b)?);
            if sa != sb {
                return Err(SyntaxError::Sort(format!("equation sides have sorts {sa} and {sb}")));
            }
            Ok(())
        }
        Sentence::Rel(sym, args) => {
            let Some(params) = sig.body.rels.get(&sym.name) else {
                return Err(SyntaxError::Unknown(sym.name.clone()));
            };
            check_pin(sig, scope, sym, sig.is_rigid_rel(&sym.name))?;
            check_args(sig, scope, sym, params, args)
        }
        Sentence::At(k, g) => {
            if !scope.is_nominal(sig, k) {
                return Err(SyntaxError::Unknown(k.clone()));
            }
            check_in(sig, scope, g)
        }
        Sentence::Not(g) => check_in(sig, scope, g),
        Sentence::Or(gs) => gs.iter().try_for_each(|g| check_in(sig, scope, g)),
        Sentence::Store(z, g) => {
            let n = scope.vars.len();
            scope.bind(sig, &Var::new(z, sig.nominal_sort()))?;
            let r = check_in(sig, scope, g);
            scope.vars.truncate(n);
            r
        }
        Sentence::Exists(xs, g) => {
            let n = scope.vars.len();
            for x in xs {
                if !sig.is_extended_sort(&x.sort) {
                    scope.vars.truncate(n);
                    return Err(SyntaxError::Sort(format!(
                        "variable `{}` has sort `{}`, which is neither nominal nor rigid",
                        x.name, x.sort
                    )));
                }
                if let Err(e) = scope.bind(sig, x) {
                    scope.vars.truncate(n);
                    return Err(e);
                }
            }
            let r = check_in(sig, scope, g);
            scope.vars.truncate(n);
            r
        }
        Sentence::Dia(a, g) => {
            check_action(sig, a)?;
            check_in(sig, scope, g)
        }
    }
}

/// Checks that a closed sentence is well formed over `sig`.
pub fn check(sig: &HDSignature, s: &Sentence) -> Result<(), SyntaxError> {
    check_in(sig, &mut Scope::default(), s)
}

/// Checks a sentence open in `vars`.
pub fn check_open(sig: &HDSignature, vars: &[Var], s: &Sentence) -> Result<(), SyntaxError> {
    let mut scope = Scope::default();
    for v in vars {
        scope.bind(sig, v)?;
    }
    check_in(sig, &mut scope, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pinned_flexible_ops_have_pinned_arguments() {
        let sig = fixtures::list_signature();
        let t = Term::at_app("n1", "delete", vec![Term::app("cons", vec![Term::cnst("e"), Term::cnst("empty")])]);
        assert_eq!(term_sort(&sig, &Scope::default(), &t).unwrap(), HSort::Plain("List".into()));
        let bad = Term::at_app("n1", "cons", vec![Term::cnst("e"), Term::cnst("empty")]);
        assert!(term_sort(&sig, &Scope::default(), &bad).is_err());
    }

    #[test]
    fn flexible_sorts_get_pinned() {
        let sig = HDSignature::new().nominal("k").sort("s", false).op("c", &[], "s", false);
        let t = Term::at_app("k", "c", vec![]);
        assert_eq!(term_sort(&sig, &Scope::default(), &t).unwrap(), HSort::At("k".into(), "s".into()));
        let mixed = Sentence::eq(t, Term::cnst("c"));
        assert!(check(&sig, &mixed).is_err());
    }

    #[test]
    fn binders_must_be_fresh() {
        let sig = fixtures::hpl_signature();
        let s = Sentence::store("k", Sentence::prop("rho"));
        assert_eq!(check(&sig, &s), Err(SyntaxError::NotFresh("k".into())));
        let nested = Sentence::store("z", Sentence::store("z", Sentence::nom("z")));
        assert!(check(&sig, &nested).is_err());
        assert!(check(&sig, &Sentence::store("z", Sentence::at("z", Sentence::prop("rho")))).is_ok());
    }

    #[test]
    fn quantified_variables_need_extended_sorts() {
        let sig = HDSignature::new().nominal("k").sort("s", false).rel("p", &["s"], false);
        let s = Sentence::exists([Var::new("x", "s")], Sentence::rel("p", vec![Term::cnst("x")]));
        assert!(matches!(check(&sig, &s), Err(SyntaxError::Sort(_))));
    }
}
