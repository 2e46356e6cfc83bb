use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::signature::{SignatureMorphism, Symbol};

use super::{Action, Sentence, Term, Var};

/// Image of a substituted constant: a nominal for nominal-sorted constants,
/// a rigid term for rigid-sorted ones.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SubstTarget {
    Nominal(String),
    Term(Term),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub map: BTreeMap<String, SubstTarget>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nominal(mut self, c: &str, k: &str) -> Self {
        self.map.insert(c.to_string(), SubstTarget::Nominal(k.to_string()));
        self
    }

    pub fn term(mut self, c: &str, t: Term) -> Self {
        self.map.insert(c.to_string(), SubstTarget::Term(t));
        self
    }

    fn image_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in self.map.values() {
            match t {
                SubstTarget::Nominal(k) => {
                    out.insert(k.clone());
                }
                SubstTarget::Term(t) => term_names(t, &mut out),
            }
        }
        out
    }

    fn nominal_of(&self, k: &str) -> String {
        match self.map.get(k) {
            Some(SubstTarget::Nominal(k2)) => k2.clone(),
            _ => k.to_string(),
        }
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if t.op.at.is_none() && t.args.is_empty() {
            if let Some(SubstTarget::Term(img)) = self.map.get(&t.op.name) {
                return img.clone();
            }
        }
        Term {
            op: Symbol { at: t.op.at.as_ref().map(|k| self.nominal_of(k)), name: t.op.name.clone() },
            args: t.args.iter().map(|a| self.apply_term(a)).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Substitution) -> Substitution {
        let mut map: BTreeMap<String, SubstTarget> = self
            .map
            .iter()
            .map(|(c, t)| {
                let img = match t {
                    SubstTarget::Nominal(k) => match next.map.get(k) {
                        Some(SubstTarget::Nominal(k2)) => SubstTarget::Nominal(k2.clone()),
                        _ => SubstTarget::Nominal(k.clone()),
                    },
                    SubstTarget::Term(t) => SubstTarget::Term(next.apply_term(t)),
                };
                (c.clone(), img)
            })
            .collect();
        for (c, t) in &next.map {
            map.entry(c.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }
}

fn term_names(t: &Term, out: &mut BTreeSet<String>) {
    out.insert(t.op.name.clone());
    if let Some(k) = &t.op.at {
        out.insert(k.clone());
    }
    t.args.iter().for_each(|a| term_names(a, out));
}

/// Every name occurring in `s`: symbols, nominals, binders and modalities.
pub fn names_in(s: &Sentence) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_names(s, &mut out);
    out
}

fn collect_names(s: &Sentence, out: &mut BTreeSet<String>) {
    match s {
        Sentence::Nominal(k) => {
            out.insert(k.clone());
        }
        Sentence::Eq(a, b) => {
            term_names(a, out);
            term_names(b, out);
        }
        Sentence::Rel(sym, args) => term_names(&Term { op: sym.clone(), args: args.clone() }, out),
        Sentence::At(k, g) => {
            out.insert(k.clone());
            collect_names(g, out);
        }
        Sentence::Not(g) => collect_names(g, out),
        Sentence::Or(gs) => gs.iter().for_each(|g| collect_names(g, out)),
        Sentence::Store(z, g) => {
            out.insert(z.clone());
            collect_names(g, out);
        }
        Sentence::Exists(xs, g) => {
            out.extend(xs.iter().map(|x| x.name.clone()));
            collect_names(g, out);
        }
        Sentence::Dia(a, g) => {
            a.atoms(out);
            collect_names(g, out);
        }
    }
}

/// `base`, or `base1`, `base2`, … avoiding `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !avoid.contains(n)).unwrap()
}

/// Applies `theta` to every free occurrence of its domain, renaming binders that would capture.
pub fn substitute(theta: &Substitution, s: &Sentence) -> Sentence {
    let mut avoid = theta.image_names();
    avoid.extend(names_in(s));
    avoid.extend(theta.map.keys().cloned());
    subst_in(theta, s, &mut avoid)
}

fn subst_in(theta: &Substitution, s: &Sentence, avoid: &mut BTreeSet<String>) -> Sentence {
    match s {
        Sentence::Nominal(k) => Sentence::Nominal(theta.nominal_of(k)),
        Sentence::Eq(a, b) => Sentence::Eq(theta.apply_term(a), theta.apply_term(b)),
        Sentence::Rel(sym, args) => {
            let t = theta.apply_term(&Term { op: sym.clone(), args: args.clone() });
            Sentence::Rel(t.op, t.args)
        }
        Sentence::At(k, g) => Sentence::At(theta.nominal_of(k), Box::new(subst_in(theta, g, avoid))),
        Sentence::Not(g) => Sentence::not(subst_in(theta, g, avoid)),
        Sentence::Or(gs) => Sentence::Or(gs.iter().map(|g| subst_in(theta, g, avoid)).collect()),
        Sentence::Store(z, g) => {
            let (names, body) = enter_binder(theta, &[z.clone()], g, avoid);
            Sentence::Store(names[0].clone(), Box::new(body))
        }
        Sentence::Exists(xs, g) => {
            let old: Vec<String> = xs.iter().map(|x| x.name.clone()).collect();
            let (names, body) = enter_binder(theta, &old, g, avoid);
            let vars = xs.iter().zip(names).map(|(x, n)| Var { name: n, sort: x.sort.clone() }).collect();
            Sentence::Exists(vars, Box::new(body))
        }
        Sentence::Dia(a, g) => Sentence::Dia(a.clone(), Box::new(subst_in(theta, g, avoid))),
    }
}

fn enter_binder(
    theta: &Substitution,
    binders: &[String],
    body: &Sentence,
    avoid: &mut BTreeSet<String>,
) -> (Vec<String>, Sentence) {
    let mut inner = theta.clone();
    for b in binders {
        inner.map.remove(b);
    }
    let images = inner.image_names();
    let mut names = Vec::new();
    for b in binders {
        if images.contains(b) {
            let fresh = fresh_name(b, avoid);
            avoid.insert(fresh.clone());
            inner.map.insert(b.clone(), rename_target(b, &fresh, body));
            names.push(fresh);
        } else {
            names.push(b.clone());
        }
    }
    (names, subst_in(&inner, body, avoid))
}

fn rename_target(old: &str, fresh: &str, body: &Sentence) -> SubstTarget {
    if binds_nominal(body, old) {
        SubstTarget::Nominal(fresh.to_string())
    } else {
        SubstTarget::Term(Term::cnst(fresh))
    }
}

/// Whether `name` occurs in nominal position somewhere in `s`.
fn binds_nominal(s: &Sentence, name: &str) -> bool {
    fn in_term(t: &Term, name: &str) -> bool {
        t.op.at.as_deref() == Some(name) || t.args.iter().any(|a| in_term(a, name))
    }
    match s {
        Sentence::Nominal(k) => k == name,
        Sentence::Eq(a, b) => in_term(a, name) || in_term(b, name),
        Sentence::Rel(sym, args) => sym.at.as_deref() == Some(name) || args.iter().any(|a| in_term(a, name)),
        Sentence::At(k, g) => k == name || binds_nominal(g, name),
        Sentence::Not(g) | Sentence::Store(_, g) | Sentence::Exists(_, g) | Sentence::Dia(_, g) => {
            binds_nominal(g, name)
        }
        Sentence::Or(gs) => gs.iter().any(|g| binds_nominal(g, name)),
    }
}

/// Replaces the free name `old` by `new`, as a nominal or a constant.
pub fn rename_free(s: &Sentence, old: &str, new: &str, nominal: bool) -> Sentence {
    let theta = if nominal {
        Substitution::new().nominal(old, new)
    } else {
        Substitution::new().term(old, Term::cnst(new))
    };
    substitute(&theta, s)
}

pub fn translate_term(chi: &SignatureMorphism, bound: &BTreeSet<String>, t: &Term) -> Term {
    let is_var = t.op.at.is_none() && t.args.is_empty() && bound.contains(&t.op.name);
    Term {
        op: Symbol {
            at: t.op.at.as_ref().map(|k| if bound.contains(k) { k.clone() } else { chi.nominal(k) }),
            name: if is_var { t.op.name.clone() } else { chi.op(&t.op.name) },
        },
        args: t.args.iter().map(|a| translate_term(chi, bound, a)).collect(),
    }
}

fn translate_action(chi: &SignatureMorphism, a: &Action) -> Action {
    match a {
        Action::Atom(l) => Action::Atom(chi.modality(l)),
        Action::Seq(x, y) => Action::seq(translate_action(chi, x), translate_action(chi, y)),
        Action::Union(x, y) => Action::union(translate_action(chi, x), translate_action(chi, y)),
        Action::Star(x) => Action::star(translate_action(chi, x)),
    }
}

/// Symbolwise translation along a signature morphism. Binders that collide
/// with target symbols are renamed.
pub fn translate(chi: &SignatureMorphism, s: &Sentence) -> Sentence {
    let target = &chi.target;
    let mut avoid = names_in(s);
    avoid.extend(target.nominals().cloned());
    avoid.extend(target.body.ops.keys().cloned());
    avoid.extend(target.body.rels.keys().cloned());
    avoid.extend(target.body.sorts.iter().cloned());
    avoid.extend(target.modalities().cloned());
    let clean = freshen_binders(s, &|n| target.is_declared(n), &mut avoid);
    translate_in(chi, &BTreeSet::new(), &clean)
}

/// Renames every binder for which `clash` holds.
fn freshen_binders(s: &Sentence, clash: &dyn Fn(&str) -> bool, avoid: &mut BTreeSet<String>) -> Sentence {
    match s {
        Sentence::Nominal(_) | Sentence::Eq(..) | Sentence::Rel(..) => s.clone(),
        Sentence::At(k, g) => Sentence::At(k.clone(), Box::new(freshen_binders(g, clash, avoid))),
        Sentence::Not(g) => Sentence::not(freshen_binders(g, clash, avoid)),
        Sentence::Or(gs) => Sentence::Or(gs.iter().map(|g| freshen_binders(g, clash, avoid)).collect()),
        Sentence::Dia(a, g) => Sentence::Dia(a.clone(), Box::new(freshen_binders(g, clash, avoid))),
        Sentence::Store(z, g) => {
            let body = freshen_binders(g, clash, avoid);
            if clash(z) {
                let f = fresh_name(z, avoid);
                avoid.insert(f.clone());
                Sentence::Store(f.clone(), Box::new(rename_free(&body, z, &f, true)))
            } else {
                Sentence::Store(z.clone(), Box::new(body))
            }
        }
        Sentence::Exists(xs, g) => {
            let mut body = freshen_binders(g, clash, avoid);
            let mut vars = BTreeSet::new();
            for x in xs {
                if clash(&x.name) {
                    let f = fresh_name(&x.name, avoid);
                    avoid.insert(f.clone());
                    body = rename_free(&body, &x.name, &f, binds_nominal(&body, &x.name));
                    vars.insert(Var { name: f, sort: x.sort.clone() });
                } else {
                    vars.insert(x.clone());
                }
            }
            Sentence::Exists(vars, Box::new(body))
        }
    }
}

fn translate_in(chi: &SignatureMorphism, bound: &BTreeSet<String>, s: &Sentence) -> Sentence {
    let nom = |k: &String| if bound.contains(k) { k.clone() } else { chi.nominal(k) };
    match s {
        Sentence::Nominal(k) => Sentence::Nominal(nom(k)),
        Sentence::Eq(a, b) => Sentence::Eq(translate_term(chi, bound, a), translate_term(chi, bound, b)),
        Sentence::Rel(sym, args) => Sentence::Rel(
            Symbol { at: sym.at.as_ref().map(nom), name: chi.rel(&sym.name) },
            args.iter().map(|a| translate_term(chi, bound, a)).collect(),
        ),
        Sentence::At(k, g) => Sentence::At(nom(k), Box::new(translate_in(chi, bound, g))),
        Sentence::Not(g) => Sentence::not(translate_in(chi, bound, g)),
        Sentence::Or(gs) => Sentence::Or(gs.iter().map(|g| translate_in(chi, bound, g)).collect()),
        Sentence::Store(z, g) => {
            let mut b = bound.clone();
            b.insert(z.clone());
            Sentence::Store(z.clone(), Box::new(translate_in(chi, &b, g)))
        }
        Sentence::Exists(xs, g) => {
            let mut b = bound.clone();
            b.extend(xs.iter().map(|x| x.name.clone()));
            let vars = xs.iter().map(|x| Var { name: x.name.clone(), sort: chi.sort(&x.sort) }).collect();
            Sentence::Exists(vars, Box::new(translate_in(chi, &b, g)))
        }
        Sentence::Dia(a, g) => Sentence::Dia(translate_action(chi, a), Box::new(translate_in(chi, bound, g))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::signature::{HDSignature, SignatureMorphism};
    use crate::syntax::{check, parse_sentence};

    #[test]
    fn nominal_substitution() {
        let theta = Substitution::new().nominal("x", "k");
        let s = Sentence::at("x", Sentence::prop("rho"));
        assert_eq!(substitute(&theta, &s), Sentence::at("k", Sentence::prop("rho")));
    }

    #[test]
    fn list_substitution() {
        let l = Term::app("cons", vec![Term::cnst("e"), Term::cnst("empty")]);
        let theta = Substitution::new().term("L", l.clone());
        let s = Sentence::eq(Term::at_app("n0", "delete", vec![Term::cnst("L")]), Term::cnst("L"));
        let want = Sentence::eq(Term::at_app("n0", "delete", vec![l.clone()]), l);
        assert_eq!(substitute(&theta, &s), want);
    }

    #[test]
    fn capture_is_avoided() {
        let theta = Substitution::new().nominal("c", "z");
        let s = Sentence::store("z", Sentence::at("c", Sentence::nom("z")));
        let out = substitute(&theta, &s);
        assert_eq!(out, Sentence::store("z1", Sentence::at("z", Sentence::nom("z1"))));
    }

    #[test]
    fn identity_translation() {
        let sig = fixtures::list_signature();
        let s = parse_sentence(&sig, "(forall L:List . (at n0 delete)(L) = L)").unwrap();
        assert_eq!(translate(&SignatureMorphism::identity(&sig), &s), s);
        assert_eq!(translate(&SignatureMorphism::identity(&sig), &Sentence::bot()), Sentence::bot());
    }

    #[test]
    fn sort_renaming_retargets_binders() {
        let src = HDSignature::new().nominal("k").sort("s", true);
        let tgt = HDSignature::new().nominal("k").sort("t", true);
        let mut chi = SignatureMorphism::identity(&src);
        chi.target = tgt.clone();
        chi.sort_map.insert("s".into(), "t".into());
        chi.check().unwrap();
        let x = || Term::cnst("x");
        let s = Sentence::exists([Var::new("x", "s")], Sentence::eq(x(), x()));
        let out = translate(&chi, &s);
        assert_eq!(out, Sentence::exists([Var::new("x", "t")], Sentence::eq(x(), x())));
        check(&tgt, &out).unwrap();
    }
}
