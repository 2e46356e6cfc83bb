//! Terms, actions and sentences, with sort checking and the standard
//! sentence-level transformations.

mod check;
mod fragment;
mod parse;
mod print;
mod rigidify;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::signature::{HSort, Symbol};
pub use check::{check, check_open, term_sort, Scope};
pub use fragment::{fragment_member, Fragment};
pub use parse::{parse_action, parse_sentence, parse_sentence_open, parse_term, Lexer, Parser, Tok};
pub use print::{print_action, print_sentence, print_term};
pub use rigidify::{rigidify, rigidify_term};
pub use subst::{
    fresh_name, names_in, rename_free, substitute, translate, translate_term, SubstTarget, Substitution,
};

/// A variable, identified by name and sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: &str, sort: &str) -> Self {
        Var { name: name.to_string(), sort: sort.to_string() }
    }
}

/// A hybrid term. Constants and variables are applications with no arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub op: Symbol,
    pub args: Vec<Term>,
}

impl Term {
    pub fn cnst(name: &str) -> Self {
        Term { op: Symbol::plain(name), args: vec![] }
    }

    pub fn app(name: &str, args: Vec<Term>) -> Self {
        Term { op: Symbol::plain(name), args }
    }

    pub fn at_app(k: &str, name: &str, args: Vec<Term>) -> Self {
        Term { op: Symbol::at(k, name), args }
    }

    /// Nesting depth; constants have depth 0.
    pub fn depth(&self) -> usize {
        self.args.iter().map(|a| a.depth() + 1).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Atom(String),
    Seq(Box<Action>, Box<Action>),
    Union(Box<Action>, Box<Action>),
    Star(Box<Action>),
}

impl Action {
    pub fn atom(l: &str) -> Self {
        Action::Atom(l.to_string())
    }

    pub fn seq(a: Action, b: Action) -> Self {
        Action::Seq(Box::new(a), Box::new(b))
    }

    pub fn union(a: Action, b: Action) -> Self {
        Action::Union(Box::new(a), Box::new(b))
    }

    pub fn star(a: Action) -> Self {
        Action::Star(Box::new(a))
    }

    /// `a;…;a` with `m ≥ 1` copies, associated to the left.
    pub fn power(&self, m: usize) -> Action {
        assert!(m >= 1, "action powers start at 1");
        (1..m).fold(self.clone(), |acc, _| Action::seq(acc, self.clone()))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Action::Atom(_))
    }

    pub fn atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Action::Atom(l) => {
                out.insert(l.clone());
            }
            Action::Seq(a, b) | Action::Union(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
            Action::Star(a) => a.atoms(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sentence {
    Nominal(String),
    Eq(Term, Term),
    Rel(Symbol, Vec<Term>),
    At(String, Box<Sentence>),
    Not(Box<Sentence>),
    Or(BTreeSet<Sentence>),
    Store(String, Box<Sentence>),
    Exists(BTreeSet<Var>, Box<Sentence>),
    Dia(Action, Box<Sentence>),
}

impl Sentence {
    pub fn nom(k: &str) -> Self {
        Sentence::Nominal(k.to_string())
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Sentence::Eq(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Self {
        Sentence::Rel(Symbol::plain(name), args)
    }

    pub fn prop(name: &str) -> Self {
        Sentence::Rel(Symbol::plain(name), vec![])
    }

    pub fn at(k: &str, s: Sentence) -> Self {
        Sentence::At(k.to_string(), Box::new(s))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(s: Sentence) -> Self {
        Sentence::Not(Box::new(s))
    }

    /// Disjunction; a singleton collapses to its member.
    pub fn or(items: impl IntoIterator<Item = Sentence>) -> Self {
        let set: BTreeSet<Sentence> = items.into_iter().collect();
        if set.len() == 1 {
            set.into_iter().next().unwrap()
        } else {
            Sentence::Or(set)
        }
    }

    pub fn or2(a: Sentence, b: Sentence) -> Self {
        Self::or([a, b])
    }

    pub fn and(items: impl IntoIterator<Item = Sentence>) -> Self {
        let negs: Vec<Sentence> = items.into_iter().map(Sentence::not).collect();
        if negs.len() == 1 {
            return match negs.into_iter().next().unwrap() {
                Sentence::Not(s) => *s,
                _ => unreachable!(),
            };
        }
        Sentence::not(Sentence::or(negs))
    }

    pub fn and2(a: Sentence, b: Sentence) -> Self {
        Self::and([a, b])
    }

    pub fn implies(a: Sentence, b: Sentence) -> Self {
        Self::or2(Sentence::not(a), b)
    }

    pub fn iff(a: Sentence, b: Sentence) -> Self {
        Self::and2(Self::implies(a.clone(), b.clone()), Self::implies(b, a))
    }

    pub fn bot() -> Self {
        Sentence::Or(BTreeSet::new())
    }

    pub fn top() -> Self {
        Sentence::not(Sentence::bot())
    }

    pub fn store(z: &str, s: Sentence) -> Self {
        Sentence::Store(z.to_string(), Box::new(s))
    }

    /// Existential quantification; an empty variable set yields the body.
    pub fn exists(vars: impl IntoIterator<Item = Var>, s: Sentence) -> Self {
        let vars: BTreeSet<Var> = vars.into_iter().collect();
        if vars.is_empty() {
            s
        } else {
            Sentence::Exists(vars, Box::new(s))
        }
    }

    pub fn forall(vars: impl IntoIterator<Item = Var>, s: Sentence) -> Self {
        let vars: BTreeSet<Var> = vars.into_iter().collect();
        if vars.is_empty() {
            s
        } else {
            Sentence::not(Sentence::Exists(vars, Box::new(Sentence::not(s))))
        }
    }

    pub fn dia(a: Action, s: Sentence) -> Self {
        Sentence::Dia(a, Box::new(s))
    }

    pub fn boxm(a: Action, s: Sentence) -> Self {
        Sentence::not(Sentence::dia(a, Sentence::not(s)))
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Sentence::not(Sentence::Eq(a, b))
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Sentence::Or(s) if s.is_empty())
    }

    /// Extended atoms: nominals, `⟨λ⟩k` with atomic λ and nominal `k`, equations and relations.
    pub fn is_extended_atom(&self) -> bool {
        match self {
            Sentence::Nominal(_) | Sentence::Eq(..) | Sentence::Rel(..) => true,
            Sentence::Dia(Action::Atom(_), s) => matches!(**s, Sentence::Nominal(_)),
            _ => false,
        }
    }

    /// Basic sentences: an extended atom under at most one retrieve.
    pub fn is_basic(&self) -> bool {
        match self {
            Sentence::At(_, s) => s.is_extended_atom(),
            s => s.is_extended_atom(),
        }
    }

    /// Structural size, counting every node.
    pub fn size(&self) -> usize {
        match self {
            Sentence::Nominal(_) => 1,
            Sentence::Eq(a, b) => 1 + a.size() + b.size(),
            Sentence::Rel(_, ts) => 1 + ts.iter().map(Term::size).sum::<usize>(),
            Sentence::At(_, s) | Sentence::Not(s) | Sentence::Store(_, s) | Sentence::Exists(_, s) => {
                1 + s.size()
            }
            Sentence::Or(ss) => 1 + ss.iter().map(Sentence::size).sum::<usize>(),
            Sentence::Dia(_, s) => 1 + s.size(),
        }
    }

    /// Nesting depth of sentence operators; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Sentence::Nominal(_) | Sentence::Eq(..) | Sentence::Rel(..) => 0,
            Sentence::At(_, s)
            | Sentence::Not(s)
            | Sentence::Store(_, s)
            | Sentence::Exists(_, s)
            | Sentence::Dia(_, s) => 1 + s.depth(),
            Sentence::Or(ss) => 1 + ss.iter().map(Sentence::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sentence(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_action(self))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unknown symbol `{0}`")]
    Unknown(String),
    #[error("binder `{0}` is not fresh")]
    NotFresh(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

/// A subsentence together with the variables it is open in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subsentence {
    pub vars: BTreeSet<Var>,
    pub sentence: Sentence,
}

/// The subsentence closure, unfolding `⟨a*⟩γ` into `⟨aⁿ⟩γ` for `1 ≤ n ≤ star_bound`.
pub fn subsentences(sig: &crate::signature::HDSignature, gamma: &Sentence, star_bound: usize) -> BTreeSet<Subsentence> {
    let mut out = BTreeSet::new();
    let mut todo = vec![Subsentence { vars: BTreeSet::new(), sentence: gamma.clone() }];
    while let Some(sub) = todo.pop() {
        if out.contains(&sub) {
            continue;
        }
        let vars = sub.vars.clone();
        let mut push = |s: &Sentence, extra: &[Var]| {
            let mut v = vars.clone();
            v.extend(extra.iter().cloned());
            todo.push(Subsentence { vars: v, sentence: s.clone() });
        };
        match &sub.sentence {
            Sentence::Nominal(_) | Sentence::Eq(..) | Sentence::Rel(..) => {}
            Sentence::At(_, s) | Sentence::Not(s) => push(s, &[]),
            Sentence::Or(ss) => ss.iter().for_each(|s| push(s, &[])),
            Sentence::Store(z, s) => push(s, &[Var::new(z, sig.nominal_sort())]),
            Sentence::Exists(xs, s) => push(s, &xs.iter().cloned().collect::<Vec<_>>()),
            Sentence::Dia(a, s) => {
                push(s, &[]);
                match a {
                    Action::Atom(_) => {}
                    Action::Seq(a1, a2) | Action::Union(a1, a2) => {
                        push(&Sentence::Dia((**a1).clone(), s.clone()), &[]);
                        push(&Sentence::Dia((**a2).clone(), s.clone()), &[]);
                    }
                    Action::Star(b) => {
                        for n in 1..=star_bound {
                            push(&Sentence::Dia(b.power(n), s.clone()), &[]);
                        }
                    }
                }
            }
        }
        out.insert(sub);
    }
    out
}

/// The until operator `U(φ,ψ) ≔ ↓x ⟨λ⟩↓y (φ ∧ @x [λ](⟨λ⟩y ⇒ ψ))` with fresh `x`, `y`.
pub fn desugar_until(phi: Sentence, psi: Sentence, lambda: &str, x: &str, y: &str) -> Sentence {
    let l = || Action::atom(lambda);
    Sentence::store(
        x,
        Sentence::dia(
            l(),
            Sentence::store(
                y,
                Sentence::and2(
                    phi,
                    Sentence::at(x, Sentence::boxm(l(), Sentence::implies(Sentence::dia(l(), Sentence::nom(y)), psi))),
                ),
            ),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bot_is_empty_disjunction() {
        assert!(Sentence::bot().is_bot());
        assert_eq!(Sentence::or([Sentence::prop("rho")]), Sentence::prop("rho"));
        assert_eq!(Sentence::exists([], Sentence::prop("rho")), Sentence::prop("rho"));
    }

    #[test]
    fn power_builds_left_nested_sequence() {
        let l = Action::atom("l");
        assert_eq!(l.power(1), l);
        assert_eq!(l.power(3), Action::seq(Action::seq(l.clone(), l.clone()), l.clone()));
    }

    #[test]
    fn term_depth_counts_constants_as_zero() {
        let e = Term::cnst("e");
        let t = Term::app("cons", vec![e.clone(), Term::app("cons", vec![e, Term::cnst("empty")])]);
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn union_subsentences_contain_both_branches() {
        let g = Sentence::dia(Action::union(Action::atom("l1"), Action::atom("l2")), Sentence::nom("k"));
        let subs: BTreeSet<Sentence> = subsentences(&crate::signature::HDSignature::new(), &g, 1).into_iter().map(|s| s.sentence).collect();
        assert!(subs.contains(&Sentence::dia(Action::atom("l1"), Sentence::nom("k"))));
        assert!(subs.contains(&Sentence::dia(Action::atom("l2"), Sentence::nom("k"))));
    }

    #[test]
    fn atom_subsentences_are_itself() {
        let subs = subsentences(&crate::signature::HDSignature::new(), &Sentence::prop("rho"), 3);
        assert_eq!(subs.len(), 1);
    }

    #[test]
    fn star_unfolds_to_bound() {
        let l = Action::atom("l");
        let g = Sentence::dia(Action::star(l.clone()), Sentence::nom("k"));
        let subs: BTreeSet<Sentence> = subsentences(&crate::signature::HDSignature::new(), &g, 2).into_iter().map(|s| s.sentence).collect();
        assert!(subs.contains(&Sentence::dia(l.clone(), Sentence::nom("k"))));
        assert!(subs.contains(&Sentence::dia(l.power(2), Sentence::nom("k"))));
        assert!(!subs.contains(&Sentence::dia(l.power(3), Sentence::nom("k"))));
    }

    #[test]
    fn until_shape() {
        let u = desugar_until(Sentence::prop("rho"), Sentence::prop("rho2"), "lambda", "x", "y");
        assert_eq!(
            print_sentence(&u),
            "(down x . <lambda> (down y . (rho & @x [lambda] (rho2 | ~<lambda> y))))"
        );
    }
}
