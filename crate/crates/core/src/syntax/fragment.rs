use serde::{Deserialize, Serialize};

use crate::signature::HDSignature;

use super::{Sentence, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fragment {
    /// Possibility over atomic modalities only.
    Hfolr,
    /// Sortless bodies; nominals, propositions, retrieve, Boolean connectives, possibility.
    Hdpl,
    /// One modality, one sort, no rigid ops or relations; HFOLR sentences.
    Rfohl,
    /// HFOLR sentences whose atoms use open terms only.
    Hfols,
}

impl Fragment {
    pub const ALL: [Fragment; 4] = [Fragment::Hfolr, Fragment::Hdpl, Fragment::Rfohl, Fragment::Hfols];

    pub fn name(self) -> &'static str {
        match self {
            Fragment::Hfolr => "HFOLR",
            Fragment::Hdpl => "HDPL",
            Fragment::Rfohl => "RFOHL",
            Fragment::Hfols => "HFOLS",
        }
    }

    pub fn parse(s: &str) -> Option<Fragment> {
        Fragment::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }

    fn signature_ok(self, sig: &HDSignature) -> bool {
        match self {
            Fragment::Hfolr | Fragment::Hfols => true,
            Fragment::Hdpl => sig.body.sorts.is_empty(),
            Fragment::Rfohl => {
                sig.nominal_sig.rels.len() == 1
                    && sig.body.sorts.len() == 1
                    && sig.rigid.ops.is_empty()
                    && sig.rigid.rels.is_empty()
            }
        }
    }
}

fn pinned_term(t: &Term) -> bool {
    t.op.at.is_some() || t.args.iter().any(pinned_term)
}

fn grammar_ok(f: Fragment, s: &Sentence) -> bool {
    let rec = |g: &Sentence| grammar_ok(f, g);
    match s {
        Sentence::Nominal(_) => true,
        Sentence::Eq(a, b) => match f {
            Fragment::Hdpl => false,
            Fragment::Hfols => !pinned_term(a) && !pinned_term(b),
            _ => true,
        },
        Sentence::Rel(sym, args) => match f {
            Fragment::Hdpl => sym.at.is_none() && args.is_empty(),
            Fragment::Hfols => sym.at.is_none() && !args.iter().any(pinned_term),
            _ => true,
        },
        Sentence::At(_, g) | Sentence::Not(g) => rec(g),
        Sentence::Or(gs) => gs.iter().all(rec),
        Sentence::Store(_, g) | Sentence::Exists(_, g) => f != Fragment::Hdpl && rec(g),
        Sentence::Dia(a, g) => (f == Fragment::Hdpl || a.is_atomic()) && rec(g),
    }
}

/// Membership of a closed sentence in a fragment, signature restrictions included.
pub fn fragment_member(f: Fragment, s: &Sentence, sig: &HDSignature) -> bool {
    f.signature_ok(sig) && grammar_ok(f, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::Action;

    #[test]
    fn structured_action_is_not_hfolr() {
        let l = Action::atom("lambda");
        let s = Sentence::dia(Action::seq(l.clone(), l), Sentence::nom("k2"));
        assert!(!fragment_member(Fragment::Hfolr, &s, &fixtures::chain3_signature()));
        assert!(fragment_member(Fragment::Hdpl, &s, &fixtures::chain3_signature()));
    }

    #[test]
    fn retrieve_is_hdpl() {
        let s = Sentence::at("k", Sentence::prop("rho"));
        assert!(fragment_member(Fragment::Hdpl, &s, &fixtures::hpl_signature()));
        assert!(!fragment_member(Fragment::Hdpl, &Sentence::store("z", s.clone()), &fixtures::hpl_signature()));
    }

    #[test]
    fn pinned_terms_are_not_hfols() {
        let sig = fixtures::list_signature();
        let s = Sentence::eq(Term::at_app("n0", "delete", vec![Term::cnst("empty")]), Term::cnst("empty"));
        assert!(!fragment_member(Fragment::Hfols, &s, &sig));
        assert!(fragment_member(Fragment::Hfolr, &s, &sig));
        let open = Sentence::eq(Term::app("delete", vec![Term::cnst("empty")]), Term::cnst("empty"));
        assert!(fragment_member(Fragment::Hfols, &open, &sig));
    }

    #[test]
    fn rfohl_signature_restrictions() {
        let ok = HDSignature::new().nominal("k").modality("l").sort("d", true).rel("p", &["d"], false);
        assert!(fragment_member(Fragment::Rfohl, &Sentence::nom("k"), &ok));
        let rigid_op = ok.clone().op("c", &[], "d", true);
        assert!(!fragment_member(Fragment::Rfohl, &Sentence::nom("k"), &rigid_op));
        let two_mod = ok.modality("m");
        assert!(!fragment_member(Fragment::Rfohl, &Sentence::nom("k"), &two_mod));
    }
}
