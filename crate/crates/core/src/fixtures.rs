//! Small signatures, theories and models shared by tests, examples and the CLI.

use crate::kripke::Kripke;
use crate::signature::{FOSignature, HDSignature, ANY};
use crate::syntax::{Action, Sentence, Term, Var};

/// One nominal `k`, one modality `lambda`, one flexible proposition `rho`.
pub fn hpl_signature() -> HDSignature {
    HDSignature::new().nominal("k").modality("lambda").rel("rho", &[], false)
}

/// A single reflexive world where `rho` holds.
pub fn hpl_k1() -> Kripke {
    let mut m = Kripke::new(&hpl_signature(), &["k"]);
    m.set_nominal("k", 0).add_edge("lambda", 0, 0).fill_rel(0, "rho", |_| true);
    m
}

/// `hpl_k1` plus an unnamed, isolated world `w` where `rho` fails.
pub fn hpl_k2() -> Kripke {
    let mut m = Kripke::new(&hpl_signature(), &["k", "w"]);
    m.set_nominal("k", 0).add_edge("lambda", 0, 0);
    m.fill_rel(0, "rho", |_| true).fill_rel(1, "rho", |_| false);
    m
}

/// Three nominals, one modality, empty body.
pub fn chain3_signature() -> HDSignature {
    HDSignature::new().nominal("k0").nominal("k1").nominal("k2").modality("lambda")
}

/// `w0 → w1 → w2`, each world named by the matching `k`.
pub fn chain3_model() -> Kripke {
    let mut m = Kripke::new(&chain3_signature(), &["w0", "w1", "w2"]);
    m.set_nominal("k0", 0).set_nominal("k1", 1).set_nominal("k2", 2);
    m.add_edge("lambda", 0, 1).add_edge("lambda", 1, 2);
    m
}

pub const LIST_WORLDS: usize = 3;

pub fn list_nominal(i: usize) -> String {
    format!("n{i}")
}

/// Lists over one element with a flexible `delete`.
pub fn list_signature() -> HDSignature {
    let mut sig = HDSignature::new();
    for i in 0..LIST_WORLDS {
        sig = sig.nominal(&list_nominal(i));
    }
    sig.modality("lambda")
        .sort("Elt", true)
        .sort("List", true)
        .op("e", &[], "Elt", true)
        .op("empty", &[], "List", true)
        .op("cons", &["Elt", "List"], "List", true)
        .op("delete", &["List"], "List", false)
}

pub fn list_constructors() -> FOSignature {
    FOSignature::new()
        .sort("Elt")
        .sort("List")
        .op("empty", &[], "List")
        .op("cons", &["Elt", "List"], "List")
}

fn frame_axioms() -> Vec<Sentence> {
    let mut t = Vec::new();
    for i in 0..LIST_WORLDS {
        if i + 1 < LIST_WORLDS {
            t.push(Sentence::at(
                &list_nominal(i),
                Sentence::dia(Action::atom("lambda"), Sentence::nom(&list_nominal(i + 1))),
            ));
        }
        for j in i + 1..LIST_WORLDS {
            t.push(Sentence::not(Sentence::at(&list_nominal(i), Sentence::nom(&list_nominal(j)))));
        }
    }
    t
}

fn delete_at(n: &str, t: Term) -> Term {
    Term::at_app(n, "delete", vec![t])
}

fn cons(e: Term, l: Term) -> Term {
    Term::app("cons", vec![e, l])
}

/// The quantified theory: frame axioms, `delete` on the empty list, `delete`
/// at `n0` is the identity, and `delete` at `n(i+1)` drops one element and
/// continues at `ni`.
pub fn list_theory() -> Vec<Sentence> {
    let mut t = frame_axioms();
    let n = Var::new("N", ANY);
    let l = Var::new("L", "List");
    let e = Var::new("E", "Elt");
    t.push(Sentence::forall([n], Sentence::eq(delete_at("N", Term::cnst("empty")), Term::cnst("empty"))));
    t.push(Sentence::forall([l.clone()], Sentence::eq(delete_at("n0", Term::cnst("L")), Term::cnst("L"))));
    for i in 0..LIST_WORLDS - 1 {
        t.push(Sentence::forall(
            [e.clone(), l.clone()],
            Sentence::eq(
                delete_at(&list_nominal(i + 1), cons(Term::cnst("E"), Term::cnst("L"))),
                delete_at(&list_nominal(i), Term::cnst("L")),
            ),
        ));
    }
    t
}

/// Like `list_theory`, but `delete` at `n0` is only defined recursively, so
/// its identity holds on constructor-generated lists and nowhere else.
pub fn list_recursive_theory() -> Vec<Sentence> {
    let mut t = list_theory();
    let e = Var::new("E", "Elt");
    let l = Var::new("L", "List");
    t[frame_axioms().len() + 1] = Sentence::forall(
        [e, l],
        Sentence::eq(
            delete_at("n0", cons(Term::cnst("E"), Term::cnst("L"))),
            cons(Term::cnst("E"), delete_at("n0", Term::cnst("L"))),
        ),
    );
    t
}

/// Ground lists `cons(e, …, empty)` of depth at most `depth`.
pub fn ground_lists(depth: usize) -> Vec<Term> {
    let mut out = vec![Term::cnst("empty")];
    for _ in 0..depth {
        let last = out.last().unwrap().clone();
        out.push(cons(Term::cnst("e"), last));
    }
    out
}

/// Ground instances of `list_theory` whose terms have depth at most `depth`.
pub fn list_ground_theory(depth: usize) -> Vec<Sentence> {
    let mut t = frame_axioms();
    let empty = Term::cnst("empty");
    for i in 0..LIST_WORLDS {
        t.push(Sentence::eq(delete_at(&list_nominal(i), empty.clone()), empty.clone()));
    }
    for l in ground_lists(depth) {
        t.push(Sentence::eq(delete_at("n0", l.clone()), l));
    }
    for l in ground_lists(depth.saturating_sub(1)) {
        for i in 0..LIST_WORLDS - 1 {
            t.push(Sentence::eq(
                delete_at(&list_nominal(i + 1), cons(Term::cnst("e"), l.clone())),
                delete_at(&list_nominal(i), l.clone()),
            ));
        }
    }
    t
}

/// Worlds `n0 < n1 < n2`, lists of length at most 2 (`cons` saturates) and
/// `delete` at `ni` dropping `i` elements.
pub fn list_canonical_model() -> Kripke {
    let names: Vec<String> = (0..LIST_WORLDS).map(list_nominal).collect();
    let worlds: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut m = Kripke::new(&list_signature(), &worlds);
    for (i, n) in names.iter().enumerate() {
        m.set_nominal(n, i);
        for j in i + 1..LIST_WORLDS {
            m.add_edge("lambda", i, j);
        }
    }
    m.set_carrier("Elt", &["e"]).set_carrier("List", &["[]", "[e]", "[e,e]"]);
    m.fill_op(0, "e", |_| 0).fill_op(0, "empty", |_| 0).fill_op(0, "cons", |a| (a[1] + 1).min(2));
    for i in 0..LIST_WORLDS {
        m.fill_op(i, "delete", move |a| a[0].saturating_sub(i));
    }
    m
}

/// One rigid sort `D`, flexible `f` and `c`, rigid `P`, flexible `Q`, two nominals.
pub fn enc_signature() -> HDSignature {
    HDSignature::new()
        .nominal("k0")
        .nominal("k1")
        .modality("lambda")
        .sort("D", true)
        .op("f", &["D"], "D", false)
        .op("c", &[], "D", false)
        .rel("P", &["D"], true)
        .rel("Q", &["D", "D"], false)
}

/// Two `enc_signature` structures over the same worlds and carrier.
pub fn enc_family() -> Vec<Kripke> {
    let sig = enc_signature();
    let mut a = Kripke::new(&sig, &["u0", "u1"]);
    a.set_nominal("k0", 0).set_nominal("k1", 1).add_edge("lambda", 0, 1);
    a.set_carrier("D", &["d0", "d1"]).fill_rel(0, "P", |x| x[0] == 0);
    for v in 0..2 {
        a.fill_op(v, "f", move |x| (x[0] + v) % 2).fill_op(v, "c", move |_| v);
        a.fill_rel(v, "Q", move |x| (x[0] <= x[1]) != (v == 1));
    }
    let mut b = Kripke::new(&sig, &["u0", "u1"]);
    b.set_nominal("k0", 1).set_nominal("k1", 1).add_edge("lambda", 1, 0).add_edge("lambda", 1, 1);
    b.set_carrier("D", &["d0", "d1"]).fill_rel(0, "P", |x| x[0] == 1);
    for v in 0..2 {
        b.fill_op(v, "f", |x| x[0]).fill_op(v, "c", |_| 1).fill_rel(v, "Q", |x| x[0] == x[1]);
    }
    vec![a, b]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{sat_global, sat_theory};

    #[test]
    fn canonical_list_model_satisfies_ground_theory() {
        let m = list_canonical_model();
        assert!(sat_theory(&m, &list_ground_theory(2)));
    }

    #[test]
    fn truncation_breaks_the_quantified_step_axiom() {
        let m = list_canonical_model();
        let t = list_theory();
        assert!(t.iter().take(t.len() - 2).all(|s| sat_global(&m, s)));
        assert!(!sat_global(&m, &t[t.len() - 2]));
    }

    #[test]
    fn signatures_are_valid() {
        for sig in [hpl_signature(), chain3_signature(), list_signature(), enc_signature()] {
            assert!(sig.validate().is_empty());
        }
        assert!(list_signature().is_non_void());
    }
}
