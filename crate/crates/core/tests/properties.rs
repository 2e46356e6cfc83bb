mod common;

use common::*;
use hdfol::kripke::{eval_action, reduct, sat_global, sat_local};
use hdfol::syntax::{parse_sentence, print_sentence, substitute, translate, Action, Sentence, Substitution};
use hdfol::text::{self, Document};
use hdfol::SignatureMorphism;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printed_sentences_parse_back(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let s = SentenceGen::new(&sig, Shape::FULL).upto(&mut r, 5);
        let back = parse_sentence(&sig, &print_sentence(&s)).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn retrieve_moves_to_the_named_world(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig, 4, 3);
        let s = SentenceGen::new(&sig, Shape::FULL).upto(&mut r, 4);
        for k in ["k0", "k1", "k2"] {
            let at = Sentence::at(k, s.clone());
            prop_assert_eq!(sat_global(&m, &at), sat_local(&m, m.nominals[k], &s));
        }
    }

    #[test]
    fn box_is_dual_to_diamond(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig, 4, 3);
        let mut g = SentenceGen::new(&sig, Shape::FULL);
        let s = g.upto(&mut r, 3);
        let a = g.action(&mut r, 2);
        let rel = eval_action(&m, &a);
        for w in 0..m.n_worlds() {
            let boxed = sat_local(&m, w, &Sentence::boxm(a.clone(), s.clone()));
            let direct = rel.iter().filter(|(u, _)| *u == w).all(|&(_, v)| sat_local(&m, v, &s));
            prop_assert_eq!(boxed, direct);
        }
    }

    #[test]
    fn powers_lie_inside_the_star(seed in any::<u64>(), n in 1usize..4) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let m = random_model(&mut r, &sig, 4, 1);
        let a = SentenceGen::new(&sig, Shape::FULL).action(&mut r, 2);
        let star = eval_action(&m, &Action::star(a.clone()));
        prop_assert!(eval_action(&m, &a.power(n)).is_subset(&star));
    }

    #[test]
    fn empty_substitution_is_the_identity(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let s = SentenceGen::new(&sig, Shape::FULL).upto(&mut r, 5);
        prop_assert_eq!(substitute(&Substitution::new(), &s), s);
    }

    #[test]
    fn identity_morphisms_change_nothing(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let id = SignatureMorphism::identity(&sig);
        let s = SentenceGen::new(&sig, Shape::FULL).upto(&mut r, 5);
        let m = random_model(&mut r, &sig, 3, 2);
        prop_assert_eq!(translate(&id, &s), s);
        prop_assert_eq!(reduct(&m, &id).unwrap(), m);
    }

    #[test]
    fn composition_agrees_with_steps(seed in any::<u64>()) {
        let target = rich_signature();
        let mut r = rng(seed);
        let second = random_morphism(&mut r, &target);
        let first = random_morphism(&mut r, &second.source);
        let both = first.compose(&second).unwrap();
        both.check().unwrap();
        let m = random_model(&mut r, &target, 3, 2);
        let stepwise = reduct(&reduct(&m, &second).unwrap(), &first).unwrap();
        prop_assert_eq!(reduct(&m, &both).unwrap(), stepwise);
        let s = SentenceGen::new(&first.source, Shape::FULL).upto(&mut r, 4);
        let one = translate(&both, &s);
        let two = translate(&second, &translate(&first, &s));
        for w in 0..m.n_worlds() {
            prop_assert_eq!(sat_local(&m, w, &one), sat_local(&m, w, &two));
        }
    }

    #[test]
    fn documents_survive_a_text_round_trip(seed in any::<u64>()) {
        let sig = rich_signature();
        let mut r = rng(seed);
        let mut doc = Document::with_sig(&sig);
        let mut g = SentenceGen::new(&sig, Shape::FULL);
        doc.axioms = (0..r.gen_range(0..4)).map(|_| g.upto(&mut r, 4)).collect();
        doc.model = Some(random_model(&mut r, &sig, 3, 3));
        let src = text::save(&doc).unwrap();
        let back = text::load(&src).unwrap();
        prop_assert_eq!(&back.sig, &doc.sig);
        prop_assert_eq!(&back.axioms, &doc.axioms);
        prop_assert_eq!(&back.model, &doc.model);
        prop_assert_eq!(text::save(&back).unwrap(), src);
    }
}
