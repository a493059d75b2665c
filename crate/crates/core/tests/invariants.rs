//! Cross-module property tests: group axioms on words, ring axioms and
//! serialization for the integer polynomials, and consistency between the
//! symbolic and numeric evaluation paths.

use proptest::prelude::*;
use rotword::quat::{evaluate_word, so3_distance, Angles, UnitQuaternion};
use rotword::trigpoly::{symbolic_word, torus_values, IntPoly, Monomial, Var};
use rotword::word::{Letter, Word};

fn arb_word(max_blocks: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((-4i64..=4, -4i64..=4), 0..max_blocks)
        .prop_map(Word::from_blocks)
}

fn arb_poly() -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(
        (
            prop::array::uniform6(0u16..3),
            -20i64..=20,
        ),
        0..6,
    )
    .prop_map(|terms| {
        let mut p = IntPoly::zero();
        for (exps, c) in terms {
            p = p.add(&IntPoly::monomial(Monomial(exps), c.into()));
        }
        p
    })
}

proptest! {
    #[test]
    fn word_reduction_is_idempotent(w in arb_word(8)) {
        prop_assert!(w.is_canonical());
        prop_assert_eq!(Word::from_blocks(w.blocks().iter().copied()), w);
    }

    #[test]
    fn word_group_axioms(a in arb_word(6), b in arb_word(6), c in arb_word(6)) {
        prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        prop_assert_eq!(a.concat(&a.inverse()), Word::empty());
        prop_assert_eq!(a.inverse().inverse(), a.clone());
        prop_assert!(a.concat(&b).len() <= a.len() + b.len());
    }

    #[test]
    fn word_text_round_trip(w in arb_word(8)) {
        prop_assert_eq!(Word::parse(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn poly_ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
    }

    #[test]
    fn poly_text_round_trip(a in arb_poly()) {
        prop_assert_eq!(IntPoly::parse_text(&a.to_text()).unwrap(), a.clone());
    }

    #[test]
    fn circle_reduce_preserves_values(a in arb_poly(), t1 in 0.0..std::f64::consts::TAU, t2 in 0.0..std::f64::consts::TAU, t3 in 0.0..std::f64::consts::TAU) {
        let reduced = a.circle_reduce();
        for v in [Var::Ya, Var::Yb, Var::Yg] {
            prop_assert!(reduced.deg_var(v) <= 1);
        }
        let vals = [t1.cos(), t1.sin(), t2.cos(), t2.sin(), t3.cos(), t3.sin()];
        let scale = 1.0 + a.eval_f64(&vals).abs();
        prop_assert!((a.eval_f64(&vals) - reduced.eval_f64(&vals)).abs() < 1e-9 * scale);
    }

    #[test]
    fn symbolic_matches_numeric(
        w in arb_word(4),
        t1 in 0.0..std::f64::consts::TAU,
        t2 in 0.0..std::f64::consts::TAU,
        t3 in 0.0..std::f64::consts::TAU,
    ) {
        let p = Angles::new(t1, t2, t3);
        let sym = symbolic_word(&w).eval_f64(&torus_values(&p));
        let num = evaluate_word(&w, &p);
        let direct = UnitQuaternion { w: sym[0], x: sym[1], y: sym[2], z: sym[3] };
        prop_assert!(so3_distance(direct.renormalized(), num) < 1e-9);
    }

    #[test]
    fn evaluation_respects_inverse(w in arb_word(5), t in 0.0..std::f64::consts::TAU) {
        let p = Angles::new(t, 1.3 * t, 0.7 * t + 0.1);
        let q = evaluate_word(&w, &p);
        let qi = evaluate_word(&w.inverse(), &p);
        prop_assert!(so3_distance(q * qi, UnitQuaternion::identity()) < 1e-10);
    }
}

#[test]
fn letter_alphabet_order_is_the_enumeration_order() {
    let mut sorted = Letter::ALL;
    sorted.sort();
    assert_eq!(sorted, Letter::ALL);
}
