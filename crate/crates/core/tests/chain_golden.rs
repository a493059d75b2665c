//! Golden-file checks for the serialized elimination chain and the
//! polynomial text format.

use rotword::elim::elimination_chain;
use rotword::trigpoly::{derivative_square_poly, IntPoly};
use rotword::word::Word;

#[test]
fn abab_chain_record_matches_golden() {
    let record = elimination_chain(&Word::parse("ABAB").unwrap(), 2.0).unwrap();
    let got = format!("{}\n", serde_json::to_string_pretty(&record).unwrap());
    let want = include_str!("data/abab_chain.json");
    assert_eq!(got, want);
}

#[test]
fn abab_poly_text_is_stable() {
    let p = derivative_square_poly(&Word::parse("ABAB").unwrap()).unwrap();
    let text = p.to_text();
    assert_eq!(
        text,
        "-4 * x_b^2 * x_g^2\n4 * x_b^2\n4 * x_g^2\n"
    );
    assert_eq!(IntPoly::parse_text(&text).unwrap(), p);
}
